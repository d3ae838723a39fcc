// regbank: command-line front end for the regressor-bank toolkit.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "regbank/harness/bundle.hpp"
#include "regbank/harness/pipeline.hpp"
#include "regbank/harness/synth.hpp"
#include "regbank/parallel.hpp"

namespace fs = std::filesystem;
using namespace regbank;
using namespace regbank::harness;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed;
  int threads = 0;

  Config load() const {
    Config cfg = config_path.empty() ? Config{} : Config::from_file(config_path);
    cfg.apply_environment();
    for (const auto& o : overrides) cfg.apply_override(o);
    if (!seed.empty()) cfg.set("seed", seed);
    if (threads > 0) cfg.set("threads", std::to_string(threads));
    if (cfg.has("threads")) set_worker_count(cfg.get_int("threads", 0));
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "key=value configuration file");
  cmd->add_option("-s,--set", o.overrides, "override a configuration key (key=value)");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("-j,--threads", o.threads, "worker threads");
}

std::ofstream open_out(const std::string& path) {
  if (const auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  return out;
}

// Events of a manifest with features, labels resolved against `classes`
// (unknown names get label -1).
std::vector<LabeledEvent> manifest_events(const std::string& manifest, const std::vector<std::string>& classes,
                                          const std::vector<std::string>& splits, const FeatureConfig& features) {
  const DatasetManifest m = load_manifest(manifest, &classes);
  std::vector<EventInstance> inst = load_events(m, splits);
  compute_features(inst, features);
  std::vector<LabeledEvent> out;
  for (auto& e : inst) out.push_back({e.id, e.label.value_or(-1), std::move(*e.features)});
  return out;
}

std::vector<std::string> splits_arg(const std::string& s) { return s.empty() ? std::vector<std::string>{} : split(s, ','); }

std::string class_name(const std::vector<std::string>& classes, ClassId c) {
  return c >= 0 && static_cast<std::size_t>(c) < classes.size() ? classes[static_cast<std::size_t>(c)] : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regressor-bank audio event classification"};
  app.require_subcommand(1);
  CommonOptions common;

  std::string out, manifest, bundle_path, split_filter, predictions_path, event_id, class_label;
  std::vector<std::string> systems;
  std::vector<double> sizes;

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset (WAV files + manifest)");
  synth->add_option("-o,--out", out, "output directory")->required();
  auto* features = app.add_subcommand("features", "extract segment features of manifest events");
  features->add_option("-m,--manifest", manifest)->required();
  features->add_option("-o,--out", out)->required();
  features->add_option("--split", split_filter, "comma-separated splits to include");
  auto* train = app.add_subcommand("train", "train forests, matcher and training descriptors");
  train->add_option("-m,--manifest", manifest)->required();
  train->add_option("-o,--out", out, "bundle path")->required();
  auto* extract = app.add_subcommand("extract", "compute descriptors of manifest events");
  extract->add_option("-b,--bundle", bundle_path)->required();
  extract->add_option("-m,--manifest", manifest)->required();
  extract->add_option("-o,--out", out)->required();
  extract->add_option("--split", split_filter);
  auto* fit = app.add_subcommand("fit", "fit classifiers on the bundle's training descriptors");
  fit->add_option("-b,--bundle", bundle_path)->required();
  fit->add_option("--system", systems, "system name(s)")->required();
  fit->add_option("-m,--manifest", manifest, "training manifest (needed by bow/pbow systems)");
  fit->add_option("-o,--out", out, "output bundle (default: overwrite)");
  auto* predict = app.add_subcommand("predict", "classify manifest events");
  predict->add_option("-b,--bundle", bundle_path)->required();
  predict->add_option("-m,--manifest", manifest)->required();
  predict->add_option("--system", systems)->required()->expected(1);
  predict->add_option("-o,--out", out)->required();
  predict->add_option("--split", split_filter);
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a predictions file");
  evaluate_cmd->add_option("-p,--predictions", predictions_path)->required();
  evaluate_cmd->add_option("-o,--out", out)->required();
  auto* pipeline = app.add_subcommand("pipeline", "end-to-end train/test run");
  pipeline->add_option("-o,--out", out, "output directory")->required();
  auto* sweep = app.add_subcommand("sweep", "accuracy versus segment size");
  sweep->add_option("-o,--out", out)->required();
  sweep->add_option("--sizes", sizes, "window sizes in ms")->delimiter(',');
  auto* curves = app.add_subcommand("curves", "onset/offset score curves of one event");
  curves->add_option("-b,--bundle", bundle_path)->required();
  curves->add_option("-m,--manifest", manifest)->required();
  curves->add_option("--event", event_id)->required();
  curves->add_option("--class", class_label, "forest class name")->required();
  curves->add_option("-o,--out", out)->required();

  for (auto* cmd : {synth, features, train, extract, fit, predict, evaluate_cmd, pipeline, sweep, curves})
    add_common(cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const Config cfg = common.load();
    const PipelineConfig pc = pipeline_config(cfg);

    if (*synth) {
      const auto ds = synth_dataset(synth_spec_from(cfg), pc.seed);
      std::cout << write_dataset(ds, out) << '\n';
    } else if (*features) {
      const DatasetManifest m = load_manifest(manifest);
      auto events = load_events(m, splits_arg(split_filter));
      compute_features(events, pc.features);
      auto f = open_out(out);
      f << "event_id\tsegment";
      for (std::size_t k = 0; k < pc.features.dimension(); ++k) f << "\tf" << k;
      f << '\n';
      for (const auto& e : events)
        for (std::size_t r = 0; r < e.features->rows(); ++r) {
          f << e.id << '\t' << r;
          for (double v : e.features->row(r)) f << '\t' << format_real(v);
          f << '\n';
        }
    } else if (*train) {
      const DatasetManifest m = load_manifest(manifest);
      std::vector<EventInstance> events;
      for (auto& e : load_events(m))
        if (e.split != pc.test_split) events.push_back(std::move(e));
      compute_features(events, pc.features);
      save_bundle(out, train_front_end(to_labeled(events), m.classes, pc, cfg.dump()));
    } else if (*extract) {
      const Bundle b = load_bundle(bundle_path);
      const auto events = manifest_events(manifest, b.classes, splits_arg(split_filter), b.features);
      const DescriptorTable t = describe(b, events);
      auto f = open_out(out);
      const std::size_t c = b.classes.size();
      f << "event_id\tclass";
      for (const char* block : {"raw", "norm", "phat"})
        for (std::size_t k = 0; k < c; ++k) f << '\t' << block << '_' << b.classes[k];
      f << '\n';
      for (std::size_t i = 0; i < t.ids.size(); ++i) {
        f << t.ids[i] << '\t' << class_name(b.classes, events[i].label);
        for (double v : t.raw[i].phi) f << '\t' << format_real(v);
        for (double v : t.normalized[i]) f << '\t' << format_real(v);
        for (double v : t.raw[i].phi_hat) f << '\t' << format_real(v);
        f << '\n';
      }
    } else if (*fit) {
      Bundle b = load_bundle(bundle_path);
      std::vector<LabeledEvent> train_events;
      if (!manifest.empty()) {
        const DatasetManifest m = load_manifest(manifest, &b.classes);
        std::vector<EventInstance> inst;
        for (auto& e : load_events(m))
          if (e.split != pc.test_split) inst.push_back(std::move(e));
        compute_features(inst, b.features);
        train_events = to_labeled(inst);
      }
      CodebookCache cache;
      for (const auto& s : systems) b.systems[s] = fit_system(s, b, train_events, pc, &cache);
      save_bundle(out.empty() ? bundle_path : out, b);
    } else if (*predict) {
      const Bundle b = load_bundle(bundle_path);
      const auto it = b.systems.find(systems.front());
      if (it == b.systems.end()) throw Error(ErrorCode::InvalidArgument, "bundle has no system " + systems.front());
      const auto events = manifest_events(manifest, b.classes, splits_arg(split_filter), b.features);
      const DescriptorTable t = describe(b, events);
      const auto pred = predict_system(it->second, b, t, events);
      auto f = open_out(out);
      f << "event_id\tpredicted\ttruth\n";
      for (std::size_t i = 0; i < pred.size(); ++i)
        f << events[i].id << '\t' << class_name(b.classes, pred[i]) << '\t' << class_name(b.classes, events[i].label)
          << '\n';
    } else if (*evaluate_cmd) {
      std::ifstream in(predictions_path);
      if (!in) throw Error(ErrorCode::MissingFile, "no such file: " + predictions_path);
      std::string line;
      std::getline(in, line);
      std::vector<std::pair<std::string, std::string>> rows;
      std::set<std::string> names;
      int line_no = 1;
      while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 3)
          throw Error(ErrorCode::ParseError, predictions_path + ":" + std::to_string(line_no) + ": expected 3 fields");
        if (cols[2].empty()) continue;  // no ground truth
        rows.emplace_back(cols[1], cols[2]);
        names.insert(cols[1]);
        names.insert(cols[2]);
      }
      const std::vector<std::string> classes(names.begin(), names.end());
      auto id = [&](const std::string& n) {
        return static_cast<ClassId>(std::find(classes.begin(), classes.end(), n) - classes.begin());
      };
      std::vector<ClassId> pred, truth;
      for (const auto& [p, t] : rows) {
        pred.push_back(id(p));
        truth.push_back(id(t));
      }
      EvaluationReport r = evaluate(pred, truth, classes.size());
      r.system = fs::path(predictions_path).stem().string();
      auto f = open_out(out);
      write_report(f, {r}, classes, "");
      std::cout << "accuracy\t" << r.accuracy << "\nmacro_f1\t" << r.macro_f1 << '\n';
    } else if (*pipeline) {
      const PipelineResult res = run_pipeline(cfg, &std::cerr);
      fs::create_directories(out);
      std::ofstream report((fs::path(out) / "report.tsv").string());
      write_report(report, res.reports, res.bundle.classes, cfg.dump());
      save_bundle((fs::path(out) / "bundle.rbb").string(), res.bundle);
      for (const auto& r : res.reports) std::cout << r.system << '\t' << r.accuracy << '\n';
    } else if (*sweep) {
      if (sizes.empty()) sizes = cfg.get_doubles("sweep.sizes", {30, 40, 50, 60, 70, 80, 90, 100});
      const auto rows = sweep_segment_size(cfg, sizes, &std::cerr);
      auto f = open_out(out);
      write_sweep(f, rows, pc.systems);
      write_sweep(std::cout, rows, pc.systems);
    } else if (*curves) {
      const Bundle b = load_bundle(bundle_path);
      const auto cls = std::find(b.classes.begin(), b.classes.end(), class_label);
      if (cls == b.classes.end()) throw Error(ErrorCode::InvalidArgument, "unknown class " + class_label);
      const auto events = manifest_events(manifest, b.classes, {}, b.features);
      const auto ev = std::find_if(events.begin(), events.end(), [&](const auto& e) { return e.id == event_id; });
      if (ev == events.end()) throw Error(ErrorCode::InvalidArgument, "no event " + event_id + " in manifest");
      emit_curves(ev->segments, static_cast<ClassId>(cls - b.classes.begin()), b, out);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
