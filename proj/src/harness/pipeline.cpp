#include "regbank/harness/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include "regbank/harness/synth.hpp"
#include "regbank/parallel.hpp"
#include "regbank/random.hpp"

namespace regbank::harness {

std::vector<std::string> default_systems() {
  return {"max_voting", "bor_linear", "bor_chi2",  "bor_plus",  "phi_hat_chi2",
          "bow_linear", "bow_rbf",    "bow_chi2", "bow_hist", "pbow_chi2"};
}

PipelineConfig pipeline_config(const Config& cfg) {
  PipelineConfig p;
  p.seed = cfg.get_u64("seed", p.seed);
  p.threads = cfg.get_int("threads", p.threads);
  p.features.win_ms = cfg.get_double("features.win_ms", p.features.win_ms);
  p.features.overlap_ms = cfg.get_double("features.overlap_ms", p.features.overlap_ms);
  p.features.n_bands = cfg.get_int("features.n_bands", p.features.n_bands);
  p.features.f_min = cfg.get_double("features.f_min", p.features.f_min);
  p.forest.n_trees = cfg.get_int("forest.trees", p.forest.n_trees);
  p.forest.max_depth = cfg.get_int("forest.max_depth", p.forest.max_depth);
  p.forest.min_samples = static_cast<std::size_t>(cfg.get_int("forest.min_samples", 20));
  p.forest.tests_per_node = static_cast<std::size_t>(cfg.get_int("forest.tests", 20000));
  p.forest.subsample_fraction = cfg.get_double("forest.subsample", p.forest.subsample_fraction);
  p.forest.min_variance = cfg.get_double("forest.min_variance", p.forest.min_variance);
  p.matcher.n_trees = cfg.get_int("matcher.trees", p.matcher.n_trees);
  p.matcher.features_per_split = cfg.get_int("matcher.mtry", p.matcher.features_per_split);
  p.matcher.max_depth = cfg.get_int("matcher.max_depth", p.matcher.max_depth);
  p.matcher.min_samples_split = static_cast<std::size_t>(cfg.get_int("matcher.min_split", 2));
  p.matcher_folds = static_cast<std::size_t>(cfg.get_int("matcher.folds", 10));
  p.pad_factor = cfg.get_int("descriptor.pad", p.pad_factor);
  p.systems = cfg.get_strings("systems", default_systems());
  p.tune_folds = static_cast<std::size_t>(cfg.get_int("tune.folds", 5));
  p.c_grid = cfg.get_doubles("tune.c", {0.1, 1.0, 10.0, 100.0, 1000.0});
  p.gamma_grid = cfg.get_doubles("tune.gamma", {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0});
  p.bow_sizes = cfg.get_doubles("bow.sizes", {50, 75, 100, 125, 150, 175, 200, 225, 250});
  p.kmeans_iters = cfg.get_int("bow.kmeans_iters", p.kmeans_iters);
  p.pbow_levels = cfg.get_int("pbow.levels", p.pbow_levels);
  p.manifest = cfg.get_string("data.manifest", "");
  p.test_split = cfg.get_string("data.test_split", "test");
  if (p.matcher_folds < 2) throw Error(ErrorCode::InvalidArgument, "matcher.folds must be at least 2");
  if (p.c_grid.empty() || p.gamma_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty tuning grid");
  return p;
}

Bundle train_front_end(const std::vector<LabeledEvent>& train, const std::vector<std::string>& classes,
                       const PipelineConfig& cfg, const std::string& config_dump) {
  Bundle b;
  b.config = config_dump;
  b.classes = classes;
  b.features = cfg.features;
  b.pad_factor = cfg.pad_factor;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    RegressionForestConfig fc = cfg.forest;
    fc.seed = mix64(cfg.seed ^ mix64(0x100 + c));
    b.forests.push_back(train_forest(train, static_cast<ClassId>(c), fc));
  }
  MatcherConfig mc = cfg.matcher;
  mc.seed = mix64(cfg.seed ^ mix64(0x3a7c));
  b.matcher = train_matcher(train, classes.size(), mc);
  const FoldedMatchers folded = train_folded_matchers(train, classes.size(), cfg.matcher_folds, mc);
  b.training = extract_training_descriptors(train, b.forests, folded, b.normalizer, cfg.pad_factor);
  return b;
}

DescriptorTable describe(const Bundle& b, const std::vector<LabeledEvent>& events) {
  return extract_descriptors(events, b.forests, b.matcher, b.normalizer, b.pad_factor);
}

namespace {

struct SystemName {
  std::string input;
  KernelKind kernel = KernelKind::Linear;
};

SystemName parse_system(const std::string& name) {
  if (name == "max_voting") return {"max_vote", KernelKind::Linear};
  if (name == "bor_plus") return {"fusion", KernelKind::ExtendedGaussian};
  if (name == "phi_hat") return {"phi_hat", KernelKind::Chi2};
  const std::pair<const char*, const char*> prefixes[] = {
      {"phi_hat_", "phi_hat"}, {"bor_", "phi"}, {"pbow_", "pbow"}, {"bow_", "bow"}};
  for (const auto& [prefix, input] : prefixes) {
    const std::string p(prefix);
    if (name.rfind(p, 0) == 0) {
      const KernelKind k = kernel_kind_from_string(name.substr(p.size()));
      if (k == KernelKind::ExtendedGaussian) break;
      return {input, k};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown system '" + name + "'");
}

EventChannels descriptor_channels(const std::string& input, const DescriptorTable& t, std::size_t i) {
  if (input == "phi") return {{t.normalized[i]}};
  if (input == "phi_hat") return {{t.raw[i].phi_hat}};
  return {{t.normalized[i], t.raw[i].phi_hat}};
}

Matrix stack_segments(const std::vector<LabeledEvent>& events) {
  Matrix all;
  for (const auto& e : events)
    for (std::size_t r = 0; r < e.segments.rows(); ++r) all.append_row(e.segments.row(r));
  return all;
}

std::vector<double> encode_words(const FittedSystem& s, const Matrix& segments) {
  const Matrix z = s.standardizer.apply(segments);
  return s.input == "pbow" ? pbow_encode(z, s.codebook, s.pyramid_levels) : bow_encode(z, s.codebook);
}

struct Tuned {
  TuneResult result;
  KernelSpec spec;
};

Tuned tune_kernel(const std::vector<EventChannels>& samples, const std::vector<ClassId>& labels, KernelKind kind,
                  const PipelineConfig& cfg) {
  double scale = 1.0;
  std::vector<double> scales;
  if (kind == KernelKind::Rbf) scale = mean_squared_distance(samples);
  if (kind == KernelKind::Chi2) scale = mean_chi2_distance(samples);
  if (kind == KernelKind::ExtendedGaussian) scales = channel_scales(samples, samples.front().channels.size());
  if (!(scale > 0.0)) scale = 1.0;
  const bool has_gamma = kind == KernelKind::Rbf || kind == KernelKind::Chi2;
  auto make = [&](double g) {
    switch (kind) {
      case KernelKind::Rbf: return KernelSpec::rbf(g / scale);
      case KernelKind::Chi2: return KernelSpec::chi2(g / scale);
      case KernelKind::Hist: return KernelSpec::hist();
      case KernelKind::ExtendedGaussian: return KernelSpec::extended_gaussian(scales);
      default: return KernelSpec::linear();
    }
  };
  TuneGrid grid{cfg.c_grid, has_gamma ? cfg.gamma_grid : std::vector<double>{1.0}};
  const TuneResult r = tune(samples, labels, make, grid, cfg.tune_folds, mix64(cfg.seed ^ 0x7e57));
  return {r, make(r.param)};
}

void record(FittedSystem& s, const Tuned& t) {
  s.params.emplace_back("kernel", to_string(t.spec.kind));
  s.params.emplace_back("c", format_real(t.result.c_reg));
  if (t.spec.kind == KernelKind::Rbf || t.spec.kind == KernelKind::Chi2) {
    s.params.emplace_back("gamma_relative", format_real(t.result.param));
    s.params.emplace_back("gamma", format_real(t.spec.gamma));
  }
  s.params.emplace_back("cv_accuracy", format_real(t.result.accuracy));
}

}  // namespace

FittedSystem fit_system(const std::string& name, const Bundle& b, const std::vector<LabeledEvent>& train,
                        const PipelineConfig& cfg, CodebookCache* cache) {
  const SystemName sys = parse_system(name);
  FittedSystem s;
  s.input = sys.input;
  if (sys.input == "max_vote") return s;

  if (sys.input == "bow" || sys.input == "pbow") {
    if (train.empty()) throw Error(ErrorCode::InvalidArgument, name + " needs the training segments");
    CodebookCache local;
    CodebookCache& cc = cache ? *cache : local;
    std::vector<ClassId> labels;
    for (const auto& e : train) labels.push_back(e.label);
    const Matrix stacked = stack_segments(train);
    if (cc.standardizer.mean.empty()) cc.standardizer = fit_standardizer(stacked);
    s.standardizer = cc.standardizer;
    s.pyramid_levels = sys.input == "pbow" ? cfg.pbow_levels : 1;

    std::optional<Tuned> best;
    std::size_t best_size = 0;
    Matrix z;
    for (double size_d : cfg.bow_sizes) {
      const auto size = static_cast<std::size_t>(size_d);
      auto it = cc.codebooks.find(size);
      if (it == cc.codebooks.end()) {
        if (z.empty()) z = cc.standardizer.apply(stacked);
        it = cc.codebooks.emplace(size, kmeans(z, size, mix64(cfg.seed ^ mix64(0xb0b0 + size)),
                                               static_cast<std::size_t>(cfg.kmeans_iters))).first;
      }
      s.codebook = it->second;
      std::vector<EventChannels> samples(train.size());
      parallel_for(train.size(), [&](std::size_t i) { samples[i] = {{encode_words(s, train[i].segments)}}; });
      Tuned t = tune_kernel(samples, labels, sys.kernel, cfg);
      if (!best || t.result.accuracy > best->result.accuracy) {
        best = std::move(t);
        best_size = size;
      }
    }
    s.codebook = cc.codebooks.at(best_size);
    std::vector<EventChannels> samples(train.size());
    parallel_for(train.size(), [&](std::size_t i) { samples[i] = {{encode_words(s, train[i].segments)}}; });
    s.svm = ovo_train(samples, labels, best->spec, best->result.c_reg);
    s.params.emplace_back("codebook_size", std::to_string(best_size));
    if (sys.input == "pbow") s.params.emplace_back("pyramid_levels", std::to_string(s.pyramid_levels));
    record(s, *best);
    return s;
  }

  const DescriptorTable& t = b.training;
  std::vector<EventChannels> samples;
  for (std::size_t i = 0; i < t.ids.size(); ++i) samples.push_back(descriptor_channels(sys.input, t, i));
  const Tuned tuned = tune_kernel(samples, t.labels, sys.kernel, cfg);
  s.svm = ovo_train(samples, t.labels, tuned.spec, tuned.result.c_reg);
  record(s, tuned);
  return s;
}

std::vector<ClassId> predict_system(const FittedSystem& s, const Bundle& b, const DescriptorTable& table,
                                    const std::vector<LabeledEvent>& events) {
  (void)b;
  const bool words = s.input == "bow" || s.input == "pbow";
  const std::size_t n = words ? events.size() : table.ids.size();
  std::vector<ClassId> out(n);
  parallel_for(n, [&](std::size_t i) {
    if (s.input == "max_vote") {
      out[i] = max_vote(table.raw[i].phi);
    } else if (words) {
      out[i] = ovo_predict(s.svm, {{encode_words(s, events[i].segments)}});
    } else {
      out[i] = ovo_predict(s.svm, descriptor_channels(s.input, table, i));
    }
  });
  return out;
}

namespace {

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + name + ": " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::vector<LabeledEvent>& train,
                            const std::vector<LabeledEvent>& test, const std::vector<std::string>& classes,
                            const std::string& config_dump, std::ostream* log) {
  using Clock = std::chrono::steady_clock;
  auto seconds_since = [](Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); };
  if (cfg.threads > 0) set_worker_count(cfg.threads);
  if (train.empty() || test.empty()) throw Error(ErrorCode::InvalidArgument, "pipeline needs train and test events");

  PipelineResult result;
  auto t0 = Clock::now();
  result.bundle = stage("front-end", [&] { return train_front_end(train, classes, cfg, config_dump); });
  if (log) *log << "front-end\t" << seconds_since(t0) << " s\n";
  t0 = Clock::now();
  const DescriptorTable test_table = stage("extract", [&] { return describe(result.bundle, test); });
  if (log) *log << "extract\t" << seconds_since(t0) << " s\n";
  result.test_ids = test_table.ids;

  std::vector<ClassId> truths;
  for (const auto& e : test) truths.push_back(e.label);
  CodebookCache cache;
  for (const auto& name : cfg.systems) {
    t0 = Clock::now();
    FittedSystem fitted = stage("fit " + name, [&] { return fit_system(name, result.bundle, train, cfg, &cache); });
    const auto predictions =
        stage("predict " + name, [&] { return predict_system(fitted, result.bundle, test_table, test); });
    EvaluationReport report = evaluate(predictions, truths, classes.size());
    report.system = name;
    report.config = fitted.params;
    report.seconds = seconds_since(t0);
    if (log) *log << name << "\t" << report.accuracy << "\t" << report.seconds << " s\n";
    result.reports.push_back(std::move(report));
    result.bundle.systems[name] = std::move(fitted);
  }
  return result;
}

Dataset load_dataset(const Config& cfg) {
  Dataset d;
  const std::string manifest = cfg.get_string("data.manifest", "");
  const std::string test_split = cfg.get_string("data.test_split", "test");
  std::vector<EventInstance> all;
  if (manifest.empty()) {
    const SynthDataset ds = synth_dataset(synth_spec_from(cfg), cfg.get_u64("seed", 1));
    d.classes = ds.classes;
    all = to_instances(ds);
  } else {
    const DatasetManifest m = load_manifest(manifest);
    d.classes = m.classes;
    all = load_events(m);
  }
  for (auto& e : all) {
    if (e.split.empty()) throw Error(ErrorCode::InvalidArgument, "event " + e.id + " has no split assignment");
    (e.split == test_split ? d.test : d.train).push_back(std::move(e));
  }
  return d;
}

PipelineResult run_pipeline(const Config& cfg, std::ostream* log) {
  const PipelineConfig pc = pipeline_config(cfg);
  if (pc.threads > 0) set_worker_count(pc.threads);
  Dataset d = stage("load", [&] { return load_dataset(cfg); });
  stage("features", [&] {
    compute_features(d.train, pc.features);
    compute_features(d.test, pc.features);
    return 0;
  });
  return run_pipeline(pc, to_labeled(d.train), to_labeled(d.test), d.classes, cfg.dump(), log);
}

std::vector<SweepRow> sweep_segment_size(const Config& cfg, const std::vector<double>& sizes, std::ostream* log) {
  const PipelineConfig base = pipeline_config(cfg);
  if (base.threads > 0) set_worker_count(base.threads);
  const Dataset d = stage("load", [&] { return load_dataset(cfg); });
  std::vector<SweepRow> rows;
  for (double size : sizes) {
    SweepRow row;
    row.win_ms = size;
    try {
      Config c = cfg;
      c.set("features.win_ms", format_real(size));
      const PipelineConfig pc = pipeline_config(c);
      Dataset run = d;
      compute_features(run.train, pc.features);
      compute_features(run.test, pc.features);
      row.reports = run_pipeline(pc, to_labeled(run.train), to_labeled(run.test), d.classes, c.dump(), log).reports;
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
      if (log) *log << "size " << size << " ms failed: " << e.what() << '\n';
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep(std::ostream& out, const std::vector<SweepRow>& rows, const std::vector<std::string>& systems) {
  out << "win_ms\tstatus";
  for (const auto& s : systems) out << '\t' << s << "_accuracy";
  out << "\tmessage\n";
  for (const auto& row : rows) {
    out << format_real(row.win_ms) << '\t' << (row.ok ? "ok" : "failed");
    for (const auto& s : systems) {
      std::string cell = "NA";
      for (const auto& r : row.reports)
        if (r.system == s) cell = format_real(r.accuracy);
      out << '\t' << cell;
    }
    std::string msg = row.error;
    for (char& ch : msg)
      if (ch == '\t' || ch == '\n') ch = ' ';
    out << '\t' << msg << '\n';
  }
}

ScoreCurves emit_curves(const Matrix& event, ClassId class_id, const Bundle& b, const std::string& path) {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= b.forests.size())
    throw Error(ErrorCode::InvalidArgument, "no forest for class " + std::to_string(class_id));
  const Matrix padded = pad_sequence(event, b.pad_factor);
  const ScoreCurves curves = score_curves(b.forests[static_cast<std::size_t>(class_id)], b.matcher, padded);
  const FrameGeometry g = frame_geometry(16000, b.features.win_ms, b.features.overlap_ms);
  const double hop_ms = 1000.0 * static_cast<double>(g.hop) / 16000.0;
  const auto first = static_cast<double>(pad_offset(event.rows(), b.pad_factor));

  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "n\ttime_ms\tf_plus\tf_minus\n";
  for (std::size_t n = 0; n < curves.onset.size(); ++n)
    out << n << '\t' << format_real((static_cast<double>(n) - first) * hop_ms) << '\t' << format_real(curves.onset[n])
        << '\t' << format_real(curves.offset[n]) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
  return curves;
}

}  // namespace regbank::harness
