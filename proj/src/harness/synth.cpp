#include "regbank/harness/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <set>

#include "regbank/harness/wav.hpp"
#include "regbank/random.hpp"

namespace regbank::harness {

namespace fs = std::filesystem;

SynthSpec synth_spec_from(const Config& cfg) {
  SynthSpec s;
  s.n_classes = cfg.get_int("synth.classes", s.n_classes);
  s.events_per_class = cfg.get_int("synth.events", s.events_per_class);
  s.units_per_class = cfg.get_int("synth.units", s.units_per_class);
  s.unit_ms = cfg.get_double("synth.unit_ms", s.unit_ms);
  s.gap_ms = cfg.get_double("synth.gap_ms", s.gap_ms);
  s.lead_ms = cfg.get_double("synth.lead_ms", s.lead_ms);
  s.jitter = cfg.get_double("synth.jitter", s.jitter);
  s.noise_sigma = cfg.get_double("synth.noise", s.noise_sigma);
  s.shared_histogram = cfg.get_bool("synth.shared", s.shared_histogram);
  s.train_fraction = cfg.get_double("synth.train_fraction", s.train_fraction);
  return s;
}

std::vector<double> unit_waveform(int unit, int n_units, std::size_t length, int sample_rate) {
  // Log-spaced fundamentals between 300 Hz and 4 kHz.
  const double pos = n_units > 1 ? static_cast<double>(unit) / (n_units - 1) : 0.0;
  const double f0 = 300.0 * std::pow(4000.0 / 300.0, pos);
  const double f1 = f0 * 1.2;
  const double dur = static_cast<double>(length) / sample_rate;
  const std::size_t fade = std::min<std::size_t>(length / 2, static_cast<std::size_t>(0.01 * sample_rate));
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    // phase of a linear chirp f0 -> f1 over the unit
    const double phase = 2.0 * std::numbers::pi * (f0 * t + 0.5 * (f1 - f0) / dur * t * t);
    double v = 0.5 * std::sin(phase) + 0.2 * std::sin(2.0 * phase);
    if (unit % 2 == 1) v *= 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 30.0 * t);
    double env = 1.0;
    if (i < fade) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / fade);
    if (length - 1 - i < fade) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * (length - 1 - i) / fade));
    out[i] = v * env;
  }
  return out;
}

namespace {

std::size_t ms_to_samples(double ms, int sr) { return static_cast<std::size_t>(std::llround(ms * sr / 1000.0)); }

int total_units(const SynthSpec& spec) {
  return spec.shared_histogram ? spec.units_per_class : spec.units_per_class * spec.n_classes;
}

std::vector<std::vector<int>> choose_orders(const SynthSpec& spec, std::uint64_t seed) {
  const int u = spec.units_per_class;
  std::vector<std::vector<int>> orders;
  if (!spec.shared_histogram) {
    for (int c = 0; c < spec.n_classes; ++c) {
      std::vector<int> order(u);
      std::iota(order.begin(), order.end(), c * u);
      orders.push_back(order);
    }
    return orders;
  }
  // With three or more units the first and last unit are shared anchors and
  // only the inner units are permuted, so event edges carry no class cue.
  // Inner orderings are enumerated lexicographically and a seeded subset of
  // n_classes is kept.
  const int lo = u >= 3 ? 1 : 0;
  const int hi = u >= 3 ? u - 1 : u;
  std::vector<std::vector<int>> perms;
  std::vector<int> p(u);
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin() + lo, p.begin() + hi) && perms.size() < 100000);
  if (perms.size() < static_cast<std::size_t>(spec.n_classes))
    throw Error(ErrorCode::InvalidArgument, "not enough unit orderings for the requested classes");
  Rng rng = make_stream(seed, 0x5e);
  shuffle(rng, perms);
  perms.resize(spec.n_classes);
  return perms;
}

}  // namespace

Waveform class_template(const SynthSpec& spec, const std::vector<int>& unit_order) {
  const int n_units = total_units(spec);
  Waveform w{{}, spec.sample_rate};
  for (std::size_t k = 0; k < unit_order.size(); ++k) {
    if (k > 0) w.samples.resize(w.samples.size() + ms_to_samples(spec.gap_ms, spec.sample_rate), 0.0);
    const auto unit = unit_waveform(unit_order[k], n_units, ms_to_samples(spec.unit_ms, spec.sample_rate), spec.sample_rate);
    w.samples.insert(w.samples.end(), unit.begin(), unit.end());
  }
  return w;
}

SynthDataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.n_classes < 2) throw Error(ErrorCode::InvalidArgument, "synthetic data needs at least two classes");
  if (spec.units_per_class < 1 || spec.events_per_class < 1)
    throw Error(ErrorCode::InvalidArgument, "units and events per class must be positive");
  SynthDataset ds;
  ds.unit_order = choose_orders(spec, seed);
  const int n_units = total_units(spec);
  const int sr = spec.sample_rate;
  const std::size_t lead = ms_to_samples(spec.lead_ms, sr);
  const auto n_train = static_cast<int>(std::llround(spec.events_per_class * spec.train_fraction));

  for (int c = 0; c < spec.n_classes; ++c) {
    ds.classes.push_back("class" + std::to_string(c));
    for (int i = 0; i < spec.events_per_class; ++i) {
      Rng rng = make_stream(seed, static_cast<std::uint64_t>(c) + 1, static_cast<std::uint64_t>(i));
      auto jittered = [&](double ms) {
        const double scale = 1.0 + spec.jitter * (2.0 * uniform01(rng) - 1.0);
        return std::max<std::size_t>(1, ms_to_samples(ms * scale, sr));
      };
      std::vector<double> body;
      const auto& order = ds.unit_order[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (k > 0) body.resize(body.size() + jittered(spec.gap_ms), 0.0);
        const auto unit = unit_waveform(order[k], n_units, jittered(spec.unit_ms), sr);
        body.insert(body.end(), unit.begin(), unit.end());
      }
      SynthEvent e;
      char id[32];
      std::snprintf(id, sizeof id, "c%02d_e%04d", c, i);
      e.id = id;
      e.label = c;
      e.split = i < n_train ? "train" : "test";
      e.recording.sample_rate = sr;
      e.recording.samples.assign(lead, 0.0);
      e.recording.samples.insert(e.recording.samples.end(), body.begin(), body.end());
      e.recording.samples.resize(e.recording.samples.size() + lead, 0.0);
      if (spec.noise_sigma > 0.0)
        for (double& s : e.recording.samples) s += spec.noise_sigma * standard_normal(rng);
      e.onset_s = static_cast<double>(lead) / sr;
      e.offset_s = static_cast<double>(lead + body.size()) / sr;
      ds.events.push_back(std::move(e));
    }
  }
  return ds;
}

std::vector<EventInstance> to_instances(const SynthDataset& ds) {
  std::vector<EventInstance> out;
  out.reserve(ds.events.size());
  for (const auto& e : ds.events) {
    EventInstance inst;
    inst.id = e.id;
    inst.label = e.label;
    inst.split = e.split;
    inst.waveform = slice(e.recording, e.onset_s, e.offset_s);
    out.push_back(std::move(inst));
  }
  return out;
}

std::string write_dataset(const SynthDataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  DatasetManifest m;
  m.classes = ds.classes;
  for (const auto& e : ds.events) {
    write_wav((fs::path(dir) / (e.id + ".wav")).string(), e.recording);
    m.entries.push_back({e.id + ".wav", e.onset_s, e.offset_s, ds.classes[static_cast<std::size_t>(e.label)], e.split,
                         e.label});
  }
  const std::string path = (fs::path(dir) / "manifest.csv").string();
  save_manifest(path, m);
  return path;
}

}  // namespace regbank::harness
