#include "regbank/harness/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "regbank/harness/config.hpp"
#include "regbank/harness/wav.hpp"
#include "regbank/parallel.hpp"

namespace regbank::harness {

namespace fs = std::filesystem;

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string DatasetManifest::resolve(const ManifestEntry& e) const {
  const fs::path p(e.path);
  return p.is_absolute() || base_dir.empty() ? p.string() : (fs::path(base_dir) / p).string();
}

std::optional<ClassId> DatasetManifest::class_id(const std::string& name) const {
  const auto it = std::find(classes.begin(), classes.end(), name);
  if (it == classes.end()) return std::nullopt;
  return static_cast<ClassId>(it - classes.begin());
}

DatasetManifest load_manifest(const std::string& path, const std::vector<std::string>* known_classes) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, "no such manifest: " + path);
  std::ifstream in(path);
  DatasetManifest m;
  m.base_dir = fs::path(path).parent_path().string();

  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": " + why);
  };
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ":1: empty manifest");
  ++line_no;
  const auto header = split(trim(line), ',');
  const bool has_split = header.size() == 5 && header[4] == "split";
  if (!(header.size() == 4 || has_split) || header[0] != "path" || header[1] != "onset_s" ||
      header[2] != "offset_s" || header[3] != "class")
    throw fail("expected header path,onset_s,offset_s,class[,split]");

  auto number = [&](const std::string& text, const char* what) {
    double v = 0.0;
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) throw fail(std::string("bad ") + what);
    return v;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(trim(line), ',');
    if (cols.size() != header.size()) throw fail("expected " + std::to_string(header.size()) + " fields");
    ManifestEntry e;
    e.path = trim(cols[0]);
    e.onset_s = number(cols[1], "onset");
    e.offset_s = number(cols[2], "offset");
    e.class_name = trim(cols[3]);
    if (has_split) e.split = trim(cols[4]);
    if (e.path.empty()) throw fail("empty path");
    if (!(e.onset_s < e.offset_s) || e.onset_s < 0.0)
      throw Error(ErrorCode::InvalidInterval, path + ":" + std::to_string(line_no) + ": onset must precede offset");
    if (!fs::exists(m.resolve(e)))
      throw Error(ErrorCode::MissingFile, path + ":" + std::to_string(line_no) + ": no such file " + m.resolve(e));
    m.entries.push_back(std::move(e));
  }

  if (known_classes) {
    m.classes = *known_classes;
  } else {
    std::set<std::string> names;
    for (const auto& e : m.entries)
      if (!e.class_name.empty()) names.insert(e.class_name);
    m.classes.assign(names.begin(), names.end());
  }
  for (auto& e : m.entries) e.label = m.class_id(e.class_name);
  return m;
}

void save_manifest(const std::string& path, const DatasetManifest& m) {
  const bool has_split = std::any_of(m.entries.begin(), m.entries.end(), [](const auto& e) { return !e.split.empty(); });
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "path,onset_s,offset_s,class" << (has_split ? ",split" : "") << '\n';
  for (const auto& e : m.entries) {
    out << e.path << ',' << format_real(e.onset_s) << ',' << format_real(e.offset_s) << ',' << e.class_name;
    if (has_split) out << ',' << e.split;
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

std::vector<EventInstance> load_events(const DatasetManifest& m, const std::vector<std::string>& splits) {
  std::vector<const ManifestEntry*> chosen;
  for (const auto& e : m.entries)
    if (splits.empty() || std::find(splits.begin(), splits.end(), e.split) != splits.end()) chosen.push_back(&e);

  // Ids are file stems, disambiguated by occurrence count.
  std::vector<EventInstance> events(chosen.size());
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    std::string id = fs::path(chosen[i]->path).stem().string();
    if (const int k = seen[id]++; k > 0) id += "#" + std::to_string(k);
    events[i].id = id;
    events[i].label = chosen[i]->label;
    events[i].split = chosen[i]->split;
  }
  parallel_for(chosen.size(), [&](std::size_t i) {
    const Waveform full = read_wav(m.resolve(*chosen[i]));
    events[i].waveform = slice(full, chosen[i]->onset_s, chosen[i]->offset_s);
  });
  return events;
}

void compute_features(std::vector<EventInstance>& events, const FeatureConfig& cfg) {
  parallel_for(events.size(), [&](std::size_t i) {
    auto& e = events[i];
    if (e.features) return;
    if (!e.waveform) throw Error(ErrorCode::InvalidArgument, "event " + e.id + " has neither waveform nor features");
    try {
      e.features = extract_event_features(*e.waveform, cfg);
    } catch (const Error& err) {
      throw Error(err.code(), "event " + e.id + ": " + err.what());
    }
    e.waveform.reset();
  });
}

std::vector<LabeledEvent> to_labeled(const std::vector<EventInstance>& events) {
  std::vector<LabeledEvent> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    if (!e.label) throw Error(ErrorCode::InvalidArgument, "event " + e.id + " has no known label");
    if (!e.features) throw Error(ErrorCode::InvalidArgument, "event " + e.id + " has no features");
    out.push_back({e.id, *e.label, *e.features});
  }
  return out;
}

}  // namespace regbank::harness
