#include "regbank/harness/bundle.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "regbank/serialize.hpp"

namespace regbank::harness {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

constexpr std::string_view kMagic = "REGBANK-BUNDLE";

Json features_json(const FeatureConfig& f) {
  return {{"win_ms", f.win_ms},   {"overlap_ms", f.overlap_ms}, {"n_bands", f.n_bands},
          {"f_min", f.f_min},     {"log_floor", f.log_floor},   {"hamming", f.hamming}};
}

FeatureConfig features_from(const Json& j) {
  FeatureConfig f;
  j.at("win_ms").get_to(f.win_ms);
  j.at("overlap_ms").get_to(f.overlap_ms);
  j.at("n_bands").get_to(f.n_bands);
  j.at("f_min").get_to(f.f_min);
  j.at("log_floor").get_to(f.log_floor);
  j.at("hamming").get_to(f.hamming);
  return f;
}

Json table_json(const DescriptorTable& t) {
  Json phi = Json::array(), phi_hat = Json::array();
  for (const auto& r : t.raw) {
    phi.push_back(r.phi);
    phi_hat.push_back(r.phi_hat);
  }
  return {{"ids", t.ids}, {"labels", t.labels}, {"phi", phi}, {"phi_hat", phi_hat}, {"normalized", t.normalized}};
}

DescriptorTable table_from(const Json& j) {
  DescriptorTable t;
  j.at("ids").get_to(t.ids);
  j.at("labels").get_to(t.labels);
  j.at("normalized").get_to(t.normalized);
  const auto& phi = j.at("phi");
  const auto& phi_hat = j.at("phi_hat");
  if (phi.size() != t.ids.size() || phi_hat.size() != t.ids.size() || t.labels.size() != t.ids.size() ||
      t.normalized.size() != t.ids.size())
    throw Error(ErrorCode::CorruptBundle, "descriptor table columns differ in length");
  for (std::size_t i = 0; i < phi.size(); ++i)
    t.raw.push_back({phi[i].get<std::vector<double>>(), phi_hat[i].get<std::vector<double>>()});
  return t;
}

Json system_json(const FittedSystem& s) {
  Json params = Json::array();
  for (const auto& [k, v] : s.params) params.push_back({k, v});
  return {{"input", s.input},
          {"svm", s.svm},
          {"codebook", s.codebook},
          {"standardizer", s.standardizer},
          {"pyramid_levels", s.pyramid_levels},
          {"params", params}};
}

FittedSystem system_from(const Json& j) {
  FittedSystem s;
  j.at("input").get_to(s.input);
  j.at("svm").get_to(s.svm);
  j.at("codebook").get_to(s.codebook);
  j.at("standardizer").get_to(s.standardizer);
  j.at("pyramid_levels").get_to(s.pyramid_levels);
  for (const auto& p : j.at("params")) s.params.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  return s;
}

}  // namespace

std::string serialize_bundle(const Bundle& b) {
  Json systems = Json::object();
  for (const auto& [name, s] : b.systems) systems[name] = system_json(s);
  const Json payload = {{"config", b.config},
                        {"classes", b.classes},
                        {"features", features_json(b.features)},
                        {"pad_factor", b.pad_factor},
                        {"forests", b.forests},
                        {"matcher", b.matcher},
                        {"normalizer", b.normalizer},
                        {"training", table_json(b.training)},
                        {"systems", systems}};
  const std::string body = payload.dump();
  char header[64];
  std::snprintf(header, sizeof header, "%s %d %016" PRIx64 "\n", kMagic.data(), kBundleVersion, fnv1a64(body));
  return header + body;
}

Bundle parse_bundle(const std::string& text) {
  const auto nl = text.find('\n');
  if (nl == std::string::npos) throw Error(ErrorCode::CorruptBundle, "bundle header missing");
  std::istringstream header(text.substr(0, nl));
  std::string magic, checksum;
  int version = 0;
  if (!(header >> magic >> version >> checksum) || magic != kMagic)
    throw Error(ErrorCode::CorruptBundle, "not a model bundle");
  if (version != kBundleVersion)
    throw Error(ErrorCode::VersionMismatch, "bundle format version " + std::to_string(version) +
                                                " is not supported (expected " + std::to_string(kBundleVersion) + ")");
  const std::string_view body(text.data() + nl + 1, text.size() - nl - 1);
  char expected[32];
  std::snprintf(expected, sizeof expected, "%016" PRIx64, fnv1a64(body));
  if (checksum != expected) throw Error(ErrorCode::CorruptBundle, "bundle checksum mismatch");

  try {
    const Json j = Json::parse(body);
    Bundle b;
    j.at("config").get_to(b.config);
    j.at("classes").get_to(b.classes);
    b.features = features_from(j.at("features"));
    j.at("pad_factor").get_to(b.pad_factor);
    j.at("forests").get_to(b.forests);
    j.at("matcher").get_to(b.matcher);
    j.at("normalizer").get_to(b.normalizer);
    b.training = table_from(j.at("training"));
    for (const auto& [name, s] : j.at("systems").items()) b.systems[name] = system_from(s);
    return b;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::CorruptBundle, std::string("bundle payload: ") + e.what());
  }
}

void save_bundle(const std::string& path, const Bundle& b) {
  const std::string text = serialize_bundle(b);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

Bundle load_bundle(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, "no such bundle: " + path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_bundle(buf.str());
}

}  // namespace regbank::harness
