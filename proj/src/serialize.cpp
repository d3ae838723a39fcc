#include "regbank/serialize.hpp"

namespace regbank {

void to_json(Json& j, const Matrix& m) {
  j = Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

void from_json(const Json& j, Matrix& m) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) throw Error(ErrorCode::CorruptBundle, "matrix payload size mismatch");
  m = Matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
}

void to_json(Json& j, const RegressionForestConfig& c) {
  j = Json{{"n_trees", c.n_trees},
           {"max_depth", c.max_depth},
           {"min_samples", c.min_samples},
           {"tests_per_node", c.tests_per_node},
           {"subsample_fraction", c.subsample_fraction},
           {"min_variance", c.min_variance},
           {"seed", c.seed}};
}

void from_json(const Json& j, RegressionForestConfig& c) {
  j.at("n_trees").get_to(c.n_trees);
  j.at("max_depth").get_to(c.max_depth);
  j.at("min_samples").get_to(c.min_samples);
  j.at("tests_per_node").get_to(c.tests_per_node);
  j.at("subsample_fraction").get_to(c.subsample_fraction);
  j.at("min_variance").get_to(c.min_variance);
  j.at("seed").get_to(c.seed);
}

namespace {

Json tree_to_json(const RegressionTree& t) {
  Json nodes = {{"channel", Json::array()}, {"threshold", Json::array()}, {"left", Json::array()},
                {"right", Json::array()},   {"leaf", Json::array()},      {"depth", Json::array()}};
  for (const auto& n : t.nodes) {
    nodes["channel"].push_back(n.test.channel);
    nodes["threshold"].push_back(n.test.threshold);
    nodes["left"].push_back(n.left);
    nodes["right"].push_back(n.right);
    nodes["leaf"].push_back(n.leaf);
    nodes["depth"].push_back(n.depth);
  }
  Json leaves = {{"mean_onset", Json::array()}, {"var_onset", Json::array()}, {"mean_offset", Json::array()},
                 {"var_offset", Json::array()}, {"count", Json::array()}};
  for (const auto& l : t.leaves) {
    leaves["mean_onset"].push_back(l.mean_onset);
    leaves["var_onset"].push_back(l.var_onset);
    leaves["mean_offset"].push_back(l.mean_offset);
    leaves["var_offset"].push_back(l.var_offset);
    leaves["count"].push_back(l.count);
  }
  return {{"nodes", nodes}, {"leaves", leaves}};
}

RegressionTree tree_from_json(const Json& j) {
  RegressionTree t;
  const Json& nodes = j.at("nodes");
  const std::size_t n = nodes.at("channel").size();
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    nodes.at("channel").at(i).get_to(node.test.channel);
    nodes.at("threshold").at(i).get_to(node.test.threshold);
    nodes.at("left").at(i).get_to(node.left);
    nodes.at("right").at(i).get_to(node.right);
    nodes.at("leaf").at(i).get_to(node.leaf);
    nodes.at("depth").at(i).get_to(node.depth);
  }
  const Json& leaves = j.at("leaves");
  const std::size_t m = leaves.at("count").size();
  t.leaves.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& l = t.leaves[i];
    leaves.at("mean_onset").at(i).get_to(l.mean_onset);
    leaves.at("var_onset").at(i).get_to(l.var_onset);
    leaves.at("mean_offset").at(i).get_to(l.mean_offset);
    leaves.at("var_offset").at(i).get_to(l.var_offset);
    leaves.at("count").at(i).get_to(l.count);
  }
  return t;
}

Json ctree_to_json(const ClassificationTree& t) {
  Json j = {{"channel", Json::array()}, {"threshold", Json::array()}, {"left", Json::array()},
            {"right", Json::array()},   {"leaf", Json::array()},      {"leaf_counts", t.leaf_counts}};
  for (const auto& n : t.nodes) {
    j["channel"].push_back(n.test.channel);
    j["threshold"].push_back(n.test.threshold);
    j["left"].push_back(n.left);
    j["right"].push_back(n.right);
    j["leaf"].push_back(n.leaf);
  }
  return j;
}

ClassificationTree ctree_from_json(const Json& j) {
  ClassificationTree t;
  const std::size_t n = j.at("channel").size();
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    j.at("channel").at(i).get_to(node.test.channel);
    j.at("threshold").at(i).get_to(node.test.threshold);
    j.at("left").at(i).get_to(node.left);
    j.at("right").at(i).get_to(node.right);
    j.at("leaf").at(i).get_to(node.leaf);
  }
  j.at("leaf_counts").get_to(t.leaf_counts);
  return t;
}

}  // namespace

void to_json(Json& j, const RegressorForest& f) {
  j = Json{{"class_id", f.class_id}, {"feature_dim", f.feature_dim}, {"config", f.config}, {"trees", Json::array()}};
  for (const auto& t : f.trees) j["trees"].push_back(tree_to_json(t));
}

void from_json(const Json& j, RegressorForest& f) {
  j.at("class_id").get_to(f.class_id);
  j.at("feature_dim").get_to(f.feature_dim);
  j.at("config").get_to(f.config);
  f.trees.clear();
  for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
}

void to_json(Json& j, const MatcherConfig& c) {
  j = Json{{"n_trees", c.n_trees},
           {"features_per_split", c.features_per_split},
           {"max_depth", c.max_depth},
           {"min_samples_split", c.min_samples_split},
           {"seed", c.seed}};
}

void from_json(const Json& j, MatcherConfig& c) {
  j.at("n_trees").get_to(c.n_trees);
  j.at("features_per_split").get_to(c.features_per_split);
  j.at("max_depth").get_to(c.max_depth);
  j.at("min_samples_split").get_to(c.min_samples_split);
  j.at("seed").get_to(c.seed);
}

void to_json(Json& j, const MatcherModel& m) {
  j = Json{{"n_classes", m.n_classes}, {"feature_dim", m.feature_dim}, {"config", m.config}, {"trees", Json::array()}};
  for (const auto& t : m.trees) j["trees"].push_back(ctree_to_json(t));
}

void from_json(const Json& j, MatcherModel& m) {
  j.at("n_classes").get_to(m.n_classes);
  j.at("feature_dim").get_to(m.feature_dim);
  j.at("config").get_to(m.config);
  m.trees.clear();
  for (const auto& t : j.at("trees")) m.trees.push_back(ctree_from_json(t));
}

void to_json(Json& j, const KernelSpec& k) {
  j = Json{{"kind", to_string(k.kind)}, {"gamma", k.gamma}, {"channel_scales", k.channel_scales}};
}

void from_json(const Json& j, KernelSpec& k) {
  k.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
  j.at("gamma").get_to(k.gamma);
  j.at("channel_scales").get_to(k.channel_scales);
}

void to_json(Json& j, const SvmModel& m) {
  j = Json{{"kernel", m.kernel}, {"c_reg", m.c_reg}, {"classes", m.classes}, {"machines", Json::array()}};
  for (const auto& machine : m.machines) {
    Json support = Json::array();
    for (const auto& sv : machine.support) support.push_back(sv.channels);
    j["machines"].push_back({{"positive", machine.positive},
                             {"negative", machine.negative},
                             {"bias", machine.bias},
                             {"coef", machine.coef},
                             {"support", support}});
  }
}

void from_json(const Json& j, SvmModel& m) {
  j.at("kernel").get_to(m.kernel);
  j.at("c_reg").get_to(m.c_reg);
  j.at("classes").get_to(m.classes);
  m.machines.clear();
  for (const auto& mj : j.at("machines")) {
    BinaryMachine machine;
    mj.at("positive").get_to(machine.positive);
    mj.at("negative").get_to(machine.negative);
    mj.at("bias").get_to(machine.bias);
    mj.at("coef").get_to(machine.coef);
    for (const auto& sv : mj.at("support"))
      machine.support.push_back({sv.get<std::vector<std::vector<double>>>()});
    m.machines.push_back(std::move(machine));
  }
}

void to_json(Json& j, const Codebook& c) { j = Json{{"centroids", c.centroids}}; }
void from_json(const Json& j, Codebook& c) { j.at("centroids").get_to(c.centroids); }

void to_json(Json& j, const Standardizer& s) { j = Json{{"mean", s.mean}, {"scale", s.scale}}; }
void from_json(const Json& j, Standardizer& s) {
  j.at("mean").get_to(s.mean);
  j.at("scale").get_to(s.scale);
}

void to_json(Json& j, const NormalizationStats& s) { j = Json{{"max_phi", s.max_phi}}; }
void from_json(const Json& j, NormalizationStats& s) { j.at("max_phi").get_to(s.max_phi); }

}  // namespace regbank
