#include "lagaboost/model_io.hpp"

#include <fstream>
#include <sstream>

namespace lagaboost {

using json = nlohmann::ordered_json;

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ModelFormatError(std::string("model file: missing field '") + key + "'");
  return j.at(key);
}

json tree_json(const RegressionTree& t) {
  std::vector<int> feature, left, right, samples;
  std::vector<double> threshold, value;
  for (const auto& n : t.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    samples.push_back(n.num_samples);
  }
  return json{{"feature", feature}, {"threshold", threshold}, {"left", left},
              {"right", right},     {"value", value},         {"num_samples", samples}};
}

RegressionTree tree_from(const json& j) {
  const auto feature = field(j, "feature").get<std::vector<int>>();
  const auto threshold = field(j, "threshold").get<std::vector<double>>();
  const auto left = field(j, "left").get<std::vector<int>>();
  const auto right = field(j, "right").get<std::vector<int>>();
  const auto value = field(j, "value").get<std::vector<double>>();
  const auto samples = field(j, "num_samples").get<std::vector<int>>();
  const std::size_t n = feature.size();
  if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n || value.size() != n ||
      samples.size() != n) {
    throw ModelFormatError("model file: tree arrays are empty or differ in length");
  }
  std::vector<RegressionTree::Node> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (feature[i] >= 0 && (left[i] <= static_cast<int>(i) || right[i] <= static_cast<int>(i) ||
                            left[i] >= static_cast<int>(n) || right[i] >= static_cast<int>(n))) {
      throw ModelFormatError("model file: tree child index out of range");
    }
    nodes[i] = {feature[i], threshold[i], left[i], right[i], value[i], samples[i]};
  }
  return RegressionTree(std::move(nodes));
}

json latent_json(const LatentFit& fit) {
  json s;
  if (const auto* g = std::get_if<GroupedStructure>(&fit.structure)) {
    std::vector<std::int64_t> row_labels(g->num_obs());
    for (std::size_t i = 0; i < row_labels.size(); ++i) row_labels[i] = g->labels()[g->group_index()[i]];
    s = json{{"kind", "grouped"}, {"row_labels", row_labels}};
  } else {
    const auto& gp = std::get<GpStructure>(fit.structure);
    std::vector<std::vector<double>> locs(gp.num_obs());
    for (Eigen::Index i = 0; i < gp.num_obs(); ++i) {
      locs[i].assign(gp.locations().cols(), 0.0);
      for (Eigen::Index c = 0; c < gp.locations().cols(); ++c) locs[i][c] = gp.locations()(i, c);
    }
    s = json{{"kind", "gp"}, {"locations", locs}, {"jitter", gp.jitter()}};
  }
  return json{{"structure", s},
              {"theta_hat", vec(fit.theta.natural())},
              {"log_theta_hat", vec(fit.theta.log_values)},
              {"mode", vec(fit.mode)},
              {"d1", vec(fit.d1)},
              {"w_tilde", vec(fit.w_tilde)},
              {"nll", fit.nll},
              {"converged", fit.converged},
              {"stationarity", fit.stationarity}};
}

LatentFit latent_from(const json& j) {
  LatentFit fit;
  const json& s = field(j, "structure");
  const auto kind = field(s, "kind").get<std::string>();
  if (kind == "grouped") {
    fit.structure = GroupedStructure::from_labels(field(s, "row_labels").get<std::vector<std::int64_t>>());
  } else if (kind == "gp") {
    const auto rows = field(s, "locations").get<std::vector<std::vector<double>>>();
    const std::size_t d = rows.empty() ? 2 : rows[0].size();
    Eigen::MatrixXd locs(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d) throw ModelFormatError("model file: ragged GP locations");
      for (std::size_t c = 0; c < d; ++c) locs(i, c) = rows[i][c];
    }
    fit.structure = GpStructure(std::move(locs), field(s, "jitter").get<double>());
  } else {
    throw ModelFormatError("model file: unknown structure kind '" + kind + "'");
  }
  fit.theta = ThetaVector(to_vec(field(j, "log_theta_hat")));
  fit.mode = to_vec(field(j, "mode"));
  fit.d1 = to_vec(field(j, "d1"));
  fit.w_tilde = to_vec(field(j, "w_tilde"));
  fit.nll = field(j, "nll").get<double>();
  fit.converged = field(j, "converged").get<bool>();
  fit.stationarity = field(j, "stationarity").get<double>();
  const Eigen::Index n = num_obs(fit.structure);
  if (fit.theta.size() != num_cov_params(fit.structure) || fit.mode.size() != num_effects(fit.structure) ||
      fit.d1.size() != n || fit.w_tilde.size() != n) {
    throw ModelFormatError("model file: latent arrays inconsistent with structure");
  }
  return fit;
}

}  // namespace

json to_json(const ModelFile& file) {
  json doc;
  doc["format"] = "lagaboost-model";
  doc["version"] = kModelFormatVersion;
  doc["schema"] = json{{"algorithm", file.schema.algorithm},
                       {"response_col", file.schema.response_col},
                       {"group_col", file.schema.group_col},
                       {"loc_cols", file.schema.loc_cols},
                       {"feature_cols", file.schema.feature_cols}};
  if (const auto* b = std::get_if<BoostedModel>(&file.model)) {
    doc["model_type"] = "boosted";
    doc["likelihood"] = to_string(b->likelihood);
    doc["num_features"] = b->num_features;
    doc["feature_names"] = b->feature_names;
    doc["f0"] = b->f0;
    doc["learning_rate"] = b->learning_rate;
    json trees = json::array();
    for (const auto& t : b->trees) trees.push_back(tree_json(t));
    doc["trees"] = std::move(trees);
    doc["latent"] = b->latent ? latent_json(*b->latent) : json(nullptr);
  } else {
    const auto& l = std::get<LinearModel>(file.model);
    doc["model_type"] = "linear";
    doc["likelihood"] = to_string(l.likelihood);
    doc["beta"] = vec(l.beta);
    doc["iterations"] = l.iterations;
    doc["converged"] = l.converged;
    doc["stalled"] = l.stalled;
    doc["latent"] = l.latent ? latent_json(*l.latent) : json(nullptr);
  }
  return doc;
}

ModelFile model_from_json(const json& doc) {
  try {
    if (field(doc, "format").get<std::string>() != "lagaboost-model") throw ModelFormatError("not a lagaboost model file");
    const int version = field(doc, "version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelFormatError("unsupported model format version " + std::to_string(version));
    }
    ModelFile file;
    const json& s = field(doc, "schema");
    file.schema.algorithm = field(s, "algorithm").get<std::string>();
    file.schema.response_col = field(s, "response_col").get<std::string>();
    file.schema.group_col = field(s, "group_col").get<std::string>();
    file.schema.loc_cols = field(s, "loc_cols").get<std::vector<std::string>>();
    file.schema.feature_cols = field(s, "feature_cols").get<std::vector<std::string>>();

    const auto type = field(doc, "model_type").get<std::string>();
    const LikelihoodKind lik = parse_likelihood(field(doc, "likelihood").get<std::string>());
    const json& latent = field(doc, "latent");
    if (type == "boosted") {
      BoostedModel b;
      b.likelihood = lik;
      b.num_features = field(doc, "num_features").get<int>();
      b.feature_names = field(doc, "feature_names").get<std::vector<std::string>>();
      b.f0 = field(doc, "f0").get<double>();
      b.learning_rate = field(doc, "learning_rate").get<double>();
      for (const auto& t : field(doc, "trees")) {
        b.trees.push_back(tree_from(t));
        for (const auto& n : b.trees.back().nodes()) {
          if (n.feature >= b.num_features) throw ModelFormatError("model file: tree feature index out of range");
        }
      }
      if (!latent.is_null()) b.latent = latent_from(latent);
      file.model = std::move(b);
    } else if (type == "linear") {
      LinearModel l;
      l.likelihood = lik;
      l.beta = to_vec(field(doc, "beta"));
      l.iterations = field(doc, "iterations").get<int>();
      l.converged = field(doc, "converged").get<bool>();
      l.stalled = field(doc, "stalled").get<bool>();
      if (!latent.is_null()) l.latent = latent_from(latent);
      file.model = std::move(l);
    } else {
      throw ModelFormatError("model file: unknown model_type '" + type + "'");
    }
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("model file: ") + e.what());
  }
}

std::string dump_model(const ModelFile& file) { return to_json(file).dump(1) + "\n"; }

ModelFile parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(doc);
}

void save_model(const ModelFile& file, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << dump_model(file);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

ModelFile load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_model(ss.str());
}

}  // namespace lagaboost
