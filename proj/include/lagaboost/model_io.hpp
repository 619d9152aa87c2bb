#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lagaboost/model.hpp"

namespace lagaboost {

inline constexpr int kModelFormatVersion = 1;

struct ModelFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Column layout of the training CSV, needed to read prediction files.
struct ModelSchema {
  std::string algorithm = "lagaboost";
  std::string response_col;
  std::string group_col;              ///< grouped models
  std::vector<std::string> loc_cols;  ///< GP models
  std::vector<std::string> feature_cols;
};

struct ModelFile {
  ModelSchema schema;
  std::variant<BoostedModel, LinearModel> model;
};

/// Doubles are written in shortest round-trip form (at most 17 significant
/// digits), so save/load is lossless.
nlohmann::ordered_json to_json(const ModelFile& file);
ModelFile model_from_json(const nlohmann::ordered_json& doc);

std::string dump_model(const ModelFile& file);
ModelFile parse_model(const std::string& text);
void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace lagaboost
