#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scoregate/backend.hpp"
#include "scoregate/transforms.hpp"
#include "scoregate/types.hpp"

namespace scoregate::serving {

// Everything the service needs besides the routing config: expert backends,
// predictor specs and the initial quantile tables.
struct Deployment {
  BackendRegistry backends;
  std::map<std::string, PredictorSpec, std::less<>> predictors;
  TableSet tables;

  std::vector<std::string> predictor_ids() const;
  const PredictorSpec* find_predictor(std::string_view id) const noexcept;
  // Union of feature names the predictor's backends need from a request.
  std::vector<std::string> required_features(const PredictorSpec& spec) const;
};

// Manifest layout:
//   {"backends": [<backend entry>, ...],
//    "quantile_tables": {"<ref>": <table document> | "<path>", ...},
//    "predictors": [{"id": "...", "experts": [{"model_id", "backend", "undersampling_ratio"}],
//                    "weights": [...], "quantile_table": "<ref>",
//                    "posterior_correction": bool}, ...]}
// Relative table paths resolve against base_dir. The ref "identity" is always
// available. Throws Error{ParseError, InvalidArgument, DuplicatePredictorId,
// UnknownQuantileTable, InvalidTable}.
Deployment load_deployment(const nlohmann::json& manifest,
                           const std::filesystem::path& base_dir = {});
Deployment load_deployment_file(const std::filesystem::path& path);

}  // namespace scoregate::serving
