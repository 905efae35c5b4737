#include "scoregate/serving/deployment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"
#include "scoregate/quantile_table.hpp"
#include "scoregate/serving/backends.hpp"

namespace scoregate::serving {

std::vector<std::string> Deployment::predictor_ids() const {
  std::vector<std::string> ids;
  for (const auto& entry : predictors) ids.push_back(entry.first);
  return ids;
}

const PredictorSpec* Deployment::find_predictor(std::string_view id) const noexcept {
  auto it = predictors.find(id);
  return it == predictors.end() ? nullptr : &it->second;
}

std::vector<std::string> Deployment::required_features(const PredictorSpec& spec) const {
  std::set<std::string> names;
  for (const auto& expert : spec.experts()) {
    if (const auto* backend = backends.find(expert.backend_ref)) {
      for (auto& name : backend->feature_names()) names.insert(std::move(name));
    }
  }
  return {names.begin(), names.end()};
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::shared_ptr<const QuantileTable> load_table(const nlohmann::json& node,
                                                const std::filesystem::path& base_dir) {
  if (node.is_string()) {
    std::filesystem::path path = node.get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    return std::make_shared<const QuantileTable>(parse_quantile_table(read_file(path)));
  }
  return std::make_shared<const QuantileTable>(quantile_table_from_json(node));
}

PredictorSpec load_predictor(const nlohmann::json& entry) {
  const auto id = entry.at("id").get<std::string>();
  std::vector<ExpertSpec> experts;
  for (const auto& expert : entry.at("experts")) {
    ExpertSpec spec;
    spec.backend_ref = expert.at("backend").get<std::string>();
    spec.model_id = expert.value("model_id", spec.backend_ref);
    spec.undersampling_ratio = expert.value("undersampling_ratio", 1.0);
    experts.push_back(std::move(spec));
  }
  std::vector<double> weights;
  if (auto it = entry.find("weights"); it != entry.end()) {
    weights = it->get<std::vector<double>>();
  } else {
    weights.assign(experts.size(), 1.0);
  }
  return PredictorSpec(id, std::move(experts), std::move(weights),
                       entry.value("quantile_table", std::string(kIdentityTableRef)),
                       entry.value("posterior_correction", true));
}

}  // namespace

Deployment load_deployment(const nlohmann::json& manifest, const std::filesystem::path& base_dir) {
  Deployment deployment;
  try {
    for (const auto& entry : manifest.at("backends")) {
      deployment.backends.add(backend_from_json(entry));
    }
    if (auto tables = manifest.find("quantile_tables"); tables != manifest.end()) {
      for (const auto& [ref, node] : tables->items()) {
        if (ref == kIdentityTableRef) {
          throw Error(ErrorCode::InvalidArgument, "table ref 'identity' is reserved");
        }
        deployment.tables.emplace(ref, load_table(node, base_dir));
      }
    }
    for (const auto& entry : manifest.at("predictors")) {
      auto spec = load_predictor(entry);
      for (const auto& expert : spec.experts()) {
        if (!deployment.backends.find(expert.backend_ref)) {
          throw Error(ErrorCode::InvalidArgument, spec.predictor_id() + ": unknown backend '" +
                                                      expert.backend_ref + "'");
        }
      }
      const auto& ref = spec.quantile_table_ref();
      if (ref != kIdentityTableRef && !deployment.tables.contains(ref)) {
        throw Error(ErrorCode::UnknownQuantileTable, spec.predictor_id() + ": unknown table '" + ref + "'");
      }
      const auto id = spec.predictor_id();
      if (!deployment.predictors.emplace(id, std::move(spec)).second) {
        throw Error(ErrorCode::DuplicatePredictorId, "predictor '" + id + "' declared twice");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("deployment manifest: ") + e.what());
  }
  return deployment;
}

Deployment load_deployment_file(const std::filesystem::path& path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return load_deployment(manifest, path.parent_path());
}

}  // namespace scoregate::serving
