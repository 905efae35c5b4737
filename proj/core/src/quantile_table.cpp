#include "scoregate/quantile_table.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"

namespace scoregate {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::InvalidTable, message);
}

}  // namespace

QuantileTable::QuantileTable(std::vector<double> source_q, std::vector<double> reference_q,
                             std::string version, std::string fitted_at,
                             std::uint64_t sample_count)
    : source_q_(std::move(source_q)),
      reference_q_(std::move(reference_q)),
      version_(std::move(version)),
      fitted_at_(std::move(fitted_at)),
      sample_count_(sample_count) {
  const std::size_t n = source_q_.size();
  require(n >= 2, "quantile table needs at least 2 quantiles");
  require(reference_q_.size() == n, "source_q and reference_q differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(source_q_[i]) && source_q_[i] >= 0.0 && source_q_[i] <= 1.0,
            "source_q[" + std::to_string(i) + "] outside [0, 1]");
    require(std::isfinite(reference_q_[i]) && reference_q_[i] >= 0.0 && reference_q_[i] <= 1.0,
            "reference_q[" + std::to_string(i) + "] outside [0, 1]");
    if (i > 0) {
      require(source_q_[i] >= source_q_[i - 1],
              "source_q decreases at index " + std::to_string(i));
      require(reference_q_[i] > reference_q_[i - 1],
              "reference_q not strictly increasing at index " + std::to_string(i));
    }
  }
  require(source_q_.front() == 0.0 && source_q_.back() == 1.0, "source_q must span [0, 1]");
  require(reference_q_.front() == 0.0 && reference_q_.back() == 1.0,
          "reference_q must span [0, 1]");

  knot_source_.reserve(n);
  knot_reference_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!knot_source_.empty() && knot_source_.back() == source_q_[i]) {
      knot_reference_.back() = reference_q_[i];
    } else {
      knot_source_.push_back(source_q_[i]);
      knot_reference_.push_back(reference_q_[i]);
    }
  }
}

QuantileTable QuantileTable::identity(std::string version) {
  return QuantileTable({0.0, 1.0}, {0.0, 1.0}, std::move(version), {}, 0);
}

double QuantileTable::map(double y) const noexcept {
  y = std::clamp(y, 0.0, 1.0);
  const std::size_t last = knot_source_.size() - 1;
  // first knot strictly greater than y; the segment starts one before it
  auto upper = std::upper_bound(knot_source_.begin(), knot_source_.end(), y);
  std::size_t i = static_cast<std::size_t>(upper - knot_source_.begin());
  i = i == 0 ? 0 : i - 1;
  if (i >= last) return knot_reference_[last];
  const double s0 = knot_source_[i];
  const double s1 = knot_source_[i + 1];
  const double r0 = knot_reference_[i];
  const double r1 = knot_reference_[i + 1];
  const double mapped = r0 + (y - s0) * (r1 - r0) / (s1 - s0);
  return std::clamp(mapped, r0, r1);
}

nlohmann::json to_json(const QuantileTable& table) {
  const auto src = table.source_quantiles();
  const auto ref = table.reference_quantiles();
  return nlohmann::json{{"version", table.version()},
                        {"fitted_at", table.fitted_at()},
                        {"sample_count", table.sample_count()},
                        {"source_q", std::vector<double>(src.begin(), src.end())},
                        {"reference_q", std::vector<double>(ref.begin(), ref.end())}};
}

QuantileTable quantile_table_from_json(const nlohmann::json& document) {
  try {
    if (!document.is_object()) throw Error(ErrorCode::ParseError, "quantile table must be an object");
    auto read_vector = [&](const char* key) {
      const auto& node = document.at(key);
      if (!node.is_array()) throw Error(ErrorCode::ParseError, std::string(key) + " must be an array");
      std::vector<double> values;
      values.reserve(node.size());
      for (const auto& v : node) {
        if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string(key) + " holds a non-number");
        values.push_back(v.get<double>());
      }
      return values;
    };
    std::string version = document.value("version", std::string{});
    std::string fitted_at = document.value("fitted_at", std::string{});
    std::uint64_t count = 0;
    if (auto it = document.find("sample_count"); it != document.end()) {
      if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
        throw Error(ErrorCode::ParseError, "sample_count must be a non-negative integer");
      }
      count = it->get<std::uint64_t>();
    }
    return QuantileTable(read_vector("source_q"), read_vector("reference_q"), std::move(version),
                         std::move(fitted_at), count);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("quantile table: ") + e.what());
  }
}

QuantileTable parse_quantile_table(std::string_view text) {
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("quantile table: ") + e.what());
  }
  return quantile_table_from_json(document);
}

std::string serialize(const QuantileTable& table) { return to_json(table).dump(); }

}  // namespace scoregate
