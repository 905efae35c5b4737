#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace scoregate {

// Paired source/reference quantiles defining a monotone piecewise-linear map
// from a predictor's score distribution onto a reference distribution.
//
// Invariants checked at construction (Error{InvalidTable} otherwise):
//   * both vectors have the same length N >= 2 and hold values in [0, 1];
//   * source_q is non-decreasing, reference_q strictly increasing;
//   * source_q and reference_q start at 0 and end at 1.
//
// Runs of equal source quantiles (probability atoms) are collapsed into one
// knot carrying the reference quantile of the run's last index, so every
// retained segment has positive source width. The as-fitted vectors are kept
// for serialization.
class QuantileTable {
 public:
  QuantileTable(std::vector<double> source_q, std::vector<double> reference_q,
                std::string version = {}, std::string fitted_at = {},
                std::uint64_t sample_count = 0);

  // source_q == reference_q == {0, 1}.
  static QuantileTable identity(std::string version = "identity");

  // Locates the half-open segment [s_i, s_{i+1}) containing y by binary search
  // (the last segment is closed) and interpolates linearly. y is clamped to
  // [0, 1].
  double map(double y) const noexcept;

  std::size_t size() const noexcept { return source_q_.size(); }
  std::span<const double> source_quantiles() const noexcept { return source_q_; }
  std::span<const double> reference_quantiles() const noexcept { return reference_q_; }
  std::span<const double> knot_sources() const noexcept { return knot_source_; }
  std::span<const double> knot_references() const noexcept { return knot_reference_; }

  const std::string& version() const noexcept { return version_; }
  const std::string& fitted_at() const noexcept { return fitted_at_; }
  std::uint64_t sample_count() const noexcept { return sample_count_; }
  bool is_cold_start() const noexcept { return sample_count_ == 0; }

 private:
  std::vector<double> source_q_;
  std::vector<double> reference_q_;
  std::vector<double> knot_source_;
  std::vector<double> knot_reference_;
  std::string version_;
  std::string fitted_at_;
  std::uint64_t sample_count_;
};

// {version, fitted_at, sample_count, source_q:[...], reference_q:[...]}
nlohmann::json to_json(const QuantileTable& table);
QuantileTable quantile_table_from_json(const nlohmann::json& document);
// Throws Error{ParseError} on malformed JSON, Error{InvalidTable} on a
// well-formed document violating the table invariants.
QuantileTable parse_quantile_table(std::string_view text);
std::string serialize(const QuantileTable& table);

}  // namespace scoregate
