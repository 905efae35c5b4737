#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "scoregate/metrics.hpp"

namespace scoregate::tools {

// Every randomized subcommand defaults to this seed.
inline constexpr std::uint64_t kDefaultSeed = 20240601;

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

struct FitQuantilesArgs {
  std::string input;  // .csv (header `score`) or .jsonl shadow sink; "-" reads CSV from stdin
  std::string predictor;
  std::string tenant;
  std::string window_start;
  std::string window_end;
  std::string reference = "uniform";  // uniform | skewed | table file
  std::size_t levels = 1001;
  std::string version = "v1";
  std::string fitted_at;
  double relative_error = 0.2;
  double z = 1.96;
  std::string output;  // empty: stdout
};

struct FitColdstartArgs {
  std::string input;  // CSV with `score,label`
  std::uint64_t seed = kDefaultSeed;
  int trials = 8;
  int population = 32;
  int generations = 300;
  bool polish = true;
  std::string output;
  std::string table_output;  // optional cold-start table
  std::string reference = "uniform";  // uniform | skewed | table file
  std::size_t levels = 1001;
  std::string version = "v0-coldstart";
  std::string fitted_at;
};

struct SampleSizeArgs {
  double alert_rate = 0.01;
  double relative_error = 0.2;
  double z = 1.96;
};

struct ValidateBoundArgs {
  double alert_rate = 0.05;
  double relative_error = 0.2;
  double z = 1.96;
  std::uint64_t trials = 5000;
  std::uint64_t seed = kDefaultSeed;
};

struct EvaluateArgs {
  std::string input;  // CSV (`score` or `score,label`) or shadow-sink JSONL
  std::string predictor;
  std::string tenant;
  std::string reference = "uniform";  // uniform | skewed | table file
  double z = 1.96;
  std::optional<double> posterior_beta;
  bool table = false;
  std::string output;
};

// Each command writes its JSON result to `out` (or the --output file) and
// diagnostics to `err`. Failures are thrown as scoregate::Error.
void fit_quantiles(const FitQuantilesArgs& args, std::ostream& out, std::ostream& err);
void fit_coldstart(const FitColdstartArgs& args, std::ostream& out, std::ostream& err);
void samplesize(const SampleSizeArgs& args, std::ostream& out);
void validate_bound(const ValidateBoundArgs& args, std::ostream& out);
void evaluate(const EvaluateArgs& args, std::ostream& out);

// {"error": "<code>", "message": "..."} on err; returns the exit code.
int report_failure(const std::exception& failure, std::ostream& err);

// Family-wise 95% over the ten decile bins: Phi^-1(1 - 0.05 / 20).
inline constexpr double kBonferroniDecileZ = 2.8070337683438042;

struct LifecycleOptions {
  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path out_dir = "lifecycle-out";
  std::size_t traffic = 20000;       // events streamed under v0
  std::size_t eval_traffic = 2000;   // events streamed under v1
  double z = kBonferroniDecileZ;
};

struct LifecycleResult {
  BinnedComparison before;
  BinnedComparison after;
  std::string table_v0;
  std::string table_v1;
  std::uint64_t shadow_samples = 0;
  bool drift_detected = false;  // some v0 bin above +100%
  bool aligned = false;         // every well-populated v1 bin inside its bounds
  nlohmann::json summary;
};

// Cold-start table -> drifted traffic -> shadow samples -> refit -> admin
// reload -> more traffic. Writes its artifacts into out_dir. A failure names
// the stage in the Error message.
LifecycleResult lifecycle_demo(const LifecycleOptions& options);

// Serve until interrupted.
struct ServeArgs {
  std::string manifest;
  std::string routing;
  std::string listen = "127.0.0.1:8080";
  std::string sink = "shadow.jsonl";
  std::size_t warmup = 100;
  std::int64_t warmup_timeout_ms = 0;
  double warmup_rate = 0.0;
  std::size_t queue_depth = 4096;
  std::uint64_t seed = kDefaultSeed;
  bool watch = false;
  int threads = 8;
};

int serve(const ServeArgs& args, std::ostream& out, std::ostream& err);

}  // namespace scoregate::tools
