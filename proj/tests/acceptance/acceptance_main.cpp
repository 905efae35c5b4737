// One line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "scoregate/coldstart.hpp"
#include "scoregate/error.hpp"
#include "scoregate/metrics.hpp"
#include "scoregate/quantile_fit.hpp"
#include "scoregate/routing.hpp"
#include "scoregate/serving/backends.hpp"
#include "scoregate/serving/deployment.hpp"
#include "scoregate/serving/http_server.hpp"
#include "scoregate/serving/service.hpp"
#include "scoregate/serving/shadow.hpp"
#include "scoregate/transforms.hpp"
#include "scoregate/tools/commands.hpp"

namespace {

using namespace scoregate;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr double kBiasInversionTol = 1e-12;
constexpr double kOracleTol = 1e-9;
constexpr double kWilsonZ = 1.96;
constexpr double kMinExpectedCount = 5.0;
constexpr std::size_t kInvarianceLevels = 10001;
constexpr double kCoverageLow = 0.93;
constexpr double kCoverageHigh = 0.97;
constexpr double kVarianceTol = 0.15;
constexpr double kJsdMax = 0.01;
constexpr double kMomentTol = 0.02;
constexpr double kEceReduction = 0.80;
constexpr double kBrierReduction = 0.30;
constexpr double kSloRate = 1000.0;
constexpr double kSloP99Ms = 30.0;
constexpr double kSloSeconds = 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, format, args...);
  return buffer;
}

double beta_draw(std::mt19937_64& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  return x / (x + gb(rng));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Outcome bias_inversion() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> up(0.0, 1.0);
  std::uniform_real_distribution<double> ub(0.001, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double p = up(rng);
    const double beta = i == 0 ? 1.0 : ub(rng);
    const double biased = p / (p + beta * (1.0 - p));
    worst = std::max(worst, std::abs(posterior_correct(Score(biased), beta).value() - p));
  }
  const double elapsed = seconds_since(start);
  return {worst <= kBiasInversionTol && elapsed < 1.0, fmt("max error %.2e over 1e5 pairs, %.2fs", worst, elapsed)};
}

double naive_map(const QuantileTable& table, double y) {
  const auto s = table.knot_sources();
  const auto r = table.knot_references();
  if (y >= s.back()) return r.back();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] <= y && y < s[i + 1]) return r[i] + (y - s[i]) / (s[i + 1] - s[i]) * (r[i + 1] - r[i]);
  }
  return r.front();
}

Outcome quantile_map_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t n = 2 + rng() % 63;
    std::vector<double> src(n), ref(n);
    for (auto& v : src) v = std::round(u(rng) * 40) / 40;  // coarse grid forces ties
    std::sort(src.begin(), src.end());
    src.front() = 0.0;
    src.back() = 1.0;
    for (std::size_t i = 0; i < n; ++i) ref[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    const QuantileTable table(src, ref);
    const double y = u(rng);
    worst = std::max(worst, std::abs(quantile_map(Score(y), table).value() - naive_map(table, y)));
  }
  const double elapsed = seconds_since(start);
  return {worst <= kOracleTol && elapsed < 1.0,
          fmt("max deviation %.2e over 1e4 tables, %.2fs", worst, elapsed)};
}

struct Mixture {
  double w, a0, b0, a1, b1;
};

std::vector<double> draw_mixture(const Mixture& m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution pick(m.w);
  std::vector<double> out(n);
  for (auto& y : out) y = pick(rng) ? beta_draw(rng, m.a1, m.b1) : beta_draw(rng, m.a0, m.b0);
  return out;
}

Outcome distributional_invariance() {
  const auto start = Clock::now();
  // the top bin of the skewed reference holds ~4e-4 of the mass; a 1001-level table
  // puts 1e-3 in its last knot gap and cannot resolve it
  const auto levels = uniform_levels(kInvarianceLevels);
  const auto reference = builtin_reference_quantiles(BuiltinReference::Skewed, levels);
  const auto target = reference_decile_masses(levels, reference);
  const std::size_t n = 1000000;

  auto mapped_for = [&](const Mixture& m, std::uint64_t seed) {
    SampleSet samples;
    samples.scores = draw_mixture(m, n, seed);
    const auto table = fit_quantile_table(samples, reference, levels).table;
    for (auto& y : samples.scores) y = table.map(y);
    return binned_relative_error(samples.scores, target, kWilsonZ);
  };
  const auto a = mapped_for({0.01, 1.0, 20.0, 8.0, 2.0}, 103);
  const auto b = mapped_for({0.3, 0.6, 3.0, 12.0, 1.5}, 104);

  int checked = 0;
  int outside = 0;
  int disagreements = 0;
  for (std::size_t i = 0; i < kDecileBins; ++i) {
    if (static_cast<double>(n) * target[i] < kMinExpectedCount) continue;
    ++checked;
    outside += !a.within_bounds(i) + !b.within_bounds(i);
    // combined bound: half-widths added in quadrature, in proportion units
    const auto wa = wilson_interval(a.observed_counts[i], a.n, kWilsonZ);
    const auto wb = wilson_interval(b.observed_counts[i], b.n, kWilsonZ);
    const double half = std::hypot((wa.high - wa.low) / 2, (wb.high - wb.low) / 2);
    if (std::abs(a.observed_fraction(i) - b.observed_fraction(i)) > half) ++disagreements;
  }
  const double elapsed = seconds_since(start);
  return {outside == 0 && disagreements == 0 && checked > 0 && elapsed < 30.0,
          fmt("%zu levels, %d bins checked, %d outside Wilson, %d cross-source disagreements, %.1fs",
              kInvarianceLevels, checked, outside, disagreements, elapsed)};
}

Outcome sample_size_bound() {
  const auto start = Clock::now();
  const auto r = validate_sample_size_bound(0.05, 0.2, 1.96, 5000, 105);
  const double ratio = r.threshold_variance / r.predicted_variance;
  const double elapsed = seconds_since(start);
  return {r.coverage >= kCoverageLow && r.coverage <= kCoverageHigh && std::abs(ratio - 1.0) <= kVarianceTol &&
              elapsed < 60.0,
          fmt("coverage %.4f (n=%llu, k=%llu), Var ratio %.3f, %.1fs", r.coverage,
              static_cast<unsigned long long>(r.samples_per_trial), static_cast<unsigned long long>(r.order_statistic),
              ratio, elapsed)};
}

Outcome coldstart_recovery() {
  const auto start = Clock::now();
  std::mt19937_64 rng(106);
  std::bernoulli_distribution positive(0.01);
  std::vector<double> scores;
  std::vector<Label> labels;
  for (int i = 0; i < 100000; ++i) {
    const bool y = positive(rng);
    scores.push_back(y ? beta_draw(rng, 8.0, 2.0) : beta_draw(rng, 1.0, 20.0));
    labels.push_back(y);
  }
  const auto fit = fit_beta_mixture(scores, labels, 106);
  const auto empirical = empirical_raw_moments(scores);
  double worst = 0.0;
  for (int r = 1; r <= 4; ++r) {
    worst = std::max(worst, std::abs(mixture_raw_moment(r, fit) / empirical[r - 1] - 1.0));
  }
  const double elapsed = seconds_since(start);
  return {fit.jsd < kJsdMax && worst <= kMomentTol && elapsed < 120.0,
          fmt("JSD %.2e, worst moment error %.3f%%, %.1fs", fit.jsd, worst * 100, elapsed)};
}

std::string example_routing() {
  return read_text(std::filesystem::path(SCOREGATE_TEST_DATA) / "routing_example.yaml");
}

const std::vector<std::string> kPredictors{"bank1-predictor-v1", "bank1-predictor-v2", "america-predictor-v1",
                                           "global-predictor-v3"};

Event event_of(std::string tenant, std::string geo, std::string schema) {
  return Event{"e", std::move(tenant), std::move(geo), std::move(schema), {{"x", 1.0}}, {}};
}

bool field_matches(const std::optional<std::vector<std::string>>& field, const std::string& value) {
  return !field || std::find(field->begin(), field->end(), value) != field->end();
}

Outcome routing_conformance() {
  const auto start = Clock::now();
  int failures = 0;
  const auto config = load_config(example_routing(), kPredictors);
  {
    const auto d = resolve(event_of("bank1", "", ""), config);
    failures += d.live_predictor != "bank1-predictor-v1" ||
                d.shadow_predictors != std::vector<std::string>{"bank1-predictor-v2"};
    const auto e = resolve(event_of("acme", "NAMER", "fraud_v1"), config);
    failures += e.live_predictor != "america-predictor-v1" || !e.shadow_predictors.empty();
    const auto f = resolve(event_of("acme", "EMEA", ""), config);
    failures += f.live_predictor != "global-predictor-v3" || !f.shadow_predictors.empty();
  }
  const int example_failures = failures;

  // brute-force scan and first-match stability on random configs
  std::mt19937_64 rng(107);
  const std::vector<std::string> tenants{"t0", "t1", "t2"}, geos{"NAMER", "LATAM", "EMEA"}, schemas{"s1", "s2"};
  const std::vector<std::string> preds{"p0", "p1", "p2", "p3"};
  auto field = [&](const std::vector<std::string>& values) -> std::optional<std::vector<std::string>> {
    if (rng() % 2) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& v : values) {
      if (rng() % 2) out.push_back(v);
    }
    return out;
  };
  int property_failures = 0;
  for (int t = 0; t < 5000; ++t) {
    RoutingConfig c;
    c.version = "r";
    for (int i = 0, n = 1 + rng() % 4; i < n; ++i) {
      c.scoring_rules.push_back({"", {field(tenants), field(geos), field(schemas)}, preds[rng() % preds.size()]});
    }
    for (int i = 0, n = rng() % 4; i < n; ++i) {
      std::vector<std::string> targets;
      for (const auto& p : preds) {
        if (rng() % 3 == 0) targets.push_back(p);
      }
      c.shadow_rules.push_back({"", {field(tenants), field(geos), field(schemas)}, targets});
    }
    const auto ev = event_of(tenants[rng() % 3], geos[rng() % 3], schemas[rng() % 2]);
    auto matches = [&](const RuleCondition& rc) {
      return field_matches(rc.tenants, ev.tenant_id) && field_matches(rc.geographies, ev.geography) &&
             field_matches(rc.schemas, ev.schema_id);
    };
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < c.scoring_rules.size() && !first; ++i) {
      if (matches(c.scoring_rules[i].condition)) first = i;
    }
    std::set<std::string> shadows;
    for (const auto& rule : c.shadow_rules) {
      if (matches(rule.condition)) shadows.insert(rule.target_predictors.begin(), rule.target_predictors.end());
    }
    if (!first) {
      try {
        resolve(ev, c);
        ++property_failures;
      } catch (const Error& e) {
        property_failures += e.code() != ErrorCode::NoMatchingRule;
      }
      continue;
    }
    const auto d = resolve(ev, c);
    property_failures += d.live_predictor != c.scoring_rules[*first].target_predictor;
    property_failures += std::set<std::string>(d.shadow_predictors.begin(), d.shadow_predictors.end()) != shadows ||
                         d.shadow_predictors.size() != shadows.size();
    std::shuffle(c.scoring_rules.begin() + static_cast<std::ptrdiff_t>(*first) + 1, c.scoring_rules.end(), rng);
    RuleCondition miss;
    miss.tenants = std::vector<std::string>{"nobody"};
    c.scoring_rules.insert(c.scoring_rules.begin(), ScoringRule{"", miss, "p3"});
    property_failures += resolve(ev, c).live_predictor != d.live_predictor;
  }

  // snapshot isolation
  const auto a = std::make_shared<const RoutingConfig>(config);
  auto promoted = config;
  promoted.version = "promoted";
  promoted.scoring_rules[0].target_predictor = "bank1-predictor-v2";
  promoted.shadow_rules.clear();
  const auto b = std::make_shared<const RoutingConfig>(promoted);
  ConfigStore store(a);
  std::atomic<int> blended{0};
  std::atomic<int> resolves{0};
  std::atomic<bool> stop{false};
  std::vector<std::thread> readers;
  for (int r = 0; r < 3; ++r) {
    readers.emplace_back([&] {
      const auto ev = event_of("bank1", "", "");
      while (!stop.load()) {
        const auto d = resolve(ev, *store.snapshot());
        const bool is_a = d.config_version == a->version && d.live_predictor == "bank1-predictor-v1" &&
                          d.shadow_predictors.size() == 1;
        const bool is_b = d.config_version == "promoted" && d.live_predictor == "bank1-predictor-v2" &&
                          d.shadow_predictors.empty();
        blended += !is_a && !is_b;
        ++resolves;
        std::this_thread::yield();
      }
    });
  }
  // each swap waits until some reader has resolved against it
  for (int i = 0; i < 10000; ++i) {
    store.swap_config(i % 2 ? a : b);
    const int before = resolves.load();
    while (resolves.load() == before) std::this_thread::yield();
  }
  stop = true;
  for (auto& t : readers) t.join();

  const double elapsed = seconds_since(start);
  return {example_failures == 0 && property_failures == 0 && blended == 0 && elapsed < 10.0,
          fmt("examples %d/3, property violations %d, blended %d of %d concurrent resolves, %.1fs",
              3 - example_failures, property_failures, blended.load(), resolves.load(), elapsed)};
}

json example_manifest() {
  return json::parse(read_text(std::filesystem::path(SCOREGATE_TEST_DATA) / "example_manifest.json"));
}

serving::ServiceOptions pinned(std::size_t depth) {
  serving::ServiceOptions options;
  options.shadow_queue_depth = depth;
  options.clock_micros = [] { return std::int64_t{0}; };
  options.timestamp = [] { return std::string("1970-01-01T00:00:00Z"); };
  return options;
}

Outcome shadow_isolation() {
  const auto start = Clock::now();
  const std::size_t requests = 10000;
  auto deployment = std::make_shared<const serving::Deployment>(serving::load_deployment(example_manifest()));
  const std::string with_shadows = example_routing() + R"(    - description: "everything, twice"
      condition: {}
      targetPredictorNames: ["bank1-predictor-v2", "global-predictor-v3"]
    - description: "america in schema v1"
      condition:
        schemas: ["fraud_v1"]
      targetPredictorNames: ["global-predictor-v3"]
)";
  auto stripped = load_config(with_shadows, deployment->predictor_ids());
  stripped.shadow_rules.clear();
  auto shadowed = std::make_shared<const RoutingConfig>(load_config(with_shadows, deployment->predictor_ids()));

  auto sink = std::make_shared<serving::MemoryShadowSink>();
  serving::ScoringService live_only(deployment, std::make_shared<const RoutingConfig>(stripped), sink,
                                    pinned(requests + 1));
  serving::ScoringService mirrored(deployment, shadowed, sink, pinned(requests + 1));
  live_only.warmup(0, 1);
  mirrored.warmup(0, 1);

  std::mt19937_64 rng(108);
  std::normal_distribution<double> amount(0.0, 1.5);
  const std::vector<std::string> tenants{"bank1", "acme", "globex"};
  const std::vector<std::string> geos{"NAMER", "LATAM", "EMEA"};
  const std::vector<std::string> schemas{"fraud_v1", "fraud_v2"};
  std::size_t mismatched = 0;
  std::set<std::pair<std::string, std::string>> expected;
  for (std::size_t i = 0; i < requests; ++i) {
    const json request{{"event_id", "r" + std::to_string(i)},
                       {"tenant", tenants[rng() % 3]},
                       {"geography", geos[rng() % 3]},
                       {"schema", schemas[rng() % 2]},
                       {"features", {{"amount", amount(rng)}, {"velocity", amount(rng)}}}};
    mismatched += live_only.handle_score(request.dump()).body != mirrored.handle_score(request.dump()).body;
    const auto d = resolve(validate_event(request), *shadowed);
    for (const auto& p : d.shadow_predictors) expected.emplace(request["event_id"], p);
  }
  mirrored.flush_shadows();
  live_only.flush_shadows();
  std::multiset<std::pair<std::string, std::string>> seen;
  for (const auto& r : sink->records()) seen.emplace(r.event_id, r.predictor_id);
  const bool exact = seen.size() == expected.size() &&
                     std::all_of(expected.begin(), expected.end(), [&](const auto& k) { return seen.count(k) == 1; });
  const double elapsed = seconds_since(start);
  return {mismatched == 0 && exact && elapsed < 10.0,
          fmt("%zu/%zu live responses differ, %zu shadow records for %zu expected pairs, %.1fs", mismatched, requests,
              seen.size(), expected.size(), elapsed)};
}

Outcome calibration_methodology() {
  const auto start = Clock::now();
  std::string detail;
  bool pass = true;
  for (double beta : {0.02, 0.18}) {
    std::mt19937_64 rng(beta < 0.1 ? 109 : 110);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> biased, corrected;
    std::vector<Label> labels;
    for (int i = 0; i < 100000; ++i) {
      const double p = beta_draw(rng, 0.5, 20.0);
      labels.push_back(u(rng) < p);
      biased.push_back(p / (p + beta * (1.0 - p)));
      corrected.push_back(posterior_correct(Score(biased.back()), beta).value());
    }
    const auto before = calibration_report(biased, labels);
    const auto after = calibration_report(corrected, labels);
    const double ece_drop = 1.0 - after.ece / before.ece;
    const double brier_drop = 1.0 - after.brier / before.brier;
    pass = pass && ece_drop >= kEceReduction && brier_drop >= kBrierReduction;
    detail += fmt("beta=%.2f ECE -%.1f%% Brier -%.1f%%; ", beta, ece_drop * 100, brier_drop * 100);
  }
  const double elapsed = seconds_since(start);
  detail += fmt("%.1fs", elapsed);
  return {pass && elapsed < 30.0, detail};
}

Outcome slo_smoke() {
  json m{{"backends", json::array()}, {"predictors", json::array()}};
  json experts = json::array();
  for (int k = 0; k < 3; ++k) {
    const std::string id = "expert-" + std::to_string(k);
    m["backends"].push_back({{"id", id},
                             {"kind", "linear-logistic"},
                             {"weights", {{"amount", 0.3 + 0.2 * k}, {"velocity", 0.1 * k}}},
                             {"bias", -1.0}});
    experts.push_back({{"model_id", id}, {"backend", id}, {"undersampling_ratio", 0.1 * (k + 1)}});
  }
  m["predictors"].push_back({{"id", "ensemble"}, {"experts", experts}});
  auto deployment = std::make_shared<const serving::Deployment>(serving::load_deployment(m));
  auto routing = std::make_shared<const RoutingConfig>(load_config(
      "routing:\n  scoringRules:\n    - condition: {}\n      targetPredictorName: ensemble\n", deployment->predictor_ids()));
  serving::ScoringService service(deployment, routing, nullptr);
  service.warmup(100, 1);
  serving::HttpServer server(service, 8);
  const int port = server.bind("127.0.0.1", 0);
  std::thread listener([&] { server.listen(); });
  for (int i = 0; i < 400 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));

  // open-loop pacing: each client owns an evenly spaced slice of the target rate
  constexpr int kClients = 4;
  const double per_client = kSloRate * 1.05 / kClients;
  const auto interval = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / per_client));
  const auto begin = Clock::now();
  const auto end = begin + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(kSloSeconds));
  std::vector<std::vector<double>> latencies(kClients);
  std::atomic<long> failed{0};
  std::vector<std::thread> clients;
  for (int c = 0; c < kClients; ++c) {
    clients.emplace_back([&, c] {
      httplib::Client client("127.0.0.1", port);
      client.set_keep_alive(true);
      client.set_tcp_nodelay(true);
      std::mt19937_64 rng(200 + c);
      std::normal_distribution<double> x(0.0, 1.0);
      auto next = begin + interval * c / kClients;
      for (long i = 0; next < end; ++i, next += interval) {
        std::this_thread::sleep_until(next);
        const json body{{"event_id", "slo-" + std::to_string(c) + "-" + std::to_string(i)},
                        {"tenant", "load"},
                        {"features", {{"amount", x(rng)}, {"velocity", x(rng)}}}};
        auto res = client.Post("/v1/score", body.dump(), "application/json");
        // from the scheduled send time, so a slow reply also charges the requests queued behind it
        latencies[c].push_back(std::chrono::duration<double, std::milli>(Clock::now() - next).count());
        if (!res || res->status != 200) ++failed;
      }
    });
  }
  for (auto& t : clients) t.join();
  const double elapsed = seconds_since(begin);
  server.stop();
  listener.join();

  std::vector<double> all;
  for (const auto& l : latencies) all.insert(all.end(), l.begin(), l.end());
  std::sort(all.begin(), all.end());
  const double p99 = all.empty() ? 0.0 : all[static_cast<std::size_t>(0.99 * static_cast<double>(all.size() - 1))];
  const double rate = static_cast<double>(all.size()) / elapsed;
  const auto counters = service.counters();
  return {rate >= kSloRate && p99 < kSloP99Ms && failed == 0 && counters.live_errors == 0,
          fmt("%zu requests in %.1fs (%.0f req/s), p99 %.2f ms, %ld failed", all.size(), elapsed, rate, p99,
              failed.load())};
}

Outcome lifecycle() {
  const auto start = Clock::now();
  tools::LifecycleOptions options;
  options.out_dir = std::filesystem::temp_directory_path() / "scoregate_acceptance_lifecycle";
  const auto result = tools::lifecycle_demo(options);
  double worst_before = -1.0;
  for (double e : result.before.relative_error) worst_before = std::max(worst_before, e);
  const double elapsed = seconds_since(start);
  return {result.drift_detected && result.aligned && elapsed < 180.0,
          fmt("v0 worst bin %+.0f%%, v1 aligned=%s, %llu shadow samples, %.1fs", worst_before * 100,
              result.aligned ? "yes" : "no", static_cast<unsigned long long>(result.shadow_samples), elapsed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"A1 bias inversion", bias_inversion},
      {"A2 quantile-map oracle", quantile_map_oracle},
      {"A3 distributional invariance", distributional_invariance},
      {"A4 sample-size bound", sample_size_bound},
      {"A5 cold-start recovery", coldstart_recovery},
      {"A6 routing conformance", routing_conformance},
      {"A7 shadow isolation", shadow_isolation},
      {"A8 calibration improvement", calibration_methodology},
      {"A9 SLO smoke", slo_smoke},
      {"A10 lifecycle demo", lifecycle},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("%s %s: %s\n", outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures;
}
