#include <fstream>
#include <random>

#include "scoregate/coldstart.hpp"
#include "scoregate/error.hpp"
#include "scoregate/quantile_fit.hpp"
#include "scoregate/serving/service.hpp"
#include "scoregate/tools/commands.hpp"

namespace scoregate::tools {

namespace {

// Reports must not depend on when the demo ran.
constexpr const char* kFixedStamp = "1970-01-01T00:00:00Z";

constexpr const char* kRouting = R"(routing:
  version: lifecycle
  scoringRules:
    - description: "acme live"
      condition:
        tenants: ["acme"]
      targetPredictorName: acme-live
    - description: "Catch-all"
      condition: {}
      targetPredictorName: acme-live
  shadowRules:
    - description: "raw scores for refitting"
      condition:
        tenants: ["acme"]
      targetPredictorNames: [acme-raw]
)";

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage '") + name + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& document) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << document.dump(2) << '\n';
}

nlohmann::json manifest(const QuantileTable& v0) {
  auto document = nlohmann::json::parse(R"({
    "backends": [
      {"id": "gbm-a", "kind": "linear-logistic", "weights": {"amount": 1.1, "velocity": 0.4}, "bias": -1.6},
      {"id": "gbm-b", "kind": "linear-logistic", "weights": {"amount": 0.5, "velocity": 0.9}, "bias": -1.3}
    ],
    "predictors": [
      {"id": "acme-live", "experts": [{"model_id": "gbm-a", "backend": "gbm-a", "undersampling_ratio": 0.5},
                                      {"model_id": "gbm-b", "backend": "gbm-b", "undersampling_ratio": 0.5}],
       "weights": [0.5, 0.5], "quantile_table": "acme", "posterior_correction": true},
      {"id": "acme-raw", "experts": [{"model_id": "gbm-a", "backend": "gbm-a", "undersampling_ratio": 0.5},
                                     {"model_id": "gbm-b", "backend": "gbm-b", "undersampling_ratio": 0.5}],
       "weights": [0.5, 0.5], "quantile_table": "identity", "posterior_correction": true}
    ]
  })");
  document["quantile_tables"]["acme"] = to_json(v0);
  return document;
}

std::vector<double> stream(serving::ScoringService& service, std::mt19937_64& rng, std::size_t count,
                           const std::string& prefix) {
  std::normal_distribution<double> amount(0.2, 1.0);
  std::normal_distribution<double> velocity(-0.1, 0.8);
  std::vector<double> scores;
  scores.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    nlohmann::json request{{"event_id", prefix + std::to_string(i)},
                           {"tenant", "acme"},
                           {"geography", "EMEA"},
                           {"schema", "fraud_v1"},
                           {"features", {{"amount", amount(rng)}, {"velocity", velocity(rng)}}}};
    scores.push_back(service.score(request).score.value());
  }
  return scores;
}

}  // namespace

LifecycleResult lifecycle_demo(const LifecycleOptions& options) {
  std::filesystem::create_directories(options.out_dir);
  const auto levels = uniform_levels(1001);
  const auto reference = builtin_reference_quantiles(BuiltinReference::Uniform, levels);
  const auto target = reference_decile_masses(levels, reference);
  std::mt19937_64 rng(options.seed);
  LifecycleResult result;

  // pooled labeled history from older tenants; the new tenant has none
  const auto prior = stage("prior", [&] {
    std::bernoulli_distribution positive(0.02);
    auto beta_draw = [&](double a, double b) {
      std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
      const double x = ga(rng);
      return x / (x + gb(rng));
    };
    std::vector<double> scores;
    std::vector<Label> labels;
    for (int i = 0; i < 100000; ++i) {
      const bool y = positive(rng);
      scores.push_back(y ? beta_draw(8.0, 2.0) : beta_draw(1.0, 20.0));
      labels.push_back(y ? 1 : 0);
    }
    return fit_beta_mixture(scores, labels, options.seed);
  });
  write_json(options.out_dir / "prior_fit.json", to_json(prior));

  auto v0 = stage("coldstart-table", [&] {
    return std::make_shared<const QuantileTable>(
        default_quantile_table(prior, reference, levels, "v0-coldstart", kFixedStamp));
  });
  write_json(options.out_dir / "table_v0.json", to_json(*v0));
  result.table_v0 = v0->version();

  const auto sink_path = options.out_dir / "shadow.jsonl";
  std::filesystem::remove(sink_path);
  auto deployment = stage("deploy", [&] {
    return std::make_shared<const serving::Deployment>(serving::load_deployment(manifest(*v0)));
  });
  serving::ServiceOptions service_options;
  service_options.shadow_queue_depth = options.traffic + 1;  // nothing dropped, so runs repeat exactly
  service_options.clock_micros = [] { return std::int64_t{0}; };
  service_options.timestamp = [] { return std::string(kFixedStamp); };

  std::vector<double> live_v0;
  std::vector<double> live_v1;
  {
    auto routing = stage("deploy", [&] {
      return std::make_shared<const RoutingConfig>(load_config(kRouting, deployment->predictor_ids()));
    });
    serving::ScoringService service(deployment, routing, std::make_shared<serving::JsonlShadowSink>(sink_path),
                                    service_options);
    stage("warmup", [&] { return service.warmup(0, options.seed); });

    live_v0 = stage("serve-v0", [&] { return stream(service, rng, options.traffic, "v0-"); });
    service.flush_shadows();

    const auto fitted = stage("fit-v1", [&] {
      std::ifstream in(sink_path);
      auto samples = read_scores_jsonl(in, JsonlFilter{"acme-raw", "acme", {}, {}});
      result.shadow_samples = samples.scores.size();
      FitOptions fit_options;
      fit_options.version = "v1";
      fit_options.fitted_at = kFixedStamp;
      return fit_quantile_table(samples, reference, levels, fit_options);
    });
    write_json(options.out_dir / "table_v1.json", to_json(fitted.table));
    result.table_v1 = fitted.table.version();

    stage("promote", [&] {
      const auto reply = service.handle_table_upload("acme", serialize(fitted.table));
      if (reply.status != 200) throw Error(ErrorCode::InvalidTable, reply.body);
      return reply.status;
    });
    live_v1 = stage("serve-v1", [&] { return stream(service, rng, options.eval_traffic, "v1-"); });
    service.flush_shadows();
  }

  result.before = stage("report-v0", [&] { return binned_relative_error(live_v0, target, options.z); });
  result.after = stage("report-v1", [&] { return binned_relative_error(live_v1, target, options.z); });
  for (std::size_t i = 0; i < result.before.bins(); ++i) {
    result.drift_detected = result.drift_detected || result.before.relative_error[i] > 1.0;
  }
  result.aligned = true;
  for (std::size_t i = 0; i < result.after.bins(); ++i) {
    if (!result.after.small_sample[i] && !result.after.within_bounds(i)) result.aligned = false;
  }
  write_json(options.out_dir / "report_v0.json", to_json(result.before));
  write_json(options.out_dir / "report_v1.json", to_json(result.after));

  result.summary = nlohmann::json{{"seed", options.seed},
                                  {"traffic", options.traffic},
                                  {"eval_traffic", options.eval_traffic},
                                  {"z", options.z},
                                  {"table_before", result.table_v0},
                                  {"table_after", result.table_v1},
                                  {"shadow_samples", result.shadow_samples},
                                  {"drift_detected", result.drift_detected},
                                  {"aligned_after_promotion", result.aligned},
                                  {"before", to_json(result.before)},
                                  {"after", to_json(result.after)}};
  write_json(options.out_dir / "lifecycle_report.json", result.summary);
  return result;
}

}  // namespace scoregate::tools
