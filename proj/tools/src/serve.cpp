#include <atomic>
#include <csignal>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "scoregate/error.hpp"
#include "scoregate/serving/http_server.hpp"
#include "scoregate/serving/service.hpp"
#include "scoregate/tools/commands.hpp"

namespace scoregate::tools {

namespace {

std::atomic<serving::HttpServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* server = g_server.load()) server->stop();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::pair<std::string, int> split_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "listen address must be host:port");
  try {
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad port in '" + listen + "'");
  }
}

}  // namespace

int serve(const ServeArgs& args, std::ostream& out, std::ostream& err) {
  auto deployment = std::make_shared<const serving::Deployment>(serving::load_deployment_file(args.manifest));
  auto routing = std::make_shared<const RoutingConfig>(
      load_config(read_text(args.routing), deployment->predictor_ids()));
  for (const auto& warning : routing->warnings) err << nlohmann::json{{"warning", warning}}.dump() << '\n';

  serving::ServiceOptions options;
  options.shadow_queue_depth = args.queue_depth;
  options.warmup_timeout = std::chrono::milliseconds(args.warmup_timeout_ms);
  options.warmup_rate = args.warmup_rate;
  serving::ScoringService service(deployment, routing, std::make_shared<serving::JsonlShadowSink>(args.sink),
                                  options);
  serving::HttpServer server(service, args.threads);
  const auto [host, port] = split_listen(args.listen);
  const int bound = server.bind(host, port);

  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread listener([&server] { server.listen(); });

  // readiness stays 503 while this runs
  const auto calls = service.warmup(args.warmup, args.seed);
  out << nlohmann::json{{"listening", host + ":" + std::to_string(bound)},
                        {"routing_version", routing->version},
                        {"warmup_calls", calls}}
             .dump()
      << std::endl;

  std::thread watcher;
  std::atomic<bool> done{false};
  if (args.watch) {
    watcher = std::thread([&] {
      std::error_code ec;
      auto last = std::filesystem::last_write_time(args.routing, ec);
      while (!done.load()) {
        std::this_thread::sleep_for(std::chrono::seconds(1));
        const auto now = std::filesystem::last_write_time(args.routing, ec);
        if (ec || now == last) continue;
        last = now;
        try {
          const auto ack = service.reload_config(read_text(args.routing));
          err << nlohmann::json{{"reloaded", args.routing}, {"previous", ack.previous}, {"current", ack.current}}.dump()
              << std::endl;
        } catch (const std::exception& e) {
          // keep serving the old snapshot
          report_failure(e, err);
        }
      }
    });
  }

  listener.join();
  done = true;
  if (watcher.joinable()) watcher.join();
  g_server = nullptr;
  service.flush_shadows();
  return kExitOk;
}

}  // namespace scoregate::tools
