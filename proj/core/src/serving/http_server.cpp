#include "scoregate/serving/http_server.hpp"

#include <httplib.h>

#include "scoregate/error.hpp"
#include "scoregate/serving/service.hpp"

namespace scoregate::serving {

struct HttpServer::Impl {
  httplib::Server server;
};

namespace {

void send(httplib::Response& res, const HttpReply& reply) {
  res.status = reply.status;
  res.set_content(reply.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(ScoringService& service, int worker_threads) : impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;
  const auto threads = static_cast<std::size_t>(std::max(1, worker_threads));
  server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server.set_keep_alive_max_count(1000000);
  // small request/response pairs; Nagle plus delayed ack stalls each one otherwise
  server.set_tcp_nodelay(true);

  server.Post("/v1/score", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.handle_score(req.body));
  });
  server.Post("/admin/config", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.handle_config_upload(req.body));
  });
  server.Post("/admin/quantile-table", [&service](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("ref")) {
      send(res, {422, error_body(ErrorCode::InvalidArgument, "missing ?ref=<table ref>")});
      return;
    }
    send(res, service.handle_table_upload(req.get_param_value("ref"), req.body));
  });
  server.Get("/admin/version", [&service](const httplib::Request&, httplib::Response& res) {
    send(res, service.handle_version());
  });
  server.Get("/admin/metrics", [&service](const httplib::Request&, httplib::Response& res) {
    send(res, service.handle_metrics());
  });
  server.Get("/health/ready", [&service](const httplib::Request&, httplib::Response& res) {
    send(res, service.handle_ready());
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace scoregate::serving
