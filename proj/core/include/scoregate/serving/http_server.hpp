#pragma once

#include <memory>
#include <string>

namespace scoregate::serving {

class ScoringService;

// POST /v1/score, POST /admin/config, POST /admin/quantile-table?ref=<ref>,
// GET /admin/version, GET /admin/metrics, GET /health/ready.
class HttpServer {
 public:
  explicit HttpServer(ScoringService& service, int worker_threads = 8);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Error{Io}.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace scoregate::serving
