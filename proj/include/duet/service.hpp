//===-- service.hpp - HTTP front end over a finished report ---------------===//
//
// The handler is a pure function of (method, path, body) over one loaded
// report, so it is tested without sockets; serve() wires it to httplib.
//
//   GET  /health      {"status": "ok"}
//   GET  /report      the document
//   POST /concretize  {pre_leaf, post_leaf} -> {model}            409 if not a pair
//   POST /exclusive   {pre_leaf, post_leaf} -> {pre_only, post_only, classification}
//   POST /prune       {relations, regex?}   -> {visible_pre, visible_post}
//
// Errors are {"error": text}: 400 malformed body, 404 unknown leaf or path,
// 405 wrong method, 422 solver budget exceeded.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/report.hpp"

#include <json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace duet {

inline constexpr int kDefaultPort = 8731;

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

class ReportService {
public:
  /// Parses every leaf's path constraints up front. static_only disables
  /// the solver endpoints.
  explicit ReportService(ReportDocument doc, bool static_only = false);

  ServiceResponse handle(const std::string &method, const std::string &path,
                         const std::string &body);

  const ReportDocument &document() const { return doc_; }
  const SolverStats &stats() const { return solver_.stats(); }

private:
  ServiceResponse concretize(const nlohmann::json &req);
  ServiceResponse exclusive(const nlohmann::json &req);
  ServiceResponse prune_request(const nlohmann::json &req);
  /// Resolves {pre_leaf, post_leaf}; on failure fills err.
  bool leaves(const nlohmann::json &req, const std::vector<Term> *&pre,
              const std::vector<Term> *&post, ServiceResponse &err) const;

  ReportDocument doc_;
  bool static_only_;
  std::string report_text_;
  std::map<uint32_t, std::vector<Term>> constraints_[2];
  VarSet declared_;
  SolverSession solver_;
  std::mutex mu_; // term construction and solving
};

/// Blocks serving the handler on host:port. Returns false if binding fails.
bool serve(ReportService &svc, const std::string &host, int port);

/// Serves on an ephemeral port from a background thread until destroyed.
class BackgroundServer {
public:
  BackgroundServer(ReportService &svc, const std::string &host = "127.0.0.1");
  ~BackgroundServer();
  BackgroundServer(const BackgroundServer &) = delete;
  BackgroundServer &operator=(const BackgroundServer &) = delete;

  int port() const { return port_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = -1;
};

} // namespace duet
