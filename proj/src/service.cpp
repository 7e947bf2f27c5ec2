//===-- service.cpp - HTTP front end over a finished report ---------------===//

#include "duet/service.hpp"
#include "duet/error.hpp"

#include <httplib.h>

#include <thread>

namespace duet {

using nlohmann::json;

namespace {

ServiceResponse error(int status, const std::string &msg) { return {status, {{"error", msg}}}; }

bool satisfies(const std::vector<Term> &cs, const Assignment &m) {
  for (Term c : cs)
    if (eval_or_zero(c, m) != 1)
      return false;
  return true;
}

} // namespace

ReportService::ReportService(ReportDocument doc, bool static_only)
    : doc_(std::move(doc)), static_only_(static_only), solver_(doc_.meta.max_bits) {
  report_text_ = to_json(doc_).dump();
  for (int s = 0; s < 2; ++s)
    for (const LeafDoc &l : doc_.sides[s].leaves) {
      auto &cs = constraints_[s][l.node];
      for (const auto &text : l.path_constraints)
        cs.push_back(parse_sexpr(text));
    }
  for (const auto &v : doc_.meta.inputs)
    declared_[v.name] = v.width;
}

ServiceResponse ReportService::handle(const std::string &method, const std::string &path,
                                      const std::string &body) {
  static const std::map<std::string, std::string> methods{
      {"/health", "GET"},     {"/report", "GET"}, {"/concretize", "POST"},
      {"/exclusive", "POST"}, {"/prune", "POST"}};
  auto it = methods.find(path);
  if (it == methods.end())
    return error(404, "no such endpoint: " + path);
  if (method != it->second)
    return error(405, path + " expects " + it->second);
  if (path == "/health")
    return {200, {{"status", "ok"}}};
  if (path == "/report")
    return {200, json::parse(report_text_)};
  if (static_only_ && path != "/prune")
    return error(404, "solver endpoints are disabled (static-only)");

  json req = json::parse(body, nullptr, false);
  if (req.is_discarded() || !req.is_object())
    return error(400, "request body must be a JSON object");
  try {
    if (path == "/concretize")
      return concretize(req);
    if (path == "/exclusive")
      return exclusive(req);
    return prune_request(req);
  } catch (const BudgetExceeded &e) {
    return error(422, e.what());
  }
}

bool ReportService::leaves(const json &req, const std::vector<Term> *&pre,
                           const std::vector<Term> *&post, ServiceResponse &err) const {
  for (const char *key : {"pre_leaf", "post_leaf"})
    if (!req.contains(key) || !req.at(key).is_number_unsigned()) {
      err = error(400, std::string("'") + key + "' must be a node id");
      return false;
    }
  auto a = constraints_[0].find(req.at("pre_leaf").get<uint32_t>());
  auto b = constraints_[1].find(req.at("post_leaf").get<uint32_t>());
  if (a == constraints_[0].end()) {
    err = error(404, "unknown pre leaf");
    return false;
  }
  if (b == constraints_[1].end()) {
    err = error(404, "unknown post leaf");
    return false;
  }
  pre = &a->second;
  post = &b->second;
  return true;
}

ServiceResponse ReportService::concretize(const json &req) {
  const std::vector<Term> *a, *b;
  ServiceResponse err;
  if (!leaves(req, a, b, err))
    return err;
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<Term> joint = *a;
  joint.insert(joint.end(), b->begin(), b->end());
  CheckResult r = solver_.check(Query(joint, declared_));
  if (!r.result.sat)
    return error(409, "leaves are not compatible");
  // Never hand out a model that does not drive both leaves.
  if (!satisfies(joint, r.result.model))
    return error(500, "model failed re-verification");
  return {200, {{"model", r.result.model}, {"cache", to_string(r.kind)}}};
}

ServiceResponse ReportService::exclusive(const json &req) {
  const std::vector<Term> *a, *b;
  ServiceResponse err;
  if (!leaves(req, a, b, err))
    return err;
  std::lock_guard<std::mutex> lock(mu_);
  SymState s, t;
  s.constraints = *a;
  t.constraints = *b;
  std::vector<Term> joint = *a;
  joint.insert(joint.end(), b->begin(), b->end());
  if (!solver_.check(Query(joint)).result.sat)
    return error(409, "leaves are not compatible");
  ClassifyResult c = classify(s, t, solver_);
  auto model = [this](const std::optional<Assignment> &m) {
    if (!m)
      return json(nullptr);
    Assignment full = *m;
    for (const auto &[name, w] : declared_)
      full.emplace(name, 0);
    return json(full);
  };
  return {200,
          {{"pre_only", model(c.pre_only)},
           {"post_only", model(c.post_only)},
           {"classification", to_string(c.kind)}}};
}

ServiceResponse ReportService::prune_request(const json &req) {
  std::vector<PruneRelation> rels;
  const json rj = req.value("relations", json::array());
  if (!rj.is_array())
    return error(400, "'relations' must be an array");
  for (const auto &r : rj) {
    auto rel = r.is_string() ? prune_relation_from_string(r.get<std::string>()) : std::nullopt;
    if (!rel)
      return error(400, "unknown relation " + r.dump());
    rels.push_back(*rel);
  }
  std::string regex;
  if (req.contains("regex")) {
    if (!req.at("regex").is_string())
      return error(400, "'regex' must be a string");
    regex = req.at("regex").get<std::string>();
  }
  try {
    PruneResult p = prune(doc_, rels, regex);
    return {200, {{"visible_pre", p.visible[0]}, {"visible_post", p.visible[1]}}};
  } catch (const Error &e) {
    return error(400, e.what());
  }
}

namespace {

void install_routes(httplib::Server &server, ReportService &svc) {
  auto bridge = [&svc](const httplib::Request &req, httplib::Response &res) {
    ServiceResponse r = svc.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", bridge);
  server.Post(R"(/.*)", bridge);
  server.Options(R"(/.*)", [](const httplib::Request &, httplib::Response &res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.status = 204;
  });
}

} // namespace

bool serve(ReportService &svc, const std::string &host, int port) {
  httplib::Server server;
  install_routes(server, svc);
  return server.listen(host, port);
}

struct BackgroundServer::Impl {
  httplib::Server server;
  std::thread thread;
};

BackgroundServer::BackgroundServer(ReportService &svc, const std::string &host)
    : impl_(std::make_unique<Impl>()) {
  install_routes(impl_->server, svc);
  port_ = impl_->server.bind_to_any_port(host);
  if (port_ < 0)
    throw Error("cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

BackgroundServer::~BackgroundServer() {
  impl_->server.stop();
  if (impl_->thread.joinable())
    impl_->thread.join();
}

} // namespace duet
