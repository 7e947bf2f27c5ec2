#include "duet/error.hpp"
#include "duet/service.hpp"

#include "fixture.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

using namespace duet;
using namespace duet::testgen;
using nlohmann::json;

namespace {

json config() {
  json j;
  j["inputs"] = json::parse(kRandomProgramInputs);
  j["max_in_bytes"] = 1;
  j["loop_bound"] = 3;
  j["solver"] = {{"max_bits", 64}};
  return j;
}

const char *kBranchy = R"(
    beqz r1, a
    out 0, r1
    cmpltu r3, r2, r1
    bnez r3, b
    const r0, 1
    halt
  a: store [r7+256], r2
    halt
  b: out 1, r2
    halt)";

struct Fixture {
  Harness h;
  ReportDocument doc;
  Fixture(const std::string &pre, const std::string &post, json j = config())
      : h(make_pair_harness(pre, post, j)), doc(build_report(h, run_comparison(h))) {}
};

std::string leaves_body(uint32_t a, uint32_t b) {
  return json{{"pre_leaf", a}, {"post_leaf", b}}.dump();
}

// Replays a model on both programs and checks it retraces both leaves.
void expect_replays(const Harness &h, const ReportDocument &d, const PairDoc &p,
                    const Assignment &m) {
  for (Side s : {Side::Pre, Side::Post}) {
    const LeafDoc *l = d.side(s).leaf(s == Side::Pre ? p.pre_leaf : p.post_leaf);
    ASSERT_TRUE(l);
    ConcreteRun run = replay(h, s, m);
    std::vector<uint32_t> hist = block_history_of(leaders_of(h, s), run);
    if (l->kind == "loop-bound") {
      ASSERT_GE(hist.size(), l->block_history.size());
      hist.resize(l->block_history.size());
    }
    EXPECT_EQ(hist, l->block_history) << to_string(s) << " leaf " << l->node;
  }
}

} // namespace

TEST(Service, HealthReportAndRouting) {
  Fixture f("halt", "halt");
  ReportService svc(f.doc);
  EXPECT_EQ(svc.handle("GET", "/health", "").body["status"], "ok");
  ServiceResponse r = svc.handle("GET", "/report", "");
  EXPECT_EQ(r.status, 200);
  EXPECT_TRUE(report_from_json(r.body) == f.doc);
  EXPECT_EQ(svc.handle("GET", "/nope", "").status, 404);
  EXPECT_EQ(svc.handle("POST", "/health", "").status, 405);
  EXPECT_EQ(svc.handle("GET", "/concretize", "").status, 405);
}

TEST(Service, ConcretizeEveryPairReplays) {
  Fixture f(kBranchy, kBranchy);
  ReportService svc(f.doc);
  ASSERT_FALSE(f.doc.pairs.empty());
  for (const PairDoc &p : f.doc.pairs) {
    ServiceResponse r = svc.handle("POST", "/concretize", leaves_body(p.pre_leaf, p.post_leaf));
    ASSERT_EQ(r.status, 200) << r.body.dump();
    Assignment m = r.body.at("model").get<Assignment>();
    EXPECT_TRUE(m.count("x") && m.count("y"));
    expect_replays(f.h, f.doc, p, m);
  }
}

TEST(Service, NonPairIsConflict) {
  Fixture f(kBranchy, kBranchy);
  ReportService svc(f.doc);
  int conflicts = 0;
  for (const auto &a : f.doc.sides[0].leaves)
    for (const auto &b : f.doc.sides[1].leaves)
      if (!f.doc.find_pair(a.node, b.node)) {
        EXPECT_EQ(svc.handle("POST", "/concretize", leaves_body(a.node, b.node)).status, 409);
        EXPECT_EQ(svc.handle("POST", "/exclusive", leaves_body(a.node, b.node)).status, 409);
        ++conflicts;
      }
  EXPECT_GT(conflicts, 0);
}

TEST(Service, CachesPersistAcrossRequests) {
  Fixture f(kBranchy, kBranchy);
  ReportService svc(f.doc);
  const PairDoc &p = f.doc.pairs.at(0);
  svc.handle("POST", "/concretize", leaves_body(p.pre_leaf, p.post_leaf));
  uint64_t hits = svc.stats().model_hits;
  ServiceResponse r = svc.handle("POST", "/concretize", leaves_body(p.pre_leaf, p.post_leaf));
  EXPECT_EQ(r.body.at("cache"), "model-hit");
  EXPECT_EQ(svc.stats().model_hits, hits + 1);
}

TEST(Service, ExclusiveMatchesReportClassification) {
  json j = config();
  Fixture f("const r6, 4\ncmpltu r3, r1, r6\nbnez r3, a\nhalt\na: halt",
            "const r6, 8\ncmpltu r3, r1, r6\nbnez r3, a\nhalt\na: halt", j);
  ReportService svc(f.doc);
  bool refined = false;
  for (const PairDoc &p : f.doc.pairs) {
    ServiceResponse r = svc.handle("POST", "/exclusive", leaves_body(p.pre_leaf, p.post_leaf));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body.at("classification"), p.classification);
    EXPECT_EQ(r.body.at("pre_only").is_null(), !p.pre_only.has_value());
    EXPECT_EQ(r.body.at("post_only").is_null(), !p.post_only.has_value());
    if (p.classification == "pre-refines-post") {
      refined = true;
      uint32_t x = r.body.at("post_only").at("x");
      EXPECT_TRUE(x >= 4 && x < 8) << x;
    }
  }
  EXPECT_TRUE(refined);
}

TEST(Service, BadRequests) {
  Fixture f(kBranchy, kBranchy);
  ReportService svc(f.doc);
  EXPECT_EQ(svc.handle("POST", "/concretize", "not json").status, 400);
  EXPECT_EQ(svc.handle("POST", "/concretize", "[1]").status, 400);
  EXPECT_EQ(svc.handle("POST", "/concretize", R"({"pre_leaf": 0})").status, 400);
  EXPECT_EQ(svc.handle("POST", "/concretize", R"({"pre_leaf": -1, "post_leaf": 0})").status, 400);
  EXPECT_EQ(svc.handle("POST", "/concretize", leaves_body(9999, 0)).status, 404);
  uint32_t leaf = f.doc.sides[0].leaves[0].node;
  EXPECT_EQ(svc.handle("POST", "/concretize", leaves_body(leaf, 9999)).status, 404);
  EXPECT_EQ(svc.handle("POST", "/prune", R"({"relations": ["bogus"]})").status, 400);
  EXPECT_EQ(svc.handle("POST", "/prune", R"({"relations": "x"})").status, 400);
  ServiceResponse r =
      svc.handle("POST", "/prune", R"({"relations": ["stdout-not-matching"], "regex": "("})");
  EXPECT_EQ(r.status, 400);
  EXPECT_TRUE(r.body.contains("error"));
}

TEST(Service, PruneEndpoint) {
  Fixture f(kBranchy, kBranchy);
  ReportService svc(f.doc);
  ServiceResponse r = svc.handle("POST", "/prune", R"({"relations": []})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body.at("visible_pre").size(), f.doc.sides[0].leaves.size());
  EXPECT_EQ(r.body.at("visible_post").size(), f.doc.sides[1].leaves.size());
  r = svc.handle("POST", "/prune", R"({"relations": ["register-differs"]})");
  EXPECT_TRUE(r.body.at("visible_pre").empty());
}

TEST(Service, StaticOnlyDisablesSolverEndpoints) {
  Fixture f(kBranchy, kBranchy);
  ReportService svc(f.doc, true);
  const PairDoc &p = f.doc.pairs.at(0);
  EXPECT_EQ(svc.handle("POST", "/concretize", leaves_body(p.pre_leaf, p.post_leaf)).status, 404);
  EXPECT_EQ(svc.handle("POST", "/exclusive", leaves_body(p.pre_leaf, p.post_leaf)).status, 404);
  EXPECT_EQ(svc.handle("POST", "/prune", "{}").status, 200);
  EXPECT_EQ(svc.handle("GET", "/report", "").status, 200);
}

TEST(Service, BudgetExceededIsUnprocessable) {
  Fixture f(kBranchy, kBranchy);
  ReportDocument d = f.doc;
  d.meta.max_bits = 4;
  ReportService svc(d);
  const PairDoc &p = d.pairs.at(0);
  EXPECT_EQ(svc.handle("POST", "/concretize", leaves_body(p.pre_leaf, p.post_leaf)).status, 422);
}

TEST(Service, ConcretizeReplaysOnRandomPairs) {
  Rng rng(41);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::string pre = random_program(rng, 8 + rng.below(9));
    std::string post = random_program(rng, 8 + rng.below(9));
    std::unique_ptr<Fixture> f;
    try {
      f = std::make_unique<Fixture>(pre, post);
    } catch (const ExplorationLimit &) {
      continue;
    }
    ReportService svc(f->doc);
    for (const PairDoc &p : f->doc.pairs) {
      ServiceResponse r = svc.handle("POST", "/concretize", leaves_body(p.pre_leaf, p.post_leaf));
      ASSERT_EQ(r.status, 200);
      expect_replays(f->h, f->doc, p, r.body.at("model").get<Assignment>());
      ++checked;
    }
  }
  EXPECT_GT(checked, 40);
}

TEST(Service, OverHttp) {
  Fixture f(kBranchy, kBranchy);
  ReportService svc(f.doc);
  BackgroundServer server(svc);
  httplib::Client cli("127.0.0.1", server.port());
  auto health = cli.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Content-Type"), "application/json");
  const PairDoc &p = f.doc.pairs.at(0);
  auto res = cli.Post("/concretize", leaves_body(p.pre_leaf, p.post_leaf), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_TRUE(json::parse(res->body).contains("model"));
  auto report = cli.Get("/report");
  ASSERT_TRUE(report);
  EXPECT_TRUE(report_from_json(json::parse(report->body)) == f.doc);
  auto missing = cli.Get("/missing");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}
