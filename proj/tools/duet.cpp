//===-- duet.cpp - Command-line front end ---------------------------------===//
//
//   duet asm <in.s> <out.czb>
//   duet run <config> [--side pre|post] [-o out.json]
//   duet compare <config> [-o report.json]
//   duet serve <report.json> [--port 8731] [--host 127.0.0.1] [--static-only]
//   duet template
//   duet oracle <config>
//
// Exit status: 0 success, 1 error or oracle disagreement, 2 counterexamples.
//
//===----------------------------------------------------------------------===//

#include "duet/error.hpp"
#include "duet/oracle.hpp"
#include "duet/service.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace duet;
using nlohmann::json;

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw Error("cannot write " + path);
}

int cmd_asm(const std::string &in, const std::string &out) {
  Program p = assemble(read_file(in));
  save_program_file(out, p);
  std::cout << fmt::format("{}: {} instructions\n", out, p.code.size());
  return 0;
}

int cmd_run(const std::string &config, const std::string &side_name, const std::string &out) {
  Harness h = load_harness(config);
  Side side = side_name == "post" ? Side::Post : Side::Pre;
  SolverSession solver(h.max_bits, h.caches);
  RunResult r = execute_complete(h, side, solver);
  std::string text = run_to_json(r).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return 0;
}

int cmd_compare(const std::string &config, const std::string &out) {
  std::string text = read_file(config);
  Harness h = load_harness(config);
  ComparisonResult cr = run_comparison(h);
  ReportDocument doc = build_report(h, cr, text);
  if (!out.empty())
    write_file(out, to_json(doc).dump(1) + "\n");
  std::cout << textual_report(doc);
  return doc.counterexample_count() ? 2 : 0;
}

int cmd_serve(const std::string &path, int port, const std::string &host, bool static_only) {
  ReportService svc(report_from_json(json::parse(read_file(path))), static_only);
  std::cerr << fmt::format("serving {} on http://{}:{}{}\n", path, host, port,
                           static_only ? " (static-only)" : "");
  if (!serve(svc, host, port))
    throw Error(fmt::format("cannot listen on {}:{}", host, port));
  return 0;
}

int cmd_oracle(const std::string &config) {
  Harness h = load_harness(config);
  ComparisonResult cr = run_comparison(h);
  OracleCheck c = oracle_check(h, cr);
  for (const auto &p : c.problems)
    std::cout << "MISMATCH " << p << "\n";
  std::cout << fmt::format("{} terminal combinations, {} diff entries, {} classifications: {}\n",
                           c.pairs_checked, c.diffs_checked, c.classes_checked,
                           c.ok() ? "agree" : fmt::format("{} mismatches", c.problems.size()));
  return c.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Comparative symbolic execution of two program versions"};
  app.require_subcommand(1);

  std::string in, out, config, side = "pre", report, host = "127.0.0.1";
  int port = kDefaultPort;
  bool static_only = false;

  auto *a = app.add_subcommand("asm", "Assemble a source file into a CZB1 container");
  a->add_option("in", in, "Assembly source")->required();
  a->add_option("out", out, "Output container")->required();

  auto *r = app.add_subcommand("run", "Explore one program and dump the execution tree");
  r->add_option("config", config, "Harness configuration")->required();
  r->add_option("--side", side, "Which program to explore")
      ->check(CLI::IsMember({"pre", "post"}));
  r->add_option("-o,--output", out, "Write JSON here instead of stdout");

  auto *c = app.add_subcommand("compare", "Explore, pair, diff and report");
  c->add_option("config", config, "Harness configuration")->required();
  c->add_option("-o,--output", out, "Write the report document here");

  auto *s = app.add_subcommand("serve", "Serve a report over HTTP");
  s->add_option("report", report, "Report document")->required();
  s->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  s->add_option("--host", host, "Bind address");
  s->add_flag("--static-only", static_only, "Serve the document without solver endpoints");

  auto *t = app.add_subcommand("template", "Print a commented configuration skeleton");

  auto *o = app.add_subcommand("oracle", "Cross-check a comparison by exhaustive enumeration");
  o->add_option("config", config, "Harness configuration")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*a)
      return cmd_asm(in, out);
    if (*r)
      return cmd_run(config, side, out);
    if (*c)
      return cmd_compare(config, out);
    if (*s)
      return cmd_serve(report, port, host, static_only);
    if (*t) {
      std::cout << harness_template();
      return 0;
    }
    return cmd_oracle(config);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
