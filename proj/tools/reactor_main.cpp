// reactor: replay event traces through a rule file, check rule sets for
// triggering cycles, and print brute-force occurrences of an expression.
//
// Exit codes: 0 success; 1 triggering cycles (check); 2 bad input;
// 3 the replay stopped on an engine error (the partial report is written).

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "reactor/engine.hpp"
#include "reactor/harness.hpp"
#include "reactor/rules.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_command(const std::string& rules_path, const std::string& trace_path,
                const reactor::RunOptions& opts, const std::string& report_path) {
  const auto rules = reactor::parse_rules(read_file(rules_path));
  const auto trace = reactor::load_trace(read_file(trace_path));
  const auto report = reactor::run_replay(rules, trace, opts);
  const std::string text = report.serialize();
  if (report_path.empty() || report_path == "-") {
    std::cout << text;
  } else {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    out << text;
  }
  if (report.error) {
    std::cerr << "reactor: replay stopped: " << report.error->what() << "\n";
    return 3;
  }
  return 0;
}

int check_command(const std::string& rules_path) {
  const auto rules = reactor::parse_rules(read_file(rules_path));
  const auto graph = reactor::triggering_graph(rules);
  std::cout << "rules " << graph.nodes.size() << "\n";
  for (const auto& [from, to] : graph.edges) {
    std::cout << "edge " << graph.nodes[from] << " -> " << graph.nodes[to] << "\n";
  }
  for (const auto& cycle : graph.cycles) {
    std::cout << "cycle";
    for (const auto& id : cycle) std::cout << " " << id;
    std::cout << "\n";
  }
  std::cout << (graph.acyclic() ? "acyclic" : "cyclic") << "\n";
  return graph.acyclic() ? 0 : 1;
}

int oracle_command(const std::string& expr_text, const std::string& trace_path, bool point) {
  using nlohmann::json;
  const auto expr = reactor::parse_event_expr(expr_text);
  const auto trace = reactor::load_trace(read_file(trace_path));
  if (point) {
    for (const auto& o : reactor::occurrences_point(expr, trace)) {
      std::cout << json{{"time", o.time.value}, {"components", o.components}}.dump() << "\n";
    }
    return 0;
  }
  for (const auto& o : reactor::occurrences(expr, trace)) {
    json bindings = json::object();
    for (const auto& [var, ev] : o.bindings) bindings["?" + var] = ev.id;
    std::cout << json{{"interval", {o.interval.start.value, o.interval.end->value}},
                      {"components", o.components},
                      {"bindings", bindings}}
                     .dump()
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reaction-rule engine over time-stamped event streams"};
  app.require_subcommand(1);

  std::string rules_path;
  std::string trace_path;
  std::string report_path;
  std::string expr_text;
  std::optional<std::int64_t> tick;
  std::size_t chain_limit = 1000;
  bool point = false;

  auto* run = app.add_subcommand("run", "Replay a trace through a rule file");
  run->add_option("--rules", rules_path, "Rule file")->required();
  run->add_option("--trace", trace_path, "Line-delimited JSON trace")->required();
  run->add_option("--tick", tick, "Timer tick period");
  run->add_option("--chain-limit", chain_limit, "Maximum rule-chaining depth")->check(CLI::PositiveNumber);
  run->add_option("--report", report_path, "Report destination (default stdout)");

  auto* check = app.add_subcommand("check", "Parse rules and report triggering-graph cycles");
  check->add_option("--rules", rules_path, "Rule file")->required();

  auto* oracle = app.add_subcommand("oracle", "Print brute-force occurrences of an event expression");
  oracle->add_option("--expr", expr_text, "Event expression")->required();
  oracle->add_option("--trace", trace_path, "Line-delimited JSON trace")->required();
  oracle->add_flag("--point", point, "Use point (terminator-time) semantics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      reactor::RunOptions opts;
      opts.tick = tick;
      opts.chain_limit = chain_limit;
      return run_command(rules_path, trace_path, opts, report_path);
    }
    if (*check) return check_command(rules_path);
    return oracle_command(expr_text, trace_path, point);
  } catch (const std::exception& e) {
    std::cerr << "reactor: " << e.what() << "\n";
    return 2;
  }
}
