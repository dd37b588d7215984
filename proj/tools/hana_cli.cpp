// Command-line front end: runs the service-assurance and self-healing
// studies, validates configs, lists the toolbox, and replays logs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hana/harness/runner.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_dir;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool do_assert = false;
};

std::string default_config_dir() {
  if (const char* env = std::getenv("HANA_CONFIG_DIR")) return env;
  return "./configs";
}

hana::ScenarioConfig scenario(const Options& opt, const std::string& file) {
  return hana::load_scenario(opt.config_dir + "/" + file);
}

hana::Knowledge knowledge(const Options& opt) {
  return hana::load_knowledge(opt.config_dir + "/knowledge.json");
}

int run_case_a_cmd(const Options& opt) {
  const auto cfg = scenario(opt, "case_a.json");
  const auto know = knowledge(opt);
  const auto res = hana::run_case_a(cfg, know, opt.seed);

  fs::create_directories(opt.out_dir);
  {
    std::ofstream csv(opt.out_dir + "/case_a_trace.csv");
    hana::write_trace_csv(res, csv);
  }
  for (const auto& [mode, log] : res.logs)
    hana::write_lines(log, opt.out_dir + "/case_a_" +
                               std::string(hana::mode_token(mode)) + ".log");

  std::cout << "service assurance: flow " << res.flow_id << ", bound "
            << res.sla_bound << " Mbps, congestion from t="
            << res.congestion_start_ms / 1000 << "s\n";
  for (const auto& [mode, trace] : res.traces) {
    double lo = 1e18;
    for (const auto& [t, r] : trace)
      if (t >= res.congestion_start_ms) lo = std::min(lo, r);
    std::cout << "  " << hana::mode_token(mode)
              << ": min rate under congestion = " << lo << " Mbps\n";
  }
  std::cout << "wrote " << opt.out_dir << "/case_a_trace.csv\n";

  if (opt.do_assert) {
    const auto bad = hana::check_case_a(res);
    for (const auto& b : bad) std::cerr << "ASSERT FAIL: " << b << "\n";
    if (!bad.empty()) return 1;
    std::cout << "assertions passed\n";
  }
  return 0;
}

int run_case_b_cmd(const Options& opt) {
  const auto cfg = scenario(opt, "case_b.json");
  const auto know = knowledge(opt);
  const auto res = hana::run_case_b(cfg, know, opt.seed);

  fs::create_directories(opt.out_dir);
  {
    std::ofstream csv(opt.out_dir + "/case_b_mttr.csv");
    hana::write_mttr_csv(res, csv);
  }
  for (const auto& [key, log] : res.logs)
    hana::write_lines(log, opt.out_dir + "/case_b_" +
                               std::string(hana::to_string(key.first)) + "_" +
                               std::string(hana::mode_token(key.second)) + ".log");

  std::cout << hana::render_mttr_table(res);
  std::cout << "wrote " << opt.out_dir << "/case_b_mttr.csv\n";

  if (opt.do_assert) {
    const auto bad = hana::check_case_b(res);
    for (const auto& b : bad) std::cerr << "ASSERT FAIL: " << b << "\n";
    if (!bad.empty()) return 1;
    std::cout << "assertions passed\n";
  }
  return 0;
}

int run_validate(const Options& opt) {
  scenario(opt, "case_a.json");
  scenario(opt, "case_b.json");
  knowledge(opt);
  std::cout << "configs in " << opt.config_dir << " are valid\n";
  return 0;
}

int run_dump_tools() {
  const auto reg = hana::register_defaults();
  for (const auto* d : reg.list()) {
    std::cout << d->name << "  latency=" << d->latency_ms << "ms  args:";
    for (const auto& [name, type] : d->arg_schema) {
      const char* t = type == hana::ArgType::Str   ? "str"
                      : type == hana::ArgType::Int ? "int"
                                                   : "num";
      std::cout << " " << name << ":" << t;
    }
    std::cout << "\n";
  }
  return 0;
}

int run_replay(const Options& opt, const std::string& log_path) {
  const auto lines = hana::read_log_file(log_path);
  if (lines.empty()) {
    std::cerr << "empty log file\n";
    return 1;
  }
  const hana::ojson header = hana::ojson::parse(lines.front());
  const std::string name = header.value("scenario", "");
  hana::ScenarioConfig cfg;
  bool found = false;
  for (const char* file : {"case_a.json", "case_b.json"}) {
    auto c = scenario(opt, file);
    if (c.name == name) {
      cfg = std::move(c);
      found = true;
      break;
    }
  }
  if (!found) throw hana::ConfigError("no config matches scenario '" + name + "'");
  const auto res = hana::replay(lines, cfg, knowledge(opt));
  if (!res.error.empty()) {
    std::cerr << "replay error: " << res.error << "\n";
    return 1;
  }
  if (!res.ok) {
    std::cerr << "replay diverged at line " << res.first_divergence + 1 << "\n"
              << "  expected: " << res.expected << "\n"
              << "  actual:   " << res.actual << "\n";
    return 1;
  }
  std::cout << "replay matched: " << lines.size() << " lines byte-identical\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HANA network-automation simulator"};
  app.require_subcommand(1);

  Options opt;
  opt.config_dir = default_config_dir();
  app.add_option("--config", opt.config_dir, "Config directory")
      ->envname("HANA_CONFIG_DIR");
  app.add_option("--out", opt.out_dir, "Output directory for CSVs and logs");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "Override scenario seed");
  app.add_flag("--assert", opt.do_assert,
               "Fail (exit 1) when study outcomes violate expectations");

  auto* cmd_a = app.add_subcommand("case-a", "Run the service-assurance study");
  auto* cmd_b = app.add_subcommand("case-b", "Run the self-healing MTTR study");
  auto* cmd_all = app.add_subcommand("all", "Run both studies");
  auto* cmd_val = app.add_subcommand("validate", "Validate config files");
  auto* cmd_tools = app.add_subcommand("dump-tools", "List registered tools");
  auto* cmd_replay = app.add_subcommand("replay", "Re-run a log and compare");
  std::string log_path;
  cmd_replay->add_option("log", log_path, "Log file to replay")->required();

  // Let global flags appear after the subcommand name too.
  for (auto* sub : {cmd_a, cmd_b, cmd_all, cmd_val, cmd_tools, cmd_replay})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (seed_opt->count() > 0) opt.seed = seed_val;

  try {
    if (cmd_val->parsed()) return run_validate(opt);
    if (cmd_tools->parsed()) return run_dump_tools();
    if (cmd_replay->parsed()) return run_replay(opt, log_path);
    if (cmd_a->parsed()) return run_case_a_cmd(opt);
    if (cmd_b->parsed()) return run_case_b_cmd(opt);
    if (cmd_all->parsed()) {
      const int ra = run_case_a_cmd(opt);
      const int rb = run_case_b_cmd(opt);
      return ra != 0 ? ra : rb;
    }
  } catch (const hana::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
