#include "dssp/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dssp/runner.hpp"
#include "dssp/simnet.hpp"

namespace dssp {

namespace fs = std::filesystem;

RunResult execute(const ExperimentConfig& config, std::optional<double> deadline_s) {
  if (config.mode == RunMode::Threaded) {
    RunOptions options;
    options.deadline_s = deadline_s;
    return run_threaded(config, options);
  }
  return run_simulation(config);
}

std::string comparison_csv_header() {
  return "paradigm,s_lower,r_max,updates_total,max_staleness,total_wait_s,duration_s,time_to_target_s,"
         "final_loss\n";
}

std::string comparison_csv_row(const ExperimentConfig& config, const MetricsReport& report) {
  double wait = 0.0;
  for (const auto& w : report.workers) wait += w.wait_s;
  char buf[512];
  char target[64] = "NA";
  if (report.time_to_target) std::snprintf(target, sizeof target, "%.6f", *report.time_to_target);
  std::snprintf(buf, sizeof buf, "%s,%d,%d,%llu,%d,%.6f,%.6f,%s,%.9g\n",
                std::string(to_string(config.paradigm)).c_str(), config.staleness.s_lower,
                config.staleness.r_max, static_cast<unsigned long long>(report.updates_applied),
                std::max(report.max_staleness(), 0), wait, report.duration_s, target, report.final_loss);
  return buf;
}

namespace {

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << contents;
}

std::string loss_curve_csv(const MetricsReport& report) {
  std::string out = "update,time_s,loss\n";
  char buf[128];
  for (const auto& s : report.loss_curve) {
    std::snprintf(buf, sizeof buf, "%llu,%.6f,%.9g\n", static_cast<unsigned long long>(s.update), s.time,
                  s.loss);
    out += buf;
  }
  return out;
}

class IncompleteRun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string incomplete_message(const MetricsReport& report) {
  std::string stuck;
  for (auto w : report.stuck) stuck += (stuck.empty() ? "" : ",") + std::to_string(w);
  return "run incomplete: " + report.incomplete_reason + " (stuck workers {" + stuck + "})";
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool trace = false;
  std::optional<double> deadline;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("config", flags.config_path, "experiment config file")->required();
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--out", flags.out_dir, "output directory");
}

/// Raw (unvalidated) config with CLI overrides applied.
ExperimentConfig load_with_overrides(const CommonFlags& flags) {
  auto config = load_config(flags.config_path);
  if (flags.seed) config.seed = *flags.seed;
  return config;
}

MetricsReport run_checked(const ExperimentConfig& config, std::optional<double> deadline,
                          RunResult* keep = nullptr) {
  auto result = execute(config, deadline);
  auto report = result.report;
  if (keep) *keep = std::move(result);
  if (!report.complete && !keep) throw IncompleteRun(incomplete_message(report));
  return report;
}

std::pair<int, int> parse_range(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("s", "expected a range like 3..15, got '" + text + "'");
  }
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parameter-server synchronization experiments (BSP, ASP, SSP, DSSP)"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "execute one experiment, write report CSV and trace");
  add_common(run_cmd, run_flags);
  run_cmd->add_flag("--trace", run_flags.trace, "write the event trace");
  run_cmd->add_option("--deadline", run_flags.deadline, "wall budget in seconds (threaded mode)");

  CommonFlags cmp_flags;
  std::string paradigms = "bsp,asp,ssp,dssp";
  auto* cmp_cmd = app.add_subcommand("compare", "run several paradigms on one scenario");
  add_common(cmp_cmd, cmp_flags);
  cmp_cmd->add_option("--paradigms", paradigms, "comma-separated paradigms");
  cmp_cmd->add_option("--deadline", cmp_flags.deadline, "wall budget per run in seconds (threaded mode)");

  CommonFlags sweep_flags;
  std::string range = "3..15";
  auto* sweep_cmd = app.add_subcommand("sweep-ssp", "sweep the SSP staleness threshold");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--s", range, "threshold range lo..hi");
  sweep_cmd->add_option("--deadline", sweep_flags.deadline, "wall budget per run in seconds (threaded mode)");

  CommonFlags check_flags;
  auto* check_cmd = app.add_subcommand("check", "validate a config and print its normalized form");
  check_cmd->add_option("config", check_flags.config_path, "experiment config file")->required();
  check_cmd->add_option("--seed", check_flags.seed, "override the config seed");

  std::vector<std::string> argv_storage{"dssp"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*check_cmd) {
      auto config = validate_config(load_with_overrides(check_flags));
      out << serialize_config(config);
      return kExitOk;
    }

    if (*run_cmd) {
      auto config = validate_config(load_with_overrides(run_flags));
      fs::create_directories(run_flags.out_dir);
      RunResult result;
      auto report = run_checked(config, run_flags.deadline, &result);
      write_file(fs::path(run_flags.out_dir) / "report.csv", format_report_csv(report));
      write_file(fs::path(run_flags.out_dir) / "loss.csv", loss_curve_csv(report));
      if (run_flags.trace) write_file(fs::path(run_flags.out_dir) / "trace.tsv", format_trace(result.trace));
      if (!report.complete) throw IncompleteRun(incomplete_message(report));
      out << to_string(config.paradigm) << ": " << report.updates_applied << " updates, max staleness "
          << std::max(report.max_staleness(), 0) << ", final loss " << report.final_loss << '\n';
      return kExitOk;
    }

    if (*cmp_cmd) {
      auto base = load_with_overrides(cmp_flags);
      validate_config(base);
      std::string csv = comparison_csv_header();
      std::stringstream list(paradigms);
      for (std::string name; std::getline(list, name, ',');) {
        auto config = base;
        config.paradigm = parse_paradigm(name);
        config = validate_config(config);
        csv += comparison_csv_row(config, run_checked(config, cmp_flags.deadline));
      }
      fs::create_directories(cmp_flags.out_dir);
      write_file(fs::path(cmp_flags.out_dir) / "compare.csv", csv);
      out << csv;
      return kExitOk;
    }

    if (*sweep_cmd) {
      auto base = load_with_overrides(sweep_flags);
      auto [lo, hi] = parse_range(range);
      if (lo < 0 || hi < lo) throw ConfigError("s", "range must satisfy 0 <= lo <= hi");
      std::string csv = comparison_csv_header();
      for (int s = lo; s <= hi; ++s) {
        auto config = base;
        config.paradigm = Paradigm::SSP;
        config.staleness = {s, 0};
        config = validate_config(config);
        csv += comparison_csv_row(config, run_checked(config, sweep_flags.deadline));
      }
      fs::create_directories(sweep_flags.out_dir);
      write_file(fs::path(sweep_flags.out_dir) / "sweep_ssp.csv", csv);
      out << csv;
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: bad config: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const DeadlockError& e) {
    err << "error: deadlock: " << e.what() << '\n';
    return kExitDeadlock;
  } catch (const DivergenceError& e) {
    err << "error: divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const IncompleteRun& e) {
    err << "error: " << e.what() << '\n';
    return kExitIncomplete;
  } catch (const ProtocolError& e) {
    err << "error: protocol violation: " << e.what() << '\n';
    return kExitProtocol;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace dssp
