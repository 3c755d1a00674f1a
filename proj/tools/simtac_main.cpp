// simtac CLI: run single trials, sweep the technique parameter space,
// report accuracy/cost tradeoffs, check directives, estimate footprints.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "simtac/bench/run.hpp"
#include "simtac/fmtnum.hpp"
#include "simtac/harness/config.hpp"
#include "simtac/harness/sweep.hpp"
#include "simtac/metrics.hpp"
#include "simtac/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSimAbort = 2;
constexpr int kExitIo = 3;

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw simtac::SimtError("cannot open config file " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            std::optional<std::uint64_t> seed_override) {
  using namespace simtac;
  harness::RunConfig cfg;
  try {
    cfg = harness::load_run_config(load_json_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (seed_override) cfg.seed = *seed_override;

  std::optional<ApproxSpec> spec;
  if (!cfg.directive.empty()) {
    try {
      spec = parse_directive(cfg.directive);
    } catch (const DirectiveError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }

  bench::BaselineCache cache;
  bool aborted = false;
  std::ostringstream rows;
  try {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      bench::TrialSetup setup;
      setup.benchmark = cfg.benchmark;
      setup.spec = spec;
      setup.n = cfg.n;
      setup.seed = cfg.seed;
      setup.trial = trial;
      setup.items_per_thread = cfg.items_per_thread;
      setup.num_teams = cfg.num_teams;
      setup.threads_per_team = cfg.threads_per_team;
      setup.warp_size = cfg.warp_size;
      setup.shared_mem_budget_bytes = cfg.shared_mem_budget_bytes;
      setup.cost = cfg.cost;
      setup.params = cfg.params;
      TrialRecord rec = bench::run_trial(setup, cache);
      if (rec.status != "OK") aborted = true;
      rows << to_csv(rec) << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (out_path.empty()) {
    std::cout << kTrialCsvHeader << "\n" << rows.str();
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return kExitIo;
    }
    out << kTrialCsvHeader << "\n" << rows.str();
    std::cout << "wrote " << out_path << "\n";
  }
  return aborted ? kExitSimAbort : kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, int jobs,
              std::optional<std::uint64_t> seed_override) {
  using namespace simtac;
  harness::SweepConfig cfg;
  try {
    cfg = harness::load_sweep_config(load_json_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (seed_override) cfg.seed = *seed_override;
  try {
    harness::SweepSummary s = harness::execute_sweep(cfg, out_path, jobs, &std::cout);
    std::cout << "completed " << s.total_points << " points (" << s.resumed_points
              << " resumed, " << s.failed_points << " failed) -> " << out_path << "\n";
  } catch (const harness::ConfigFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SimtError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

int cmd_report(const std::string& records_path, double max_error) {
  using namespace simtac;
  std::vector<TrialRecord> records;
  try {
    records = harness::load_records(records_path);
  } catch (const SimtError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  std::cout << render_report(records, max_error);
  return kExitOk;
}

int cmd_parse(const std::string& directive) {
  using namespace simtac;
  try {
    ApproxSpec spec = parse_directive(directive);
    std::cout << "ok: " << unparse(spec) << "\n";
    std::cout << "technique: " << technique_name(spec.technique) << "\n";
    std::cout << "level: " << level_name(spec.level) << "\n";
    if (spec.taf)
      std::cout << "taf: h=" << spec.taf->h_size << " p=" << spec.taf->p_size
                << " threshold=" << format_double(spec.taf->threshold) << "\n";
    if (spec.iact) {
      std::cout << "iact: table_size=" << spec.iact->table_size
                << " threshold=" << format_double(spec.iact->threshold);
      if (spec.iact->tables_per_warp)
        std::cout << " tables_per_warp=" << *spec.iact->tables_per_warp;
      std::cout << "\n";
    }
    if (spec.perfo) {
      std::cout << "perfo: kind=" << perfo_kind_name(spec.perfo->kind);
      if (perfo_kind_uses_modulus(spec.perfo->kind))
        std::cout << " modulus=" << spec.perfo->modulus;
      else
        std::cout << " skip_percent=" << spec.perfo->skip_percent;
      std::cout << "\n";
    }
    std::cout << "inputs: " << spec.inputs.size() << ", outputs: " << spec.outputs.size()
              << "\n";
    return kExitOk;
  } catch (const DirectiveError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const simtac::SimtError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_footprint(const std::string& threads, const std::string& entries,
                  const std::string& entry_bytes, const std::string& device) {
  using namespace simtac;
  try {
    double pct = footprint_per_thread_tables(
        harness::parse_count_expr(threads), harness::parse_count_expr(entries),
        harness::parse_byte_size(entry_bytes), harness::parse_byte_size(device));
    std::cout << format_double(pct) << "%\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simtac: approximate-computing exploration on a deterministic SIMT simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, records_path, directive;
  std::string fp_threads, fp_entries, fp_entry_bytes, fp_device;
  double max_error = 0.10;
  int jobs = 1;
  std::uint64_t seed_value = 0;
  bool seed_set = false;

  CLI::App* run = app.add_subcommand("run", "run one configuration and emit its record");
  run->add_option("--config", config_path, "run config JSON")->required();
  run->add_option("--out", out_path, "write records here instead of stdout");
  run->add_option("--seed", seed_value, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* sweep = app.add_subcommand("sweep", "run a Cartesian parameter sweep");
  sweep->add_option("--config", config_path, "sweep config JSON")->required();
  sweep->add_option("--out", out_path, "records CSV path")->required();
  sweep->add_option("--jobs", jobs, "concurrent trial executors")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed_value, "override the config seed")
      ->each([&](const std::string&) { seed_set = true; });

  CLI::App* report = app.add_subcommand("report", "summarize a records file");
  report->add_option("--records", records_path, "records CSV")->required();
  report->add_option("--max-error", max_error, "error bound as a fraction");

  CLI::App* parse = app.add_subcommand("parse", "check an approx directive");
  parse->add_option("directive", directive, "directive string")->required();

  CLI::App* footprint =
      app.add_subcommand("footprint", "percent of device memory used by per-thread tables");
  footprint->add_option("num_threads", fp_threads)->required();
  footprint->add_option("entries", fp_entries)->required();
  footprint->add_option("entry_bytes", fp_entry_bytes)->required();
  footprint->add_option("device_bytes", fp_device)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  std::optional<std::uint64_t> seed_override;
  if (seed_set) seed_override = seed_value;

  if (run->parsed()) return cmd_run(config_path, out_path, seed_override);
  if (sweep->parsed()) return cmd_sweep(config_path, out_path, jobs, seed_override);
  if (report->parsed()) return cmd_report(records_path, max_error);
  if (parse->parsed()) return cmd_parse(directive);
  if (footprint->parsed())
    return cmd_footprint(fp_threads, fp_entries, fp_entry_bytes, fp_device);
  return kExitUsage;
}
