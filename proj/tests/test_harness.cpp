#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "simtac/harness/config.hpp"
#include "simtac/harness/sweep.hpp"
#include "simtac/report.hpp"

using namespace simtac;
using namespace simtac::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

SweepConfig small_sweep() {
  SweepConfig cfg;
  cfg.benchmark = "synthetic-constant";
  cfg.technique = "taf";
  cfg.n = 4096;
  cfg.seed = 77;
  cfg.trials = 1;
  cfg.h_size = {1, 2};
  cfg.p_size = {2, 4};
  cfg.taf_threshold = {0.5, std::numeric_limits<double>::infinity()};
  cfg.items_per_thread = {8, 16};
  return cfg;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("simtac_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("trial records survive a CSV round trip") {
  TrialRecord r;
  r.benchmark = "blackscholes";
  r.technique = "iact";
  r.directive = "memo(in:2:0.5:4) level(warp) in(option[i*5:5]) out(price[i])";
  r.level = "warp";
  r.num_teams = 64;
  r.threads_per_team = 64;
  r.warp_size = 32;
  r.items_per_thread = 16;
  r.n = 65536;
  r.seed = 42;
  r.trial = 0;
  r.error_metric = "mape";
  r.error_value = 0.0123456789012345;
  r.approx_rate = 0.875;
  r.divergent_fraction = 0.0;
  r.baseline_cost = 16.0;
  r.approx_cost = 3.5;
  r.est_speedup = 16.0 / 3.5;
  TrialRecord back = from_csv(to_csv(r));
  CHECK(back.benchmark == r.benchmark);
  CHECK(back.directive == r.directive);
  CHECK(back.error_value == r.error_value);
  CHECK(back.est_speedup == r.est_speedup);
  CHECK(back.sort_key() == r.sort_key());

  TrialRecord inf_rec = r;
  inf_rec.error_value = std::numeric_limits<double>::infinity();
  CHECK(std::isinf(from_csv(to_csv(inf_rec)).error_value));
}

TEST_CASE("sweep expansion covers the full Cartesian product") {
  SweepConfig cfg = small_sweep();
  auto points = expand_sweep(cfg);
  CHECK(points.size() == 2 * 2 * 2 * 2);  // h x p x thr x ipt

  // Table-2 sized TAF grid: 5 x 9 x 9 = 405 points.
  SweepConfig table2 = small_sweep();
  table2.h_size = {1, 2, 3, 4, 5};
  table2.p_size = {2, 4, 8, 16, 32, 64, 128, 256, 512};
  table2.taf_threshold = {0.3, 0.6, 0.9, 1.2, 1.5, 3, 5, 20,
                          std::numeric_limits<double>::infinity()};
  table2.items_per_thread = {32};
  CHECK(expand_sweep(table2).size() == 405);
}

TEST_CASE("sweep output is deterministic, sorted, and resumable") {
  TempDir dir;
  SweepConfig cfg = small_sweep();

  std::string out1 = dir.file("records.csv");
  SweepSummary s1 = execute_sweep(cfg, out1, 1);
  CHECK(s1.total_points == 16);
  CHECK(s1.failed_points == 0);

  // Duplicate invocation: byte-identical output.
  std::string out2 = dir.file("records2.csv");
  execute_sweep(cfg, out2, 1);
  CHECK(slurp(out1) == slurp(out2));

  // Concurrent execution: same bytes.
  std::string out4 = dir.file("records4.csv");
  execute_sweep(cfg, out4, 4);
  CHECK(slurp(out1) == slurp(out4));

  // Simulated kill at 50%: seed the .part file with half the records, the
  // resumed sweep must not recompute them and must produce identical bytes.
  std::string out3 = dir.file("records3.csv");
  {
    std::vector<TrialRecord> records = load_records(out1);
    std::ofstream part(out3 + ".part");
    for (std::size_t i = 0; i < records.size() / 2; ++i)
      part << to_csv(records[i]) << "\n";
  }
  SweepSummary s3 = execute_sweep(cfg, out3, 1);
  CHECK(s3.resumed_points == 8);
  CHECK(slurp(out1) == slurp(out3));
  CHECK_FALSE(fs::exists(out3 + ".part"));

  // Sidecar carries the sweep config.
  CHECK(fs::exists(out1 + ".json"));
  json sidecar = json::parse(slurp(out1 + ".json"));
  CHECK(sidecar.at("benchmark") == "synthetic-constant");
  CHECK(sidecar.at("taf").at("threshold").back() == "inf");
}

TEST_CASE("a stale part file from another sweep is ignored, not merged") {
  TempDir dir;
  SweepConfig cfg = small_sweep();
  std::string out = dir.file("records.csv");
  {
    TrialRecord alien;
    alien.benchmark = "kmeans";
    alien.technique = "iact";
    alien.directive = "memo(in:2:0.5) in(p[i*2:2]) out(d[i*8:8])";
    alien.n = 64;
    std::ofstream part(out + ".part");
    part << to_csv(alien) << "\n";
  }
  SweepSummary s = execute_sweep(cfg, out, 1);
  CHECK(s.resumed_points == 0);
  auto records = load_records(out);
  CHECK(records.size() == 16);
  for (const TrialRecord& r : records) CHECK(r.benchmark == "synthetic-constant");
}

TEST_CASE("failed points are recorded and the sweep continues") {
  TempDir dir;
  SweepConfig cfg = small_sweep();
  cfg.h_size = {1, 5};
  cfg.p_size = {2};
  cfg.taf_threshold = {1.0};
  cfg.items_per_thread = {8};
  // Budget fits the h=1 windows but not the h=5 ones: one point fails,
  // the other completes, both are recorded.
  cfg.shared_mem_budget_bytes = 64 * (8 + 16) + 8;
  auto points = expand_sweep(cfg);
  REQUIRE(points.size() == 2);

  std::string out = dir.file("records.csv");
  SweepSummary summary = execute_sweep(cfg, out, 1);
  CHECK(summary.failed_points == 1);
  auto records = load_records(out);
  REQUIRE(records.size() == 2);
  int failed = 0;
  for (const TrialRecord& r : records)
    if (r.status == "FAILED") {
      ++failed;
      CHECK(r.reason.find("arena overflow") != std::string::npos);
    }
  CHECK(failed == 1);
}

TEST_CASE("worked sweep-point values: blackscholes TAF rate and kmeans iACT overhead") {
  bench::BaselineCache cache;
  // TAF h=2 p=8 thr=inf over exactly 20 steps per thread: two full
  // (h+p)-cycles, approximation rate 16/20.
  bench::TrialSetup bs;
  bs.benchmark = "blackscholes";
  ApproxSpec taf;
  taf.technique = Technique::kTaf;
  taf.taf = TafConfig{2, 8, std::numeric_limits<double>::infinity()};
  taf.outputs.push_back(ArraySection{"p", {1, 0}, SectionDim::literal(1), SectionDim::literal(1)});
  bs.spec = taf;
  bs.num_teams = 4;
  bs.items_per_thread = 20;
  bs.n = 4 * 64 * 20;
  TrialRecord bs_rec = bench::run_trial(bs, cache);
  CHECK(bs_rec.status == "OK");
  CHECK(bs_rec.approx_rate == 0.8);

  // iACT at threshold 0 on kmeans: exact assignments, but every invocation
  // pays the lookup scan, so the run is slower than the baseline.
  bench::TrialSetup km;
  km.benchmark = "kmeans";
  km.n = 1024;
  ApproxSpec iact;
  iact.technique = Technique::kIact;
  IactConfig icfg;
  icfg.table_size = 4;
  icfg.threshold = 0.0;
  iact.iact = icfg;
  iact.inputs.push_back(ArraySection{"x", {1, 0}, SectionDim::literal(2), SectionDim::literal(1)});
  iact.outputs.push_back(ArraySection{"d", {1, 0}, SectionDim::literal(8), SectionDim::literal(1)});
  km.spec = iact;
  TrialRecord km_rec = bench::run_trial(km, cache);
  CHECK(km_rec.status == "OK");
  CHECK(km_rec.error_value == 0.0);
  CHECK(km_rec.est_speedup < 1.0);

  // SMALL:4 perforation skips exactly one encounter in four.
  bench::TrialSetup perfo;
  perfo.benchmark = "synthetic-constant";
  ApproxSpec pspec;
  pspec.technique = Technique::kPerfo;
  pspec.perfo = PerfoConfig{PerfoKind::kSmall, 4, 0};
  perfo.spec = pspec;
  perfo.num_teams = 2;
  perfo.items_per_thread = 32;
  perfo.n = 2 * 64 * 32;
  TrialRecord perfo_rec = bench::run_trial(perfo, cache);
  CHECK(perfo_rec.status == "OK");
  CHECK(perfo_rec.approx_rate == 0.25);

  // TAF at threshold 0 on the strictly varying portfolio never activates.
  bench::TrialSetup exact;
  exact.benchmark = "blackscholes";
  exact.n = 8192;
  ApproxSpec tight = taf;
  tight.taf = TafConfig{2, 8, 0.0};
  exact.spec = tight;
  TrialRecord exact_rec = bench::run_trial(exact, cache);
  CHECK(exact_rec.status == "OK");
  CHECK(exact_rec.approx_rate == 0.0);
  CHECK(exact_rec.error_value == 0.0);
}

TEST_CASE("report renders from records alone") {
  TempDir dir;
  SweepConfig cfg = small_sweep();
  std::string out = dir.file("records.csv");
  execute_sweep(cfg, out, 1);
  auto records = load_records(out);
  std::string report = render_report(records, 0.10);
  CHECK(report.find("synthetic-constant") != std::string::npos);
  CHECK(report.find("ipt=8") != std::string::npos);
  // Reproducible from the file alone.
  CHECK(render_report(load_records(out), 0.10) == report);
}

TEST_CASE("config files parse with defaults and validation") {
  json j = {
      {"benchmark", "blackscholes"},
      {"technique", "taf"},
      {"taf", {{"h_size", {1, 2}}, {"p_size", {4}}, {"threshold", {0.5, "inf"}}}},
  };
  SweepConfig cfg = load_sweep_config(j);
  CHECK(cfg.benchmark == "blackscholes");
  CHECK(cfg.h_size == std::vector<int>{1, 2});
  REQUIRE(cfg.taf_threshold.size() == 2);
  CHECK(std::isinf(cfg.taf_threshold[1]));

  json bad = {{"benchmark", "blackscholes"}, {"technique", "sorcery"}};
  CHECK_THROWS_AS(load_sweep_config(bad), ConfigFileError);

  json run = {{"benchmark", "kmeans"}, {"directive", "memo(out:1:2:3) out(d[0:8])"},
              {"trials", 3}};
  RunConfig rc = load_run_config(run);
  CHECK(rc.trials == 3);
  CHECK(rc.benchmark == "kmeans");
}

TEST_CASE("count and byte-size expressions") {
  CHECK(parse_count_expr("2^27") == 134217728.0);
  CHECK(parse_count_expr("5") == 5.0);
  CHECK(parse_byte_size("16GiB") == 16.0 * 1073741824.0);
  CHECK(parse_byte_size("36") == 36.0);
  CHECK(parse_byte_size("2^34") == std::pow(2.0, 34));
  CHECK(parse_byte_size("1kb") == 1000.0);
  CHECK_THROWS_AS(parse_count_expr("banana"), ConfigFileError);
}
