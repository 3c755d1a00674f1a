#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "simtac/iact.hpp"

using namespace simtac;

namespace {

WarpContext full_warp(int lanes) {
  WarpContext w;
  w.lane_count = lanes;
  w.active_mask = WarpContext::full_mask(lanes);
  return w;
}

}  // namespace

TEST_CASE("euclidean distance basics and oracle") {
  std::vector<double> x = {1.5, -2.0, 3.0};
  CHECK(euclid_dist(x, x) == 0.0);
  std::vector<double> a = {0, 0}, b = {3, 4};
  CHECK(euclid_dist(a, b) == 5.0);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> val(-50.0, 50.0);
  for (int iter = 0; iter < 500; ++iter) {
    std::size_t dims = 1 + rng() % 8;
    std::vector<double> u(dims), v(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      u[d] = val(rng);
      v[d] = val(rng);
    }
    // Two-loop oracle: square the diffs first, then sum.
    std::vector<double> sq(dims);
    for (std::size_t d = 0; d < dims; ++d) sq[d] = (u[d] - v[d]) * (u[d] - v[d]);
    double total = 0.0;
    for (std::size_t d = 0; d < dims; ++d) total += sq[d];
    CHECK(std::abs(euclid_dist(u, v) - std::sqrt(total)) <= 1e-12);
  }

  std::vector<double> shorter = {1.0};
  CHECK_THROWS_AS(euclid_dist(shorter, a), ConfigError);
}

TEST_CASE("lookup on an empty table misses") {
  MemoTable t(4, 2, 1);
  std::vector<double> q = {0.0, 0.0};
  CHECK_FALSE(t.lookup(q, 100.0).has_value());
}

TEST_CASE("threshold zero still hits exact matches") {
  MemoTable t(2, 2, 1);
  std::vector<double> in = {1.0, 2.0}, out = {9.0};
  t.insert(in, out);
  auto hit = t.lookup(in, 0.0);
  REQUIRE(hit.has_value());
  CHECK(t.entry_output(hit->slot)[0] == 9.0);
}

TEST_CASE("lookup returns the closest entry within threshold") {
  MemoTable t(2, 1, 1);
  std::vector<double> in0 = {0.4}, out0 = {1.0};
  std::vector<double> in1 = {0.2}, out1 = {2.0};
  t.insert(in0, out0);
  t.insert(in1, out1);
  std::vector<double> q = {0.0};
  auto hit = t.lookup(q, 0.3);
  REQUIRE(hit.has_value());
  CHECK(hit->slot == 1);
  CHECK(t.entry_output(hit->slot)[0] == 2.0);
  CHECK_FALSE(t.lookup(q, 0.1).has_value());
}

TEST_CASE("distance ties break to the lowest slot") {
  MemoTable t(2, 1, 1);
  std::vector<double> lo = {-1.0}, hi = {1.0}, o0 = {10.0}, o1 = {20.0};
  t.insert(lo, o0);
  t.insert(hi, o1);
  std::vector<double> q = {0.0};
  auto hit = t.lookup(q, 5.0);
  REQUIRE(hit.has_value());
  CHECK(hit->slot == 0);
}

TEST_CASE("round-robin replacement: insertion i lands in slot i mod s") {
  for (int cap : {1, 2, 3, 5}) {
    MemoTable t(cap, 1, 1);
    for (int i = 0; i < 4 * cap + 1; ++i) {
      std::vector<double> in = {static_cast<double>(i)}, out = {static_cast<double>(10 * i)};
      CHECK(t.rr_cursor() == i % cap);
      t.insert(in, out);
      CHECK(t.entry_input(i % cap)[0] == static_cast<double>(i));
      CHECK(t.occupancy() == std::min(i + 1, cap));
    }
  }
}

TEST_CASE("select_writer prefers the input farthest from its nearest entry") {
  MemoTable t(4, 1, 1);
  auto input_of = [](int lane) -> std::span<const double> {
    static const std::vector<std::vector<double>> inputs = {{1.0}, {5.0}, {0.5}, {4.0}};
    return {inputs[lane].data(), 1};
  };

  std::vector<int> single = {2};
  CHECK(select_writer(single, input_of, t) == 2);

  // Empty table: all candidates at +inf, lowest lane id wins.
  std::vector<int> pair = {1, 3};
  CHECK(select_writer(pair, input_of, t) == 1);

  std::vector<double> zero = {0.0}, out = {0.0};
  t.insert(zero, out);
  std::vector<int> lanes01 = {0, 1};
  CHECK(select_writer(lanes01, input_of, t) == 1);  // dist 5 beats dist 1
}

TEST_CASE("warp_memo_phase with one table per lane is independent memoization") {
  IactConfig cfg;
  cfg.table_size = 2;
  cfg.threshold = 0.25;
  cfg.input_dims = 1;
  cfg.output_dims = 1;
  int lanes = 4;
  std::vector<MemoTable> shared_tables;
  for (int i = 0; i < lanes; ++i) shared_tables.emplace_back(2, 1, 1);
  std::vector<MemoTable> solo_tables;
  for (int i = 0; i < lanes; ++i) solo_tables.emplace_back(2, 1, 1);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(0.0, 2.0);
  WarpContext warp = full_warp(lanes);
  for (int step = 0; step < 20; ++step) {
    std::vector<std::vector<double>> inputs(lanes);
    for (int l = 0; l < lanes; ++l) inputs[l] = {val(rng)};
    auto input_of = [&](int lane) -> std::span<const double> {
      return {inputs[lane].data(), 1};
    };
    auto evaluate = [&](int lane) { return std::vector<double>{inputs[lane][0] * 3.0}; };

    WarpMemoResult got = warp_memo_phase(warp, cfg, shared_tables, input_of, evaluate);

    // Per-lane reference: private lookup-then-insert-on-miss.
    for (int l = 0; l < lanes; ++l) {
      auto hit = solo_tables[l].lookup(input_of(l), cfg.threshold);
      CHECK(hit.has_value() == got.hit[l]);
      if (hit) {
        CHECK(got.outputs[l][0] == solo_tables[l].entry_output(hit->slot)[0]);
      } else {
        solo_tables[l].insert(input_of(l), evaluate(l));
      }
    }
  }
}

TEST_CASE("identical inputs into one shared empty table: all miss, one write") {
  IactConfig cfg;
  cfg.table_size = 4;
  cfg.threshold = 0.5;
  std::vector<MemoTable> tables;
  tables.emplace_back(4, 1, 1);
  std::vector<double> input = {2.5};
  auto input_of = [&](int) -> std::span<const double> { return {input.data(), 1}; };
  int evaluations = 0;
  auto evaluate = [&](int) {
    ++evaluations;
    return std::vector<double>{7.0};
  };

  WarpMemoResult r = warp_memo_phase(full_warp(4), cfg, tables, input_of, evaluate);
  for (int l = 0; l < 4; ++l) CHECK_FALSE(r.hit[l]);
  CHECK(evaluations == 4);
  REQUIRE(r.writes.size() == 1);
  CHECK(tables[0].occupancy() == 1);

  // Next invocation: every lane hits the cached value from the warp mate.
  WarpMemoResult again = warp_memo_phase(full_warp(4), cfg, tables, input_of, evaluate);
  for (int l = 0; l < 4; ++l) {
    CHECK(again.hit[l]);
    CHECK(again.outputs[l][0] == 7.0);
  }
  CHECK(evaluations == 4);
  CHECK(tables[0].occupancy() == 1);
}

TEST_CASE("at most one write per table per invocation, always") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> val(0.0, 4.0);
  for (int tpw : {1, 2, 4}) {
    IactConfig cfg;
    cfg.table_size = 2;
    cfg.threshold = 0.3;
    cfg.tables_per_warp = tpw;
    std::vector<MemoTable> tables;
    for (int t = 0; t < tpw; ++t) tables.emplace_back(2, 1, 1);
    for (int step = 0; step < 50; ++step) {
      std::vector<std::vector<double>> inputs(4);
      for (auto& in : inputs) in = {val(rng)};
      auto input_of = [&](int lane) -> std::span<const double> {
        return {inputs[lane].data(), 1};
      };
      WarpMemoResult r = warp_memo_phase(full_warp(4), cfg, tables, input_of, [&](int lane) {
        return std::vector<double>{inputs[lane][0] + 1.0};
      });
      std::set<int> written;
      for (auto& w : r.writes) CHECK(written.insert(w.table).second);
    }
  }
}

TEST_CASE("reads see only previous invocations (two-phase visibility)") {
  IactConfig cfg;
  cfg.table_size = 2;
  cfg.threshold = 10.0;
  std::vector<MemoTable> tables;
  tables.emplace_back(2, 1, 1);
  std::vector<double> input = {1.0};
  auto input_of = [&](int) -> std::span<const double> { return {input.data(), 1}; };
  // Both lanes present the same input to an empty shared table: if writes
  // were visible within the invocation, lane 1 would hit lane 0's insert.
  WarpMemoResult r = warp_memo_phase(full_warp(2), cfg, tables, input_of,
                                     [&](int) { return std::vector<double>{3.0}; });
  CHECK_FALSE(r.hit[0]);
  CHECK_FALSE(r.hit[1]);
}

TEST_CASE("table group footprint formula") {
  CHECK(table_group_bytes(4, 2, 5, 1) == 4 * 2 * 6 * 8 + 4 * 8);
  CHECK(table_group_bytes(1, 1, 1, 1) == 16 + 8);
}

TEST_CASE("lane-to-table mapping is contiguous blocks") {
  CHECK(lane_table_index(0, 32, 4) == 0);
  CHECK(lane_table_index(7, 32, 4) == 0);
  CHECK(lane_table_index(8, 32, 4) == 1);
  CHECK(lane_table_index(31, 32, 4) == 3);
  CHECK(lane_table_index(5, 32, 32) == 5);
}

TEST_CASE("iact config validation") {
  IactConfig bad;
  bad.table_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  IactConfig cfg;
  cfg.tables_per_warp = 3;
  CHECK_THROWS_AS(cfg.resolve_tables_per_warp(32), ConfigError);
  IactConfig ok;
  CHECK(ok.resolve_tables_per_warp(32) == 32);
}
