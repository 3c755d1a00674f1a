#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "simtac/fmtnum.hpp"
#include "simtac/trial.hpp"

namespace simtac {

/// One of ten equal-width error bins with its fastest/slowest deciles.
struct ErrorInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::vector<TrialRecord> fastest;  // top decile by est_speedup
  std::vector<TrialRecord> slowest;  // bottom decile by est_speedup
};

struct BenchmarkIntervalReport {
  std::string benchmark;
  std::vector<ErrorInterval> intervals;  // always 10
};

namespace detail {

inline bool finite_ok(const TrialRecord& r) {
  return r.status == "OK" && std::isfinite(r.error_value);
}

}  // namespace detail

/// Divide each benchmark's (finite) error range into ten equal-width
/// intervals and list the fastest and slowest 10% of configurations in
/// each, with max(1, count/10) selections per side. Ordering is
/// deterministic: speedup first, configuration key as the tiebreak.
/// Records with infinite error or FAILED status are excluded.
inline std::vector<BenchmarkIntervalReport> error_interval_report(
    const std::vector<TrialRecord>& records) {
  std::map<std::string, std::vector<TrialRecord>> by_bench;
  for (const TrialRecord& r : records)
    if (detail::finite_ok(r)) by_bench[r.benchmark].push_back(r);

  std::vector<BenchmarkIntervalReport> out;
  for (auto& [bench, recs] : by_bench) {
    BenchmarkIntervalReport rep;
    rep.benchmark = bench;
    double lo = recs.front().error_value, hi = recs.front().error_value;
    for (const TrialRecord& r : recs) {
      lo = std::min(lo, r.error_value);
      hi = std::max(hi, r.error_value);
    }
    double width = (hi - lo) / 10.0;
    rep.intervals.resize(10);
    std::vector<std::vector<TrialRecord>> bins(10);
    for (const TrialRecord& r : recs) {
      int b = 0;
      if (width > 0.0) {
        b = static_cast<int>((r.error_value - lo) / width);
        if (b > 9) b = 9;  // hi lands in the last bin
      }
      bins[b].push_back(r);
    }
    for (int b = 0; b < 10; ++b) {
      ErrorInterval& iv = rep.intervals[b];
      iv.lo = lo + b * width;
      iv.hi = b == 9 ? hi : lo + (b + 1) * width;
      iv.count = bins[b].size();
      if (bins[b].empty()) continue;
      std::size_t k = std::max<std::size_t>(1, bins[b].size() / 10);
      auto faster = [](const TrialRecord& a, const TrialRecord& b2) {
        if (a.est_speedup != b2.est_speedup) return a.est_speedup > b2.est_speedup;
        return a.sort_key() < b2.sort_key();
      };
      std::sort(bins[b].begin(), bins[b].end(), faster);
      iv.fastest.assign(bins[b].begin(), bins[b].begin() + k);
      iv.slowest.assign(bins[b].end() - k, bins[b].end());
      std::reverse(iv.slowest.begin(), iv.slowest.end());
    }
    out.push_back(std::move(rep));
  }
  return out;
}

/// Best qualifying record (max est_speedup with error within the bound,
/// inclusive so a zero bound admits exactly the zero-error records) per
/// benchmark/technique pair.
struct BestUnderBound {
  std::string benchmark;
  std::string technique;
  bool found = false;
  TrialRecord record;
};

inline std::vector<BestUnderBound> best_under_error(const std::vector<TrialRecord>& records,
                                                    double max_error) {
  std::map<std::pair<std::string, std::string>, BestUnderBound> best;
  for (const TrialRecord& r : records) {
    if (r.status != "OK") continue;
    auto key = std::make_pair(r.benchmark, r.technique);
    auto& slot = best[key];
    slot.benchmark = r.benchmark;
    slot.technique = r.technique;
    if (!(r.error_value <= max_error) || !std::isfinite(r.error_value)) continue;
    bool better = !slot.found || r.est_speedup > slot.record.est_speedup ||
                  (r.est_speedup == slot.record.est_speedup &&
                   r.sort_key() < slot.record.sort_key());
    if (better) {
      slot.found = true;
      slot.record = r;
    }
  }
  std::vector<BestUnderBound> out;
  for (auto& [k, v] : best) out.push_back(v);
  return out;
}

/// Render the full report: best-under-bound table, the ten-interval
/// fastest/slowest listing, and the items-per-thread vs speedup tradeoff.
/// Pure function of the records; never touches the simulator.
inline std::string render_report(const std::vector<TrialRecord>& records, double max_error) {
  std::ostringstream os;
  os << "== best speedup with error <= " << format_double(max_error * 100.0) << "% ==\n";
  for (const BestUnderBound& b : best_under_error(records, max_error)) {
    os << b.benchmark << " / " << b.technique << ": ";
    if (!b.found) {
      os << "none qualifies\n";
      continue;
    }
    os << format_double(b.record.est_speedup) << "x  error="
       << format_double(b.record.error_value * 100.0) << "%  directive=\""
       << b.record.directive << "\"  ipt=" << b.record.items_per_thread << "\n";
  }

  os << "\n== error intervals (fastest/slowest decile per bin) ==\n";
  for (const BenchmarkIntervalReport& rep : error_interval_report(records)) {
    os << "[" << rep.benchmark << "]\n";
    for (std::size_t b = 0; b < rep.intervals.size(); ++b) {
      const ErrorInterval& iv = rep.intervals[b];
      os << "  bin " << b << " [" << format_double(iv.lo * 100.0) << "%, "
         << format_double(iv.hi * 100.0) << "%] n=" << iv.count << "\n";
      for (const TrialRecord& r : iv.fastest)
        os << "    fastest " << format_double(r.est_speedup) << "x \"" << r.directive
           << "\" level=" << r.level << " ipt=" << r.items_per_thread << "\n";
      for (const TrialRecord& r : iv.slowest)
        os << "    slowest " << format_double(r.est_speedup) << "x \"" << r.directive
           << "\" level=" << r.level << " ipt=" << r.items_per_thread << "\n";
    }
  }

  // Items-per-thread tradeoff: best speedup at each parallelism setting.
  std::map<std::string, std::map<int, double>> tradeoff;
  for (const TrialRecord& r : records) {
    if (r.status != "OK") continue;
    auto& cell = tradeoff[r.benchmark];
    auto it = cell.find(r.items_per_thread);
    if (it == cell.end() || r.est_speedup > it->second) cell[r.items_per_thread] = r.est_speedup;
  }
  os << "\n== items-per-thread vs best speedup ==\n";
  for (auto& [bench, cells] : tradeoff) {
    os << "[" << bench << "]\n";
    for (auto& [ipt, sp] : cells)
      os << "  ipt=" << ipt << " speedup=" << format_double(sp) << "\n";
  }
  return os.str();
}

}  // namespace simtac
