#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "simtac/errors.hpp"
#include "simtac/fmtnum.hpp"

namespace simtac {

/// One sweep point. Serialized as one CSV row with the fixed column order
/// of kTrialCsvHeader; doubles use shortest round-trip formatting so record
/// files are byte-identical across runs and machines.
struct TrialRecord {
  std::string benchmark;
  std::string technique;  // taf | iact | perfo | none
  std::string directive;  // canonical directive string, empty for baseline
  std::string level = "thread";
  int num_teams = 0;
  int threads_per_team = 0;
  int warp_size = 0;
  int items_per_thread = 0;
  long long n = 0;
  std::uint64_t seed = 0;
  int trial = 0;
  std::string status = "OK";  // OK | FAILED
  std::string reason;         // failure reason, empty when OK
  std::string error_metric;   // mape | mcr
  double error_value = 0.0;
  double approx_rate = 0.0;
  double divergent_fraction = 0.0;
  double baseline_cost = 0.0;
  double approx_cost = 0.0;
  double est_speedup = 0.0;
  long long baseline_iters = 0;  // 0 when not iterative
  long long approx_iters = 0;

  /// Sort key: every configuration field, so record files have one
  /// canonical order regardless of execution interleaving.
  std::string sort_key() const {
    std::ostringstream os;
    os << benchmark << '\x1f' << technique << '\x1f' << directive << '\x1f' << level << '\x1f'
       << num_teams << '\x1f' << threads_per_team << '\x1f' << warp_size << '\x1f'
       << items_per_thread << '\x1f' << n << '\x1f' << seed << '\x1f' << trial;
    return os.str();
  }
};

inline constexpr const char* kTrialCsvHeader =
    "benchmark,technique,directive,level,num_teams,threads_per_team,warp_size,"
    "items_per_thread,n,seed,trial,status,reason,error_metric,error_value,approx_rate,"
    "divergent_fraction,baseline_cost,approx_cost,est_speedup,baseline_iters,approx_iters";

namespace detail {

inline std::string csv_quote(const std::string& s) {
  bool needs = s.find_first_of(",\"\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace detail

inline std::string to_csv(const TrialRecord& r) {
  std::ostringstream os;
  os << detail::csv_quote(r.benchmark) << ',' << r.technique << ','
     << detail::csv_quote(r.directive) << ',' << r.level << ',' << r.num_teams << ','
     << r.threads_per_team << ',' << r.warp_size << ',' << r.items_per_thread << ',' << r.n
     << ',' << r.seed << ',' << r.trial << ',' << r.status << ','
     << detail::csv_quote(r.reason) << ',' << r.error_metric << ','
     << format_double(r.error_value) << ',' << format_double(r.approx_rate) << ','
     << format_double(r.divergent_fraction) << ',' << format_double(r.baseline_cost) << ','
     << format_double(r.approx_cost) << ',' << format_double(r.est_speedup) << ','
     << r.baseline_iters << ',' << r.approx_iters;
  return os.str();
}

inline TrialRecord from_csv(const std::string& line) {
  std::vector<std::string> f = detail::csv_split(line);
  if (f.size() != 22)
    throw SimtError("malformed record line (" + std::to_string(f.size()) + " fields): " + line);
  TrialRecord r;
  std::size_t i = 0;
  r.benchmark = f[i++];
  r.technique = f[i++];
  r.directive = f[i++];
  r.level = f[i++];
  r.num_teams = std::stoi(f[i++]);
  r.threads_per_team = std::stoi(f[i++]);
  r.warp_size = std::stoi(f[i++]);
  r.items_per_thread = std::stoi(f[i++]);
  r.n = std::stoll(f[i++]);
  r.seed = std::stoull(f[i++]);
  r.trial = std::stoi(f[i++]);
  r.status = f[i++];
  r.reason = f[i++];
  r.error_metric = f[i++];
  auto num = [&](double& into) {
    if (!parse_double(f[i], into)) throw SimtError("bad number in record: " + f[i]);
    ++i;
  };
  num(r.error_value);
  num(r.approx_rate);
  num(r.divergent_fraction);
  num(r.baseline_cost);
  num(r.approx_cost);
  num(r.est_speedup);
  r.baseline_iters = std::stoll(f[i++]);
  r.approx_iters = std::stoll(f[i++]);
  return r;
}

}  // namespace simtac
