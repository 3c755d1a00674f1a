#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "simtac/bench/blackscholes.hpp"
#include "simtac/engine.hpp"

namespace simtac::bench {

/// Cox-Ross-Rubinstein lattice price. American exercise compares the
/// continuation value against the intrinsic at every node.
inline double binomial_price(const BsOption& o, int n_steps, bool american, bool is_put) {
  if (n_steps < 1) throw ConfigError("binomial_price: n_steps must be >= 1");
  if (!(o.spot > 0) || !(o.strike > 0) || !(o.maturity > 0) || !(o.vol > 0))
    throw ConfigError("binomial_price: invalid option parameters");
  double dt = o.maturity / n_steps;
  double up = std::exp(o.vol * std::sqrt(dt));
  double down = 1.0 / up;
  double growth = std::exp(o.rate * dt);
  double p_up = (growth - down) / (up - down);
  if (!(p_up > 0.0) || !(p_up < 1.0))
    throw ConfigError("binomial_price: lattice parameters leave risk-neutral range");
  double disc = 1.0 / growth;

  auto intrinsic = [&](double s) {
    return is_put ? std::max(o.strike - s, 0.0) : std::max(s - o.strike, 0.0);
  };

  static thread_local std::vector<double> values;
  values.resize(n_steps + 1);
  for (int j = 0; j <= n_steps; ++j) {
    double s = o.spot * std::pow(up, 2 * j - n_steps);
    values[j] = intrinsic(s);
  }
  for (int level = n_steps - 1; level >= 0; --level) {
    for (int j = 0; j <= level; ++j) {
      double cont = disc * (p_up * values[j + 1] + (1.0 - p_up) * values[j]);
      if (american) {
        double s = o.spot * std::pow(up, 2 * j - level);
        cont = std::max(cont, intrinsic(s));
      }
      values[j] = cont;
    }
  }
  return values[0];
}

/// American-put portfolio sorted by moneyness so a team's grid-stride
/// option stream drifts slowly.
inline std::vector<BsOption> make_binomial_portfolio(long long n, std::uint64_t seed,
                                                     double jitter = 0.002) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> wiggle(1.0, jitter);
  std::vector<BsOption> portfolio(n);
  for (long long i = 0; i < n; ++i) {
    BsOption& o = portfolio[i];
    double m = 0.8 + 0.4 * static_cast<double>(i) / std::max<long long>(1, n - 1);
    o.spot = 100.0 * std::abs(wiggle(rng));
    o.strike = o.spot * m * std::abs(wiggle(rng));
    o.rate = 0.05;
    o.vol = 0.25 * std::abs(wiggle(rng));
    o.maturity = 1.0;
  }
  return portfolio;
}

/// One option per team: all lanes of the team evaluate the same lattice and
/// the price is the single region output (per-team work mapping, block-level
/// decisions in the sweeps).
inline Region binomial_region(const std::vector<BsOption>& options, int n_steps,
                              std::vector<double>& prices) {
  Region r;
  r.input_dims = 5;
  r.output_dims = 1;
  r.load_input = [&options](const LaneCtx& ctx, std::span<double> in) {
    const BsOption& o = options[ctx.index];
    in[0] = o.spot;
    in[1] = o.strike;
    in[2] = o.rate;
    in[3] = o.vol;
    in[4] = o.maturity;
  };
  r.evaluate = [&options, n_steps](LaneCtx& ctx, std::span<const double>, std::span<double> out) {
    out[0] = binomial_price(options[ctx.index], n_steps, /*american=*/true, /*is_put=*/true);
  };
  r.store = [&prices](const LaneCtx& ctx, std::span<const double> out) {
    prices[ctx.index] = out[0];
  };
  return r;
}

inline std::vector<double> binomial_reference(const std::vector<BsOption>& options,
                                              int n_steps) {
  std::vector<double> prices(options.size());
  for (std::size_t i = 0; i < options.size(); ++i)
    prices[i] = binomial_price(options[i], n_steps, true, true);
  return prices;
}

}  // namespace simtac::bench
