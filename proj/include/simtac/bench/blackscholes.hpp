#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "simtac/engine.hpp"
#include "simtac/errors.hpp"

namespace simtac::bench {

struct BsOption {
  double spot;
  double strike;
  double rate;
  double vol;
  double maturity;
};

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Closed-form European call price. vol=0 degenerates to the discounted
/// deterministic payoff.
inline double black_scholes_call(const BsOption& o) {
  if (!(o.spot > 0) || !(o.strike > 0) || !(o.maturity > 0) || !(o.vol >= 0) ||
      !std::isfinite(o.rate))
    throw ConfigError("black_scholes_call: invalid option parameters");
  double disc_strike = o.strike * std::exp(-o.rate * o.maturity);
  double sigma_sqrt_t = o.vol * std::sqrt(o.maturity);
  if (sigma_sqrt_t == 0.0) return std::max(o.spot - disc_strike, 0.0);
  double d1 =
      (std::log(o.spot / o.strike) + (o.rate + 0.5 * o.vol * o.vol) * o.maturity) / sigma_sqrt_t;
  double d2 = d1 - sigma_sqrt_t;
  return o.spot * norm_cdf(d1) - disc_strike * norm_cdf(d2);
}

/// Desk portfolio: a base block of distinct options tiled across n with
/// small multiplicative jitter, the redundancy pattern memoization feeds
/// on. When the base block divides the thread count, each thread's
/// grid-stride stream stays near one option.
inline std::vector<BsOption> make_bs_portfolio(long long n, std::uint64_t seed,
                                               int base_block = 512, double jitter = 0.01) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> spot(40.0, 160.0);
  std::uniform_real_distribution<double> moneyness(0.8, 1.2);
  std::uniform_real_distribution<double> vol(0.1, 0.5);
  std::uniform_real_distribution<double> maturity(0.25, 2.0);
  std::vector<BsOption> base(base_block);
  for (BsOption& o : base) {
    o.spot = spot(rng);
    o.strike = o.spot * moneyness(rng);
    o.rate = 0.03;
    o.vol = vol(rng);
    o.maturity = maturity(rng);
  }
  std::normal_distribution<double> wiggle(1.0, jitter);
  std::vector<BsOption> portfolio(n);
  for (long long i = 0; i < n; ++i) {
    BsOption o = base[i % base_block];
    if (i >= base_block) {
      o.spot *= std::abs(wiggle(rng));
      o.vol *= std::abs(wiggle(rng));
    }
    portfolio[i] = o;
  }
  return portfolio;
}

/// The approximated region is the entire per-option price calculation;
/// iACT keys on the five option parameters.
inline Region blackscholes_region(const std::vector<BsOption>& options,
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
  r.evaluate = [&options](LaneCtx& ctx, std::span<const double>, std::span<double> out) {
    out[0] = black_scholes_call(options[ctx.index]);
  };
  r.store = [&prices](const LaneCtx& ctx, std::span<const double> out) {
    prices[ctx.index] = out[0];
  };
  return r;
}

inline std::vector<double> blackscholes_reference(const std::vector<BsOption>& options) {
  std::vector<double> prices(options.size());
  for (std::size_t i = 0; i < options.size(); ++i) prices[i] = black_scholes_call(options[i]);
  return prices;
}

}  // namespace simtac::bench
