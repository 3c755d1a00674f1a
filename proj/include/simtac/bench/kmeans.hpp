#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "simtac/engine.hpp"

namespace simtac::bench {

struct KmeansProblem {
  int dims = 2;
  int k = 8;
  long long n_points = 0;
  std::vector<double> points;  // n_points x dims

  std::span<const double> point(long long i) const {
    return {points.data() + i * dims, static_cast<std::size_t>(dims)};
  }
};

/// Seeded Gaussian blobs around k centers on a circle; `separation` scales
/// the center spacing against unit-variance noise.
inline KmeansProblem make_blobs(long long n_points, int dims, int k, std::uint64_t seed,
                                double separation = 6.0) {
  KmeansProblem p;
  p.dims = dims;
  p.k = k;
  p.n_points = n_points;
  p.points.resize(n_points * dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> centers(static_cast<std::size_t>(k) * dims, 0.0);
  for (int c = 0; c < k; ++c) {
    double angle = 2.0 * M_PI * c / k;
    centers[c * dims] = separation * std::cos(angle);
    if (dims > 1) centers[c * dims + 1] = separation * std::sin(angle);
    for (int d = 2; d < dims; ++d) centers[c * dims + d] = 0.0;
  }
  for (long long i = 0; i < n_points; ++i) {
    int c = static_cast<int>(i % k);
    for (int d = 0; d < dims; ++d)
      p.points[i * dims + d] = centers[c * dims + d] + noise(rng);
  }
  return p;
}

struct KmeansResult {
  std::vector<int> assignments;
  int iterations = 0;       // assignment kernel launches executed
  bool converged = false;   // stopped because no observation changed cluster
  KernelStats stats;        // summed over launches
  double device_time = 0.0; // summed over launches
};

/// Lloyd iterations with the point-to-centroid distance kernel as the
/// approximable region (inputs: point coordinates; outputs: the k
/// distances). Technique state lives per kernel launch, so each iteration
/// starts with cold tables/windows. Converges when no observation changes
/// cluster; empty clusters retain their previous centroid.
inline KmeansResult kmeans_benchmark(const KmeansProblem& problem, const GridConfig& grid,
                                     const ApproxSpec* spec, const CostModel& model,
                                     int max_iters = 40) {
  const int k = problem.k;
  const int dims = problem.dims;
  std::vector<double> centroids(static_cast<std::size_t>(k) * dims);
  // Deterministic Forgy-style init on the first k points.
  for (int c = 0; c < k; ++c) {
    long long src = std::min<long long>(c, problem.n_points - 1);
    for (int d = 0; d < dims; ++d) centroids[c * dims + d] = problem.points[src * dims + d];
  }

  KmeansResult res;
  res.assignments.assign(problem.n_points, -1);
  std::vector<double> distances(problem.n_points * k, 0.0);

  Region region;
  region.input_dims = dims;
  region.output_dims = k;
  region.load_input = [&](const LaneCtx& ctx, std::span<double> in) {
    auto pt = problem.point(ctx.index);
    for (int d = 0; d < dims; ++d) in[d] = pt[d];
  };
  region.evaluate = [&](LaneCtx& ctx, std::span<const double>, std::span<double> out) {
    auto pt = problem.point(ctx.index);
    for (int c = 0; c < k; ++c) {
      double ssq = 0.0;
      for (int d = 0; d < dims; ++d) {
        double diff = pt[d] - centroids[c * dims + d];
        ssq += diff * diff;
      }
      out[c] = std::sqrt(ssq);
    }
  };
  region.store = [&](const LaneCtx& ctx, std::span<const double> out) {
    for (int c = 0; c < k; ++c) distances[ctx.index * k + c] = out[c];
  };

  for (int iter = 1; iter <= max_iters; ++iter) {
    LaunchResult lr = run_region(grid, problem.n_points, WorkMapping::kPerThread, region,
                                 spec, model);
    res.stats.total_invocations += lr.stats.total_invocations;
    res.stats.approx_invocations += lr.stats.approx_invocations;
    res.stats.divergent_warp_steps += lr.stats.divergent_warp_steps;
    res.stats.total_warp_steps += lr.stats.total_warp_steps;
    res.stats.estimated_cost += lr.stats.estimated_cost;
    res.device_time += lr.device_time;
    res.iterations = iter;

    std::vector<int> next(problem.n_points);
    for (long long i = 0; i < problem.n_points; ++i) {
      int best = 0;
      double best_d = distances[i * k];
      for (int c = 1; c < k; ++c)
        if (distances[i * k + c] < best_d) {
          best_d = distances[i * k + c];
          best = c;
        }
      next[i] = best;
    }
    bool changed = next != res.assignments;
    res.assignments = std::move(next);
    if (!changed) {
      res.converged = true;
      break;
    }

    // Centroid update stays accurate; only the distance kernel is subject
    // to approximation.
    std::vector<double> sums(static_cast<std::size_t>(k) * dims, 0.0);
    std::vector<long long> counts(k, 0);
    for (long long i = 0; i < problem.n_points; ++i) {
      int c = res.assignments[i];
      counts[c] += 1;
      for (int d = 0; d < dims; ++d) sums[c * dims + d] += problem.points[i * dims + d];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (int d = 0; d < dims; ++d) centroids[c * dims + d] = sums[c * dims + d] / counts[c];
    }
  }
  return res;
}

}  // namespace simtac::bench
