#pragma once

// Time grids, sampled paths, grid Hoelder seminorms and nested dyadic
// partition sequences. Everything downstream works on these.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <stdexcept>

#include "roughhjb/core.hpp"

namespace roughhjb {

// strictly increasing grid 0 = t_0 < ... < t_N = T
struct TimeGrid {
  std::vector<double> t;

  double horizon() const { return t.back(); }
  std::size_t steps() const { return t.size() - 1; }
  std::size_t points() const { return t.size(); }
  double dt(std::size_t k) const { return t[k + 1] - t[k]; }

  bool same_as(const TimeGrid& o) const { return t == o.t; }

  // index of the grid point nearest to s; throws if s is not within
  // tol of a grid point
  std::size_t index_of(double s, double tol_rel = 1e-9) const {
    const auto it = std::lower_bound(t.begin(), t.end(), s);
    std::size_t k = static_cast<std::size_t>(it - t.begin());
    if (k > 0 && (k == t.size() || std::abs(t[k - 1] - s) < std::abs(t[k] - s))) --k;
    if (std::abs(t[k] - s) > tol_rel * (1.0 + horizon()))
      throw std::invalid_argument("time " + std::to_string(s) + " is not a grid point");
    return k;
  }

  // largest k with t_k <= s (clamped)
  std::size_t floor_index(double s) const {
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    return k == 0 ? 0 : k - 1;
  }
};

inline TimeGrid make_uniform_grid(double horizon, std::size_t steps) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (steps == 0) throw std::invalid_argument("step count must be >= 1");
  TimeGrid g;
  g.t.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    g.t[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
  g.t[steps] = horizon;
  return g;
}

using GridPtr = std::shared_ptr<const TimeGrid>;

inline GridPtr share(TimeGrid g) { return std::make_shared<const TimeGrid>(std::move(g)); }

inline GridPtr make_uniform_grid_ptr(double horizon, std::size_t steps) {
  return share(make_uniform_grid(horizon, steps));
}

inline bool same_grid(const GridPtr& x, const GridPtr& y) {
  return x == y || (x && y && x->same_as(*y));
}

// ---------------------------------------------------------------------------

// d-dimensional path sampled on a grid; immutable by convention after
// construction
struct SamplePath {
  GridPtr grid;
  std::size_t dim = 0;
  std::vector<double> v;  // (N+1) * dim, row-major per grid point

  SamplePath() = default;
  SamplePath(GridPtr g, std::size_t d) : grid(std::move(g)), dim(d), v(grid->points() * d, 0.0) {}

  std::size_t points() const { return grid->points(); }
  std::size_t steps() const { return grid->steps(); }

  double operator()(std::size_t k, std::size_t i) const { return v[k * dim + i]; }
  double& at(std::size_t k, std::size_t i) { return v[k * dim + i]; }
  std::span<const double> value(std::size_t k) const { return {v.data() + k * dim, dim}; }

  std::span<const double> increment_buf(std::size_t j, std::size_t k, std::vector<double>& buf) const {
    buf.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) buf[i] = (*this)(k, i) - (*this)(j, i);
    return buf;
  }

  // path frozen at grid index k: X_t with t = t_k
  SamplePath stopped(std::size_t k) const {
    SamplePath s = *this;
    for (std::size_t j = k + 1; j < points(); ++j)
      for (std::size_t i = 0; i < dim; ++i) s.at(j, i) = (*this)(k, i);
    return s;
  }

  // stopped path with the cadlag bump X_t + h 1_[t,T]; the value read at
  // index k is the post-jump one
  SamplePath bumped_stopped(std::size_t k, std::span<const double> bump) const {
    SamplePath s = stopped(k);
    for (std::size_t j = k; j < points(); ++j)
      for (std::size_t i = 0; i < dim; ++i) s.at(j, i) += bump[i];
    return s;
  }

  double sup_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < points(); ++k) m = std::max(m, euclidean_norm(value(k)));
    return m;
  }
};

// Brownian sample keyed by (seed, step, coordinate); increments over
// [t_k, t_{k+1}] are N(0, dt) per coordinate, so two grids sharing a seed
// do NOT share a path -- reproducibility is per (grid, seed).
inline SamplePath sample_brownian(GridPtr grid, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("dimension must be >= 1");
  SamplePath w(std::move(grid), dim);
  const std::size_t n = w.steps();
  for (std::size_t k = 0; k < n; ++k) {
    const double sdt = std::sqrt(w.grid->dt(k));
    for (std::size_t i = 0; i < dim; ++i)
      w.at(k + 1, i) = w(k, i) + sdt * gaussian(seed, k * dim + i);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Hoelder seminorms on the grid
//
// Exact over all O(N^2) pairs up to N = 4096; above that only pairs
// (j, j + 2^l) are visited and the result is flagged as subsampled.

struct HolderEstimate {
  double value = 0.0;
  bool subsampled = false;
};

inline constexpr std::size_t kHolderExactLimit = 4096;

// |Xi|_alpha with Xi given as a callable (j,k) -> |Xi(t_j, t_k)|
template <class NormFn>
HolderEstimate holder_quotient(const TimeGrid& g, double alpha, NormFn&& norm_jk) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("holder exponent must lie in (0,1)");
  const std::size_t n = g.steps();
  HolderEstimate est;
  if (n <= kHolderExactLimit) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k <= n; ++k) {
        const double q = norm_jk(j, k) / std::pow(g.t[k] - g.t[j], alpha);
        est.value = std::max(est.value, q);
      }
  } else {
    est.subsampled = true;
    for (std::size_t l = 0; (std::size_t{1} << l) <= n; ++l) {
      const std::size_t gap = std::size_t{1} << l;
      for (std::size_t j = 0; j + gap <= n; ++j) {
        const double q = norm_jk(j, j + gap) / std::pow(g.t[j + gap] - g.t[j], alpha);
        est.value = std::max(est.value, q);
      }
    }
  }
  return est;
}

inline HolderEstimate holder_seminorm(const SamplePath& x, double alpha) {
  if (x.points() < 2) throw std::invalid_argument("path needs at least two points");
  std::vector<double> buf;
  return holder_quotient(*x.grid, alpha, [&](std::size_t j, std::size_t k) {
    return euclidean_norm(x.increment_buf(j, k, buf));
  });
}

// ---------------------------------------------------------------------------
// nested partitions

struct Partition {
  std::vector<double> pts;  // 0 = p_0 < ... < p_m = T

  std::size_t intervals() const { return pts.size() - 1; }
  double mesh() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) m = std::max(m, pts[i + 1] - pts[i]);
    return m;
  }
};

struct PartitionSequence {
  std::vector<Partition> levels;  // each a refinement of the previous
};

// level k holds 2^k uniform intervals, k = 1..levels
inline PartitionSequence dyadic_partitions(double horizon, std::size_t levels) {
  if (levels == 0) throw std::invalid_argument("need at least one level");
  PartitionSequence ps;
  ps.levels.reserve(levels);
  for (std::size_t k = 1; k <= levels; ++k) {
    const std::size_t m = std::size_t{1} << k;
    Partition p;
    p.pts.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i)
      p.pts[i] = horizon * static_cast<double>(i) / static_cast<double>(m);
    p.pts[m] = horizon;
    ps.levels.push_back(std::move(p));
  }
  return ps;
}

// map partition points onto grid indices; throws when the partition is
// finer than the grid or misaligned
inline std::vector<std::size_t> partition_indices(const Partition& p, const TimeGrid& g) {
  std::vector<std::size_t> idx(p.pts.size());
  for (std::size_t i = 0; i < p.pts.size(); ++i) idx[i] = g.index_of(p.pts[i]);
  for (std::size_t i = 0; i + 1 < idx.size(); ++i)
    if (idx[i + 1] <= idx[i])
      throw std::invalid_argument("partition exceeds the grid resolution");
  return idx;
}

}  // namespace roughhjb
