#pragma once

// Second-order lifts of sampled paths. The two-parameter level is stored
// for consecutive grid intervals only; a prefix table built at
// construction lets any (s,t) block be reconstructed through Chen's
// relation in O(d^2), which keeps memory linear in the grid size.

#include <atomic>
#include <memory>

#include "roughhjb/grid.hpp"

namespace roughhjb {

enum class LiftRule { ito, stratonovich };

namespace detail {
inline std::uint64_t next_rough_path_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}
}  // namespace detail

struct RoughPath {
  std::shared_ptr<const SamplePath> base;  // d-dimensional first level
  std::vector<double> step_blocks;         // N blocks of d*d: X2(t_k, t_{k+1})
  std::vector<double> prefix_blocks;       // (N+1) blocks of d*d: X2(t_0, t_k)
  double alpha = 0.45;
  LiftRule rule = LiftRule::ito;
  std::uint64_t id = 0;

  const TimeGrid& grid() const { return *base->grid; }
  std::size_t dim() const { return base->dim; }
  std::size_t steps() const { return base->steps(); }

  const double* step_block(std::size_t k) const { return step_blocks.data() + k * dim() * dim(); }

  // X2(t_j, t_k) via Chen through the prefix table:
  //   X2(j,k) = X2(0,k) - X2(0,j) - (X(j)-X(0)) (x) (X(k)-X(j))
  Mat levy(std::size_t j, std::size_t k) const {
    const std::size_t d = dim();
    if (j > k || k > steps()) throw std::invalid_argument("levy: need j <= k on the grid");
    Mat out(d, d);
    const double* pj = prefix_blocks.data() + j * d * d;
    const double* pk = prefix_blocks.data() + k * d * d;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) {
        const double xj = (*base)(j, a) - (*base)(0, a);
        const double dx = (*base)(k, b) - (*base)(j, b);
        out(a, b) = pk[a * d + b] - pj[a * d + b] - xj * dx;
      }
    return out;
  }

  void rebuild_prefix() {
    const std::size_t d = dim();
    const std::size_t n = steps();
    prefix_blocks.assign((n + 1) * d * d, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double* step = step_block(k);
      const double* prev = prefix_blocks.data() + k * d * d;
      double* next = prefix_blocks.data() + (k + 1) * d * d;
      for (std::size_t a = 0; a < d; ++a) {
        const double xa = (*base)(k, a) - (*base)(0, a);
        for (std::size_t b = 0; b < d; ++b) {
          const double dxb = (*base)(k + 1, b) - (*base)(k, b);
          next[a * d + b] = prev[a * d + b] + step[a * d + b] + xa * dxb;
        }
      }
    }
  }
};

// Ito lift of a sampled path. The input is the finest available path and
// carries an oversampling factor m >= 1: the lifted grid keeps every m-th
// point and the second level over each coarse interval is the left-point
// Riemann sum over the m sub-steps. With m = 1 the per-interval blocks
// are identically zero and the scheme consuming them degrades gracefully
// to a first-order one.
inline RoughPath ito_lift(const SamplePath& fine, std::size_t oversample = 1, double alpha = 0.45) {
  if (oversample < 1) throw std::invalid_argument("oversampling factor must be >= 1");
  if (fine.points() < 2) throw std::invalid_argument("need at least two path points");
  if (fine.steps() % oversample != 0)
    throw std::invalid_argument("oversampling factor must divide the step count");
  const std::size_t d = fine.dim;
  const std::size_t n = fine.steps() / oversample;

  RoughPath rp;
  rp.alpha = alpha;
  rp.rule = LiftRule::ito;
  rp.id = detail::next_rough_path_id();

  if (oversample == 1) {
    rp.base = std::make_shared<const SamplePath>(fine);
  } else {
    TimeGrid coarse;
    coarse.t.resize(n + 1);
    SamplePath down;
    down.dim = d;
    down.v.resize((n + 1) * d);
    for (std::size_t k = 0; k <= n; ++k) {
      coarse.t[k] = fine.grid->t[k * oversample];
      for (std::size_t i = 0; i < d; ++i) down.v[k * d + i] = fine(k * oversample, i);
    }
    down.grid = share(std::move(coarse));
    rp.base = std::make_shared<const SamplePath>(std::move(down));
  }

  rp.step_blocks.assign(n * d * d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double* block = rp.step_blocks.data() + k * d * d;
    const std::size_t lo = k * oversample;
    for (std::size_t j = lo + 1; j < lo + oversample; ++j)
      for (std::size_t a = 0; a < d; ++a) {
        const double xa = fine(j, a) - fine(lo, a);
        for (std::size_t b = 0; b < d; ++b)
          block[a * d + b] += xa * (fine(j + 1, b) - fine(j, b));
      }
  }
  rp.rebuild_prefix();
  return rp;
}

// Stratonovich enhancement of a Brownian Ito lift: add (t-s)/2 on the
// diagonal of every consecutive block.
inline RoughPath stratonovich_lift(const RoughPath& ito) {
  if (ito.rule != LiftRule::ito) throw std::invalid_argument("input must be an Ito lift");
  RoughPath rp = ito;
  rp.rule = LiftRule::stratonovich;
  rp.id = detail::next_rough_path_id();
  const std::size_t d = rp.dim();
  for (std::size_t k = 0; k < rp.steps(); ++k) {
    double* block = rp.step_blocks.data() + k * d * d;
    const double half_dt = 0.5 * rp.grid().dt(k);
    for (std::size_t a = 0; a < d; ++a) block[a * d + a] += half_dt;
  }
  rp.rebuild_prefix();
  return rp;
}

// X2(s,t) - X2(s,u) - X2(u,t) - (X(u)-X(s)) (x) (X(t)-X(u)); zero up to
// rounding for every lift produced by this module.
inline Mat chen_defect(const RoughPath& rp, std::size_t j, std::size_t u, std::size_t k) {
  if (!(j <= u && u <= k && k <= rp.steps()))
    throw std::invalid_argument("chen_defect: need s <= u <= t on the grid");
  const std::size_t d = rp.dim();
  Mat defect = rp.levy(j, k) - rp.levy(j, u) - rp.levy(u, k);
  const SamplePath& x = *rp.base;
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b)
      defect(a, b) -= (x(u, a) - x(j, a)) * (x(k, b) - x(u, b));
  return defect;
}

struct ChenSummary {
  double max_defect = 0.0;
  double gate = 0.0;  // 1e-12 * (1 + |X|_inf^2)
  bool ok = true;
};

// exhaustive over all triples for small grids, random triples above
inline ChenSummary chen_summary(const RoughPath& rp, std::size_t random_triples = 10000,
                                std::uint64_t seed = 1) {
  ChenSummary s;
  const std::size_t n = rp.steps();
  const double supx = rp.base->sup_norm();
  s.gate = 1e-12 * (1.0 + supx * supx);
  if (n <= 64) {
    for (std::size_t j = 0; j <= n; ++j)
      for (std::size_t u = j; u <= n; ++u)
        for (std::size_t k = u; k <= n; ++k)
          s.max_defect = std::max(s.max_defect, chen_defect(rp, j, u, k).max_abs());
  } else {
    for (std::size_t r = 0; r < random_triples; ++r) {
      std::size_t a = keyed_hash(seed, 3 * r) % (n + 1);
      std::size_t b = keyed_hash(seed, 3 * r + 1) % (n + 1);
      std::size_t c = keyed_hash(seed, 3 * r + 2) % (n + 1);
      if (a > b) std::swap(a, b);
      if (b > c) std::swap(b, c);
      if (a > b) std::swap(a, b);
      s.max_defect = std::max(s.max_defect, chen_defect(rp, a, b, c).max_abs());
    }
  }
  s.ok = s.max_defect <= s.gate;
  return s;
}

// |X - Y|_alpha + |X2 - Y2|_{2 alpha} over grid pairs
inline double rough_metric(const RoughPath& x, const RoughPath& y, double alpha) {
  if (!same_grid(x.base->grid, y.base->grid) || x.dim() != y.dim())
    throw std::invalid_argument("rough_metric: grids and dimensions must match");
  std::vector<double> bx, by;
  const double first =
      holder_quotient(x.grid(), alpha,
                      [&](std::size_t j, std::size_t k) {
                        double m = 0.0;
                        for (std::size_t i = 0; i < x.dim(); ++i) {
                          const double dxi = ((*x.base)(k, i) - (*x.base)(j, i)) -
                                             ((*y.base)(k, i) - (*y.base)(j, i));
                          m += dxi * dxi;
                        }
                        return std::sqrt(m);
                      })
          .value;
  const double second = holder_quotient(x.grid(), 2.0 * alpha,
                                        [&](std::size_t j, std::size_t k) {
                                          return (x.levy(j, k) - y.levy(j, k)).max_abs();
                                        })
                            .value;
  return first + second;
}

// |X|_alpha + sqrt(|X2|_{2 alpha}), the norm entering the a-priori bounds
inline double rough_norm(const RoughPath& rp, double alpha) {
  const double first = holder_seminorm(*rp.base, alpha).value;
  const double second = holder_quotient(rp.grid(), 2.0 * alpha,
                                        [&](std::size_t j, std::size_t k) {
                                          return rp.levy(j, k).max_abs();
                                        })
                            .value;
  return first + std::sqrt(second);
}

}  // namespace roughhjb
