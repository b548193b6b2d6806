#pragma once

// Controlled rough paths and the compensated-Riemann-sum rough integral.
// A controlled path stores Y with values in R^{rows x cols} together with
// its Gubinelli derivative, a path of linear maps R^d -> R^{rows x cols}
// laid out as (rows, cols, d) tensors.

#include <memory>

#include "roughhjb/rough_path.hpp"

namespace roughhjb {

struct ControlledPath {
  std::shared_ptr<const SamplePath> reference;  // first level X of the reference lift
  std::uint64_t reference_id = 0;               // 0 = untagged
  std::size_t rows = 0, cols = 0, driver_dim = 0;
  std::vector<double> y;   // (N+1) * rows*cols
  std::vector<double> yp;  // (N+1) * rows*cols*d
  double beta = 0.0;       // nominal remainder exponent; 0 means "use alpha"

  const TimeGrid& grid() const { return *reference->grid; }
  std::size_t points() const { return reference->points(); }
  std::size_t steps() const { return reference->steps(); }
  std::size_t block() const { return rows * cols; }

  double value(std::size_t k, std::size_t i, std::size_t j) const {
    return y[k * block() + i * cols + j];
  }
  double& value(std::size_t k, std::size_t i, std::size_t j) {
    return y[k * block() + i * cols + j];
  }
  // derivative of entry (i,j) in driver direction l
  double deriv(std::size_t k, std::size_t i, std::size_t j, std::size_t l) const {
    return yp[(k * block() + i * cols + j) * driver_dim + l];
  }
  double& deriv(std::size_t k, std::size_t i, std::size_t j, std::size_t l) {
    return yp[(k * block() + i * cols + j) * driver_dim + l];
  }

  Mat value_mat(std::size_t k) const {
    Mat m(rows, cols);
    std::copy(y.begin() + k * block(), y.begin() + (k + 1) * block(), m.a.begin());
    return m;
  }
};

inline ControlledPath make_controlled(std::shared_ptr<const SamplePath> reference,
                                      std::uint64_t ref_id, std::size_t rows, std::size_t cols) {
  ControlledPath cp;
  cp.reference = std::move(reference);
  cp.reference_id = ref_id;
  cp.rows = rows;
  cp.cols = cols;
  cp.driver_dim = cp.reference->dim;
  cp.y.assign(cp.points() * rows * cols, 0.0);
  cp.yp.assign(cp.points() * rows * cols * cp.driver_dim, 0.0);
  return cp;
}

// R^{Y,X}(s,t) = Y(t) - Y(s) - Y'(s)(X(t) - X(s))
inline Mat remainder(const ControlledPath& cp, std::size_t j, std::size_t k) {
  if (j > k || k > cp.steps()) throw std::invalid_argument("remainder: need s <= t on the grid");
  const SamplePath& x = *cp.reference;
  Mat r(cp.rows, cp.cols);
  for (std::size_t i = 0; i < cp.rows; ++i)
    for (std::size_t c = 0; c < cp.cols; ++c) {
      double v = cp.value(k, i, c) - cp.value(j, i, c);
      for (std::size_t l = 0; l < cp.driver_dim; ++l)
        v -= cp.deriv(j, i, c, l) * (x(k, l) - x(j, l));
      r(i, c) = v;
    }
  return r;
}

// measured Hoelder quotient of the remainder at exponent gamma
inline HolderEstimate remainder_holder(const ControlledPath& cp, double gamma) {
  return holder_quotient(cp.grid(), gamma, [&](std::size_t j, std::size_t k) {
    return remainder(cp, j, k).max_abs();
  });
}

inline HolderEstimate value_holder(const ControlledPath& cp, double alpha) {
  return holder_quotient(cp.grid(), alpha, [&](std::size_t j, std::size_t k) {
    double m = 0.0;
    for (std::size_t i = 0; i < cp.rows; ++i)
      for (std::size_t c = 0; c < cp.cols; ++c)
        m = std::max(m, std::abs(cp.value(k, i, c) - cp.value(j, i, c)));
    return m;
  });
}

inline HolderEstimate deriv_holder(const ControlledPath& cp, double alpha) {
  return holder_quotient(cp.grid(), alpha, [&](std::size_t j, std::size_t k) {
    double m = 0.0;
    for (std::size_t i = 0; i < cp.yp.size() / cp.points(); ++i)
      m = std::max(m, std::abs(cp.yp[k * cp.block() * cp.driver_dim + i] -
                               cp.yp[j * cp.block() * cp.driver_dim + i]));
    return m;
  });
}

// ---------------------------------------------------------------------------
// rough integral

// Calibrated once on smooth test data (see test_controlled.cpp) and then
// fixed; enters the reported local error bound only.
inline constexpr double kRoughIntegralBoundC = 2.0;

struct RoughIntegralResult {
  std::vector<double> value;  // rows
  double local_bound = 0.0;   // Thm-style bound evaluated from measured quotients
  bool exponent_ok = true;    // 2 alpha + beta > 1 for the nominal exponents
};

// compensated left-point sum of Y dX over grid indices [j, k); the
// integrand must be matrix valued with cols == driver dimension.
// Measuring the Hoelder quotients for the local error bound costs
// O(N^2), so the bound is only evaluated on request.
inline RoughIntegralResult rough_integral(const ControlledPath& cp, const RoughPath& rp,
                                          std::size_t j, std::size_t k,
                                          bool with_bound = false) {
  if (cp.cols != rp.dim() || cp.driver_dim != rp.dim())
    throw std::invalid_argument("rough_integral: integrand shape does not compose with driver");
  if (!same_grid(cp.reference->grid, rp.base->grid))
    throw std::invalid_argument("rough_integral: grid mismatch");
  if (cp.reference_id != 0 && cp.reference_id != rp.id)
    throw std::invalid_argument("rough_integral: integrand is controlled by a different lift");
  if (j > k || k > cp.steps()) throw std::invalid_argument("rough_integral: need s <= t");

  const std::size_t d = rp.dim();
  RoughIntegralResult res;
  const double beta = cp.beta > 0.0 ? cp.beta : rp.alpha;
  res.exponent_ok = 2.0 * rp.alpha + beta > 1.0;
  res.value.assign(cp.rows, 0.0);
  std::vector<KahanSum> acc(cp.rows);
  const SamplePath& x = *rp.base;
  for (std::size_t u = j; u < k; ++u) {
    const double* x2 = rp.step_block(u);
    for (std::size_t i = 0; i < cp.rows; ++i) {
      double term = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        term += cp.value(u, i, c) * (x(u + 1, c) - x(u, c));
        for (std::size_t l = 0; l < d; ++l) term += cp.deriv(u, i, c, l) * x2[l * d + c];
      }
      acc[i].add(term);
    }
  }
  for (std::size_t i = 0; i < cp.rows; ++i) res.value[i] = acc[i].value();

  // local error bound from measured quotients (diagnostic only)
  const double dt = rp.grid().t[k] - rp.grid().t[j];
  if (with_bound && dt > 0.0) {
    const double hx = holder_seminorm(x, rp.alpha).value;
    const double hr = remainder_holder(cp, rp.alpha + beta).value;
    const double h2 = holder_quotient(rp.grid(), 2.0 * rp.alpha,
                                      [&](std::size_t a, std::size_t b) {
                                        return rp.levy(a, b).max_abs();
                                      })
                          .value;
    const double hyp = deriv_holder(cp, rp.alpha).value;
    res.local_bound =
        kRoughIntegralBoundC * (hx * hr + h2 * hyp) * std::pow(dt, 2.0 * rp.alpha + beta);
  }
  return res;
}

// ---------------------------------------------------------------------------
// composition with smooth maps

// f : R^in -> R^{rows x cols}; value writes rows*cols doubles, gradient
// rows*cols*in (entry-major), hessian rows*cols*in*in
struct SmoothMap {
  std::size_t in_dim = 0, rows = 0, cols = 0;
  std::function<void(std::span<const double>, double*)> value;
  std::function<void(std::span<const double>, double*)> gradient;
  std::function<void(std::span<const double>, double*)> hessian;  // optional
};

// (f(Y), grad f(Y) Y') for a state-like controlled path (cols == 1)
inline ControlledPath compose_smooth(const SmoothMap& f, const ControlledPath& cp) {
  if (cp.cols != 1 || f.in_dim != cp.rows)
    throw std::invalid_argument("compose_smooth: integrand shape mismatch");
  ControlledPath out = make_controlled(cp.reference, cp.reference_id, f.rows, f.cols);
  out.beta = cp.beta;
  const std::size_t n = cp.points();
  const std::size_t fb = f.rows * f.cols;
  std::vector<double> yv(cp.rows), fv(fb), gv(fb * f.in_dim);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < cp.rows; ++i) yv[i] = cp.value(k, i, 0);
    f.value(yv, fv.data());
    f.gradient(yv, gv.data());
    std::copy(fv.begin(), fv.end(), out.y.begin() + k * fb);
    // chain rule: (grad f(Y) Y')_{(i,c),l} = sum_a df_{ic}/dy_a * Y'_{a,l}
    for (std::size_t e = 0; e < fb; ++e)
      for (std::size_t l = 0; l < cp.driver_dim; ++l) {
        double s = 0.0;
        for (std::size_t a = 0; a < f.in_dim; ++a)
          s += gv[e * f.in_dim + a] * cp.deriv(k, a, 0, l);
        out.deriv(k, e / f.cols, e % f.cols, l) = s;
      }
  }
  return out;
}

inline SmoothMap identity_map(std::size_t n) {
  SmoothMap f;
  f.in_dim = n;
  f.rows = n;
  f.cols = 1;
  f.value = [n](std::span<const double> y, double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i];
  };
  f.gradient = [n](std::span<const double>, double* out) {
    std::fill(out, out + n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) out[i * n + i] = 1.0;
  };
  return f;
}

}  // namespace roughhjb
