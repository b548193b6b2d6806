#include <catch2/catch_amalgamated.hpp>

#include "roughhjb/controlled.hpp"

using namespace roughhjb;

namespace {

// W viewed as controlled by its own lift: Y = W, Y' = id
ControlledPath self_controlled(const RoughPath& rp) {
  ControlledPath cp = make_controlled(rp.base, rp.id, rp.dim(), rp.dim());
  for (std::size_t k = 0; k < cp.points(); ++k)
    for (std::size_t i = 0; i < rp.dim(); ++i) {
      for (std::size_t c = 0; c < rp.dim(); ++c) cp.value(k, i, c) = (*rp.base)(k, i);
      cp.deriv(k, i, i, i) = 1.0;
    }
  return cp;
}

}  // namespace

TEST_CASE("remainder of exactly controlled paths vanishes") {
  auto grid = make_uniform_grid_ptr(1.0, 32);
  const RoughPath rp = ito_lift(sample_brownian(grid, 1, 9));

  // Y = X, Y' = 1
  ControlledPath cp = make_controlled(rp.base, rp.id, 1, 1);
  for (std::size_t k = 0; k < cp.points(); ++k) {
    cp.value(k, 0, 0) = (*rp.base)(k, 0);
    cp.deriv(k, 0, 0, 0) = 1.0;
  }
  CHECK(remainder(cp, 3, 27).max_abs() == 0.0);

  // Y constant, Y' = 0
  ControlledPath c0 = make_controlled(rp.base, rp.id, 1, 1);
  for (std::size_t k = 0; k < c0.points(); ++k) c0.value(k, 0, 0) = 4.0;
  CHECK(remainder(c0, 0, 32).max_abs() == 0.0);

  // Y(t) = t v, Y' = 0: remainder is the drift increment
  ControlledPath cd = make_controlled(rp.base, rp.id, 2, 1);
  for (std::size_t k = 0; k < cd.points(); ++k) {
    cd.value(k, 0, 0) = grid->t[k] * 2.0;
    cd.value(k, 1, 0) = grid->t[k] * (-1.0);
  }
  const Mat r = remainder(cd, 4, 12);
  CHECK(r(0, 0) == Catch::Approx((grid->t[12] - grid->t[4]) * 2.0));
  CHECK(r(1, 0) == Catch::Approx(-(grid->t[12] - grid->t[4])));

  CHECK_THROWS_AS(remainder(cp, 10, 5), std::invalid_argument);
}

TEST_CASE("constant integrands telescope") {
  auto grid = make_uniform_grid_ptr(1.0, 64);
  const RoughPath rp = ito_lift(sample_brownian(grid, 2, 13));
  ControlledPath cp = make_controlled(rp.base, rp.id, 1, 2);
  for (std::size_t k = 0; k < cp.points(); ++k) {
    cp.value(k, 0, 0) = 2.0;
    cp.value(k, 0, 1) = -3.0;
  }
  const auto res = rough_integral(cp, rp, 0, 64);
  const double expect = 2.0 * (*rp.base)(64, 0) - 3.0 * (*rp.base)(64, 1);
  CHECK(res.value[0] == Catch::Approx(expect).margin(1e-14));
  CHECK(res.exponent_ok);
}

TEST_CASE("rough integral of W dW approaches the Ito value") {
  // target (W(1)^2 - 1)/2; RMS over seeds at N = 2^12 stays below 1e-2
  // and the compensated sum telescopes to the left-point fine sum
  const std::size_t n = 1 << 14;
  auto grid = make_uniform_grid_ptr(1.0, n);
  std::vector<double> errs;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const SamplePath w = sample_brownian(grid, 1, 100 + s);
    const RoughPath rp = ito_lift(w);
    const ControlledPath cp = self_controlled(rp);
    const auto res = rough_integral(cp, rp, 0, n);
    const double target = (w(n, 0) * w(n, 0) - 1.0) / 2.0;
    errs.push_back(res.value[0] - target);
  }
  double rms = 0.0;
  for (double e : errs) rms += e * e;
  rms = std::sqrt(rms / static_cast<double>(errs.size()));
  CHECK(rms < 1e-2);
}

TEST_CASE("integral splits additively across an intermediate time") {
  auto grid = make_uniform_grid_ptr(1.0, 128);
  const RoughPath rp = ito_lift(sample_brownian(grid, 1, 77), 1);
  const ControlledPath cp = self_controlled(rp);
  const auto whole = rough_integral(cp, rp, 0, 128);
  const auto left = rough_integral(cp, rp, 0, 50);
  const auto right = rough_integral(cp, rp, 50, 128);
  CHECK(whole.value[0] == Catch::Approx(left.value[0] + right.value[0]).margin(1e-14));
}

TEST_CASE("rough integral is linear in the integrand") {
  auto grid = make_uniform_grid_ptr(1.0, 64);
  const RoughPath rp = ito_lift(sample_brownian(grid, 1, 31), 2);
  ControlledPath a = self_controlled(rp);
  ControlledPath b = self_controlled(rp);
  for (std::size_t k = 0; k < b.points(); ++k) {
    b.value(k, 0, 0) = b.value(k, 0, 0) * b.value(k, 0, 0);
    // derivative of W^2 along W
    b.deriv(k, 0, 0, 0) = 2.0 * a.value(k, 0, 0);
  }
  ControlledPath combo = a;
  for (std::size_t i = 0; i < combo.y.size(); ++i) combo.y[i] = 2.0 * a.y[i] + 3.0 * b.y[i];
  for (std::size_t i = 0; i < combo.yp.size(); ++i) combo.yp[i] = 2.0 * a.yp[i] + 3.0 * b.yp[i];
  const double ia = rough_integral(a, rp, 0, 32).value[0];
  const double ib = rough_integral(b, rp, 0, 32).value[0];
  const double ic = rough_integral(combo, rp, 0, 32).value[0];
  CHECK(ic == Catch::Approx(2.0 * ia + 3.0 * ib).margin(1e-13));
}

TEST_CASE("local estimate holds with the frozen constant") {
  // |int_s^t - Y(s) dX - Y'(s) X2(s,t)| <= C (|X|_a |R|_{a+b} + |X2|_{2a} |Y'|_a) |t-s|^{2a+b}
  auto grid = make_uniform_grid_ptr(1.0, 256);
  for (std::uint64_t s : {1, 2, 3, 4, 5}) {
    const SamplePath w = sample_brownian(grid, 1, 2000 + s);
    const RoughPath rp = ito_lift(w, 1);
    ControlledPath cp = self_controlled(rp);
    for (std::size_t k = 0; k < cp.points(); ++k) {
      const double y = w(k, 0);
      cp.value(k, 0, 0) = std::sin(y);
      cp.deriv(k, 0, 0, 0) = std::cos(y);
    }
    for (auto [j, k] : {std::pair<std::size_t, std::size_t>{0, 256},
                        {32, 64},
                        {100, 228},
                        {0, 16}}) {
      const auto res = rough_integral(cp, rp, j, k, /*with_bound=*/true);
      double local = res.value[0] - cp.value(j, 0, 0) * (w(k, 0) - w(j, 0)) -
                     cp.deriv(j, 0, 0, 0) * rp.levy(j, k)(0, 0);
      CHECK(std::abs(local) <= res.local_bound + 1e-15);
    }
  }
}

TEST_CASE("exponent precondition is flagged, not fatal") {
  auto grid = make_uniform_grid_ptr(1.0, 16);
  const RoughPath rp = ito_lift(sample_brownian(grid, 1, 3), 1, 0.30);  // 3a < 1
  const ControlledPath cp = self_controlled(rp);
  const auto res = rough_integral(cp, rp, 0, 16);
  CHECK_FALSE(res.exponent_ok);
  CHECK(std::isfinite(res.value[0]));
}

TEST_CASE("composition with smooth maps") {
  auto grid = make_uniform_grid_ptr(1.0, 128);
  const RoughPath rp = ito_lift(sample_brownian(grid, 1, 55));
  ControlledPath cp = make_controlled(rp.base, rp.id, 1, 1);
  for (std::size_t k = 0; k < cp.points(); ++k) {
    cp.value(k, 0, 0) = (*rp.base)(k, 0);
    cp.deriv(k, 0, 0, 0) = 1.0;
  }

  SECTION("identity map leaves the pair unchanged") {
    const ControlledPath out = compose_smooth(identity_map(1), cp);
    CHECK(out.y == cp.y);
    CHECK(out.yp == cp.yp);
  }

  SECTION("constant map gives (const, 0)") {
    SmoothMap c;
    c.in_dim = 1;
    c.rows = 1;
    c.cols = 1;
    c.value = [](std::span<const double>, double* out) { out[0] = 7.0; };
    c.gradient = [](std::span<const double>, double* out) { out[0] = 0.0; };
    const ControlledPath out = compose_smooth(c, cp);
    for (std::size_t k = 0; k < out.points(); ++k) CHECK(out.value(k, 0, 0) == 7.0);
    for (double v : out.yp) CHECK(v == 0.0);
  }

  SECTION("square map: remainder is the squared increment") {
    SmoothMap sq;
    sq.in_dim = 1;
    sq.rows = 1;
    sq.cols = 1;
    sq.value = [](std::span<const double> y, double* out) { out[0] = y[0] * y[0]; };
    sq.gradient = [](std::span<const double> y, double* out) { out[0] = 2.0 * y[0]; };
    const ControlledPath out = compose_smooth(sq, cp);
    const SamplePath& w = *rp.base;
    for (auto [j, k] :
         {std::pair<std::size_t, std::size_t>{0, 128}, {10, 31}, {64, 65}}) {
      const double dw = w(k, 0) - w(j, 0);
      CHECK(remainder(out, j, k)(0, 0) == Catch::Approx(dw * dw).margin(1e-13));
    }
    // measured remainder quotient at 2 alpha bounded by measured |W|_a^2
    const double ha = holder_seminorm(w, 0.45).value;
    CHECK(remainder_holder(out, 0.9).value <= ha * ha + 1e-12);
  }
}

TEST_CASE("integral path is again controlled with stable remainder quotient") {
  // (int, Y): remainder quotient of the integral path stays finite and of
  // the same size when the grid is refined
  double q_coarse = 0.0, q_fine = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    const std::size_t n = pass == 0 ? 256 : 1024;
    auto grid = make_uniform_grid_ptr(1.0, n);
    const SamplePath w = sample_brownian(grid, 1, 4242);
    const RoughPath rp = ito_lift(w);
    const ControlledPath cp = self_controlled(rp);
    // builds the running integral as a controlled path (value = integral,
    // derivative = integrand)
    ControlledPath ip = make_controlled(rp.base, rp.id, 1, 1);
    KahanSum acc;
    for (std::size_t k = 0; k < n; ++k) {
      acc.add(w(k, 0) * (w(k + 1, 0) - w(k, 0)) + rp.step_block(k)[0]);
      ip.value(k + 1, 0, 0) = acc.value();
    }
    for (std::size_t k = 0; k <= n; ++k) ip.deriv(k, 0, 0, 0) = w(k, 0);
    const double q = remainder_holder(ip, 0.9).value;
    (pass == 0 ? q_coarse : q_fine) = q;
  }
  CHECK(q_coarse > 0.0);
  CHECK(q_fine < 4.0 * q_coarse + 1.0);
}
