#pragma once

// Shared low-level pieces: deterministic counter-based RNG, compensated
// summation, a small dense-matrix helper and the error types used across
// the library. Everything here is allocation-light and thread-safe.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace roughhjb {

// ---------------------------------------------------------------------------
// errors

class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, std::size_t last_valid)
      : std::runtime_error(what), last_valid_index(last_valid) {}
  std::size_t last_valid_index;
};

class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class unsupported_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// deterministic counter RNG
//
// splitmix64 finalizer; streams are keyed, not stateful, so any (seed,
// counter) pair can be evaluated independently and in parallel with
// bit-identical results.

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t keyed_hash(std::uint64_t seed, std::uint64_t counter) noexcept {
  return mix64(mix64(seed) ^ 0x9E3779B97F4A7C15ULL ^ mix64(counter));
}

// uniform in (0,1); never returns 0 or 1
inline double uniform01(std::uint64_t h) noexcept {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// standard normal keyed by (seed, counter) via Box-Muller
inline double gaussian(std::uint64_t seed, std::uint64_t counter) noexcept {
  const double u1 = uniform01(keyed_hash(seed, 2 * counter));
  const double u2 = uniform01(keyed_hash(seed, 2 * counter + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// derived stream for Monte Carlo sample m
constexpr std::uint64_t sample_seed(std::uint64_t base, std::uint64_t m) noexcept {
  return base ^ mix64(m + 0x5EEDULL);
}

// ---------------------------------------------------------------------------
// summation

// Neumaier-compensated accumulator; used wherever a sum feeds a reported
// value so that results do not depend on accumulation luck.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const noexcept { return sum + comp; }
};

inline double kahan_total(std::span<const double> xs) noexcept {
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

inline MeanStderr mean_stderr(std::span<const double> xs) {
  MeanStderr r;
  r.count = xs.size();
  if (xs.empty()) return r;
  r.mean = kahan_total(xs) / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  KahanSum ss;
  for (double x : xs) ss.add((x - r.mean) * (x - r.mean));
  r.stderr_ = std::sqrt(ss.value() / static_cast<double>(xs.size() - 1) /
                        static_cast<double>(xs.size()));
  return r;
}

// ---------------------------------------------------------------------------
// small dense matrices (row-major); dimensions here are tiny (d <= 3 in all
// worked problems) so no BLAS is warranted.

struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  Mat transposed() const {
    Mat t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows, cols); ++i) t += (*this)(i, i);
    return t;
  }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat& operator*=(double c) {
    for (double& x : a) x *= c;
    return *this;
  }
};

inline Mat operator+(Mat lhs, const Mat& rhs) { return lhs += rhs; }
inline Mat operator-(Mat lhs, const Mat& rhs) { return lhs -= rhs; }
inline Mat operator*(Mat lhs, double c) { return lhs *= c; }

inline Mat matmul(const Mat& x, const Mat& y) {
  Mat z(x.rows, y.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t k = 0; k < x.cols; ++k) {
      const double v = x(i, k);
      for (std::size_t j = 0; j < y.cols; ++j) z(i, j) += v * y(k, j);
    }
  return z;
}

// Frobenius pairing <A, B>
inline double frobenius(const Mat& x, const Mat& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) s += x.a[i] * y.a[i];
  return s;
}

inline Mat sym_part(const Mat& x) {
  Mat s(x.rows, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i)
    for (std::size_t j = 0; j < x.cols; ++j) s(i, j) = 0.5 * (x(i, j) + x(j, i));
  return s;
}

// outer product a b^T
inline Mat outer(std::span<const double> x, std::span<const double> y) {
  Mat m(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) m(i, j) = x[i] * y[j];
  return m;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double euclidean_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// parallel loop with deterministic output
//
// Work item i writes only to its own slot; chunks are static so the
// assignment of indices to threads never changes results. threads == 0
// means hardware concurrency.

inline std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::min(resolve_threads(threads), n == 0 ? std::size_t{1} : n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::atomic<std::size_t> next{0};
  constexpr std::size_t chunk = 8;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t begin = next.fetch_add(chunk);
        if (begin >= n) return;
        const std::size_t end = std::min(begin + chunk, n);
        for (std::size_t i = begin; i < end; ++i) fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace roughhjb
