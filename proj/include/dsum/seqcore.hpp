#pragma once

/**
 * @file seqcore.hpp
 * @brief Double sequences, index windows, truncations and the truncated norms.
 *
 * A DoubleSequence is a pure evaluation rule on N x N. Everything infinite
 * (sups, double series) is evaluated on a finite Truncation and the
 * truncation is always carried in the result.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dsum {

using Scalar = double;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Index {
  std::size_t k = 0;
  std::size_t l = 0;
  friend bool operator==(const Index&, const Index&) = default;
};

/// Window with corner (m, n) covering k in [m, m+q], l in [n, n+qp].
struct Window {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t q = 0;
  std::size_t qp = 0;

  [[nodiscard]] std::size_t cardinality() const noexcept { return (q + 1) * (qp + 1); }
  friend bool operator==(const Window&, const Window&) = default;
};

/// The finite grid [0, M] x [0, N].
struct Truncation {
  std::size_t M = 1;
  std::size_t N = 1;

  Truncation() = default;
  Truncation(std::size_t m, std::size_t n) : M(m), N(n) {
    if (M == 0 || N == 0) throw Error("Truncation: M and N must be positive");
  }
  [[nodiscard]] static Truncation square(std::size_t side_cells) {
    if (side_cells < 2) throw Error("Truncation: a square stage needs at least 2 cells per side");
    return {side_cells - 1, side_cells - 1};
  }
  friend bool operator==(const Truncation&, const Truncation&) = default;
};

/// Pure rule (k, l) -> value with an optional label.
class DoubleSequence {
 public:
  using Rule = std::function<Scalar(std::size_t, std::size_t)>;

  DoubleSequence() : rule_([](std::size_t, std::size_t) { return 0.0; }), name_("zero") {}
  explicit DoubleSequence(Rule rule, std::string name = {}, std::string description = {})
      : rule_(std::move(rule)), name_(std::move(name)), description_(std::move(description)) {}

  Scalar operator()(std::size_t k, std::size_t l) const { return rule_(k, l); }
  Scalar operator()(Index i) const { return rule_(i.k, i.l); }

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const std::string& description() const noexcept { return description_; }
  [[nodiscard]] const Rule& rule() const noexcept { return rule_; }

  [[nodiscard]] DoubleSequence renamed(std::string name) const {
    return DoubleSequence(rule_, std::move(name), description_);
  }

  [[nodiscard]] DoubleSequence scaled(Scalar c) const {
    auto r = rule_;
    return DoubleSequence([r, c](std::size_t k, std::size_t l) { return c * r(k, l); },
                          name_.empty() ? std::string{} : "(" + name_ + ")*c");
  }

 private:
  Rule rule_;
  std::string name_;
  std::string description_;
};

/// c1*x + c2*z, evaluated pointwise.
inline DoubleSequence linear_combination(Scalar c1, const DoubleSequence& x, Scalar c2,
                                         const DoubleSequence& z) {
  auto rx = x.rule();
  auto rz = z.rule();
  return DoubleSequence(
      [=](std::size_t k, std::size_t l) { return c1 * rx(k, l) + c2 * rz(k, l); }, "combination");
}

/// Dense row-major grid of values on [0, rows) x [0, cols).
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, Scalar fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Grid sample(const DoubleSequence& x, std::size_t rows, std::size_t cols) {
    Grid g(rows, cols);
    for (std::size_t k = 0; k < rows; ++k)
      for (std::size_t l = 0; l < cols; ++l) g(k, l) = x(k, l);
    return g;
  }
  static Grid sample(const DoubleSequence& x, Truncation tr) { return sample(x, tr.M + 1, tr.N + 1); }

  Scalar& operator()(std::size_t k, std::size_t l) { return data_[k * cols_ + l]; }
  Scalar operator()(std::size_t k, std::size_t l) const { return data_[k * cols_ + l]; }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] const std::vector<Scalar>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> data_;
};

/// Inclusive 2-D prefix sums; window sums in O(1).
class PrefixSum2D {
 public:
  PrefixSum2D() = default;
  explicit PrefixSum2D(const Grid& g) : rows_(g.rows()), cols_(g.cols()), s_((rows_ + 1) * (cols_ + 1), 0.0) {
    for (std::size_t k = 0; k < rows_; ++k) {
      Scalar row = 0.0;
      for (std::size_t l = 0; l < cols_; ++l) {
        row += g(k, l);
        at(k + 1, l + 1) = at(k, l + 1) + row;
      }
    }
  }

  /// Sum over k in [m, m+q], l in [n, n+qp].
  [[nodiscard]] Scalar window_sum(const Window& w) const {
    const std::size_t k1 = w.m + w.q + 1;
    const std::size_t l1 = w.n + w.qp + 1;
    return at(k1, l1) - at(w.m, l1) - at(k1, w.n) + at(w.m, w.n);
  }
  [[nodiscard]] Scalar window_mean(const Window& w) const {
    return window_sum(w) / static_cast<Scalar>(w.cardinality());
  }
  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

 private:
  Scalar& at(std::size_t i, std::size_t j) { return s_[i * (cols_ + 1) + j]; }
  [[nodiscard]] Scalar at(std::size_t i, std::size_t j) const { return s_[i * (cols_ + 1) + j]; }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Scalar> s_;
};

// ---------------------------------------------------------------------------
// Window functionals

/// Exact mean of x over the window, summed row-major.
inline Scalar window_mean(const DoubleSequence& x, const Window& w) {
  Scalar sum = 0.0;
  for (std::size_t k = w.m; k <= w.m + w.q; ++k)
    for (std::size_t l = w.n; l <= w.n + w.qp; ++l) sum += x(k, l);
  return sum / static_cast<Scalar>(w.cardinality());
}

/// Mean of |x - L| over the window.
inline Scalar abs_window_mean(const DoubleSequence& x, const Window& w, Scalar L) {
  Scalar sum = 0.0;
  for (std::size_t k = w.m; k <= w.m + w.q; ++k)
    for (std::size_t l = w.n; l <= w.n + w.qp; ++l) sum += std::abs(x(k, l) - L);
  return sum / static_cast<Scalar>(w.cardinality());
}

// ---------------------------------------------------------------------------
// Truncated norms

struct SupResult {
  Scalar value = 0.0;
  Index argmax{};
  Truncation truncation{};
};

inline SupResult sup_abs(const DoubleSequence& x, Truncation tr) {
  SupResult r{0.0, {}, tr};
  for (std::size_t k = 0; k <= tr.M; ++k)
    for (std::size_t l = 0; l <= tr.N; ++l) {
      const Scalar v = std::abs(x(k, l));
      if (v > r.value) r = {v, {k, l}, tr};
    }
  return r;
}

/// sup_{m,n >= start} |x_{mn}| inside the truncation: the finite probe of the
/// C_p tail seminorm.
inline Scalar tail_sup_abs(const DoubleSequence& x, Truncation tr, std::size_t start) {
  Scalar best = 0.0;
  for (std::size_t k = start; k <= tr.M; ++k)
    for (std::size_t l = start; l <= tr.N; ++l) best = std::max(best, std::abs(x(k, l)));
  return best;
}

struct WindowSupResult {
  Scalar value = 0.0;
  Window argmax{};
  Truncation truncation{};
};

namespace detail {

// Scans all windows inside tr in lexicographic (q, qp, m, n) order and
// returns the first maximiser of |mean|.
inline WindowSupResult window_sup(const Grid& g, Truncation tr) {
  const PrefixSum2D ps(g);
  WindowSupResult r{0.0, {0, 0, 0, 0}, tr};
  bool first = true;
  for (std::size_t q = 0; q <= tr.M; ++q)
    for (std::size_t qp = 0; qp <= tr.N; ++qp)
      for (std::size_t m = 0; m + q <= tr.M; ++m)
        for (std::size_t n = 0; n + qp <= tr.N; ++n) {
          const Window w{m, n, q, qp};
          const Scalar v = std::abs(ps.window_mean(w));
          if (first || v > r.value) {
            r = {v, w, tr};
            first = false;
          }
        }
  return r;
}

}  // namespace detail

/// Truncated almost-convergence norm: max |window mean| over windows in tr.
inline WindowSupResult norm_Cf(const DoubleSequence& x, Truncation tr) {
  return detail::window_sup(Grid::sample(x, tr), tr);
}

/// Truncated strong norm: max window mean of |x| over windows in tr.
inline WindowSupResult norm_strong(const DoubleSequence& x, Truncation tr) {
  Grid g = Grid::sample(x, tr);
  for (std::size_t k = 0; k < g.rows(); ++k)
    for (std::size_t l = 0; l < g.cols(); ++l) g(k, l) = std::abs(g(k, l));
  return detail::window_sup(g, tr);
}

/// Truncated (sum |x|^q)^(1/q); q = 1 is the L_u gauge.
inline Scalar lq_norm(const DoubleSequence& x, Truncation tr, Scalar q) {
  if (!(q >= 1.0)) throw Error("lq_norm: exponent must be >= 1");
  Scalar sum = 0.0;
  for (std::size_t k = 0; k <= tr.M; ++k)
    for (std::size_t l = 0; l <= tr.N; ++l) {
      const Scalar a = std::abs(x(k, l));
      sum += q == 1.0 ? a : std::pow(a, q);
    }
  return q == 1.0 ? sum : std::pow(sum, 1.0 / q);
}

// ---------------------------------------------------------------------------
// Partial sums

/// s_{mn} = sum_{k<=m, l<=n} x_{kl}, computed lazily and cached per
/// requested extent. Copies share the cache.
class PartialSumGrid {
 public:
  explicit PartialSumGrid(DoubleSequence source) : source_(std::move(source)), cache_(std::make_shared<Cache>()) {}

  [[nodiscard]] const DoubleSequence& source() const noexcept { return source_; }

  /// s_{mn}.
  Scalar operator()(std::size_t m, std::size_t n) const {
    std::lock_guard<std::mutex> lock(cache_->mu);
    ensure(m + 1, n + 1);
    return cache_->ps(m + 1, n + 1);
  }

  /// The partial sums as a DoubleSequence.
  [[nodiscard]] DoubleSequence as_sequence() const {
    auto self = *this;
    return DoubleSequence([self](std::size_t m, std::size_t n) { return self(m, n); },
                          "partial-sums(" + source_.name() + ")");
  }

 private:
  struct Cache {
    std::mutex mu;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Scalar> s;
    Scalar& ps(std::size_t i, std::size_t j) { return s[i * (cols + 1) + j]; }
  };

  void ensure(std::size_t rows, std::size_t cols) const {
    auto& c = *cache_;
    if (rows <= c.rows && cols <= c.cols) return;
    const std::size_t R = std::max(rows, 2 * c.rows);
    const std::size_t C = std::max(cols, 2 * c.cols);
    c.rows = R;
    c.cols = C;
    c.s.assign((R + 1) * (C + 1), 0.0);
    for (std::size_t k = 0; k < R; ++k) {
      Scalar row = 0.0;
      for (std::size_t l = 0; l < C; ++l) {
        row += source_(k, l);
        c.ps(k + 1, l + 1) = c.ps(k, l + 1) + row;
      }
    }
  }

  DoubleSequence source_;
  std::shared_ptr<Cache> cache_;
};

inline PartialSumGrid partial_sums(const DoubleSequence& x) { return PartialSumGrid(x); }

}  // namespace dsum
