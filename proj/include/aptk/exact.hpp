#pragma once

// Exact integer / rational matrix algebra on top of GMP.
//
// Hermite normal form convention (row style): H = U * M with U unimodular,
// the nonzero rows of H come first, each pivot is strictly positive, pivot
// columns strictly increase down the rows, entries below a pivot are zero and
// entries above a pivot lie in [0, pivot).

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "aptk/error.hpp"

namespace aptk {

using Integer = mpz_class;
using Rational = mpq_class;

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  Matrix(std::initializer_list<std::initializer_list<T>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw Error(ErrorCode::InvalidArgument, "ragged matrix literal");
      for (const auto& v : row) data_.push_back(v);
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<T> row_vector(std::size_t i) const {
    auto r = row(i);
    return {r.begin(), r.end()};
  }

  std::vector<T> column(std::size_t j) const {
    std::vector<T> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }

  /// Sub-matrix made of the listed rows, in the listed order.
  Matrix select_rows(std::span<const std::size_t> which) const {
    Matrix out(which.size(), cols_);
    for (std::size_t i = 0; i < which.size(); ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(which[i], j);
    return out;
  }

  Matrix select_cols(std::span<const std::size_t> which) const {
    Matrix out(rows_, which.size());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < which.size(); ++j) out(i, j) = (*this)(i, which[j]);
    return out;
  }

  void append_row(std::span<const T> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw Error(ErrorCode::InvalidArgument, "append_row: width mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorCode::InvalidArgument, "matrix product: shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (a(i, k) == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
      }
    return c;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntegerMatrix = Matrix<Integer>;
using RationalMatrix = Matrix<Rational>;

template <typename T>
std::vector<T> multiply(const Matrix<T>& a, std::span<const T> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::InvalidArgument, "matrix-vector product: shape mismatch");
  std::vector<T> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * x[j];
  return out;
}

inline RationalMatrix to_rational(const IntegerMatrix& m) {
  RationalMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = Rational(m(i, j));
  return out;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  Integer r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Integer floor(const Rational& x) {
  return floor_div(x.get_num(), x.get_den());
}

/// x mod 1, in [0, 1).
inline Rational frac(const Rational& x) {
  Rational r = x - Rational(floor(x));
  r.canonicalize();
  return r;
}

inline bool is_integer(const Rational& x) { return x.get_den() == 1; }

inline std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Parses "p", "-p" or "p/q" exactly; throws InvalidArgument otherwise.
inline Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (c != ' ' && c != '\t') s.push_back(c);
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty rational");
  const auto slash = s.find('/');
  auto valid_int = [](const std::string& t) {
    std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i >= t.size()) return false;
    return std::all_of(t.begin() + static_cast<std::ptrdiff_t>(i), t.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
  };
  auto strip_plus = [](std::string t) { return (!t.empty() && t[0] == '+') ? t.substr(1) : t; };
  if (slash == std::string::npos) {
    if (!valid_int(s)) throw Error(ErrorCode::InvalidArgument, "not a rational: '" + text + "'");
    return Rational(Integer(strip_plus(s)));
  }
  const std::string num = s.substr(0, slash);
  const std::string den = s.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den) || den[0] == '-')
    throw Error(ErrorCode::InvalidArgument, "not a rational: '" + text + "'");
  Integer d(strip_plus(den));
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator in '" + text + "'");
  Rational q(Integer(strip_plus(num)), d);
  q.canonicalize();
  return q;
}

template <typename T>
std::string to_string(const Matrix<T>& m) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? ",[" : "[");
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      if constexpr (std::is_same_v<T, Rational>)
        os << to_string(m(i, j));
      else
        os << m(i, j).get_str();
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

namespace detail {

// rows a, b of H (and U) <- [[s, t], [-b/g, a/g]] * rows (a, b)
inline void combine_rows(IntegerMatrix& m, std::size_t ra, std::size_t rb, const Integer& s, const Integer& t,
                         const Integer& u, const Integer& v) {
  for (std::size_t j = 0; j < m.cols(); ++j) {
    Integer x = m(ra, j);
    Integer y = m(rb, j);
    m(ra, j) = s * x + t * y;
    m(rb, j) = u * x + v * y;
  }
}

inline void axpy_row(IntegerMatrix& m, std::size_t target, const Integer& q, std::size_t source) {
  for (std::size_t j = 0; j < m.cols(); ++j) m(target, j) -= q * m(source, j);
}

}  // namespace detail

struct HnfResult {
  IntegerMatrix h;
  IntegerMatrix u;
  std::vector<std::size_t> pivot_cols;  // one per nonzero row of h

  std::size_t rank() const noexcept { return pivot_cols.size(); }
};

inline HnfResult hnf(const IntegerMatrix& m) {
  HnfResult out{m, IntegerMatrix::identity(m.rows()), {}};
  IntegerMatrix& h = out.h;
  IntegerMatrix& u = out.u;
  const std::size_t rows = h.rows();
  std::size_t r = 0;
  for (std::size_t c = 0; c < h.cols() && r < rows; ++c) {
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (h(i, c) == 0) continue;
      Integer a = h(r, c);
      Integer b = h(i, c);
      Integer g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
      Integer p = -b / g;
      Integer q = a / g;
      detail::combine_rows(h, r, i, s, t, p, q);
      detail::combine_rows(u, r, i, s, t, p, q);
    }
    if (h(r, c) == 0) continue;
    if (h(r, c) < 0) {
      for (std::size_t j = 0; j < h.cols(); ++j) h(r, j) = -h(r, j);
      for (std::size_t j = 0; j < u.cols(); ++j) u(r, j) = -u(r, j);
    }
    for (std::size_t k = 0; k < r; ++k) {
      Integer f = floor_div(h(k, c), h(r, c));
      if (f == 0) continue;
      detail::axpy_row(h, k, f, r);
      detail::axpy_row(u, k, f, r);
    }
    out.pivot_cols.push_back(c);
    ++r;
  }
  return out;
}

/// Bareiss fraction-free determinant.
inline Integer determinant(IntegerMatrix m) {
  const std::size_t n = m.rows();
  if (n != m.cols()) throw Error(ErrorCode::InvalidArgument, "determinant of non-square matrix");
  if (n == 0) return 1;
  Integer sign = 1;
  Integer prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && m(p, k) == 0) ++p;
      if (p == n) return 0;
      m.swap_rows(k, p);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

/// Scales a rational matrix to an integer one by the lcm of all denominators.
struct ScaledMatrix {
  IntegerMatrix m;
  Integer scale;
};

inline ScaledMatrix scale_to_integer(const RationalMatrix& a) {
  Integer l = 1;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) l = lcm(l, a(i, j).get_den());
  IntegerMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      Rational v = a(i, j) * l;
      out(i, j) = v.get_num();
    }
  return {std::move(out), l};
}

/// Reduced row echelon form over Q; returns pivot columns.
inline std::vector<std::size_t> rref(RationalMatrix& a) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t p = r;
    while (p < a.rows() && a(p, c) == 0) ++p;
    if (p == a.rows()) continue;
    a.swap_rows(r, p);
    const Rational inv = 1 / a(r, c);
    for (std::size_t j = c; j < a.cols(); ++j) a(r, j) *= inv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || a(i, c) == 0) continue;
      const Rational f = a(i, c);
      for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t rank(RationalMatrix a) { return rref(a).size(); }

/// Integer basis of {u in Z^rows : u * M = 0}, rows in Hermite normal form.
inline IntegerMatrix left_kernel_basis(const RationalMatrix& m) {
  if (m.rows() == 0) throw Error(ErrorCode::InvalidArgument, "left_kernel_basis: empty matrix");
  const auto scaled = scale_to_integer(m);
  const auto res = hnf(scaled.m);
  const std::size_t r = res.rank();
  IntegerMatrix kernel(m.rows() - r, m.rows());
  for (std::size_t i = r; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.rows(); ++j) kernel(i - r, j) = res.u(i, j);
  if (kernel.rows() == 0) return kernel;
  return hnf(kernel).h;
}

/// Some k in Z^{U.cols} with U * k = z, or nullopt when none exists.
inline std::optional<std::vector<Integer>> lattice_membership(const IntegerMatrix& u, std::span<const Integer> z) {
  if (z.size() != u.rows()) throw Error(ErrorCode::InvalidArgument, "lattice_membership: length mismatch");
  const std::size_t n = u.cols();
  if (u.rows() == 0) return std::vector<Integer>(n);
  // hnf(U^T): H = V * U^T, so U * V^T = H^T and k = V^T * y.
  const auto res = hnf(u.transpose());
  std::vector<Integer> rem(z.begin(), z.end());
  std::vector<Integer> y(n);
  for (std::size_t i = 0; i < res.rank(); ++i) {
    const std::size_t p = res.pivot_cols[i];
    const Integer& piv = res.h(i, p);
    if (!mpz_divisible_p(rem[p].get_mpz_t(), piv.get_mpz_t())) return std::nullopt;
    y[i] = rem[p] / piv;
    for (std::size_t j = 0; j < res.h.cols(); ++j) rem[j] -= y[i] * res.h(i, j);
  }
  for (const auto& v : rem)
    if (v != 0) return std::nullopt;
  std::vector<Integer> k(n);
  for (std::size_t i = 0; i < res.rank(); ++i) {
    if (y[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) k[j] += res.u(i, j) * y[i];
  }
  return k;
}

/// Some exact solution of A x = b (free variables set to zero), or nullopt.
inline std::optional<std::vector<Rational>> solve_rational(const RationalMatrix& a, std::span<const Rational> b) {
  if (b.size() != a.rows()) throw Error(ErrorCode::InvalidArgument, "solve_rational: length mismatch");
  RationalMatrix aug(a.rows(), a.cols() + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  const auto pivots = rref(aug);
  if (!pivots.empty() && pivots.back() == a.cols()) return std::nullopt;
  std::vector<Rational> x(a.cols());
  for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = aug(i, a.cols());
  return x;
}

}  // namespace aptk
