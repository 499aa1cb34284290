#pragma once

// Frequency sets over a table of symbolic atoms.
//
// Every frequency is an exact rational vector over the declared atoms, and the
// atoms are taken to be linearly independent over Q. Under that contract the
// rational span, bases and coordinates of a frequency set are computable
// exactly; numeric atom values only enter when a frequency is evaluated.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aptk/error.hpp"
#include "aptk/exact.hpp"

namespace aptk {

struct AtomTable {
  std::vector<std::string> names;
  std::vector<std::optional<double>> values;  // empty, or one entry per name

  std::size_t size() const noexcept { return names.size(); }

  bool numeric() const {
    if (values.size() != names.size()) return false;
    for (const auto& v : values)
      if (!v) return false;
    return true;
  }

  void validate() const {
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j)
        if (names[i] == names[j]) throw Error(ErrorCode::InvalidArgument, "duplicate atom name '" + names[i] + "'");
    if (!values.empty() && values.size() != names.size())
      throw Error(ErrorCode::InvalidArgument, "atom values do not match atom names");
  }
};

struct Frequency {
  std::vector<Rational> coords;

  Frequency() = default;
  explicit Frequency(std::vector<Rational> c) : coords(std::move(c)) {}
  static Frequency zero(std::size_t atoms) { return Frequency(std::vector<Rational>(atoms)); }

  std::size_t dimension() const noexcept { return coords.size(); }

  bool is_zero() const {
    for (const auto& c : coords)
      if (c != 0) return false;
    return true;
  }

  friend bool operator==(const Frequency& a, const Frequency& b) { return a.coords == b.coords; }
};

inline Frequency operator*(const Rational& s, const Frequency& f) {
  Frequency out = f;
  for (auto& c : out.coords) c *= s;
  return out;
}

inline Frequency operator+(const Frequency& a, const Frequency& b) {
  if (a.dimension() != b.dimension()) throw Error(ErrorCode::InvalidArgument, "frequency dimension mismatch");
  Frequency out = a;
  for (std::size_t i = 0; i < out.coords.size(); ++i) out.coords[i] += b.coords[i];
  return out;
}

inline std::string to_string(const Frequency& f) {
  std::string s = "(";
  for (std::size_t i = 0; i < f.coords.size(); ++i) {
    if (i) s += ",";
    s += to_string(f.coords[i]);
  }
  return s + ")";
}

/// Ordered set of distinct frequencies; the order is significant.
class FrequencySet {
 public:
  FrequencySet() = default;
  FrequencySet(std::size_t atoms, std::vector<Frequency> freqs) : atoms_(atoms), freqs_(std::move(freqs)) {
    for (std::size_t i = 0; i < freqs_.size(); ++i) {
      if (freqs_[i].dimension() != atoms_)
        throw Error(ErrorCode::InvalidArgument, "frequency " + std::to_string(i) + " has wrong dimension");
      for (std::size_t j = 0; j < i; ++j)
        if (freqs_[j] == freqs_[i])
          throw Error(ErrorCode::DuplicateFrequency,
                      "frequencies " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
    }
  }

  std::size_t atom_count() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return freqs_.size(); }
  bool empty() const noexcept { return freqs_.empty(); }
  const Frequency& operator[](std::size_t i) const { return freqs_[i]; }
  const std::vector<Frequency>& frequencies() const noexcept { return freqs_; }
  auto begin() const { return freqs_.begin(); }
  auto end() const { return freqs_.end(); }

  std::optional<std::size_t> index_of(const Frequency& f) const {
    for (std::size_t i = 0; i < freqs_.size(); ++i)
      if (freqs_[i] == f) return i;
    return std::nullopt;
  }

  FrequencySet prefix(std::size_t n) const {
    return FrequencySet(atoms_, std::vector<Frequency>(freqs_.begin(), freqs_.begin() + static_cast<std::ptrdiff_t>(n)));
  }

  friend bool operator==(const FrequencySet& a, const FrequencySet& b) {
    return a.atoms_ == b.atoms_ && a.freqs_ == b.freqs_;
  }

 private:
  std::size_t atoms_ = 0;
  std::vector<Frequency> freqs_;
};

/// A basis G of the Q-span of a frequency set together with the coordinate
/// matrix R (row j holds the coordinates of the j-th frequency over G).
struct BasisInfo {
  std::vector<Frequency> basis;
  RationalMatrix coord_matrix;
  bool is_integral = false;
  Integer lcm_q = 1;
  // basis[k] = (natural basis element k) / column_scales[k]; all ones for the
  // natural basis itself.
  std::vector<Integer> column_scales;
  // natural basis element k = sum_l T(k, l) * basis[l]
  std::optional<RationalMatrix> change_of_basis;
  // index in the frequency set of each natural basis member
  std::vector<std::size_t> member_rows;

  std::size_t rank() const noexcept { return basis.size(); }
  std::size_t frequency_count() const noexcept { return coord_matrix.rows(); }

  std::vector<Rational> coords(std::size_t j) const { return coord_matrix.row_vector(j); }

  /// Integer coordinates of row j; requires an integral basis.
  std::vector<Integer> integer_coords(std::size_t j) const {
    if (!is_integral) throw Error(ErrorCode::NonIntegralBasis, "basis is not integral");
    std::vector<Integer> out;
    for (const auto& c : coord_matrix.row(j)) out.push_back(c.get_num());
    return out;
  }
};

namespace detail {

inline RationalMatrix basis_columns(const std::vector<Frequency>& basis, std::size_t atoms) {
  RationalMatrix m(atoms, basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (std::size_t a = 0; a < atoms; ++a) m(a, k) = basis[k].coords[a];
  return m;
}

inline std::optional<std::vector<Rational>> expand(const std::vector<Frequency>& basis, const Frequency& f) {
  if (basis.empty()) {
    if (f.is_zero()) return std::vector<Rational>{};
    return std::nullopt;
  }
  return solve_rational(basis_columns(basis, f.dimension()), f.coords);
}

inline void finish(BasisInfo& b) {
  b.is_integral = true;
  b.lcm_q = 1;
  for (std::size_t i = 0; i < b.coord_matrix.rows(); ++i)
    for (std::size_t k = 0; k < b.coord_matrix.cols(); ++k) {
      const auto& c = b.coord_matrix(i, k);
      if (c.get_den() != 1) b.is_integral = false;
      b.lcm_q = lcm(b.lcm_q, c.get_den());
    }
}

}  // namespace detail

/// Greedy basis drawn from the set itself: a frequency joins the basis when it
/// is Q-independent of the members chosen before it. Zero is never a member.
inline BasisInfo natural_basis(const FrequencySet& set) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "natural_basis of an empty frequency set");
  BasisInfo out;
  std::vector<std::vector<Rational>> rows;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const Frequency& f = set[j];
    auto c = detail::expand(out.basis, f);
    if (c) {
      rows.push_back(std::move(*c));
      continue;
    }
    out.basis.push_back(f);
    out.member_rows.push_back(j);
    std::vector<Rational> unit(out.basis.size());
    unit.back() = 1;
    rows.push_back(std::move(unit));
  }
  const std::size_t m = out.basis.size();
  out.coord_matrix = RationalMatrix(set.size(), m);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t k = 0; k < rows[j].size(); ++k) out.coord_matrix(j, k) = rows[j][k];
  out.column_scales.assign(m, Integer(1));
  out.change_of_basis = RationalMatrix::identity(m);
  detail::finish(out);
  return out;
}

/// Rescales every basis element by the lcm of the denominators in its column,
/// so that all coordinates become integers.
inline BasisInfo integralize(const BasisInfo& b) {
  BasisInfo out = b;
  const std::size_t m = b.rank();
  if (out.column_scales.size() != m) out.column_scales.assign(m, Integer(1));
  RationalMatrix step = RationalMatrix::identity(m);
  for (std::size_t k = 0; k < m; ++k) {
    Integer q = 1;
    for (std::size_t j = 0; j < b.coord_matrix.rows(); ++j) q = lcm(q, b.coord_matrix(j, k).get_den());
    step(k, k) = Rational(q);
    if (q == 1) continue;
    for (std::size_t j = 0; j < b.coord_matrix.rows(); ++j) out.coord_matrix(j, k) *= q;
    Rational inv(Integer(1), q);
    out.basis[k] = inv * b.basis[k];
    out.column_scales[k] *= q;
  }
  const RationalMatrix prior = b.change_of_basis ? *b.change_of_basis : RationalMatrix::identity(m);
  out.change_of_basis = prior * step;
  detail::finish(out);
  return out;
}

/// T with from.basis[k] = sum_l T(k, l) * to.basis[l]. For two bases of the
/// same frequency set, to.coord_matrix = from.coord_matrix * T.
inline RationalMatrix change_of_basis(const BasisInfo& from, const BasisInfo& to) {
  if (from.rank() != to.rank()) throw Error(ErrorCode::SpanMismatch, "bases have different ranks");
  const std::size_t m = from.rank();
  RationalMatrix t(m, m);
  if (m == 0) return t;
  const std::size_t atoms = from.basis.front().dimension();
  for (std::size_t k = 0; k < m; ++k) {
    auto c = detail::expand(to.basis, from.basis[k]);
    if (!c) throw Error(ErrorCode::SpanMismatch, "basis element " + std::to_string(k) + " is outside the target span");
    for (std::size_t l = 0; l < m; ++l) t(k, l) = (*c)[l];
  }
  if (rank(detail::basis_columns(to.basis, atoms)) != m)
    throw Error(ErrorCode::SpanMismatch, "target basis is not Q-independent");
  return t;
}

/// Exact reconstruction sum_k R(j, k) g_k.
inline Frequency reconstruct(const BasisInfo& b, std::size_t j, std::size_t atoms) {
  Frequency f = Frequency::zero(atoms);
  for (std::size_t k = 0; k < b.rank(); ++k) f = f + b.coord_matrix(j, k) * b.basis[k];
  return f;
}

inline double eval_numeric(const Frequency& f, const AtomTable& atoms) {
  if (f.dimension() != atoms.size()) throw Error(ErrorCode::InvalidArgument, "frequency/atom dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < f.coords.size(); ++k) {
    if (f.coords[k] == 0) continue;
    if (k >= atoms.values.size() || !atoms.values[k])
      throw Error(ErrorCode::MissingAtomValue, "atom '" + atoms.names[k] + "' has no numeric value");
    s += f.coords[k].get_d() * *atoms.values[k];
  }
  return s;
}

}  // namespace aptk
