#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dff/types.hpp"

namespace dff {

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

inline std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e > 0) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// Deterministic Miller-Rabin for 64-bit integers.
inline bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    std::uint64_t x = detail::powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = detail::mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline std::uint64_t next_prime_at_least(std::uint64_t n) {
  if (n <= 2) return 2;
  if (n % 2 == 0) ++n;
  while (!is_prime_u64(n)) n += 2;
  return n;
}

/// Arithmetic in F_p for a 64-bit prime p; products carried in 128 bits.
class PrimeField {
 public:
  explicit PrimeField(std::uint64_t p) : p_(p) {
    if (!is_prime_u64(p)) throw ParameterError("modulus is not prime");
  }

  std::uint64_t modulus() const { return p_; }
  std::uint64_t reduce(std::uint64_t a) const { return a % p_; }
  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    std::uint64_t s = a + b;
    if (s >= p_ || s < a) s -= p_;
    return s;
  }
  std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + (p_ - b); }
  std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return detail::mulmod(a, b, p_); }
  std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : p_ - a; }
  std::uint64_t inv(std::uint64_t a) const {
    if (a == 0) throw ParameterError("division by zero in prime field");
    return detail::powmod(a, p_ - 2, p_);
  }

 private:
  std::uint64_t p_;
};

/// Degree-(d-1) polynomial over F_p, coefficients low-order first. The secret
/// of a sharing polynomial is the constant term.
struct FieldPoly {
  std::uint64_t p = 2;
  std::vector<std::uint64_t> coeffs;  // size d, leading zeros allowed

  std::size_t degree_bound() const { return coeffs.size(); }
  friend bool operator==(const FieldPoly&, const FieldPoly&) = default;
};

/// Horner evaluation mod p.
inline std::uint64_t poly_eval(const FieldPoly& poly, std::uint64_t x) {
  PrimeField f(poly.p);
  if (x >= poly.p) throw ParameterError("evaluation point outside the field");
  std::uint64_t acc = 0;
  for (auto it = poly.coeffs.rbegin(); it != poly.coeffs.rend(); ++it) {
    acc = f.add(f.mul(acc, x), f.reduce(*it));
  }
  return acc;
}

using Share = std::pair<std::uint64_t, std::uint64_t>;  // (point, value)

/// Builds the sharing polynomial with constant term `secret` and the given
/// non-constant coefficients, then evaluates it at the requested points.
/// Points must be distinct and non-zero (point 0 would hand out the secret).
inline std::vector<Share> share_with_coeffs(std::uint64_t secret, std::size_t d, std::uint64_t p,
                                            const std::vector<std::uint64_t>& tail_coeffs,
                                            const std::vector<std::uint64_t>& points) {
  PrimeField f(p);
  if (d < 1) throw ParameterError("threshold must be at least 1");
  if (secret >= p) throw ParameterError("secret outside the field");
  if (tail_coeffs.size() != d - 1) throw ParameterError("expected d-1 non-constant coefficients");
  FieldPoly poly{p, {}};
  poly.coeffs.push_back(secret);
  for (std::uint64_t c : tail_coeffs) poly.coeffs.push_back(f.reduce(c));
  std::vector<Share> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] == 0) throw ParameterError("share point 0 is not allowed");
    if (points[i] >= p) throw ParameterError("share point outside the field");
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) throw ParameterError("duplicate share point");
    }
    out.emplace_back(points[i], poly_eval(poly, points[i]));
  }
  return out;
}

/// Same as share_with_coeffs but draws the d-1 free coefficients from a
/// caller-supplied source (a seeded generator in practice).
inline std::vector<Share> share(std::uint64_t secret, std::size_t d, std::uint64_t p,
                                const std::function<std::uint64_t()>& coeff_source,
                                const std::vector<std::uint64_t>& points) {
  std::vector<std::uint64_t> tail;
  for (std::size_t j = 1; j < d; ++j) tail.push_back(coeff_source() % p);
  return share_with_coeffs(secret, d, p, tail, points);
}

/// Lagrange interpolation: the unique polynomial of degree < |shares| through
/// all shares, returned coefficientwise.
inline FieldPoly reconstruct(const std::vector<Share>& shares, std::uint64_t p) {
  PrimeField f(p);
  const std::size_t d = shares.size();
  if (d == 0) throw ParameterError("cannot interpolate zero shares");
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (shares[i].first == shares[j].first) throw ParameterError("duplicate share point");
    }
  }
  FieldPoly acc{p, std::vector<std::uint64_t>(d, 0)};
  // acc += z_j * prod_{l != j} (x - x_l) / (x_j - x_l)
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<std::uint64_t> basis{1};  // running product polynomial
    std::uint64_t denom = 1;
    for (std::size_t l = 0; l < d; ++l) {
      if (l == j) continue;
      const std::uint64_t xl = f.reduce(shares[l].first);
      std::vector<std::uint64_t> next(basis.size() + 1, 0);
      for (std::size_t t = 0; t < basis.size(); ++t) {
        next[t] = f.add(next[t], f.mul(basis[t], f.neg(xl)));
        next[t + 1] = f.add(next[t + 1], basis[t]);
      }
      basis = std::move(next);
      denom = f.mul(denom, f.sub(f.reduce(shares[j].first), xl));
    }
    const std::uint64_t scale = f.mul(f.reduce(shares[j].second), f.inv(denom));
    for (std::size_t t = 0; t < basis.size(); ++t) {
      acc.coeffs[t] = f.add(acc.coeffs[t], f.mul(basis[t], scale));
    }
  }
  return acc;
}

/// One linear equation sum_j coeff[j] * c_j = rhs over F_p.
struct LinearConstraint {
  std::vector<std::uint64_t> lhs;
  std::uint64_t rhs = 0;
};

/// Solves for the lexicographically least coefficient vector (c_0,...,c_{d-1})
/// satisfying all constraints; nullopt when the system is inconsistent.
inline std::optional<std::vector<std::uint64_t>> lex_least_solution(
    std::vector<LinearConstraint> rows, std::size_t d, std::uint64_t p) {
  PrimeField f(p);
  auto solvable_with = [&](const std::vector<LinearConstraint>& sys,
                           std::vector<std::uint64_t>* solution,
                           std::vector<bool>* free_col) -> bool {
    // Gaussian elimination to row echelon form over columns 0..d-1.
    std::vector<std::vector<std::uint64_t>> m;
    for (const auto& r : sys) {
      std::vector<std::uint64_t> row(d + 1, 0);
      for (std::size_t j = 0; j < r.lhs.size() && j < d; ++j) row[j] = f.reduce(r.lhs[j]);
      row[d] = f.reduce(r.rhs);
      m.push_back(std::move(row));
    }
    std::vector<int> pivot_of_col(d, -1);
    std::size_t rank = 0;
    for (std::size_t col = 0; col < d && rank < m.size(); ++col) {
      std::size_t sel = rank;
      while (sel < m.size() && m[sel][col] == 0) ++sel;
      if (sel == m.size()) continue;
      std::swap(m[rank], m[sel]);
      const std::uint64_t invp = f.inv(m[rank][col]);
      for (std::size_t j = col; j <= d; ++j) m[rank][j] = f.mul(m[rank][j], invp);
      for (std::size_t r2 = 0; r2 < m.size(); ++r2) {
        if (r2 == rank || m[r2][col] == 0) continue;
        const std::uint64_t factor = m[r2][col];
        for (std::size_t j = col; j <= d; ++j) {
          m[r2][j] = f.sub(m[r2][j], f.mul(factor, m[rank][j]));
        }
      }
      pivot_of_col[col] = static_cast<int>(rank);
      ++rank;
    }
    for (std::size_t r2 = rank; r2 < m.size(); ++r2) {
      if (m[r2][d] != 0) return false;
    }
    if (solution) {
      solution->assign(d, 0);
      for (std::size_t col = 0; col < d; ++col) {
        if (pivot_of_col[col] >= 0) (*solution)[col] = m[pivot_of_col[col]][d];
      }
    }
    if (free_col) {
      free_col->assign(d, false);
      for (std::size_t col = 0; col < d; ++col) (*free_col)[col] = pivot_of_col[col] < 0;
    }
    return true;
  };

  std::vector<std::uint64_t> sol;
  if (!solvable_with(rows, &sol, nullptr)) return std::nullopt;
  // Greedy per coordinate, lowest index first. Over a field the set of values
  // a single coordinate takes across an affine solution space is either one
  // point or all of F_p, so "0 if attainable, else the forced value" is the
  // lexicographic minimum.
  for (std::size_t j = 0; j < d; ++j) {
    LinearConstraint pin;
    pin.lhs.assign(d, 0);
    pin.lhs[j] = 1;
    pin.rhs = 0;
    rows.push_back(pin);
    if (!solvable_with(rows, &sol, nullptr)) {
      rows.back().rhs = sol[j];
      const bool ok = solvable_with(rows, &sol, nullptr);
      if (!ok) return std::nullopt;  // cannot happen: sol satisfies rows
    }
  }
  return sol;
}

}  // namespace dff
