#pragma once

// Circuits (A, beta): affinely independent outer points A with beta in relint(conv A).
// Everything here is decided with exact rational Gaussian elimination.

#include <cstdio>
#include <thread>

#include "scone/core.hpp"

namespace scone {

struct BarycentricData {
  std::vector<Rational> lambda;       // aligned with the outer points, all > 0, sum 1
  std::uint64_t p = 0;                // least common denominator of lambda
  std::vector<std::uint64_t> p_alpha; // lambda_a = p_alpha[a] / p
  unsigned m = 0;                     // ceil(log2 p)
};

inline unsigned ceil_log2(std::uint64_t p) {
  unsigned m = 0;
  while ((std::uint64_t{1} << m) < p) ++m;
  return m;
}

namespace detail {

struct AffineSolve {
  bool independent = false;                  // the points are affinely independent
  std::optional<std::vector<Rational>> coords; // affine coordinates of target, when in the affine hull
};

// Solves sum_i l_i * pts[i] = target, sum_i l_i = 1 by exact elimination on the (n+1) x k system.
inline AffineSolve affine_coordinates(std::span<const ExponentVector> pts, const ExponentVector& target) {
  const std::size_t k = pts.size();
  const std::size_t n = target.dim();
  for (const auto& a : pts)
    if (a.dim() != n) throw InputError("dimension mismatch between " + to_string(a) + " and " + to_string(target));

  const std::size_t rows = n + 1;
  std::vector<std::vector<Rational>> mat(rows, std::vector<Rational>(k + 1));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) mat[j][i] = pts[i][j];
    mat[j][k] = target[j];
  }
  for (std::size_t i = 0; i < k; ++i) mat[n][i] = 1;
  mat[n][k] = 1;

  std::vector<std::size_t> pivot_cols;
  std::size_t r = 0;
  for (std::size_t col = 0; col < k && r < rows; ++col) {
    std::size_t piv = r;
    while (piv < rows && mat[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(mat[piv], mat[r]);
    const Rational inv = 1 / mat[r][col];
    for (std::size_t c = col; c <= k; ++c) mat[r][c] *= inv;
    for (std::size_t other = 0; other < rows; ++other) {
      if (other == r || mat[other][col] == 0) continue;
      const Rational f = mat[other][col];
      for (std::size_t c = col; c <= k; ++c) mat[other][c] -= f * mat[r][c];
    }
    pivot_cols.push_back(col);
    ++r;
  }

  AffineSolve out;
  out.independent = pivot_cols.size() == k;
  for (std::size_t row = r; row < rows; ++row)
    if (mat[row][k] != 0) return out;  // target outside the affine hull
  if (!out.independent) return out;
  std::vector<Rational> coords(k);
  for (std::size_t row = 0; row < r; ++row) coords[pivot_cols[row]] = mat[row][k];
  out.coords = std::move(coords);
  return out;
}

}  // namespace detail

inline bool affinely_independent(std::span<const ExponentVector> pts) {
  if (pts.empty()) return false;
  return detail::affine_coordinates(pts, pts.front()).independent;
}

/// Barycentric data of beta with respect to A, present only when A is affinely
/// independent and beta lies in the relative interior of conv(A) but not in A.
inline std::optional<BarycentricData> barycentric(std::span<const ExponentVector> outer, const ExponentVector& beta) {
  if (outer.empty()) throw InputError("barycentric: outer set is empty");
  auto solve = detail::affine_coordinates(outer, beta);
  if (!solve.coords) return std::nullopt;
  if (std::find(outer.begin(), outer.end(), beta) != outer.end()) return std::nullopt;

  BarycentricData d;
  d.lambda = std::move(*solve.coords);
  BigInt lcm = 1;
  for (const auto& l : d.lambda) {
    if (l <= 0) return std::nullopt;
    lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(l));
  }
  if (lcm > (BigInt(1) << 40)) throw InputError("barycentric denominator " + lcm.str() + " is too large to lift");
  d.p = lcm.convert_to<std::uint64_t>();
  for (const auto& l : d.lambda) d.p_alpha.push_back((l * Rational(lcm)).convert_to<std::uint64_t>());
  d.m = ceil_log2(d.p);
  return d;
}

enum class Parity { Even, Odd };

inline const char* to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

struct Circuit {
  std::vector<ExponentVector> outer;  // lexicographic order
  ExponentVector inner;
  BarycentricData bary;
  Parity parity = Parity::Even;

  /// Canonical identifier: 16 hex digits of a hash of (A, beta).
  std::string id() const {
    std::string key = "A=";
    for (const auto& a : outer) key += to_string(a) + ";";
    key += "|b=" + to_string(inner);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key)));
    return buf;
  }

  friend bool operator==(const Circuit& a, const Circuit& b) {
    return a.outer == b.outer && a.inner == b.inner && a.parity == b.parity;
  }
};

inline std::string to_string(const Circuit& c) {
  std::string s = "({";
  for (std::size_t i = 0; i < c.outer.size(); ++i) s += (i ? "," : "") + to_string(c.outer[i]);
  return s + "}," + to_string(c.inner) + ")";
}

/// Builds a circuit, sorting the outer points; absent when (A, beta) is not a circuit.
inline std::optional<Circuit> make_circuit(std::vector<ExponentVector> outer, ExponentVector inner,
                                           Parity parity = Parity::Even) {
  std::sort(outer.begin(), outer.end());
  if (std::adjacent_find(outer.begin(), outer.end()) != outer.end()) return std::nullopt;
  if (outer.size() < 2) return std::nullopt;
  auto bary = barycentric(outer, inner);
  if (!bary) return std::nullopt;
  return Circuit{std::move(outer), std::move(inner), std::move(*bary), parity};
}

inline bool circuit_less(const Circuit& a, const Circuit& b) {
  if (a.outer != b.outer)
    return std::lexicographical_compare(a.outer.begin(), a.outer.end(), b.outer.begin(), b.outer.end());
  return a.inner < b.inner;
}

/// All circuits (A, beta) with A a subset of outer_pool, 2 <= |A| <= max_outer, and beta in inner_pool \ A.
/// Parity is Odd exactly when beta is an odd support point. Output is sorted by (A, beta) and does
/// not depend on `threads`.
inline std::vector<Circuit> enumerate_circuits(const Support& support, std::vector<ExponentVector> outer_pool,
                                               std::vector<ExponentVector> inner_pool, std::size_t max_outer,
                                               unsigned threads = 1) {
  if (max_outer > support.dim() + 1)
    throw InputError("max_outer " + std::to_string(max_outer) + " exceeds dim + 1 = " + std::to_string(support.dim() + 1));
  for (const auto& pool : {&outer_pool, &inner_pool})
    for (const auto& e : *pool)
      if (!support.contains(e)) throw InputError("pool point " + to_string(e) + " is not in the support");
  std::sort(outer_pool.begin(), outer_pool.end());
  outer_pool.erase(std::unique(outer_pool.begin(), outer_pool.end()), outer_pool.end());
  std::sort(inner_pool.begin(), inner_pool.end());
  inner_pool.erase(std::unique(inner_pool.begin(), inner_pool.end()), inner_pool.end());

  std::vector<std::vector<std::size_t>> subsets;
  const std::size_t N = outer_pool.size();
  for (std::size_t size = 2; size <= std::min(max_outer, N); ++size) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      subsets.push_back(idx);
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == N - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }

  auto work = [&](std::size_t first, std::size_t stride, std::vector<Circuit>& out) {
    for (std::size_t s = first; s < subsets.size(); s += stride) {
      std::vector<ExponentVector> outer;
      for (std::size_t i : subsets[s]) outer.push_back(outer_pool[i]);
      if (!affinely_independent(outer)) continue;
      for (const auto& beta : inner_pool) {
        auto bary = barycentric(outer, beta);
        if (!bary) continue;
        const Parity parity = support.contains_odd(beta) ? Parity::Odd : Parity::Even;
        out.push_back(Circuit{outer, beta, std::move(*bary), parity});
      }
    }
  };

  const unsigned nthreads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(subsets.size())));
  std::vector<std::vector<Circuit>> partial(nthreads);
  if (nthreads == 1) {
    work(0, 1, partial[0]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back([&, t] { work(t, nthreads, partial[t]); });
  }
  std::vector<Circuit> all;
  for (auto& part : partial) std::move(part.begin(), part.end(), std::back_inserter(all));
  std::sort(all.begin(), all.end(), circuit_less);
  return all;
}

struct ReducedFlag {
  bool is_reduced = true;
  std::vector<ExponentVector> blockers;  // abs points in conv(A) \ (A u {beta})
};

/// A circuit is reduced for `ground` when no other abs point of the ground support lies in conv(A).
inline ReducedFlag is_reduced(const Circuit& c, const Support& ground) {
  for (const auto& a : c.outer)
    if (!ground.contains_abs(a)) throw InputError("outer point " + to_string(a) + " is not in the ground support");
  ReducedFlag flag;
  for (const auto& g : ground.abs_points()) {
    if (g == c.inner || std::binary_search(c.outer.begin(), c.outer.end(), g)) continue;
    auto solve = detail::affine_coordinates(c.outer, g);
    if (!solve.coords) continue;
    if (std::all_of(solve.coords->begin(), solve.coords->end(), [](const Rational& l) { return l >= 0; }))
      flag.blockers.push_back(g);
  }
  flag.is_reduced = flag.blockers.empty();
  return flag;
}

struct ReducedCircuits {
  std::vector<Circuit> even;  // outer and inner in the abs support
  std::vector<Circuit> odd;   // outer in the abs support, inner in the odd support

  /// Even circuits followed by odd ones; this is the indexing used by the CLI.
  std::vector<Circuit> all() const {
    std::vector<Circuit> v = even;
    v.insert(v.end(), odd.begin(), odd.end());
    return v;
  }
  std::size_t size() const { return even.size() + odd.size(); }
};

/// Reduced even and odd circuits of a support. max_outer = 0 means dim + 1.
inline ReducedCircuits enumerate_reduced(const Support& support, std::size_t max_outer = 0, unsigned threads = 1) {
  if (max_outer == 0) max_outer = support.dim() + 1;
  auto keep_reduced = [&](std::vector<Circuit> cs) {
    std::erase_if(cs, [&](const Circuit& c) { return !is_reduced(c, support).is_reduced; });
    return cs;
  };
  ReducedCircuits r;
  r.even = keep_reduced(enumerate_circuits(support, support.abs_points(), support.abs_points(), max_outer, threads));
  if (!support.odd_points().empty())
    r.odd = keep_reduced(enumerate_circuits(support, support.abs_points(), support.odd_points(), max_outer, threads));
  return r;
}

}  // namespace scone
