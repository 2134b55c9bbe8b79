#pragma once

// Primal and dual circuit matrices: block-diagonal matrices of 1x1 and 2x2 blocks whose
// PSD-feasibility projects onto a circuit cone, plus the 2x2 PSD <-> SOC rewrite.
//
// With m = ceil(log2 p) the dual matrix has
//   Chain(k,i)   [[y_{k-1,2i-1}, y_{k,i}], [y_{k,i}, y_{k-1,2i}]]   k = 2..m-1, i = 1..2^{m-k}
//   Special      [[y_{m-1,1}, v_b], [v_b, y_{m-1,2}]]
//   SingletonBeta (v_b)
//   Leaf(l)      [[u, y_{1,l}], [y_{1,l}, w]]                        l = 1..2^{m-1}
// and the primal matrix replaces v by c, runs the chain up to k = m, and adds
//   SingletonTheta (x_{m,1} - theta x_b),  SingletonBeta (x_b + c_b),  theta = prod lambda_a^{lambda_a}.
// Leaves draw u, w from the multiset {outer coefficient a repeated p_a times} + {beta slot repeated 2^m - p times}.

#include <functional>
#include <variant>

#include "scone/affine.hpp"
#include "scone/circuits.hpp"

namespace scone {

enum class Side { Primal, Dual };

inline const char* to_string(Side s) { return s == Side::Primal ? "primal" : "dual"; }

enum class BlockRole { Chain, Special, SingletonBeta, SingletonTheta, Leaf, OddExtension };

inline const char* to_string(BlockRole r) {
  switch (r) {
    case BlockRole::Chain: return "Chain";
    case BlockRole::Special: return "Special";
    case BlockRole::SingletonBeta: return "SingletonBeta";
    case BlockRole::SingletonTheta: return "SingletonTheta";
    case BlockRole::Leaf: return "Leaf";
    case BlockRole::OddExtension: return "OddExtension";
  }
  return "?";
}

struct BlockTag {
  BlockRole role = BlockRole::Leaf;
  unsigned k = 0;  // Chain level
  unsigned i = 0;  // Chain index, or leaf index l

  friend bool operator==(const BlockTag&, const BlockTag&) = default;
};

inline std::string to_string(const BlockTag& t) {
  switch (t.role) {
    case BlockRole::Chain: return "Chain(" + std::to_string(t.k) + "," + std::to_string(t.i) + ")";
    case BlockRole::Leaf: return "Leaf(" + std::to_string(t.i) + ")";
    default: return to_string(t.role);
  }
}

/// A symmetric block: (a) when size == 1, [[a, b], [b, c]] when size == 2.
struct BlockSpec {
  unsigned size = 1;
  AffineEntry a, b, c;
  BlockTag tag;

  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

struct CircuitMatrix {
  Side side = Side::Dual;
  Circuit circuit;
  std::vector<BlockSpec> blocks;
  std::vector<VarRef> vars;  // coefficient variables first, then lift variables
  double theta = 1.0;        // prod lambda_a^{lambda_a}; only meaningful on the primal side

  std::size_t count_blocks(unsigned size) const {
    return static_cast<std::size_t>(
        std::count_if(blocks.begin(), blocks.end(), [&](const BlockSpec& b) { return b.size == size; }));
  }
  std::size_t count_role(BlockRole role) const {
    return static_cast<std::size_t>(
        std::count_if(blocks.begin(), blocks.end(), [&](const BlockSpec& b) { return b.tag.role == role; }));
  }
  std::size_t lift_var_count() const {
    return static_cast<std::size_t>(std::count_if(vars.begin(), vars.end(), [](const VarRef& v) {
      return v.kind == VarKind::LiftPrimal || v.kind == VarKind::LiftPrimalBeta || v.kind == VarKind::LiftDual ||
             v.kind == VarKind::LiftDualBeta;
    }));
  }
};

/// ||rows||_2 <= rhs
struct SocConstraint {
  std::vector<AffineEntry> rows;
  AffineEntry rhs;

  friend bool operator==(const SocConstraint&, const SocConstraint&) = default;
};

/// theta = prod lambda_a^{lambda_a}. Exact whenever prod p_a^{p_a} has an integer p-th root,
/// otherwise exp((sum p_a ln p_a - p ln p) / p) with compensated summation.
inline double theta(const BarycentricData& b) {
  BigInt num = 1;
  for (auto pa : b.p_alpha) num *= ipow(BigInt(pa), pa);
  const double log_num = log_abs(num);
  const double guess = std::round(std::exp(log_num / static_cast<double>(b.p)));
  if (guess < 9.0e15) {
    for (double r : {guess - 1, guess, guess + 1}) {
      if (r < 1) continue;
      if (ipow(BigInt(static_cast<long long>(r)), b.p) == num)
        return to_double(Rational(static_cast<long long>(r), static_cast<long long>(b.p)));
    }
  }
  long double acc = 0.0L, comp = 0.0L;
  auto add = [&](long double x) {
    const long double t = acc + x;
    comp += std::fabs(acc) >= std::fabs(x) ? (acc - t) + x : (x - t) + acc;
    acc = t;
  };
  for (auto pa : b.p_alpha) add(static_cast<long double>(pa) * std::log(static_cast<long double>(pa)));
  add(-static_cast<long double>(b.p) * std::log(static_cast<long double>(b.p)));
  return static_cast<double>(std::exp((acc + comp) / static_cast<long double>(b.p)));
}

namespace detail {

// Leaf multiset as slots: 0..k-1 are outer points (lexicographic), k is the beta slot.
inline std::vector<std::size_t> leaf_slots(const Circuit& circ, std::span<const std::size_t> leaf_order) {
  const auto& b = circ.bary;
  const std::size_t width = std::size_t{1} << b.m;
  std::vector<std::size_t> slots;
  for (std::size_t a = 0; a < b.p_alpha.size(); ++a) slots.insert(slots.end(), b.p_alpha[a], a);
  slots.insert(slots.end(), width - b.p, circ.outer.size());
  if (leaf_order.empty()) return slots;
  if (leaf_order.size() != width) throw InputError("leaf order must be a permutation of size 2^m");
  std::vector<std::size_t> permuted(width);
  std::vector<bool> seen(width, false);
  for (std::size_t j = 0; j < width; ++j) {
    if (leaf_order[j] >= width || seen[leaf_order[j]]) throw InputError("leaf order is not a permutation");
    seen[leaf_order[j]] = true;
    permuted[j] = slots[leaf_order[j]];
  }
  return permuted;
}

inline BlockSpec block2(AffineEntry a, AffineEntry b, AffineEntry c, BlockTag tag) {
  return {2, std::move(a), std::move(b), std::move(c), tag};
}
inline BlockSpec block1(AffineEntry a, BlockTag tag) { return {1, std::move(a), {}, {}, tag}; }

inline void push_unique(std::vector<VarRef>& vars, const VarRef& v) {
  if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
}

// Coefficient variable for outer index a (a < |A|) or for beta (a == |A|).
using CoeffVarFn = std::function<VarRef(std::size_t)>;

inline CircuitMatrix build_dual(const Circuit& circ, const CoeffVarFn& coeff, std::span<const std::size_t> leaf_order) {
  const std::string cid = circ.id();
  const unsigned m = circ.bary.m;
  const std::size_t k_outer = circ.outer.size();
  const bool odd = circ.parity == Parity::Odd;

  CircuitMatrix mat;
  mat.side = Side::Dual;
  mat.circuit = circ;
  for (std::size_t a = 0; a <= k_outer; ++a) mat.vars.push_back(coeff(a));
  const VarRef beta_var = odd ? vars::lift_dual_beta(cid) : coeff(k_outer);
  if (odd) mat.vars.push_back(beta_var);
  const AffineEntry beta = AffineEntry::of(beta_var);

  auto y = [&](unsigned k, unsigned i) {
    VarRef v = vars::lift_dual(k, i, cid);
    push_unique(mat.vars, v);
    return AffineEntry::of(v);
  };
  // register lift variables in (k, i) order
  for (unsigned k = 1; k + 1 <= m; ++k)
    for (unsigned i = 1; i <= (1u << (m - k)); ++i) y(k, i);

  const auto slots = leaf_slots(circ, leaf_order);
  auto slot_entry = [&](std::size_t s) { return s == k_outer ? beta : AffineEntry::of(coeff(s)); };

  if (m <= 1) {
    // p = 2: the single leaf carries v_b off the diagonal.
    mat.blocks.push_back(block1(beta, {BlockRole::SingletonBeta}));
    mat.blocks.push_back(block2(slot_entry(slots[0]), beta, slot_entry(slots[1]), {BlockRole::Leaf, 0, 1}));
  } else {
    for (unsigned k = 2; k <= m - 1; ++k)
      for (unsigned i = 1; i <= (1u << (m - k)); ++i)
        mat.blocks.push_back(block2(y(k - 1, 2 * i - 1), y(k, i), y(k - 1, 2 * i), {BlockRole::Chain, k, i}));
    mat.blocks.push_back(block2(y(m - 1, 1), beta, y(m - 1, 2), {BlockRole::Special}));
    mat.blocks.push_back(block1(beta, {BlockRole::SingletonBeta}));
    for (unsigned l = 1; l <= (1u << (m - 1)); ++l)
      mat.blocks.push_back(
          block2(slot_entry(slots[2 * l - 2]), y(1, l), slot_entry(slots[2 * l - 1]), {BlockRole::Leaf, 0, l}));
  }
  if (odd) {
    const AffineEntry v_beta = AffineEntry::of(coeff(k_outer));
    mat.blocks.push_back(block2(beta, v_beta, beta, {BlockRole::OddExtension}));
  }
  return mat;
}

inline CircuitMatrix build_primal(const Circuit& circ, const CoeffVarFn& coeff,
                                  std::span<const std::size_t> leaf_order) {
  const std::string cid = circ.id();
  const unsigned m = std::max(1u, circ.bary.m);
  const std::size_t k_outer = circ.outer.size();

  CircuitMatrix mat;
  mat.side = Side::Primal;
  mat.circuit = circ;
  mat.theta = theta(circ.bary);
  for (std::size_t a = 0; a <= k_outer; ++a) mat.vars.push_back(coeff(a));
  const VarRef xbeta = vars::lift_primal_beta(cid);
  mat.vars.push_back(xbeta);

  auto x = [&](unsigned k, unsigned i) {
    VarRef v = vars::lift_primal(k, i, cid);
    push_unique(mat.vars, v);
    return AffineEntry::of(v);
  };
  for (unsigned k = 1; k <= m; ++k)
    for (unsigned i = 1; i <= (1u << (m - k)); ++i) x(k, i);

  const AffineEntry theta_xbeta = AffineEntry::of(xbeta, mat.theta);
  const AffineEntry c_beta = AffineEntry::of(coeff(k_outer));
  const auto slots = leaf_slots(circ, leaf_order);
  auto slot_entry = [&](std::size_t s) { return s == k_outer ? theta_xbeta : AffineEntry::of(coeff(s)); };

  for (unsigned k = 2; k <= m; ++k)
    for (unsigned i = 1; i <= (1u << (m - k)); ++i)
      mat.blocks.push_back(block2(x(k - 1, 2 * i - 1), x(k, i), x(k - 1, 2 * i), {BlockRole::Chain, k, i}));
  mat.blocks.push_back(block1(x(m, 1) - theta_xbeta, {BlockRole::SingletonTheta}));
  mat.blocks.push_back(block1(AffineEntry::of(xbeta) + c_beta, {BlockRole::SingletonBeta}));
  for (unsigned l = 1; l <= (1u << (m - 1)); ++l)
    mat.blocks.push_back(
        block2(slot_entry(slots[2 * l - 2]), x(1, l), slot_entry(slots[2 * l - 1]), {BlockRole::Leaf, 0, l}));
  if (circ.parity == Parity::Odd)
    mat.blocks.push_back(block2(AffineEntry::of(xbeta), c_beta, AffineEntry::of(xbeta), {BlockRole::OddExtension}));
  return mat;
}

}  // namespace detail

/// Dual circuit matrix in the variables v_g (DualCoord) and y_{k,i}. For odd circuits the
/// beta slot is y_beta throughout and an OddExtension block [[y_b, v_b], [v_b, y_b]] is appended.
/// `leaf_order`, when given, permutes the leaf multiset.
inline CircuitMatrix dual_circuit_matrix(const Circuit& circ, std::span<const std::size_t> leaf_order = {}) {
  return detail::build_dual(
      circ,
      [&](std::size_t a) { return vars::dual_coord(a < circ.outer.size() ? circ.outer[a] : circ.inner); },
      leaf_order);
}

/// Primal circuit matrix in the variables c_g, x_beta and x_{k,i}. Odd circuits get the
/// OddExtension block [[x_b, c_b], [c_b, x_b]] appended.
inline CircuitMatrix primal_circuit_matrix(const Circuit& circ, std::span<const std::size_t> leaf_order = {}) {
  return detail::build_primal(
      circ,
      [&](std::size_t a) {
        return a < circ.outer.size() ? vars::coeff_outer(circ.outer[a]) : vars::coeff_inner(circ.inner);
      },
      leaf_order);
}

/// The extra block of an odd circuit: |c_b| <= x_b (primal) or |v_b| <= y_b (dual).
inline BlockSpec odd_extension(Side side, const Circuit& circ) {
  if (circ.parity != Parity::Odd) throw InputError("odd_extension called on even circuit " + to_string(circ));
  const std::string cid = circ.id();
  if (side == Side::Primal) {
    const AffineEntry xb = AffineEntry::of(vars::lift_primal_beta(cid));
    return {2, xb, AffineEntry::of(vars::coeff_inner(circ.inner)), xb, {BlockRole::OddExtension}};
  }
  const AffineEntry yb = AffineEntry::of(vars::lift_dual_beta(cid));
  return {2, yb, AffineEntry::of(vars::dual_coord(circ.inner)), yb, {BlockRole::OddExtension}};
}

/// (a) becomes the linear inequality a >= 0; [[a, b], [b, c]] becomes ||(2b, a - c)||_2 <= a + c.
inline std::variant<SocConstraint, AffineEntry> psd2x2_to_soc(const BlockSpec& block) {
  if (block.size == 1) return block.a;
  if (block.size != 2) throw InputError("block size must be 1 or 2");
  return SocConstraint{{2.0 * block.b, block.a - block.c}, block.a + block.c};
}

}  // namespace scone
