#pragma once

// Witness completion for circuit matrices: lift variables are filled by nested
// geometric means, y_{1,l} = sqrt(u w) and y_{k,i} = sqrt(y_{k-1,2i-1} y_{k-1,2i}).
//
// On the primal side the beta slot of the leaves holds theta * x_beta, and x_beta
// is itself defined through x_{m,1}. The fixed point is resolved in closed form:
// with t = theta * x_beta the chain gives x_{m,1} = (prod c_a^{p_a} * t^{2^m - p})^{1/2^m},
// and x_{m,1} = t forces t = (prod c_a^{p_a})^{1/p}, i.e. x_beta equals the circuit number.

#include "json.hpp"
#include "scone/certify.hpp"
#include "scone/liftrep.hpp"

namespace scone {

struct VerifyReport {
  bool ok = true;
  BlockTag worst_block;
  double worst_margin = std::numeric_limits<double>::infinity();
};

namespace detail {

inline bool is_lift(const VarRef& v) {
  return v.kind == VarKind::LiftDual || v.kind == VarKind::LiftPrimal;
}

// Fills every unassigned lift variable sitting off the diagonal of a Leaf or Chain block.
// Returns false when a needed product of diagonal entries is negative.
inline bool fill_lifts(const CircuitMatrix& mat, Assignment& a) {
  std::vector<const BlockSpec*> order;
  for (const auto& b : mat.blocks)
    if (b.tag.role == BlockRole::Leaf) order.push_back(&b);
  std::vector<const BlockSpec*> chain;
  for (const auto& b : mat.blocks)
    if (b.tag.role == BlockRole::Chain) chain.push_back(&b);
  std::stable_sort(chain.begin(), chain.end(), [](auto* x, auto* y) { return x->tag.k < y->tag.k; });
  order.insert(order.end(), chain.begin(), chain.end());

  for (const BlockSpec* b : order) {
    if (b->b.terms.size() != 1 || b->b.constant != 0.0) continue;
    const VarRef& target = b->b.terms.front().second;
    if (!is_lift(target) || a.contains(target)) continue;
    const double prod = b->a.evaluate(a) * b->c.evaluate(a);
    if (prod < 0) return false;
    a.set(target, std::sqrt(prod));
  }
  return true;
}

inline void check_shape(const CircuitCoefficients& c, const CircuitMatrix& mat) {
  if (c.outer.size() != mat.circuit.outer.size())
    throw InputError("coefficient vector does not match circuit " + to_string(mat.circuit));
}

inline Assignment coefficient_assignment(const CircuitCoefficients& c, const CircuitMatrix& mat) {
  Assignment a;
  const std::size_t k = c.outer.size();
  for (std::size_t i = 0; i < k; ++i) a.set(mat.vars[i], to_double(c.outer[i]));
  a.set(mat.vars[k], to_double(c.inner));
  return a;
}

}  // namespace detail

/// Nested-square-root lift for a dual point without checking membership first; the
/// returned assignment may violate the Special block. Requires v_A >= 0 and, for even
/// circuits, v_beta >= 0.
inline std::optional<Assignment> dual_lift_candidate(const CircuitCoefficients& v, const CircuitMatrix& mat) {
  if (mat.side != Side::Dual) throw InputError("dual_lift_candidate needs a dual circuit matrix");
  detail::check_shape(v, mat);
  Assignment a = detail::coefficient_assignment(v, mat);
  if (mat.circuit.parity == Parity::Odd) a.set(vars::lift_dual_beta(mat.circuit.id()), std::fabs(to_double(v.inner)));
  if (!detail::fill_lifts(mat, a)) return std::nullopt;
  return a;
}

/// Lift witness for v in the dual circuit cone, absent when the exact dual test fails.
inline std::optional<Assignment> complete_dual_witness(const CircuitCoefficients& v, const CircuitMatrix& mat) {
  detail::check_shape(v, mat);
  if (!check_dual_circuit(v, mat.circuit)) return std::nullopt;
  return dual_lift_candidate(v, mat);
}

inline std::optional<Assignment> complete_dual_witness(const CircuitCoefficients& v, const Circuit& circ) {
  return complete_dual_witness(v, dual_circuit_matrix(circ));
}

/// Lift witness for c in the primal circuit cone, absent when the exact primal test fails.
/// Throws InputError on a negative outer coefficient.
inline std::optional<Assignment> complete_primal_witness(const CircuitCoefficients& c, const CircuitMatrix& mat) {
  if (mat.side != Side::Primal) throw InputError("complete_primal_witness needs a primal circuit matrix");
  detail::check_shape(c, mat);
  if (!check_primal_circuit(c, mat.circuit)) return std::nullopt;
  Assignment a = detail::coefficient_assignment(c, mat);
  a.set(vars::lift_primal_beta(mat.circuit.id()), circuit_number(c, mat.circuit));
  if (!detail::fill_lifts(mat, a)) return std::nullopt;
  return a;
}

inline std::optional<Assignment> complete_primal_witness(const CircuitCoefficients& c, const Circuit& circ) {
  return complete_primal_witness(c, primal_circuit_matrix(circ));
}

/// Checks every block: 1x1 entries >= -tol; 2x2 blocks need diagonal >= -tol and
/// det >= -tol * max(1, |a| + |c|)^2. The reported margin of a 2x2 block is
/// min(a, c, det / scale), so ok holds exactly when worst_margin >= -tol.
inline VerifyReport verify_assignment(const CircuitMatrix& mat, const Assignment& a, double tol = 1e-9) {
  for (const auto& v : mat.vars)
    if (!a.contains(v)) throw InputError("assignment is missing variable " + v.id);
  VerifyReport r;
  for (const auto& blk : mat.blocks) {
    double margin;
    const double av = blk.a.evaluate(a);
    if (blk.size == 1) {
      margin = av;
    } else {
      const double bv = blk.b.evaluate(a);
      const double cv = blk.c.evaluate(a);
      const double scale = std::pow(std::max(1.0, std::fabs(av) + std::fabs(cv)), 2);
      margin = std::min({av, cv, (av * cv - bv * bv) / scale});
    }
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst_block = blk.tag;
    }
  }
  r.ok = r.worst_margin >= -tol;
  return r;
}

/// {"assignment": {id: value, ...}, "report": {"ok": bool, "worst_block": str, "worst_margin": num}}
inline nlohmann::ordered_json witness_to_json(const Assignment& a, const VerifyReport& r) {
  nlohmann::ordered_json j;
  j["assignment"] = nlohmann::ordered_json::object();
  for (const auto& [id, value] : a.values()) j["assignment"][id] = value;
  j["report"] = {{"ok", r.ok}, {"worst_block", to_string(r.worst_block)}, {"worst_margin", r.worst_margin}};
  return j;
}

}  // namespace scone
