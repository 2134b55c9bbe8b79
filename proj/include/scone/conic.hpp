#pragma once

// Second-order programs for the whole cone and its dual, assembled over all reduced
// circuits, plus a projection-based feasibility semidecision and exporters.

#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "json.hpp"
#include "scone/witness.hpp"

namespace scone {

struct ConicProblem {
  std::vector<VarRef> vars;
  std::vector<AffineEntry> equalities;  // entry == 0
  std::vector<AffineEntry> nonneg;      // entry >= 0
  std::vector<SocConstraint> socs;
  std::optional<AffineEntry> objective;

  // Not serialized: the circuit matrices the constraints were generated from, and an
  // exact reason why the problem cannot be feasible (set during assembly).
  std::vector<CircuitMatrix> matrices;
  std::optional<std::string> infeasible_reason;

  void add_var(const VarRef& v) {
    if (index_.insert(v.id).second) vars.push_back(v);
  }
  bool has_var(const std::string& id) const { return index_.count(id) != 0; }

  /// Adds a block as a linear inequality (1x1) or a second-order constraint (2x2).
  void add_block(const BlockSpec& b) {
    auto c = psd2x2_to_soc(b);
    if (auto* soc = std::get_if<SocConstraint>(&c))
      socs.push_back(std::move(*soc));
    else
      nonneg.push_back(std::get<AffineEntry>(std::move(c)));
  }

  void add_matrix(CircuitMatrix mat) {
    for (const auto& v : mat.vars) add_var(v);
    for (const auto& b : mat.blocks) add_block(b);
    matrices.push_back(std::move(mat));
  }

  /// Equality of the serialized content.
  friend bool structurally_equal(const ConicProblem& a, const ConicProblem& b) {
    return a.vars == b.vars && a.equalities == b.equalities && a.nonneg == b.nonneg && a.socs == b.socs &&
           a.objective == b.objective;
  }

 private:
  std::unordered_set<std::string> index_;
};

struct AssembleOptions {
  std::size_t max_outer = 0;  // 0: dim + 1
  unsigned threads = 1;
};

/// Primal program: c = sum over reduced circuits of c^{A,beta} (+ s_a for abs points no reduced
/// circuit touches), each c^{A,beta} constrained by its primal circuit matrix.
inline ConicProblem assemble_primal(const AGForm& f, const AssembleOptions& opt = {}) {
  const Support& s = f.support();
  const ReducedCircuits reduced = enumerate_reduced(s, opt.max_outer, opt.threads);
  ConicProblem prob;

  std::map<ExponentVector, std::vector<VarRef>> contributions;
  std::set<ExponentVector> free_sign;  // points that are the inner point of some circuit
  for (const Circuit& circ : reduced.all()) {
    const std::string cid = circ.id();
    auto point = [&](std::size_t a) { return a < circ.outer.size() ? circ.outer[a] : circ.inner; };
    CircuitMatrix mat = detail::build_primal(circ, [&](std::size_t a) { return vars::decomp(cid, point(a)); }, {});
    for (std::size_t a = 0; a <= circ.outer.size(); ++a) contributions[point(a)].push_back(mat.vars[a]);
    free_sign.insert(circ.inner);
    prob.add_matrix(std::move(mat));
  }

  for (const auto& a : s.abs_points()) {
    if (contributions.count(a)) continue;
    const VarRef sl = vars::slack(a);
    prob.add_var(sl);
    prob.nonneg.push_back(AffineEntry::of(sl));
    contributions[a].push_back(sl);
  }

  for (const auto& g : s.all_points()) {
    const Rational c = f.coeff(g);
    AffineEntry eq = AffineEntry::constant_only(-to_double(c));
    for (const auto& v : contributions[g]) eq.add(1.0, v);
    prob.equalities.push_back(std::move(eq));

    if (!free_sign.count(g) && !prob.infeasible_reason) {
      if (s.contains_odd(g) && c != 0)
        prob.infeasible_reason = "coefficient of x^" + to_string(g) + " is nonzero but no reduced odd circuit has it as inner point";
      else if (s.contains_abs(g) && c < 0)
        prob.infeasible_reason = "coefficient of |x|^" + to_string(g) + " is negative but no reduced circuit has it as inner point";
    }
  }
  return prob;
}

/// Dual program in v (DualCoord for every support point): v_a >= 0 on the abs support, and
/// each reduced circuit's dual circuit matrix with its own lift variables.
inline ConicProblem assemble_dual(const Support& s, const AssembleOptions& opt = {}) {
  const ReducedCircuits reduced = enumerate_reduced(s, opt.max_outer, opt.threads);
  ConicProblem prob;
  for (const auto& g : s.all_points()) prob.add_var(vars::dual_coord(g));
  for (const auto& a : s.abs_points()) prob.nonneg.push_back(AffineEntry::of(vars::dual_coord(a)));
  for (const Circuit& circ : reduced.all()) prob.add_matrix(dual_circuit_matrix(circ));
  return prob;
}

/// Euclidean projection of (t, z) onto {(t, z) : ||z|| <= t}.
inline std::vector<double> project_soc(double t, std::span<const double> z) {
  double norm = 0.0;
  for (double v : z) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<double> out(z.size() + 1, 0.0);
  if (norm <= t) {
    out[0] = t;
    std::copy(z.begin(), z.end(), out.begin() + 1);
  } else if (norm <= -t) {
    // polar cone: projection is the origin
  } else {
    const double scale = (t + norm) / 2.0;
    out[0] = scale;
    for (std::size_t j = 0; j < z.size(); ++j) out[j + 1] = scale * z[j] / norm;
  }
  return out;
}

enum class FeasibilityStatus { Feasible, InfeasibleHint, Undetermined };

inline const char* to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::InfeasibleHint: return "infeasible-hint";
    case FeasibilityStatus::Undetermined: return "undetermined";
  }
  return "?";
}

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Undetermined;
  Assignment assignment;  // set when Feasible
  std::size_t iterations = 0;
  double residual = 0.0;  // cone violation of the last affine iterate, or the gap between the sets
  std::string note;
};

struct FeasibilityOptions {
  std::size_t max_iter = 50000;
  double tol = 1e-6;
};

/// Alternating projections with Dykstra's correction between the affine set (equalities,
/// pinned values, slack links s = G x + h) and the product of halfspaces and second-order
/// cones acting on the slacks s. Feasible once the affine iterate violates no cone by more
/// than tol; InfeasibleHint when the gap between the sets stays above 10 tol without changing
/// for 100 iterations; Undetermined after max_iter.
inline FeasibilityResult feasibility(const ConicProblem& prob, const Assignment& fixed = {},
                                     const FeasibilityOptions& opt = {}) {
  FeasibilityResult res;
  if (prob.infeasible_reason) {
    res.status = FeasibilityStatus::InfeasibleHint;
    res.note = *prob.infeasible_reason;
    res.residual = std::numeric_limits<double>::infinity();
    return res;
  }

  std::unordered_map<std::string, Eigen::Index> col;
  for (const auto& v : prob.vars) col.emplace(v.id, static_cast<Eigen::Index>(col.size()));
  const Eigen::Index n = static_cast<Eigen::Index>(prob.vars.size());
  auto column = [&](const VarRef& v) {
    auto it = col.find(v.id);
    if (it == col.end()) throw InputError("constraint references unknown variable " + v.id);
    return it->second;
  };
  for (const auto& [id, value] : fixed.values())
    if (!col.count(id)) throw InputError("pinned variable " + id + " is not part of the problem");

  // Cone slots: every nonneg entry is one slot, every SOC is rhs followed by its rows.
  std::vector<const AffineEntry*> slot_entries;
  for (const auto& e : prob.nonneg) slot_entries.push_back(&e);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> soc_ranges;  // first slot, row count
  for (const auto& soc : prob.socs) {
    soc_ranges.emplace_back(static_cast<Eigen::Index>(slot_entries.size()), static_cast<Eigen::Index>(soc.rows.size()));
    slot_entries.push_back(&soc.rhs);
    for (const auto& r : soc.rows) slot_entries.push_back(&r);
  }
  const Eigen::Index n_nonneg = static_cast<Eigen::Index>(prob.nonneg.size());
  const Eigen::Index n_slots = static_cast<Eigen::Index>(slot_entries.size());
  const Eigen::Index dim = n + n_slots;
  const Eigen::Index n_rows = static_cast<Eigen::Index>(prob.equalities.size() + fixed.size()) + n_slots;

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n_rows, dim);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_rows);
  Eigen::Index row = 0;
  for (const auto& eq : prob.equalities) {
    for (const auto& [coef, v] : eq.terms) M(row, column(v)) += coef;
    r(row++) = -eq.constant;
  }
  for (const auto& [id, value] : fixed.values()) {
    M(row, col.at(id)) = 1.0;
    r(row++) = value;
  }
  for (Eigen::Index s = 0; s < n_slots; ++s) {
    M(row, n + s) = 1.0;
    for (const auto& [coef, v] : slot_entries[static_cast<std::size_t>(s)]->terms) M(row, column(v)) -= coef;
    r(row++) = slot_entries[static_cast<std::size_t>(s)]->constant;
  }

  // P_L(z) = P z + offset with P = I - M^+ M, offset = M^+ r.
  const Eigen::MatrixXd pinv = M.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(dim, dim) - pinv * M;
  const Eigen::VectorXd offset = pinv * r;

  const double affine_residual = (M * offset - r).lpNorm<Eigen::Infinity>();
  if (affine_residual > std::max(opt.tol, 1e-9 * std::max(1.0, r.lpNorm<Eigen::Infinity>()))) {
    res.status = FeasibilityStatus::InfeasibleHint;
    res.residual = affine_residual;
    res.note = "linear equalities and pinned values are inconsistent";
    return res;
  }

  auto cone_violation = [&](const Eigen::VectorXd& z) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n_nonneg; ++j) worst = std::max(worst, -z(n + j));
    for (const auto& [first, rows] : soc_ranges) {
      const double norm = z.segment(n + first + 1, rows).norm();
      worst = std::max(worst, norm - z(n + first));
    }
    return worst;
  };
  auto project_cone = [&](Eigen::VectorXd z) {
    for (Eigen::Index j = 0; j < n_nonneg; ++j) z(n + j) = std::max(0.0, z(n + j));
    for (const auto& [first, rows] : soc_ranges) {
      const Eigen::VectorXd tail = z.segment(n + first + 1, rows);
      const auto p = project_soc(z(n + first), std::span<const double>(tail.data(), static_cast<std::size_t>(rows)));
      for (Eigen::Index j = 0; j <= rows; ++j) z(n + first + j) = p[static_cast<std::size_t>(j)];
    }
    return z;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(dim);
  double last_gap = -1.0;
  std::size_t stable = 0;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    const Eigen::VectorXd y = P * x + offset;
    const double viol = cone_violation(y);
    res.iterations = it;
    res.residual = viol;
    if (viol <= opt.tol) {
      res.status = FeasibilityStatus::Feasible;
      for (Eigen::Index j = 0; j < n; ++j) res.assignment.set(prob.vars[static_cast<std::size_t>(j)], y(j));
      return res;
    }
    const Eigen::VectorXd w = y + q;
    x = project_cone(w);
    q = w - x;
    const double gap = (y - x).norm();
    if (gap > 10.0 * opt.tol && last_gap >= 0.0 && std::fabs(gap - last_gap) <= 1e-9 * gap) {
      if (++stable >= 100) {
        res.status = FeasibilityStatus::InfeasibleHint;
        res.residual = gap;
        res.note = "gap between affine set and cones stabilized";
        return res;
      }
    } else {
      stable = 0;
    }
    last_gap = gap;
  }
  res.status = FeasibilityStatus::Undetermined;
  return res;
}

// ---------------------------------------------------------------------------
// Export / import

enum class ExportFormat { Json, SocpText };

inline ExportFormat parse_format(std::string_view tag) {
  if (tag == "json") return ExportFormat::Json;
  if (tag == "socptext") return ExportFormat::SocpText;
  throw InputError("unsupported format '" + std::string(tag) + "' (expected json or socptext)");
}

namespace detail {

inline nlohmann::ordered_json entry_to_json(const AffineEntry& e) {
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& [coef, v] : e.terms) terms.push_back({coef, v.id});
  return {{"terms", std::move(terms)}, {"const", e.constant}};
}

inline AffineEntry entry_from_json(const nlohmann::ordered_json& j, const std::unordered_map<std::string, VarRef>& vars) {
  AffineEntry e;
  for (const auto& t : j.at("terms")) {
    const std::string id = t.at(1).get<std::string>();
    auto it = vars.find(id);
    if (it == vars.end()) throw InputError("entry references undeclared variable " + id);
    e.terms.emplace_back(t.at(0).get<double>(), it->second);
  }
  e.constant = j.at("const").get<double>();
  return e;
}

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string entry_to_text(const AffineEntry& e) {
  std::string s = fmt17(e.constant);
  for (const auto& [coef, v] : e.terms) s += " " + fmt17(coef) + "*" + v.id;
  return s;
}

}  // namespace detail

inline nlohmann::ordered_json problem_to_json(const ConicProblem& prob) {
  nlohmann::ordered_json j;
  j["vars"] = nlohmann::ordered_json::array();
  for (const auto& v : prob.vars) j["vars"].push_back({{"id", v.id}, {"kind", to_string(v.kind)}});
  j["eq"] = nlohmann::ordered_json::array();
  for (const auto& e : prob.equalities) j["eq"].push_back(detail::entry_to_json(e));
  j["nonneg"] = nlohmann::ordered_json::array();
  for (const auto& e : prob.nonneg) j["nonneg"].push_back(detail::entry_to_json(e));
  j["soc"] = nlohmann::ordered_json::array();
  for (const auto& s : prob.socs) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : s.rows) rows.push_back(detail::entry_to_json(r));
    j["soc"].push_back({{"rows", std::move(rows)}, {"rhs", detail::entry_to_json(s.rhs)}});
  }
  if (prob.objective) j["objective"] = detail::entry_to_json(*prob.objective);
  return j;
}

/// Serializes the problem. Json follows the field order vars, eq, nonneg, soc[, objective];
/// SocpText is a header line "SOCP n_vars n_eq n_nonneg n_soc" followed by the sections
/// VARS, EQ, NONNEG, SOC (and OBJECTIVE when present), one item per line. An entry is
/// written as "const coef*id coef*id ..."; a SOC line is "rhs | row ; row".
inline std::string export_problem(const ConicProblem& prob, ExportFormat format) {
  if (format == ExportFormat::Json) return problem_to_json(prob).dump();
  std::string out = "SOCP " + std::to_string(prob.vars.size()) + " " + std::to_string(prob.equalities.size()) + " " +
                    std::to_string(prob.nonneg.size()) + " " + std::to_string(prob.socs.size()) + "\n";
  out += "VARS\n";
  for (const auto& v : prob.vars) out += v.id + " " + to_string(v.kind) + "\n";
  out += "EQ\n";
  for (const auto& e : prob.equalities) out += detail::entry_to_text(e) + "\n";
  out += "NONNEG\n";
  for (const auto& e : prob.nonneg) out += detail::entry_to_text(e) + "\n";
  out += "SOC\n";
  for (const auto& s : prob.socs) {
    out += detail::entry_to_text(s.rhs) + " |";
    for (std::size_t i = 0; i < s.rows.size(); ++i) out += (i ? " ; " : " ") + detail::entry_to_text(s.rows[i]);
    out += "\n";
  }
  if (prob.objective) out += "OBJECTIVE\n" + detail::entry_to_text(*prob.objective) + "\n";
  return out;
}

/// Reads the Json export back.
inline ConicProblem import_problem(std::string_view json_text) {
  const auto j = nlohmann::ordered_json::parse(json_text);
  ConicProblem prob;
  std::unordered_map<std::string, VarRef> vars;
  for (const auto& v : j.at("vars")) {
    VarRef ref{var_kind_from_string(v.at("kind").get<std::string>()), v.at("id").get<std::string>()};
    vars.emplace(ref.id, ref);
    prob.add_var(ref);
  }
  for (const auto& e : j.at("eq")) prob.equalities.push_back(detail::entry_from_json(e, vars));
  for (const auto& e : j.at("nonneg")) prob.nonneg.push_back(detail::entry_from_json(e, vars));
  for (const auto& s : j.at("soc")) {
    SocConstraint soc;
    for (const auto& r : s.at("rows")) soc.rows.push_back(detail::entry_from_json(r, vars));
    soc.rhs = detail::entry_from_json(s.at("rhs"), vars);
    prob.socs.push_back(std::move(soc));
  }
  if (j.contains("objective") && !j.at("objective").is_null())
    prob.objective = detail::entry_from_json(j.at("objective"), vars);
  return prob;
}

}  // namespace scone
