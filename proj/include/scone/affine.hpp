#pragma once

// Named variables, affine expressions over them, and real assignments.

#include "scone/core.hpp"

namespace scone {

enum class VarKind {
  CoeffOuter,     // c_a of a single circuit function
  CoeffInner,     // c_beta of a single circuit function
  DualCoord,      // v_g
  LiftPrimal,     // x_{k,i}
  LiftPrimalBeta, // x_beta
  LiftDual,       // y_{k,i}
  LiftDualBeta,   // y_beta (odd circuits)
  DecompCoeff,    // c^{A,beta}_g in the decomposition c = sum_circuits c^{A,beta}
  Slack,          // s_a >= 0 for abs points outside every reduced circuit
};

inline const char* to_string(VarKind k) {
  switch (k) {
    case VarKind::CoeffOuter: return "coeff_outer";
    case VarKind::CoeffInner: return "coeff_inner";
    case VarKind::DualCoord: return "dual_coord";
    case VarKind::LiftPrimal: return "lift_primal";
    case VarKind::LiftPrimalBeta: return "lift_primal_beta";
    case VarKind::LiftDual: return "lift_dual";
    case VarKind::LiftDualBeta: return "lift_dual_beta";
    case VarKind::DecompCoeff: return "decomp_coeff";
    case VarKind::Slack: return "slack";
  }
  return "?";
}

inline VarKind var_kind_from_string(std::string_view s) {
  for (VarKind k : {VarKind::CoeffOuter, VarKind::CoeffInner, VarKind::DualCoord, VarKind::LiftPrimal,
                    VarKind::LiftPrimalBeta, VarKind::LiftDual, VarKind::LiftDualBeta, VarKind::DecompCoeff,
                    VarKind::Slack})
    if (s == to_string(k)) return k;
  throw InputError("unknown variable kind '" + std::string(s) + "'");
}

struct VarRef {
  VarKind kind;
  std::string id;

  friend bool operator==(const VarRef&, const VarRef&) = default;
  friend bool operator<(const VarRef& a, const VarRef& b) { return a.id < b.id; }
};

namespace vars {

inline VarRef coeff_outer(const ExponentVector& a) { return {VarKind::CoeffOuter, "c" + to_string(a)}; }
inline VarRef coeff_inner(const ExponentVector& b) { return {VarKind::CoeffInner, "c" + to_string(b)}; }
inline VarRef dual_coord(const ExponentVector& g) { return {VarKind::DualCoord, "v" + to_string(g)}; }
inline VarRef slack(const ExponentVector& a) { return {VarKind::Slack, "s" + to_string(a)}; }
inline VarRef decomp(const std::string& cid, const ExponentVector& g) {
  return {VarKind::DecompCoeff, "c" + to_string(g) + "@" + cid};
}
inline VarRef lift_primal(unsigned k, unsigned i, const std::string& cid) {
  return {VarKind::LiftPrimal, "x[" + std::to_string(k) + "][" + std::to_string(i) + "]@" + cid};
}
inline VarRef lift_primal_beta(const std::string& cid) { return {VarKind::LiftPrimalBeta, "xbeta@" + cid}; }
inline VarRef lift_dual(unsigned k, unsigned i, const std::string& cid) {
  return {VarKind::LiftDual, "y[" + std::to_string(k) + "][" + std::to_string(i) + "]@" + cid};
}
inline VarRef lift_dual_beta(const std::string& cid) { return {VarKind::LiftDualBeta, "ybeta@" + cid}; }

}  // namespace vars

/// Real values keyed by variable id.
class Assignment {
 public:
  void set(const VarRef& v, double value) { values_[v.id] = value; }
  void set(const std::string& id, double value) { values_[id] = value; }
  std::optional<double> get(const std::string& id) const {
    auto it = values_.find(id);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<double> get(const VarRef& v) const { return get(v.id); }
  double at(const VarRef& v) const {
    auto it = values_.find(v.id);
    if (it == values_.end()) throw InputError("variable " + v.id + " is not assigned");
    return it->second;
  }
  bool contains(const VarRef& v) const { return values_.count(v.id) != 0; }
  std::size_t size() const { return values_.size(); }
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// constant + sum coef * var, with at most one term per variable and no zero coefficients.
struct AffineEntry {
  std::vector<std::pair<double, VarRef>> terms;
  double constant = 0.0;

  static AffineEntry of(const VarRef& v, double coef = 1.0) {
    AffineEntry e;
    e.add(coef, v);
    return e;
  }
  static AffineEntry constant_only(double c) {
    AffineEntry e;
    e.constant = c;
    return e;
  }

  AffineEntry& add(double coef, const VarRef& v) {
    auto it = std::find_if(terms.begin(), terms.end(), [&](const auto& t) { return t.second.id == v.id; });
    if (it == terms.end()) {
      if (coef != 0.0) terms.emplace_back(coef, v);
    } else {
      it->first += coef;
      if (it->first == 0.0) terms.erase(it);
    }
    return *this;
  }

  double evaluate(const Assignment& a) const {
    double s = constant;
    for (const auto& [coef, v] : terms) s += coef * a.at(v);
    return s;
  }

  friend AffineEntry operator+(AffineEntry x, const AffineEntry& y) {
    for (const auto& [coef, v] : y.terms) x.add(coef, v);
    x.constant += y.constant;
    return x;
  }
  friend AffineEntry operator*(double s, AffineEntry x) {
    if (s == 0.0) return AffineEntry::constant_only(0.0);
    for (auto& t : x.terms) t.first *= s;
    x.constant *= s;
    return x;
  }
  friend AffineEntry operator-(AffineEntry x, const AffineEntry& y) { return std::move(x) + (-1.0) * y; }

  friend bool operator==(const AffineEntry&, const AffineEntry&) = default;
};

inline std::string to_string(const AffineEntry& e) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [coef, v] : e.terms) {
    if (!first) os << (coef < 0 ? " - " : " + ");
    else if (coef < 0) os << "-";
    const double mag = std::fabs(coef);
    if (mag != 1.0) os << mag << "*";
    os << v.id;
    first = false;
  }
  if (first) {
    os << e.constant;
  } else if (e.constant != 0.0) {
    os << (e.constant < 0 ? " - " : " + ") << std::fabs(e.constant);
  }
  return os.str();
}

}  // namespace scone
