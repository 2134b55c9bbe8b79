#pragma once

// Membership oracles for single circuits.
//
// Accept/reject decisions clear the denominators of lambda_a = p_a / p so that the
// circuit-number inequality becomes a comparison of rationals:
//   even:  c_b >= 0  or  (-c_b)^p * prod p_a^{p_a} <= prod c_a^{p_a} * p^p
//   odd:   |c_b|^p * prod p_a^{p_a} <= prod c_a^{p_a} * p^p
// and for the dual side  v_b^p <= prod v_a^{p_a}.

#include "scone/circuits.hpp"

namespace scone {

/// Coefficients of a circuit function: `outer` aligned with circuit.outer, `inner` is c_beta.
struct CircuitCoefficients {
  std::vector<Rational> outer;
  Rational inner;
};

/// Restriction of a form's coefficients to the points of a circuit.
inline CircuitCoefficients restrict_to(const AGForm& f, const Circuit& circ) {
  CircuitCoefficients c;
  for (const auto& a : circ.outer) c.outer.push_back(f.coeff(a));
  c.inner = f.coeff(circ.inner);
  return c;
}

namespace detail {

inline void check_shape(const CircuitCoefficients& c, const Circuit& circ) {
  if (c.outer.size() != circ.outer.size())
    throw InputError("coefficient vector has " + std::to_string(c.outer.size()) + " outer entries, circuit has " +
                     std::to_string(circ.outer.size()));
}

inline void check_nonneg_outer(const CircuitCoefficients& c) {
  for (const auto& x : c.outer)
    if (x < 0) throw InputError("outer coefficient " + to_string(x) + " is negative");
}

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// prod_a x_a^{p_a}
inline Rational weighted_product(const std::vector<Rational>& xs, const BarycentricData& b) {
  Rational prod = 1;
  for (std::size_t i = 0; i < xs.size(); ++i) prod *= rpow(xs[i], b.p_alpha[i]);
  return prod;
}

inline BigInt weight_product(const BarycentricData& b) {
  BigInt prod = 1;
  for (auto pa : b.p_alpha) prod *= ipow(BigInt(pa), pa);
  return prod;
}

}  // namespace detail

/// Circuit number prod_a (c_a / lambda_a)^{lambda_a}, computed in the log domain; 0 if some c_a = 0.
inline double circuit_number(const CircuitCoefficients& c, const Circuit& circ) {
  detail::check_shape(c, circ);
  detail::check_nonneg_outer(c);
  const auto& b = circ.bary;
  detail::CompensatedSum acc;
  const double log_p = std::log(static_cast<double>(b.p));
  for (std::size_t i = 0; i < c.outer.size(); ++i) {
    if (c.outer[i] == 0) return 0.0;
    const double lam = static_cast<double>(b.p_alpha[i]) / static_cast<double>(b.p);
    const double log_lambda = std::log(static_cast<double>(b.p_alpha[i])) - log_p;
    acc.add(lam * log_abs(c.outer[i]));
    acc.add(-lam * log_lambda);
  }
  return std::exp(acc.value());
}

/// Both sides of the cleared-denominator primal inequality.
struct PrimalCertificate {
  bool accepted = false;
  Rational lhs;  // |bad c_b|^p * prod p_a^{p_a}  (0 when c_b imposes nothing)
  Rational rhs;  // prod c_a^{p_a} * p^p
};

inline PrimalCertificate primal_certificate(const CircuitCoefficients& c, const Circuit& circ) {
  detail::check_shape(c, circ);
  detail::check_nonneg_outer(c);
  const auto& b = circ.bary;
  PrimalCertificate cert;
  cert.rhs = detail::weighted_product(c.outer, b) * Rational(ipow(BigInt(b.p), b.p));
  Rational bad = 0;
  if (circ.parity == Parity::Even) {
    if (c.inner < 0) bad = -c.inner;
  } else {
    bad = c.inner < 0 ? Rational(-c.inner) : c.inner;
  }
  cert.lhs = bad == 0 ? Rational(0) : rpow(bad, b.p) * Rational(detail::weight_product(b));
  cert.accepted = cert.lhs <= cert.rhs;
  return cert;
}

/// Exact membership of the circuit function with coefficients c in the even/odd circuit cone.
inline bool check_primal_circuit(const CircuitCoefficients& c, const Circuit& circ) {
  return primal_certificate(c, circ).accepted;
}

/// Exact membership of v (outer values, v_beta) in the dual circuit cone.
/// Odd circuits use |v_beta| and place no sign condition on v_beta.
inline bool check_dual_circuit(const CircuitCoefficients& v, const Circuit& circ) {
  detail::check_shape(v, circ);
  for (const auto& x : v.outer)
    if (x < 0) return false;
  Rational vb = v.inner;
  if (circ.parity == Parity::Even) {
    if (vb < 0) return false;
  } else if (vb < 0) {
    vb = -vb;
  }
  return rpow(vb, circ.bary.p) <= detail::weighted_product(v.outer, circ.bary);
}

/// Candidate relative-entropy certificate nu (aligned with circuit.outer).
struct EntropyCertificate {
  std::vector<Rational> nu;
};

/// Relative entropy D(nu, e*c) = sum nu_a ln(nu_a / (e c_a)) with 0 ln(0/y) = 0 and y ln(y/0) = inf.
inline double relative_entropy_scaled(const std::vector<Rational>& nu, const std::vector<Rational>& c) {
  detail::CompensatedSum acc;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0) continue;
    if (c[i] == 0) return std::numeric_limits<double>::infinity();
    const double n = to_double(nu[i]);
    acc.add(n * (log_abs(nu[i]) - log_abs(c[i])));
    acc.add(-n);
  }
  return acc.value();
}

/// Checks the moment condition sum nu_a a = (sum nu_a) beta exactly and
/// D(nu, e*c) <= c_b (even) or <= -|c_b| (odd) up to tol * max(1, |bound|).
inline bool verify_entropy_certificate(const CircuitCoefficients& c, const Circuit& circ,
                                       const EntropyCertificate& cert, double tol = 1e-9) {
  detail::check_shape(c, circ);
  if (cert.nu.size() != circ.outer.size()) return false;
  Rational total = 0;
  for (const auto& n : cert.nu) {
    if (n < 0) return false;
    total += n;
  }
  for (std::size_t j = 0; j < circ.inner.dim(); ++j) {
    Rational moment = 0;
    for (std::size_t i = 0; i < cert.nu.size(); ++i) moment += cert.nu[i] * circ.outer[i][j];
    if (moment != total * circ.inner[j]) return false;
  }
  for (const auto& x : c.outer)
    if (x < 0) return false;
  const double d = relative_entropy_scaled(cert.nu, c.outer);
  if (std::isinf(d)) return false;
  const double cb = to_double(c.inner);
  const double bound = circ.parity == Parity::Even ? cb : -std::fabs(cb);
  return d <= bound + tol * std::max(1.0, std::fabs(bound));
}

}  // namespace scone
