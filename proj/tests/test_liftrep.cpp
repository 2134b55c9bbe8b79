#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace scone;

namespace {

Circuit line(std::initializer_list<long long> outer, long long beta, Parity parity = Parity::Even) {
  std::vector<ExponentVector> A;
  for (long long a : outer) A.push_back(exponent({a}));
  return *make_circuit(A, exponent({beta}), parity);
}

AffineEntry var(VarRef v, double coef = 1.0) { return AffineEntry::of(v, coef); }

BlockSpec two(AffineEntry a, AffineEntry b, AffineEntry c, BlockTag tag) { return {2, a, b, c, tag}; }
BlockSpec one(AffineEntry a, BlockTag tag) { return {1, a, {}, {}, tag}; }

// Occurrences of each variable id on the diagonals of the Leaf blocks.
std::map<std::string, std::size_t> leaf_diagonal_counts(const CircuitMatrix& mat) {
  std::map<std::string, std::size_t> counts;
  for (const auto& b : mat.blocks) {
    if (b.tag.role != BlockRole::Leaf) continue;
    for (const AffineEntry* e : {&b.a, &b.c}) {
      EXPECT_EQ(e->terms.size(), 1u);
      counts[e->terms.front().second.id]++;
    }
  }
  return counts;
}

bool soc_holds(const SocConstraint& s, const Assignment& a) {
  double norm = 0;
  for (const auto& r : s.rows) norm += std::pow(r.evaluate(a), 2);
  return std::sqrt(norm) <= s.rhs.evaluate(a);
}

}  // namespace

TEST(DualMatrix, LineExampleWithPThree) {
  const Circuit c = line({0, 6}, 2);
  const CircuitMatrix mat = dual_circuit_matrix(c);
  const std::string cid = c.id();
  const auto v0 = var(vars::dual_coord(exponent({0})));
  const auto v2 = var(vars::dual_coord(exponent({2})));
  const auto v6 = var(vars::dual_coord(exponent({6})));
  const auto y11 = var(vars::lift_dual(1, 1, cid));
  const auto y12 = var(vars::lift_dual(1, 2, cid));
  const std::vector<BlockSpec> want{
      two(y11, v2, y12, {BlockRole::Special}),
      one(v2, {BlockRole::SingletonBeta}),
      two(v0, y11, v0, {BlockRole::Leaf, 0, 1}),
      two(v6, y12, v2, {BlockRole::Leaf, 0, 2}),
  };
  EXPECT_EQ(mat.blocks, want);
  EXPECT_EQ(mat.lift_var_count(), 2u);
  EXPECT_EQ(mat.vars.size(), 5u);
  EXPECT_EQ(vars::lift_dual(1, 2, cid).id, "y[1][2]@" + cid);
}

TEST(DualMatrix, PowerOfTwoHasNoBetaLeaves) {
  const Circuit c = line({0, 4}, 1);  // lambda = (3/4, 1/4)
  ASSERT_EQ(c.bary.p, 4u);
  const CircuitMatrix mat = dual_circuit_matrix(c);
  EXPECT_EQ(mat.count_role(BlockRole::Chain), 0u);
  EXPECT_EQ(mat.lift_var_count(), 2u);
  const auto counts = leaf_diagonal_counts(mat);
  EXPECT_EQ(counts.count(vars::dual_coord(exponent({1})).id), 0u);
  EXPECT_EQ(counts.at(vars::dual_coord(exponent({0})).id), 3u);
}

TEST(DualMatrix, DegenerateSizeTwo) {
  const Circuit c = line({0, 2}, 1);
  const CircuitMatrix mat = dual_circuit_matrix(c);
  const auto v0 = var(vars::dual_coord(exponent({0})));
  const auto v1 = var(vars::dual_coord(exponent({1})));
  const auto v2 = var(vars::dual_coord(exponent({2})));
  EXPECT_EQ(mat.blocks, (std::vector<BlockSpec>{one(v1, {BlockRole::SingletonBeta}), two(v0, v1, v2, {BlockRole::Leaf, 0, 1})}));
  EXPECT_EQ(mat.lift_var_count(), 0u);
}

TEST(DualMatrix, OddCircuitUsesLiftedBeta) {
  const Circuit c = line({0, 4}, 1, Parity::Odd);
  const CircuitMatrix mat = dual_circuit_matrix(c);
  const auto yb = var(vars::lift_dual_beta(c.id()));
  const auto v1 = var(vars::dual_coord(exponent({1})));
  EXPECT_EQ(mat.blocks.back(), two(yb, v1, yb, {BlockRole::OddExtension}));
  EXPECT_EQ(mat.blocks.back(), odd_extension(Side::Dual, c));
  for (const auto& b : mat.blocks) {
    if (b.tag.role == BlockRole::Special) {
      EXPECT_EQ(b.b, yb);
    }
    if (b.tag.role == BlockRole::SingletonBeta) {
      EXPECT_EQ(b.a, yb);
    }
  }
}

TEST(PrimalMatrix, LineExampleWithPTwo) {
  const Circuit c = line({0, 2}, 1);
  const CircuitMatrix mat = primal_circuit_matrix(c);
  EXPECT_EQ(mat.theta, 0.5);
  const std::string cid = c.id();
  const auto xb = vars::lift_primal_beta(cid);
  const auto x11 = var(vars::lift_primal(1, 1, cid));
  const auto c0 = var(vars::coeff_outer(exponent({0})));
  const auto c1 = var(vars::coeff_inner(exponent({1})));
  const auto c2 = var(vars::coeff_outer(exponent({2})));
  const std::vector<BlockSpec> want{
      one(x11 - var(xb, 0.5), {BlockRole::SingletonTheta}),
      one(var(xb) + c1, {BlockRole::SingletonBeta}),
      two(c0, x11, c2, {BlockRole::Leaf, 0, 1}),
  };
  EXPECT_EQ(mat.blocks, want);
  EXPECT_EQ(mat.lift_var_count(), 2u);
}

TEST(PrimalMatrix, LineExampleWithPThree) {
  const Circuit c = line({0, 6}, 2);
  const CircuitMatrix mat = primal_circuit_matrix(c);
  const std::string cid = c.id();
  const auto xb = vars::lift_primal_beta(cid);
  const auto x = [&](unsigned k, unsigned i) { return var(vars::lift_primal(k, i, cid)); };
  const auto c0 = var(vars::coeff_outer(exponent({0})));
  const auto c2 = var(vars::coeff_inner(exponent({2})));
  const auto c6 = var(vars::coeff_outer(exponent({6})));
  const double th = mat.theta;
  EXPECT_NEAR(th, oracle::theta(c.bary.lambda).convert_to<double>(), 1e-15);
  const std::vector<BlockSpec> want{
      two(x(1, 1), x(2, 1), x(1, 2), {BlockRole::Chain, 2, 1}),
      one(x(2, 1) - var(xb, th), {BlockRole::SingletonTheta}),
      one(var(xb) + c2, {BlockRole::SingletonBeta}),
      two(c0, x(1, 1), c0, {BlockRole::Leaf, 0, 1}),
      two(c6, x(1, 2), var(xb, th), {BlockRole::Leaf, 0, 2}),
  };
  EXPECT_EQ(mat.blocks, want);
}

TEST(PrimalMatrix, OddExtension) {
  const Circuit c = line({0, 2}, 1, Parity::Odd);
  const CircuitMatrix mat = primal_circuit_matrix(c);
  EXPECT_EQ(mat.blocks.back(), odd_extension(Side::Primal, c));
  Assignment a;
  a.set(vars::lift_primal_beta(c.id()), 2);
  a.set(vars::coeff_inner(exponent({1})), -2);
  const auto soc = std::get<SocConstraint>(psd2x2_to_soc(mat.blocks.back()));
  EXPECT_TRUE(soc_holds(soc, a));
  a.set(vars::lift_primal_beta(c.id()), 1);
  a.set(vars::coeff_inner(exponent({1})), 1.5);
  EXPECT_FALSE(soc_holds(soc, a));
  EXPECT_THROW(odd_extension(Side::Primal, line({0, 2}, 1)), InputError);

  const auto dual = odd_extension(Side::Dual, c);
  Assignment d;
  d.set(vars::lift_dual_beta(c.id()), 3);
  d.set(vars::dual_coord(exponent({1})), -3);
  const auto dsoc = std::get<SocConstraint>(psd2x2_to_soc(dual));
  EXPECT_TRUE(soc_holds(dsoc, d));
  EXPECT_EQ(dual.a.evaluate(d) * dual.c.evaluate(d) - std::pow(dual.b.evaluate(d), 2), 0.0);
}

TEST(Soc, Examples) {
  auto check = [](double a, double b, double c) {
    const BlockSpec blk = two(AffineEntry::constant_only(a), AffineEntry::constant_only(b), AffineEntry::constant_only(c), {});
    return soc_holds(std::get<SocConstraint>(psd2x2_to_soc(blk)), Assignment{});
  };
  EXPECT_TRUE(check(1, 0, 1));
  EXPECT_FALSE(check(1, 2, 1));
  EXPECT_TRUE(check(0, 0, 0));
  const auto lin = psd2x2_to_soc(one(AffineEntry::constant_only(-1), {}));
  ASSERT_TRUE(std::holds_alternative<AffineEntry>(lin));
  EXPECT_EQ(std::get<AffineEntry>(lin).constant, -1.0);
}

TEST(Theta, ExactForSquares) {
  EXPECT_EQ(theta(*barycentric(std::vector<ExponentVector>{exponent({0}), exponent({2})}, exponent({1}))), 0.5);
  const auto b = barycentric(std::vector<ExponentVector>{exponent({0, 0}), exponent({4, 0}), exponent({0, 4})},
                             exponent({1, 1}));
  ASSERT_TRUE(b);
  EXPECT_NEAR(theta(*b), oracle::theta(b->lambda).convert_to<double>(), 1e-16);
}

TEST(LeafOrder, RejectsNonPermutations) {
  const Circuit c = line({0, 6}, 2);
  const std::vector<std::size_t> short_order{0, 1, 2};
  const std::vector<std::size_t> repeat{0, 0, 1, 2};
  EXPECT_THROW(dual_circuit_matrix(c, short_order), InputError);
  EXPECT_THROW(primal_circuit_matrix(c, repeat), InputError);
}

TEST(Property, BlockCountsForAllSmallP) {
  for (long long p = 2; p <= 64; ++p) {
    const Circuit c = line({0, p}, 1);
    ASSERT_EQ(c.bary.p, static_cast<std::uint64_t>(p));
    const std::size_t width = std::size_t{1} << c.bary.m;
    const CircuitMatrix d = dual_circuit_matrix(c);
    EXPECT_EQ(d.count_blocks(2), width - 1) << p;
    EXPECT_EQ(d.count_blocks(1), 1u) << p;
    EXPECT_EQ(d.lift_var_count(), width - 2) << p;
    const CircuitMatrix pr = primal_circuit_matrix(c);
    EXPECT_EQ(pr.count_blocks(2), width - 1) << p;
    EXPECT_EQ(pr.count_blocks(1), 2u) << p;
    EXPECT_EQ(pr.lift_var_count(), width) << p;
  }
}

TEST(Property, LeafMultisetConservation) {
  oracle::Rng rng(41);
  for (int t = 0; t < 300; ++t) {
    const Circuit c = oracle::random_circuit(rng, static_cast<std::size_t>(rng.integer(1, 3)), 40);
    const std::size_t width = std::size_t{1} << c.bary.m;
    for (const CircuitMatrix& mat : {dual_circuit_matrix(c), primal_circuit_matrix(c)}) {
      auto counts = leaf_diagonal_counts(mat);
      std::size_t total = 0;
      for (std::size_t i = 0; i < c.outer.size(); ++i) {
        const auto id = mat.side == Side::Dual ? vars::dual_coord(c.outer[i]).id : vars::coeff_outer(c.outer[i]).id;
        EXPECT_EQ(counts[id], c.bary.p_alpha[i]);
        total += counts[id];
      }
      const auto beta_id = mat.side == Side::Dual ? vars::dual_coord(c.inner).id : vars::lift_primal_beta(c.id()).id;
      EXPECT_EQ(counts[beta_id], width - c.bary.p);
      total += counts[beta_id];
      EXPECT_EQ(total, width);
    }
  }
}

TEST(Property, LiftIndicesInRange) {
  oracle::Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    const Circuit c = oracle::random_circuit(rng, static_cast<std::size_t>(rng.integer(1, 3)), 64);
    const unsigned m = c.bary.m;
    for (const CircuitMatrix& mat : {dual_circuit_matrix(c), primal_circuit_matrix(c)}) {
      const unsigned kmax = mat.side == Side::Dual ? m - 1 : std::max(1u, m);
      for (const auto& v : mat.vars) {
        if (v.kind != VarKind::LiftDual && v.kind != VarKind::LiftPrimal) continue;
        unsigned k = 0, i = 0;
        ASSERT_EQ(std::sscanf(v.id.c_str() + 1, "[%u][%u]", &k, &i), 2) << v.id;
        EXPECT_GE(k, 1u);
        EXPECT_LE(k, kmax);
        EXPECT_GE(i, 1u);
        EXPECT_LE(i, 1u << (std::max(1u, m) - k));
        EXPECT_EQ(v.id.substr(v.id.find('@') + 1), c.id());
      }
    }
  }
}

TEST(Property, ThetaMatchesHighPrecision) {
  oracle::Rng rng(43);
  for (int t = 0; t < 500; ++t) {
    const Circuit c = oracle::random_circuit(rng, static_cast<std::size_t>(rng.integer(1, 3)), 64);
    const double want = oracle::theta(c.bary.lambda).convert_to<double>();
    EXPECT_NEAR(theta(c.bary), want, 1e-14 * want);
  }
}

TEST(Property, PsdIffSoc) {
  oracle::Rng rng(44);
  for (int t = 0; t < 10000; ++t) {
    // small integers hit the boundary often; exact in double
    const bool small = rng.coin();
    const double a = small ? static_cast<double>(rng.integer(-3, 3)) : rng.real(-5, 5);
    const double b = small ? static_cast<double>(rng.integer(-3, 3)) : rng.real(-5, 5);
    const double c = small ? static_cast<double>(rng.integer(-3, 3)) : rng.real(-5, 5);
    const bool psd = a >= 0 && c >= 0 && a * c >= b * b;
    const BlockSpec blk = two(AffineEntry::constant_only(a), AffineEntry::constant_only(b), AffineEntry::constant_only(c), {});
    EXPECT_EQ(soc_holds(std::get<SocConstraint>(psd2x2_to_soc(blk)), Assignment{}), psd) << a << " " << b << " " << c;
    if (!small) {
      EXPECT_EQ(psd, oracle::min_eigenvalue(a, b, c) >= 0);
    }
  }
}

TEST(Property, SocAgreesWithPsdOnRandomAssignments) {
  oracle::Rng rng(45);
  for (int t = 0; t < 100; ++t) {
    const Circuit c = oracle::random_circuit(rng, 2, 20);
    const CircuitMatrix mat = primal_circuit_matrix(c);
    Assignment a;
    for (const auto& v : mat.vars) a.set(v, rng.real(-1, 3));
    for (const auto& b : mat.blocks) {
      if (b.size != 2) continue;
      const double av = b.a.evaluate(a), bv = b.b.evaluate(a), cv = b.c.evaluate(a);
      const bool psd = av >= 0 && cv >= 0 && av * cv - bv * bv >= 0;
      const double margin = std::fabs(av * cv - bv * bv);
      if (margin < 1e-12) continue;
      EXPECT_EQ(soc_holds(std::get<SocConstraint>(psd2x2_to_soc(b)), a), psd);
    }
  }
}
