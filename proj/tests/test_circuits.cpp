#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace scone;

namespace {

std::vector<ExponentVector> pts1(std::initializer_list<long long> xs) {
  std::vector<ExponentVector> out;
  for (long long x : xs) out.push_back(exponent({x}));
  return out;
}

Support random_support(oracle::Rng& rng, std::size_t n, std::size_t max_points) {
  std::vector<ExponentVector> abs, odd;
  const auto count = static_cast<std::size_t>(rng.integer(2, static_cast<long long>(max_points)));
  for (std::size_t t = 0; t < count; ++t) {
    std::vector<Rational> e;
    for (std::size_t j = 0; j < n; ++j) e.emplace_back(rng.integer(0, 4));
    ExponentVector ev(e);
    if (ev.is_even() || rng.coin(0.6))
      abs.push_back(ev);
    else
      odd.push_back(ev);
  }
  std::sort(abs.begin(), abs.end());
  std::erase_if(odd, [&](const ExponentVector& e) { return std::binary_search(abs.begin(), abs.end(), e); });
  if (abs.empty()) abs.push_back(ExponentVector(std::vector<Rational>(n, Rational(0))));
  return Support(n, abs, odd);
}

// Every (A, beta) by brute force over subsets of `outer` and points of `inner`.
std::vector<std::pair<std::vector<ExponentVector>, ExponentVector>> brute_circuits(
    const std::vector<ExponentVector>& outer, const std::vector<ExponentVector>& inner, std::size_t max_outer) {
  std::vector<std::pair<std::vector<ExponentVector>, ExponentVector>> out;
  const std::size_t N = outer.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
    std::vector<ExponentVector> A;
    for (std::size_t i = 0; i < N; ++i)
      if (mask >> i & 1) A.push_back(outer[i]);
    if (A.size() < 2 || A.size() > max_outer) continue;
    for (const auto& b : inner) {
      if (std::find(A.begin(), A.end(), b) != A.end()) continue;
      if (oracle::in_relint(A, b)) out.emplace_back(A, b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Barycentric, LineCircuit) {
  const auto A = pts1({0, 6});
  const auto b = barycentric(A, exponent({2}));
  ASSERT_TRUE(b);
  EXPECT_EQ(b->lambda, (std::vector<Rational>{Rational(2, 3), Rational(1, 3)}));
  EXPECT_EQ(b->p, 3u);
  EXPECT_EQ(b->p_alpha, (std::vector<std::uint64_t>{2, 1}));
  EXPECT_EQ(b->m, 2u);
}

TEST(Barycentric, TriangleCircuit) {
  // outer in lexicographic order: (0,0), (2,4), (4,2)
  const std::vector<ExponentVector> A{exponent({0, 0}), exponent({2, 4}), exponent({4, 2})};
  const auto b = barycentric(A, exponent({1, 1}));
  ASSERT_TRUE(b);
  EXPECT_EQ(b->lambda, (std::vector<Rational>{Rational(2, 3), Rational(1, 6), Rational(1, 6)}));
  EXPECT_EQ(b->p, 6u);
  EXPECT_EQ(b->p_alpha, (std::vector<std::uint64_t>{4, 1, 1}));
  EXPECT_EQ(b->m, 3u);
  const auto oracle_coords = oracle::affine_solve(A, exponent({1, 1})).coords;
  ASSERT_TRUE(oracle_coords);
  EXPECT_EQ(*oracle_coords, b->lambda);
}

TEST(Barycentric, AbsentCases) {
  EXPECT_FALSE(barycentric(pts1({0, 2}), exponent({3})));
  EXPECT_FALSE(barycentric(pts1({0, 2}), exponent({2})));
  EXPECT_FALSE(barycentric(pts1({0, 2}), exponent({0})));
  EXPECT_FALSE(barycentric(pts1({0, 2, 4}), exponent({1})));
  const std::vector<ExponentVector> tri{exponent({0, 0}), exponent({4, 0}), exponent({0, 4})};
  EXPECT_FALSE(barycentric(tri, exponent({2, 0})));  // relative boundary
  EXPECT_THROW(barycentric(tri, exponent({1})), InputError);
  EXPECT_THROW(barycentric({}, exponent({1})), InputError);
}

TEST(Barycentric, RationalExponents) {
  const std::vector<ExponentVector> A{ExponentVector{Rational(0)}, ExponentVector{Rational(3, 2)}};
  const auto b = barycentric(A, ExponentVector{Rational(1, 2)});
  ASSERT_TRUE(b);
  EXPECT_EQ(b->lambda, (std::vector<Rational>{Rational(2, 3), Rational(1, 3)}));
  EXPECT_EQ(b->p, 3u);
}

TEST(Enumerate, PoolsSelectTheCircuit) {
  const Support s(1, pts1({0, 2, 6}));
  const auto cs = enumerate_circuits(s, pts1({0, 6}), pts1({2}), 2);
  ASSERT_EQ(cs.size(), 1u);
  EXPECT_EQ(cs[0].outer, pts1({0, 6}));
  EXPECT_EQ(cs[0].inner, exponent({2}));
  EXPECT_TRUE(enumerate_circuits(s, pts1({0}), pts1({2, 6}), 2).empty());
}

TEST(Enumerate, PentagonSupportContainsTriangleCircuit) {
  const Support s(2, {exponent({0, 0}), exponent({4, 0}), exponent({0, 2}), exponent({1, 1}), exponent({4, 2})});
  const auto cs = enumerate_circuits(s, s.abs_points(), s.abs_points(), 3);
  const std::vector<ExponentVector> A{exponent({0, 0}), exponent({0, 2}), exponent({4, 0})};
  EXPECT_NE(std::find_if(cs.begin(), cs.end(), [&](const Circuit& c) { return c.outer == A && c.inner == exponent({1, 1}); }),
            cs.end());
}

TEST(Enumerate, InputValidation) {
  const Support s(1, pts1({0, 2, 6}));
  EXPECT_THROW(enumerate_circuits(s, s.abs_points(), s.abs_points(), 3), InputError);
  EXPECT_THROW(enumerate_circuits(s, pts1({0, 4}), s.abs_points(), 2), InputError);
}

TEST(Reduced, MidpointOnEdgeBlocksTriangle) {
  const std::vector<ExponentVector> A{exponent({0, 0}), exponent({0, 2}), exponent({4, 0})};
  const auto circ = make_circuit(A, exponent({1, 1}));
  ASSERT_TRUE(circ);
  const Support sparse(2, {exponent({0, 0}), exponent({4, 0}), exponent({0, 2}), exponent({1, 1}), exponent({4, 2})});
  EXPECT_TRUE(is_reduced(*circ, sparse).is_reduced);
  const Support with_midpoint(2, {exponent({0, 0}), exponent({4, 0}), exponent({0, 2}), exponent({1, 1}), exponent({4, 2}),
                         exponent({2, 0})});
  const auto flag = is_reduced(*circ, with_midpoint);
  EXPECT_FALSE(flag.is_reduced);
  EXPECT_EQ(flag.blockers, (std::vector<ExponentVector>{exponent({2, 0})}));
  const Support bare(2, {exponent({0, 0}), exponent({4, 0}), exponent({0, 2}), exponent({1, 1})});
  EXPECT_TRUE(is_reduced(*circ, bare).is_reduced);
}

TEST(Reduced, LineExamples) {
  const auto r = enumerate_reduced(Support(1, pts1({0, 2, 6})));
  ASSERT_EQ(r.even.size(), 1u);
  EXPECT_EQ(r.even[0].outer, pts1({0, 6}));
  EXPECT_EQ(r.even[0].inner, exponent({2}));
  EXPECT_TRUE(r.odd.empty());

  const auto r2 = enumerate_reduced(Support(1, pts1({0, 4}), pts1({1, 3})));
  EXPECT_TRUE(r2.even.empty());
  ASSERT_EQ(r2.odd.size(), 2u);
  EXPECT_EQ(r2.odd[0].inner, exponent({1}));
  EXPECT_EQ(r2.odd[1].inner, exponent({3}));
  EXPECT_EQ(r2.odd[0].parity, Parity::Odd);

  const auto r3 = enumerate_reduced(Support(1, pts1({4})));
  EXPECT_EQ(r3.size(), 0u);

  // 4 lies in conv{0,6}: ({0,6},2) is blocked, ({0,4},2) and ({2,6},4) remain.
  const auto r4 = enumerate_reduced(Support(1, pts1({0, 2, 4, 6})));
  ASSERT_EQ(r4.even.size(), 2u);
  EXPECT_EQ(r4.even[0].outer, pts1({0, 4}));
  EXPECT_EQ(r4.even[1].outer, pts1({2, 6}));
}

TEST(CircuitId, StableAndDistinct) {
  const auto a = make_circuit(pts1({0, 6}), exponent({2}));
  const auto b = make_circuit(pts1({6, 0}), exponent({2}));
  const auto c = make_circuit(pts1({0, 6}), exponent({4}));
  ASSERT_TRUE(a && b && c);
  EXPECT_EQ(a->id(), b->id());
  EXPECT_NE(a->id(), c->id());
  EXPECT_EQ(a->id().size(), 16u);
  EXPECT_EQ(to_string(*a), "({(0),(6)},(2))");
}

TEST(Property, BarycentricDataInvariants) {
  oracle::Rng rng(21);
  for (int t = 0; t < 400; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 3));
    const Circuit c = oracle::random_circuit(rng, n, 40);
    const auto& b = c.bary;
    Rational sum = 0;
    std::vector<Rational> moment(n, Rational(0));
    std::uint64_t psum = 0;
    BigInt g = b.p;
    for (std::size_t i = 0; i < c.outer.size(); ++i) {
      EXPECT_GT(b.lambda[i], 0);
      sum += b.lambda[i];
      for (std::size_t j = 0; j < n; ++j) moment[j] += b.lambda[i] * c.outer[i][j];
      EXPECT_EQ(b.lambda[i], Rational(static_cast<long long>(b.p_alpha[i]), static_cast<long long>(b.p)));
      psum += b.p_alpha[i];
      g = boost::multiprecision::gcd(g, BigInt(b.p_alpha[i]));
    }
    EXPECT_EQ(sum, 1);
    EXPECT_EQ(ExponentVector(moment), c.inner);
    EXPECT_EQ(psum, b.p);
    EXPECT_EQ(g, 1);
    EXPECT_GE(b.p, 2u);
    EXPECT_EQ(b.m, static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(b.p)) - 1e-12)));
  }
}

TEST(Property, EnumerationMatchesBruteForce) {
  oracle::Rng rng(22);
  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 3));
    const Support s = random_support(rng, n, 8);
    const auto got = enumerate_circuits(s, s.abs_points(), s.all_points(), n + 1);
    const auto want = brute_circuits(s.abs_points(), s.all_points(), n + 1);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].outer, want[i].first);
      EXPECT_EQ(got[i].inner, want[i].second);
      EXPECT_EQ(got[i].parity == Parity::Odd, s.contains_odd(got[i].inner));
    }
  }
}

TEST(Property, ReducedIsSubsetWithOracleBlockers) {
  oracle::Rng rng(23);
  for (int t = 0; t < 60; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 3));
    const Support s = random_support(rng, n, 8);
    const auto all_even = enumerate_circuits(s, s.abs_points(), s.abs_points(), n + 1);
    const auto all_odd = enumerate_circuits(s, s.abs_points(), s.odd_points(), n + 1);
    const auto red = enumerate_reduced(s);
    auto check = [&](const std::vector<Circuit>& all, const std::vector<Circuit>& reduced) {
      for (const auto& c : reduced) {
        EXPECT_NE(std::find(all.begin(), all.end(), c), all.end());
      }
      for (const auto& c : all) {
        bool blocked = false;
        for (const auto& g : s.abs_points())
          if (g != c.inner && std::find(c.outer.begin(), c.outer.end(), g) == c.outer.end() && oracle::in_hull(c.outer, g))
            blocked = true;
        const bool listed = std::find(reduced.begin(), reduced.end(), c) != reduced.end();
        EXPECT_EQ(listed, !blocked) << to_string(c);
      }
    };
    check(all_even, red.even);
    check(all_odd, red.odd);
  }
}

TEST(Property, AddingInteriorPointBlocks) {
  oracle::Rng rng(24);
  for (int t = 0; t < 100; ++t) {
    const Circuit c = oracle::random_circuit(rng, 2, 12);
    std::vector<ExponentVector> ground = c.outer;
    ground.push_back(c.inner);
    ASSERT_TRUE(is_reduced(c, Support(2, ground)).is_reduced);
    // a point strictly between the first vertex and beta
    std::vector<Rational> mid;
    for (std::size_t j = 0; j < 2; ++j) mid.push_back((c.outer[0][j] + c.inner[j]) / 2);
    ground.emplace_back(mid);
    const auto flag = is_reduced(c, Support(2, ground));
    EXPECT_FALSE(flag.is_reduced);
    EXPECT_EQ(flag.blockers, (std::vector<ExponentVector>{ExponentVector(mid)}));
  }
}

TEST(Property, ThreadCountDoesNotChangeOutput) {
  oracle::Rng rng(25);
  for (int t = 0; t < 20; ++t) {
    const Support s = random_support(rng, 2, 10);
    const auto one = enumerate_reduced(s, 0, 1);
    const auto many = enumerate_reduced(s, 0, 8);
    EXPECT_EQ(one.even, many.even);
    EXPECT_EQ(one.odd, many.odd);
  }
}
