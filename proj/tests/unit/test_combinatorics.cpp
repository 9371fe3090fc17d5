#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "fgdim/combinatorics.hpp"
#include "fgdim/errors.hpp"
#include "fgdim/process_core.hpp"

using namespace fgdim;

namespace {

unsigned long long binom(unsigned n, unsigned k) {
  unsigned long long r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Straight-line reducer on plain integer arrays, star encoded separately.
struct PlainReduction {
  std::vector<int> value;
  std::vector<bool> star;
  int origin = 0;
};

PlainReduction plain_reduce(const std::vector<int>& eps, const std::vector<Op>& ops) {
  PlainReduction r{eps, std::vector<bool>(eps.size(), false), 0};
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const std::size_t pos = 2 * k;
    if (ops[k] == Op::Del) continue;
    const int v = r.value[pos];
    if (ops[k] == Op::PhiMinus) {
      if (pos == 0) {
        r.origin += v;
      } else {
        r.value[pos - 1] += v;
      }
    } else {
      r.value[pos + 1] += v;
    }
    r.value[pos] = 0;
    r.star[pos] = true;
  }
  return r;
}

// All set partitions of {0..n-1}, filtered to blocks of size <= 2.
std::size_t brute_pair_partitions(std::size_t n) {
  // Restricted growth strings.
  std::size_t count = 0;
  std::vector<std::size_t> rgs(n, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t m) {
    if (i == n) {
      std::map<std::size_t, int> sizes;
      for (auto b : rgs) ++sizes[b];
      bool ok = true;
      for (auto& [b, s] : sizes) ok = ok && s <= 2;
      count += ok;
      return;
    }
    for (std::size_t b = 0; b <= m; ++b) {
      rgs[i] = b;
      rec(i + 1, std::max(m, b + 1));
    }
  };
  if (n == 0) return 1;
  rec(0, 0);
  return count;
}

}  // namespace

TEST(SignVector, ParseAndPrint) {
  const auto s = SignVector::parse("* 3 * - - -");
  EXPECT_EQ(s.size(), 6u);
  EXPECT_TRUE(s.is_star(0));
  EXPECT_EQ(*s[1], 3);
  EXPECT_EQ(*s[3], -1);
  EXPECT_EQ(s.star_count(), 2u);
  EXPECT_EQ(s.to_string(), "* 3 * - - -");
  EXPECT_EQ(SignVector::parse(s.to_string()), s);
  EXPECT_EQ(s.numeric(), (std::vector<int>{0, 3, 0, -1, -1, -1}));
  EXPECT_FALSE(SignVector::parse("0 + - *").is_nontrivial(0));
  EXPECT_THROW(SignVector::parse("+ - +"), DomainError);
  EXPECT_THROW(SignVector::parse("+ x"), DomainError);
  const std::vector<int> bad{1, 1};
  EXPECT_THROW(SignVector::from_signs(bad), DomainError);
}

TEST(OperatorSeq, ParseAndSign) {
  const auto s = OperatorSeq::parse("P+ P- D");
  EXPECT_EQ(s.q(), 3u);
  EXPECT_EQ(s[0], Op::PhiPlus);
  EXPECT_EQ(s.sign(), -1);
  EXPECT_EQ(s.j1(), std::vector<std::size_t>{1});
  EXPECT_EQ(s.j3(), std::vector<std::size_t>{2});
  EXPECT_EQ(s.to_string(), "P+ P- D");
  EXPECT_EQ(OperatorSeq::position(2), 4u);
  EXPECT_EQ(OperatorSeq::parse("P+ P+").sign(), 1);
  EXPECT_THROW(OperatorSeq::parse("P+ Q"), DomainError);
}

TEST(Enumerate, ZeroSumSignVectors) {
  const auto a1 = enumerate_A(1);
  ASSERT_EQ(a1.size(), 2u);
  EXPECT_EQ(a1[0].to_string(), "- +");
  EXPECT_EQ(a1[1].to_string(), "+ -");
  for (int q = 1; q <= 6; ++q) {
    const auto A = enumerate_A(q);
    EXPECT_EQ(A.size(), binom(2 * unsigned(q), unsigned(q)));
    std::set<std::string> seen;
    for (std::size_t i = 0; i < A.size(); ++i) {
      int s = 0;
      for (int v : A[i].numeric()) s += v;
      EXPECT_EQ(s, 0);
      seen.insert(A[i].to_string());
      if (i > 0) EXPECT_LT(A[i - 1].numeric(), A[i].numeric());
    }
    EXPECT_EQ(seen.size(), A.size());
  }
  EXPECT_THROW(enumerate_A(kMaxEnumerationQ + 1), ResourceError);
  EXPECT_THROW(enumerate_A(0), DomainError);
}

TEST(Enumerate, OperatorSequences) {
  const auto o1 = enumerate_Omega(1);
  ASSERT_EQ(o1.size(), 3u);
  EXPECT_EQ(o1[0][0], Op::PhiMinus);
  EXPECT_EQ(o1[1][0], Op::PhiPlus);
  EXPECT_EQ(o1[2][0], Op::Del);
  unsigned long long p = 1;
  for (int q = 1; q <= 6; ++q) {
    p *= 3;
    EXPECT_EQ(enumerate_Omega(q).size(), p);
  }
  const auto o2 = enumerate_Omega(2);
  EXPECT_EQ(o2[1].to_string(), "P- P+");
  EXPECT_EQ(o2[3].to_string(), "P+ P-");
}

TEST(ApplyPhi, Examples) {
  // Symbolic example with distinct entries: positions 1 and 3 (1-based).
  const auto e = SignVector::parse("1 2 3 4 5 6");
  const auto a = apply_phi(e, 0, PhiSign::Plus);
  EXPECT_EQ(a.to_string(), "* 3 3 4 5 6");
  const auto b = apply_phi(a, 2, PhiSign::Minus);
  EXPECT_EQ(b.to_string(), "* 6 * 4 5 6");

  EXPECT_EQ(apply_phi(SignVector::parse("+ -"), 0, PhiSign::Minus).to_string(), "* -");
  EXPECT_EQ(apply_phi(SignVector::parse("+ + - -"), 2, PhiSign::Plus).to_string(), "+ + * -2");
  EXPECT_EQ(apply_phi(SignVector::parse("+ -"), 1, PhiSign::Plus).to_string(), "+ *");

  EXPECT_THROW(apply_phi(b, 0, PhiSign::Plus), PreconditionError);
  EXPECT_THROW(apply_phi(SignVector::parse("0 + - +"), 0, PhiSign::Plus), PreconditionError);
  EXPECT_THROW(apply_phi(SignVector::parse("+ * - +"), 2, PhiSign::Minus), PreconditionError);
  EXPECT_THROW(apply_phi(e, 6, PhiSign::Minus), PreconditionError);
}

TEST(Reduce, HandExamples) {
  {
    const auto r = reduce(SignVector::parse("+ -"), OperatorSeq::parse("D"));
    EXPECT_EQ(r.I(), 2u);
    EXPECT_EQ(r.coeffs, (std::vector<int>{1, -1}));
    EXPECT_EQ(r.diff_positions, std::vector<std::size_t>{0});
    EXPECT_EQ(r.d(), 1u);
    EXPECT_EQ(r.zero_sum_indices, std::vector<std::size_t>{0});
    EXPECT_EQ(r.jstar, std::vector<std::size_t>{1});
  }
  {
    const auto r = reduce(SignVector::parse("+ -"), OperatorSeq::parse("P+"));
    EXPECT_EQ(r.reduced.to_string(), "* 0");
    EXPECT_EQ(r.I(), 0u);
    EXPECT_EQ(r.m, 1u);
  }
  {
    const auto r = reduce(SignVector::parse("+ + + - - -"), OperatorSeq::parse("P+ P- D"));
    EXPECT_EQ(r.reduced.to_string(), "* 3 * - - -");
    EXPECT_EQ(r.coeffs, (std::vector<int>{3, -1, -1, -1}));
    EXPECT_EQ(r.I(), 4u);
    EXPECT_EQ(r.nontrivial_indices, (std::vector<std::size_t>{1, 3, 4, 5}));
    EXPECT_EQ(r.diff_positions, std::vector<std::size_t>{2});
  }
  {
    // Lower boundary mass is pinned at the origin.
    const auto r = reduce(SignVector::parse("+ -"), OperatorSeq::parse("P-"));
    EXPECT_EQ(r.origin_coeff, 1);
    EXPECT_EQ(r.coeffs, std::vector<int>{-1});
  }
}

TEST(Reduce, MatchesPlainReducerExhaustively) {
  for (int q = 1; q <= 4; ++q) {
    for (const auto& eps : enumerate_A(q)) {
      for (const auto& sigma : enumerate_Omega(q)) {
        const auto r = reduce(eps, sigma);
        const auto p = plain_reduce(eps.numeric(), {sigma.ops().begin(), sigma.ops().end()});
        EXPECT_EQ(r.origin_coeff, p.origin);
        std::vector<int> coeffs;
        std::vector<std::size_t> idx;
        for (std::size_t j = 0; j < p.value.size(); ++j) {
          EXPECT_EQ(r.reduced.is_star(j), bool(p.star[j]));
          if (!p.star[j] && p.value[j] != 0) {
            coeffs.push_back(p.value[j]);
            idx.push_back(j);
          }
        }
        EXPECT_EQ(r.coeffs, coeffs);
        EXPECT_EQ(r.nontrivial_indices, idx);
      }
    }
  }
}

TEST(Reduce, StructuralInvariantsExhaustive) {
  for (int q = 1; q <= 4; ++q) {
    for (const auto& eps : enumerate_A(q)) {
      for (const auto& sigma : enumerate_Omega(q)) {
        const auto r = reduce(eps, sigma);
        const std::size_t Q = std::size_t(q);
        EXPECT_EQ(r.m + r.ell, Q);
        EXPECT_LE(2 * Q - 2 * r.m, r.I());
        EXPECT_LE(r.I(), 2 * Q - r.m);
        int s = r.origin_coeff;
        for (int a : r.coeffs) {
          s += a;
          EXPECT_LE(std::abs(a), 3);
        }
        EXPECT_EQ(s, 0);
        for (std::size_t i = 1; i < r.diff_positions.size(); ++i) {
          EXPECT_GE(r.diff_positions[i] - r.diff_positions[i - 1], 2u);
        }
        EXPECT_GE(r.I() - r.d(), r.ell);
        // Set-inclusion sandwich on the non-trivial index set.
        std::set<std::size_t> nt(r.nontrivial_indices.begin(), r.nontrivial_indices.end());
        std::set<std::size_t> targets, touched;
        for (std::size_t k = 0; k < Q; ++k) {
          if (sigma[k] == Op::Del) continue;
          const std::size_t pos = 2 * k;
          targets.insert(pos);
          touched.insert(pos);
          if (sigma[k] == Op::PhiMinus && pos > 0) touched.insert(pos - 1);
          if (sigma[k] == Op::PhiPlus) touched.insert(pos + 1);
        }
        for (std::size_t j = 0; j < 2 * Q; ++j) {
          if (!touched.count(j)) EXPECT_TRUE(nt.count(j));
          if (targets.count(j)) EXPECT_FALSE(nt.count(j));
        }
        for (std::size_t p : r.diff_positions) {
          EXPECT_TRUE(r.reduced.is_nontrivial(r.nontrivial_indices[p]));
        }
      }
    }
  }
}

TEST(Reduce, OperatorOrderDoesNotMatter) {
  // Applying the Phi operators in decreasing k gives the same reduced vector.
  for (int q = 1; q <= 4; ++q) {
    for (const auto& eps : enumerate_A(q)) {
      for (const auto& sigma : enumerate_Omega(q)) {
        SignVector v = eps;
        for (std::size_t k = std::size_t(q); k-- > 0;) {
          if (sigma[k] == Op::Del) continue;
          v = apply_phi(v, 2 * k, sigma[k] == Op::PhiMinus ? PhiSign::Minus : PhiSign::Plus);
        }
        EXPECT_EQ(v, reduce(eps, sigma).reduced);
      }
    }
  }
}

TEST(PairPartitions, CountsMatchBruteForceAndInvolutionNumbers) {
  const unsigned long long inv[] = {1, 1, 2, 4, 10, 26, 76, 232};
  for (std::size_t l = 0; l <= 7; ++l) {
    std::vector<std::size_t> pos(l);
    for (std::size_t i = 0; i < l; ++i) pos[i] = 3 * i + 1;
    const auto P = enumerate_P2(pos);
    EXPECT_EQ(P.size(), inv[l]);
    EXPECT_EQ(involution_number(l), inv[l]);
    EXPECT_EQ(P.size(), brute_pair_partitions(l));
    for (const auto& p : P) {
      std::vector<std::size_t> all;
      for (const auto& b : p.blocks) {
        EXPECT_LE(b.size(), 2u);
        all.insert(all.end(), b.begin(), b.end());
      }
      std::sort(all.begin(), all.end());
      EXPECT_EQ(all, pos);
    }
  }
  for (int q = 1; q <= 6; ++q) {
    EXPECT_LE(double(involution_number(std::size_t(q))), std::pow(double(q), 2 * q + 1));
  }
  std::vector<std::size_t> big(kMaxPartitionSize + 1);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = i;
  EXPECT_THROW(enumerate_P2(big), ResourceError);
}

TEST(FaaDiBruno, TermsBijectWithPairPartitions) {
  for (const auto& eps : enumerate_A(3)) {
    for (const auto& sigma : enumerate_Omega(3)) {
      const auto r = reduce(eps, sigma);
      const auto ex = faa_di_bruno(r);
      const auto P = enumerate_P2(r.diff_positions);
      ASSERT_EQ(ex.terms.size(), P.size());
      for (std::size_t i = 0; i < P.size(); ++i) {
        EXPECT_EQ(ex.terms[i].power, P[i].blocks.size());
        EXPECT_EQ(ex.terms[i].pair_blocks.size(), P[i].pair_count());
      }
    }
  }
}

TEST(FaaDiBruno, LowOrderClosedForms) {
  const double c = kPiCharScale, H = 0.7;
  // No derivative: exp(c g_a).
  {
    const auto ex = faa_di_bruno(reduce(SignVector::parse("+ - + -"), OperatorSeq::parse("P+ P+")));
    EXPECT_EQ(ex.context.I(), 0u);
    EXPECT_DOUBLE_EQ(eval_expansion(ex, H, {}, c), 1.0);
  }
  {
    const auto ex = faa_di_bruno(reduce(SignVector::parse("+ -"), OperatorSeq::parse("P-")));
    const std::vector<double> t{0.4};
    // Origin +1 at 0, reduced a = (-1) at t: Var = t^{2H}.
    EXPECT_NEAR(eval_expansion(ex, H, t, c), std::exp(-c * std::pow(0.4, 2 * H)), 1e-15);
  }
  // One derivative: c exp(c g) dg.
  {
    const auto eps = SignVector::parse("+ -");
    const auto ex = faa_di_bruno(reduce(eps, OperatorSeq::parse("D")));
    const std::vector<double> t{0.3, 0.7};
    const CoeffVector cv({1, -1}, t);
    const double g = g_a_zero_sum(cv, H);
    EXPECT_NEAR(eval_expansion(ex, H, t, c), c * std::exp(c * g) * dg(cv, H, 0), 1e-14);
  }
  // Two derivatives: c^2 exp dg dg + c exp d2g.
  {
    const auto eps = SignVector::parse("+ - - +");
    const auto ex = faa_di_bruno(reduce(eps, OperatorSeq::parse("D D")));
    const std::vector<double> t{0.1, 0.35, 0.6, 0.9};
    const CoeffVector cv({1, -1, -1, 1}, t);
    const double g = g_a_zero_sum(cv, H);
    const double want = std::exp(c * g) * (c * c * dg(cv, H, 0) * dg(cv, H, 2) + c * d2g(cv, H, 0, 2));
    EXPECT_NEAR(eval_expansion(ex, H, t, c), want, 1e-13 * std::abs(want));
  }
}

TEST(FaaDiBruno, MatchesNestedFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double c = kPiCharScale;
  for (int q = 1; q <= 3; ++q) {
    const auto A = enumerate_A(q);
    const auto Om = enumerate_Omega(q);
    for (int it = 0; it < 60; ++it) {
      const auto& eps = A[rng() % A.size()];
      const auto& sigma = Om[rng() % Om.size()];
      const double H = 0.2 + 0.7 * U(rng);
      const auto ex = faa_di_bruno(reduce(eps, sigma));
      const std::size_t I = ex.context.I();
      std::vector<double> t(I);
      for (std::size_t i = 0; i < I; ++i) t[i] = 0.08 * double(i + 1) + 0.05 * U(rng);
      std::vector<double> a(ex.context.coeffs.begin(), ex.context.coeffs.end());
      auto F = [&](const std::vector<double>& u) { return std::exp(-c * fbm_variance(a, u, H)); };
      const auto& p = ex.context.diff_positions;
      const std::size_t l = p.size();
      auto central = [&](double h) {
        double acc = 0.0;
        for (std::size_t mask = 0; mask < (std::size_t(1) << l); ++mask) {
          auto u = t;
          int sgn = 1;
          for (std::size_t k = 0; k < l; ++k) {
            const bool up = (mask >> k) & 1;
            u[p[k]] += up ? h : -h;
            if (!up) sgn = -sgn;
          }
          acc += sgn * F(u);
        }
        return acc / std::pow(2 * h, double(l));
      };
      const double h = 2e-4;
      const double fd = l == 0 ? F(t) : (4 * central(h / 2) - central(h)) / 3;
      const double ev = eval_expansion(ex, H, t, c);
      const double floor = 1e-7 * F(t) * std::pow(0.08, -double(l));
      EXPECT_LT(std::abs(ev - fd) / (std::abs(fd) + floor), 1e-4)
          << eps.to_string() << " | " << sigma.to_string() << " H=" << H;
    }
  }
}

TEST(FaaDiBruno, RejectsBadTimes) {
  const auto ex = faa_di_bruno(reduce(SignVector::parse("+ -"), OperatorSeq::parse("D")));
  const std::vector<double> dec{0.5, 0.2};
  const std::vector<double> one{0.5};
  EXPECT_THROW(eval_expansion(ex, 0.5, dec, 1.0), DomainError);
  EXPECT_THROW(eval_expansion(ex, 0.5, one, 1.0), PreconditionError);
}
