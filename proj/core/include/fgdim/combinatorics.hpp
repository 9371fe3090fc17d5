#pragma once

// Symbolic layer of the integration-by-parts calculus: sign vectors over
// Z u {*}, the operator alphabet {Phi-, Phi+, d} acting on odd positions, the
// reduction of a sign vector by an operator sequence, pair partitions and the
// Faa di Bruno expansion of the reduced integrand.
//
// Positions and indices are 0-based. The odd 1-based position 2k-1 of the
// k-th operator is the even 0-based position 2k.
//
// Text form: sign vectors are space separated tokens, "+" and "-" for +1 and
// -1, "*" for a removed coordinate, decimal integers otherwise, e.g.
// "* 3 * - - -". Operator sequences use "P-", "P+" and "D", e.g. "P+ P- D".

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fgdim {

class SignVector {
 public:
  using Entry = std::optional<int>;  // nullopt is the removal symbol *

  /// Any entries over Z u {*}; length must be even and >= 2.
  explicit SignVector(std::vector<Entry> entries);
  /// Element of A_{2q}: entries +1/-1 summing to zero.
  static SignVector from_signs(std::span<const int> signs);
  static SignVector parse(std::string_view text);

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t q() const noexcept { return entries_.size() / 2; }
  const Entry& operator[](std::size_t i) const { return entries_.at(i); }
  std::span<const Entry> entries() const noexcept { return entries_; }
  bool is_star(std::size_t i) const { return !entries_.at(i).has_value(); }
  /// Neither * nor 0.
  bool is_nontrivial(std::size_t i) const { return entries_.at(i).value_or(0) != 0; }
  std::size_t star_count() const noexcept;
  /// Entries with * read as 0.
  std::vector<int> numeric() const;

  std::string to_string() const;
  bool operator==(const SignVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

enum class Op { PhiMinus, PhiPlus, Del };
enum class PhiSign { Minus, Plus };

class OperatorSeq {
 public:
  explicit OperatorSeq(std::vector<Op> ops);
  static OperatorSeq parse(std::string_view text);

  std::size_t q() const noexcept { return ops_.size(); }
  Op operator[](std::size_t k) const { return ops_.at(k); }
  std::span<const Op> ops() const noexcept { return ops_; }
  /// 0-based position acted on by the k-th operator.
  static std::size_t position(std::size_t k) noexcept { return 2 * k; }

  /// J1, J2, J3 as 0-based operator indices.
  std::vector<std::size_t> j1() const { return indices_of(Op::PhiMinus); }
  std::vector<std::size_t> j2() const { return indices_of(Op::PhiPlus); }
  std::vector<std::size_t> j3() const { return indices_of(Op::Del); }
  std::size_t count(Op op) const noexcept;
  /// (-1)^{#J2}.
  int sign() const noexcept { return count(Op::PhiPlus) % 2 == 0 ? 1 : -1; }

  std::string to_string() const;
  bool operator==(const OperatorSeq&) const = default;

 private:
  std::vector<std::size_t> indices_of(Op op) const;
  std::vector<Op> ops_;
};

inline constexpr int kMaxEnumerationQ = 8;
inline constexpr std::size_t kMaxPartitionSize = 10;

/// All zero-sum +/-1 vectors of length 2q, lexicographic with -1 < +1.
std::vector<SignVector> enumerate_A(int q);
/// All 3^q operator sequences, lexicographic in Phi- < Phi+ < d with the first
/// operator most significant.
std::vector<OperatorSeq> enumerate_Omega(int q);

/// Phi_pos^{-/+}: position `pos` becomes * and its value is added to the left
/// (Minus) or right (Plus) neighbour. At the first position (Minus) or the
/// last position (Plus) there is no receiver and the value is dropped.
/// Throws PreconditionError if the target or the receiver is *, or the target
/// is 0.
SignVector apply_phi(const SignVector& eps, std::size_t pos, PhiSign sign);

struct ReductionSummary {
  SignVector reduced;
  /// Positions j_1 < ... < j_I of the non-trivial entries of `reduced`.
  std::vector<std::size_t> nontrivial_indices;
  /// a_1..a_I, the non-trivial entries.
  std::vector<int> coeffs;
  /// Mass removed at the left boundary, pinned at time 0 so that
  /// origin_coeff + sum(coeffs) == 0.
  int origin_coeff = 0;
  /// p_1 < ... < p_l: indices into `coeffs` of the differentiated variables.
  std::vector<std::size_t> diff_positions;
  /// Indices i into `coeffs` with a_i + ... + a_I = 0, and the complement J*.
  std::vector<std::size_t> zero_sum_indices;
  std::vector<std::size_t> jstar;
  std::size_t m = 0;
  std::size_t ell = 0;
  std::size_t q = 0;

  std::size_t I() const noexcept { return coeffs.size(); }
  std::size_t d() const noexcept { return zero_sum_indices.size(); }
  std::string to_string() const;
};

/// Applies the Phi operators of `sigma` in increasing k and records the
/// non-trivial structure. `eps` must lie in A_{2q} with q = sigma.q().
ReductionSummary reduce(const SignVector& eps, const OperatorSeq& sigma);

struct PairPartition {
  /// Blocks of size 1 or 2, each sorted, ordered by first element.
  std::vector<std::vector<std::size_t>> blocks;

  std::size_t pair_count() const noexcept;
  bool operator==(const PairPartition&) const = default;
};

/// All partitions of `positions` into singletons and pairs.
std::vector<PairPartition> enumerate_P2(std::span<const std::size_t> positions);

/// Involution number T(n): 1, 1, 2, 4, 10, 26, ...
unsigned long long involution_number(std::size_t n);

struct ExpansionTerm {
  /// #P, the power of the prefactor c.
  std::size_t power = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pair_blocks;
  std::vector<std::size_t> single_blocks;
};

struct SymbolicExpansion {
  std::vector<ExpansionTerm> terms;
  ReductionSummary context;
};

/// sigma G_eps = sum_P c^{#P} exp(c g_a) prod_{B in P} g_a^{(B)}, one term per
/// pair partition of the differentiated variables.
SymbolicExpansion faa_di_bruno(const ReductionSummary& summary);

/// Numeric value of the expansion with g_a built from the reduced coefficients
/// (and the origin coefficient at time 0). `times` are the values of the I
/// non-trivial variables: strictly increasing and positive.
double eval_expansion(const SymbolicExpansion& expansion, double H,
                      std::span<const double> times, double c);

}  // namespace fgdim
