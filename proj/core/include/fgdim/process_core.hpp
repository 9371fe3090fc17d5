#pragma once

// Closed-form layer for fractional Brownian motion and symmetric stable
// processes: covariances, the variance function g_a and its partial
// derivatives, stable characteristic exponents, and strong local
// nondeterminism (LND) certificates.
//
// Indices in this API are 0-based. Reports and text output use 1-based
// positions.

#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace fgdim {

enum class ProcessKind { Fbm, Stable };

/// exp(-c Var) with c = 2 pi^2 is the Gaussian characteristic function
/// E exp(2 pi i sum eps_j B(u_j)).
inline constexpr double kStandardCharScale = 2.0 * std::numbers::pi * std::numbers::pi;
/// Normalisation e^{-pi Var} used in the original moment identities.
inline constexpr double kPiCharScale = std::numbers::pi;

class ProcessParams {
 public:
  static ProcessParams fbm(double hurst, double char_exponent_scale = kStandardCharScale);
  static ProcessParams stable(double alpha);

  ProcessKind kind() const noexcept { return kind_; }
  /// Throws PreconditionError unless kind() == Fbm.
  double hurst() const;
  /// Throws PreconditionError unless kind() == Stable.
  double alpha() const;
  double char_exponent_scale() const noexcept { return scale_; }

  /// Hoelder-type roughness exponent of sample paths: H for fBm, 1/alpha for
  /// stable (the self-similarity index).
  double self_similarity_index() const noexcept;

  bool operator==(const ProcessParams&) const = default;

 private:
  ProcessParams(ProcessKind kind, double hurst, double alpha, double scale)
      : kind_(kind), hurst_(hurst), alpha_(alpha), scale_(scale) {}

  ProcessKind kind_;
  double hurst_;
  double alpha_;
  double scale_;
};

void validate_hurst(double H);

/// Nonzero integer coefficients a_1..a_I attached to strictly increasing
/// times. The first time may be exactly 0: that slot carries the mass removed
/// at the left boundary (B(0) = 0 so it never changes a variance).
class CoeffVector {
 public:
  CoeffVector(std::vector<int> coeffs, std::vector<double> times);

  std::size_t size() const noexcept { return coeffs_.size(); }
  std::span<const int> coeffs() const noexcept { return coeffs_; }
  std::span<const double> times() const noexcept { return times_; }
  int coeff(std::size_t i) const { return coeffs_.at(i); }
  double time(std::size_t i) const { return times_.at(i); }
  int sum() const noexcept;
  int max_abs() const noexcept;
  bool zero_sum() const noexcept { return sum() == 0; }

 private:
  std::vector<int> coeffs_;
  std::vector<double> times_;
};

/// Merge entries at coincident times (within `tol`), dropping coefficients
/// that cancel. Input need not be sorted.
CoeffVector merge_coincident(std::span<const int> coeffs, std::span<const double> times,
                             double tol = 0.0);

// --- fBm covariance and the variance function --------------------------------

double cov_fbm(double s, double t, double H);

/// Var(sum a_i B(t_i)) through the covariance quadratic form.
double var_linear_comb(const CoeffVector& c, double H);

/// g_a(s) = -Var(sum a_i B(s_i)), quadratic-form route.
double g_a(const CoeffVector& c, double H);

/// sum_{i<j} a_i a_j (s_j - s_i)^{2H}; equals g_a when the coefficients sum to
/// zero. Throws DomainError otherwise.
double g_a_zero_sum(const CoeffVector& c, double H);

/// d g_a / d s_k for zero-sum coefficients.
double dg(const CoeffVector& c, double H, std::size_t k);

/// d^2 g_a / d s_i d s_j for i < j and zero-sum coefficients.
double d2g(const CoeffVector& c, double H, std::size_t i, std::size_t j);

/// Mixed partial of g_a in the distinct indices `idx`. Blocks of three or more
/// distinct variables are identically zero and return 0.0 without evaluation.
double mixed_partial_g(const CoeffVector& c, double H, std::span<const std::size_t> idx);

/// Var(sum c_i B(t_i)) for arbitrary real coefficients and arbitrary (unsorted,
/// possibly coincident) nonnegative times. Uses the pairwise-increment form
/// with the origin appended, which avoids the cancellation of the quadratic
/// form when the coefficients nearly sum to zero.
double fbm_variance(std::span<const double> coeffs, std::span<const double> times, double H);

/// d/dt_k of fbm_variance. Requires t_k > 0 when the coefficients do not sum to
/// zero and H < 1/2.
double fbm_variance_partial(std::span<const double> coeffs, std::span<const double> times,
                            double H, std::size_t k);

/// d^2/dt_i dt_j of fbm_variance for i != j.
double fbm_variance_mixed(std::span<const double> coeffs, std::span<const double> times,
                          double H, std::size_t i, std::size_t j);

// --- stable processes ---------------------------------------------------------

/// Coefficients b_j with G_eps(u) = exp(sum_j b_j u_j) for the symmetric
/// alpha-stable characteristic function at unit frequency,
/// b_j = -(2 pi)^alpha (|eps_j+...+eps_n|^alpha - |eps_{j+1}+...+eps_n|^alpha).
/// `eps` must hold +1/-1 entries.
std::vector<double> stable_char_coeffs(std::span<const int> eps, double alpha);

// --- zero partial sums ----------------------------------------------------------

struct ZeroSumStructure {
  /// Indices i (0-based) with a_i + ... + a_{I-1} = 0, increasing.
  std::vector<std::size_t> zero_sum_indices;
  /// Complement of zero_sum_indices in {0..I-1}.
  std::vector<std::size_t> jstar;
};

ZeroSumStructure zero_sum_structure(std::span<const int> a);

// --- strong local nondeterminism ---------------------------------------------------

struct LndCertificate {
  /// Var(sum a_j B(t_j)).
  double variance = 0.0;
  /// (kappa^{n-1}/n) sum_j (a_j+...+a_n)^2 (t_j - t_{j-1})^{2H}, with kappa
  /// the smallest observed ratio Var(B(t_j)|B(t_1..t_{j-1})) / (t_j-t_{j-1})^{2H}.
  double lower_bound = 0.0;
  /// Var(B(t_1)), Var(B(t_2)|B(t_1)), ..., in order.
  std::vector<double> conditional_variances;
  double det_cov = 0.0;
  /// det Cov / (n prod sigma_j^2) * sum_j a_j^2 sigma_j^2 in increment form.
  double berman_rhs = 0.0;
  double min_lnd_ratio = 0.0;
  bool jitter_applied = false;

  bool berman_holds(double rel_tol = 1e-10) const;
};

/// Builds the certificate for sum a_j B(t_j). Times must be strictly
/// increasing and positive, at most 12 of them.
LndCertificate lnd_certificate(const CoeffVector& c, double H);

/// Var(B(t) | B(s), s in given). `given` may be empty and in any order.
double conditional_variance(double t, std::span<const double> given, double H);

// --- derivative bounds (H > 1/2) --------------------------------------------------

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// |d g_a / d s_k| <= 4 H I |a|_inf^2 sum_{i in J*} (s_i - s_{i-1})^{2H-1}
/// with s_{-1} = 0. Requires zero-sum integer coefficients and H in (1/2, 1).
BoundReport dg_bound_check(const CoeffVector& c, double H, std::size_t k);

struct PairProductReport {
  BoundReport bound;
  /// Witness indices tau(1) < ... < tau(n) drawn from J*.
  std::vector<std::size_t> tau;
};

/// prod_k |d^2 g_a / ds_{x_k} ds_{y_k}| <= 2^n |a|_inf^{2n} prod_k (s_tau(k) - s_tau(k)-1)^{2H-2}
/// for a perfect matching of positions whose sorted union has gaps >= 2.
PairProductReport ddg_product_bound_check(
    const CoeffVector& c, double H, std::span<const std::pair<std::size_t, std::size_t>> pairs);

}  // namespace fgdim
