#pragma once

// Oscillatory iterated integrals over the ordered simplex
//
//   I[eps, G] = int_{0 <= u_1 < ... < u_n <= T, * removed} exp(-2 pi i lambda <eps,u>) G(u) du
//
// and the signed reduced integrals I[sigma, G], with the checks built on them:
// the single-step and full integration-by-parts identities, the moment
// decomposition of E|mu_hat|^{2q}, and the T-uniform bounds.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgdim/adaptive_quadrature.hpp"
#include "fgdim/combinatorics.hpp"
#include "fgdim/process_core.hpp"

namespace fgdim {

/// Smooth function G on the full coordinate vector u_0..u_{n-1}.
class Integrand {
 public:
  virtual ~Integrand() = default;
  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> u) const = 0;
  /// Mixed partial of G in the distinct positions `diff`, at u.
  virtual double partial(std::span<const double> u, std::span<const std::size_t> diff) const = 0;
  /// Closed form of sigma(G) at the (already substituted) point u, when the
  /// integrand has one for the pair (eps, sigma). The default is empty and
  /// callers fall back to partial().
  virtual std::function<double(std::span<const double>)> reduced(const SignVector& eps,
                                                                 const OperatorSeq& sigma) const;
};

/// G == value.
class ConstantIntegrand final : public Integrand {
 public:
  ConstantIntegrand(std::size_t n, double value) : n_(n), value_(value) {}
  std::size_t dimension() const override { return n_; }
  double value(std::span<const double>) const override { return value_; }
  double partial(std::span<const double>, std::span<const std::size_t> diff) const override {
    return diff.empty() ? value_ : 0.0;
  }

 private:
  std::size_t n_;
  double value_;
};

/// G(u) = exp(sum_j b_j u_j). The stable characteristic function G_eps is
/// this form with b = stable_char_coeffs(eps, alpha).
class ExpLinearIntegrand final : public Integrand {
 public:
  explicit ExpLinearIntegrand(std::vector<double> b) : b_(std::move(b)) {}
  static std::shared_ptr<ExpLinearIntegrand> stable(const SignVector& eps, double alpha);

  std::size_t dimension() const override { return b_.size(); }
  double value(std::span<const double> u) const override;
  double partial(std::span<const double> u, std::span<const std::size_t> diff) const override;
  std::span<const double> coeffs() const { return b_; }

 private:
  std::vector<double> b_;
};

/// G(u) = exp(-c Var(sum_j w_j B(u_j))) for fBm with Hurst index H: the
/// characteristic function E exp(2 pi i sum w_j B(u_j)) when c = 2 pi^2.
class FbmCharFunction final : public Integrand {
 public:
  FbmCharFunction(std::vector<double> weights, double H, double c = kStandardCharScale);
  static std::shared_ptr<FbmCharFunction> of(const SignVector& eps, double H,
                                             double c = kStandardCharScale);

  std::size_t dimension() const override { return w_.size(); }
  double value(std::span<const double> u) const override;
  double partial(std::span<const double> u, std::span<const std::size_t> diff) const override;
  /// Uses the Faa di Bruno expansion of the reduction when the weights equal
  /// eps.
  std::function<double(std::span<const double>)> reduced(const SignVector& eps,
                                                         const OperatorSeq& sigma) const override;
  double hurst() const noexcept { return H_; }
  double scale() const noexcept { return c_; }

 private:
  std::vector<double> w_;
  double H_;
  double c_;
};

struct OscillatorySpec {
  double lambda = 0.0;
  double T = 1.0;
  SignVector eps;
  /// Function of the non-* coordinates of eps, in order.
  std::shared_ptr<const Integrand> G;
};

struct SimplexQuadOptions {
  /// Relative tolerance of every nested level.
  double rel_tol = 1e-10;
  double abs_tol = 1e-15;
  std::size_t max_subdivisions = 200;
  /// Number of free coordinates above which rel_tol is relaxed to
  /// high_dim_rel_tol.
  std::size_t high_dim_threshold = 3;
  double high_dim_rel_tol = 1e-7;
  /// Throw ConvergenceError when the outermost level misses its tolerance.
  bool throw_on_failure = true;
};

struct IntegralResult {
  std::complex<double> value;
  double error = 0.0;
  std::size_t evaluations = 0;
  std::size_t dimension = 0;
};

/// Maximum number of integrated (non-*) coordinates.
inline constexpr std::size_t kMaxSimplexDim = 6;

IntegralResult integrate_I(const OscillatorySpec& spec, const SimplexQuadOptions& opt = {});

/// (-1)^{#J2} I[reduced eps, sigma(G)] with the boundary substitutions of the
/// Phi operators applied to G and the d operators differentiating it.
/// Requires eps in A_{2q}, no * entries, and G of dimension 2q.
IntegralResult integrate_I_sigma(const OscillatorySpec& spec, const OperatorSeq& sigma,
                                 const SimplexQuadOptions& opt = {});

enum class LowDiscrepancy { Sobol, Halton };

/// Quasi-Monte Carlo estimate of integrate_I_sigma over the same simplex:
/// sorted low-discrepancy points, equal weights. `points` is capped at 10^7.
std::complex<double> integrate_I_sigma_qmc(const OscillatorySpec& spec, const OperatorSeq& sigma,
                                           std::size_t points,
                                           LowDiscrepancy kind = LowDiscrepancy::Sobol);

/// |L - R| / (|L| + |R| + 1e-14).
double relative_residual(std::complex<double> lhs, std::complex<double> rhs);

struct IdentityCheck {
  std::complex<double> lhs;
  std::complex<double> rhs;
  double residual = 0.0;
};

/// One integration by parts in the coordinate `j` (0-based):
/// I[eps,G] = (I[Phi-_j eps, Phi-_j G] - I[Phi+_j eps, Phi+_j G] + I[eps, d_j G]) / (2 pi i lambda eps_j).
/// At the last coordinate the upper boundary term carries the phase
/// exp(-2 pi i lambda eps_j T).
IdentityCheck verify_ibp_step(const OscillatorySpec& spec, std::size_t j,
                              const SimplexQuadOptions& opt = {});

/// I[eps,G] against (2 pi i lambda)^{-q} prod 1/eps_{2j-1} sum_{sigma in Omega^q} I[sigma,G].
IdentityCheck verify_ibp_full(const OscillatorySpec& spec, const SimplexQuadOptions& opt = {});

struct MomentDecomposition {
  /// (q!)^2 |xi2|^{-2q/H} sum_eps I[eps, G_eps] at lambda = xi1/|xi2|^{1/H}, T = |xi2|^{1/H}.
  double simplex = 0.0;
  /// Direct integral over [0,1]^2.
  double direct = 0.0;
  double quad_residual = 0.0;
  /// Monte Carlo mean and standard error, when requested.
  std::optional<double> mc_mean;
  std::optional<double> mc_stderr;
  /// |mc_mean - simplex| / mc_stderr.
  std::optional<double> mc_z;
};

struct MonteCarloRequest {
  std::size_t n_paths = 0;
  std::size_t M = 4096;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
};

/// q = 1 only. For stable processes the self-similarity index 1/alpha plays
/// the role of H. For fBm the characteristic scale of params is used.
MomentDecomposition verify_moment_decomposition(int q, double xi1, double xi2,
                                                const ProcessParams& params,
                                                const MonteCarloRequest& mc = {},
                                                const SimplexQuadOptions& opt = {});

struct BoundSweep {
  /// Per T: max over (eps, sigma) of |I[sigma, G_eps]| / T^q.
  std::vector<double> T;
  std::vector<double> max_ratio;
  double bound = 0.0;
  bool holds = true;

  double spread() const;
};

/// Stable case: max |I[sigma,G_eps]| / T^q over eps in A_{2q}, sigma in
/// Omega^q, asserted <= 2^q. q <= 2.
BoundSweep check_bound_stable(int q, std::span<const double> T, double lambda, double alpha,
                              const SimplexQuadOptions& opt = {});

/// fBm case: empirical ratios; `holds` means every ratio is finite.
BoundSweep check_bound_fbm(int q, std::span<const double> T, double H, double lambda = 1.0,
                           double c = kStandardCharScale, const SimplexQuadOptions& opt = {});

}  // namespace fgdim
