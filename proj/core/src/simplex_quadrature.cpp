#include "fgdim/simplex_quadrature.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fgdim/errors.hpp"
#include "fgdim/spectral_estimator.hpp"

namespace fgdim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kFromZero = -1;
constexpr int kFromUpper = -2;

// One iterated integral over the ordered simplex in the free coordinates.
struct Term {
  std::size_t n = 0;
  std::vector<std::size_t> free;
  // Per coordinate: copy of another coordinate, 0, or T. Free coordinates
  // point to themselves.
  std::vector<int> source;
  std::vector<double> phase;
  double upper_phase = 0.0;
  std::function<double(std::span<const double>)> g;
  double weight = 1.0;
};

Term identity_term(std::size_t n) {
  Term t;
  t.n = n;
  t.source.resize(n);
  t.phase.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    t.source[j] = int(j);
    t.free.push_back(j);
  }
  return t;
}

class NestedIntegrator {
 public:
  NestedIntegrator(const Term& term, double lambda, double T, const SimplexQuadOptions& opt)
      : term_(term), lambda_(lambda), T_(T), opt_(opt), u_(term.n, 0.0) {
    const std::size_t d = term.free.size();
    rel_tol_ = d > opt.high_dim_threshold ? opt.high_dim_rel_tol : opt.rel_tol;
    max_phase_.resize(d);
    for (std::size_t L = 0; L < d; ++L) {
      // Largest frequency felt by level L: its own coefficient plus those of
      // the coordinates substituted from it.
      double m = std::abs(term.phase[term.free[L]]);
      for (std::size_t j = 0; j < term.n; ++j) {
        if (term.source[j] == int(term.free[L]) && j != term.free[L]) m += std::abs(term.phase[j]);
      }
      max_phase_[L] = m;
    }
    for (std::size_t j = 0; j < term.n; ++j) {
      if (term.source[j] == kFromUpper) u_[j] = T;
    }
  }

  IntegralResult run() {
    IntegralResult r;
    r.dimension = term_.free.size();
    const std::complex<double> boundary_phase =
        std::exp(std::complex<double>(0.0, -2.0 * kPi * lambda_ * term_.upper_phase * T_));
    if (term_.free.empty()) {
      r.value = term_.weight * boundary_phase * evaluate();
      r.evaluations = 1;
      return r;
    }
    const auto top = level(term_.free.size() - 1, T_);
    if (!top.converged && opt_.throw_on_failure) {
      std::ostringstream os;
      os << "simplex quadrature did not converge: error " << top.error << " on value "
         << std::abs(top.value);
      throw ConvergenceError(os.str(), top.error);
    }
    r.value = term_.weight * boundary_phase * top.value;
    r.error = top.error;
    r.evaluations = evaluations_;
    return r;
  }

 private:
  std::complex<double> evaluate() {
    ++evaluations_;
    double ph = 0.0;
    for (std::size_t j = 0; j < term_.n; ++j) {
      const int s = term_.source[j];
      if (s >= 0 && std::size_t(s) != j) u_[j] = u_[std::size_t(s)];
    }
    for (std::size_t j : term_.free) ph += term_.phase[j] * u_[j];
    for (std::size_t j = 0; j < term_.n; ++j) {
      if (term_.source[j] != int(j) && term_.source[j] >= 0) ph += term_.phase[j] * u_[j];
    }
    const double gv = term_.g(u_);
    if (!std::isfinite(gv)) return 0.0;
    const double arg = -2.0 * kPi * lambda_ * ph;
    return {gv * std::cos(arg), gv * std::sin(arg)};
  }

  QuadratureResult level(std::size_t L, double upper) {
    QuadratureOptions q;
    q.rel_tol = rel_tol_;
    q.abs_tol = opt_.abs_tol * std::max(1.0, upper);
    q.max_subdivisions = opt_.max_subdivisions;
    const double osc = std::abs(lambda_) * max_phase_[L] * upper;
    q.initial_panels = std::size_t(std::min(64.0, 1.0 + std::ceil(osc)));
    const std::size_t pos = term_.free[L];
    auto f = [&](double x) -> std::complex<double> {
      u_[pos] = x;
      if (L == 0) return evaluate();
      return level(L - 1, x).value;
    };
    return integrate_adaptive(f, 0.0, upper, q);
  }

  const Term& term_;
  double lambda_;
  double T_;
  const SimplexQuadOptions& opt_;
  double rel_tol_;
  std::vector<double> max_phase_;
  std::vector<double> u_;
  std::size_t evaluations_ = 0;
};

IntegralResult run_term(const Term& t, double lambda, double T, const SimplexQuadOptions& opt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("simplex quadrature: T must be positive");
  if (t.free.size() > kMaxSimplexDim) {
    throw ResourceError("simplex quadrature: at most " + std::to_string(kMaxSimplexDim) +
                        " integrated coordinates");
  }
  NestedIntegrator ni(t, lambda, T, opt);
  return ni.run();
}

void require_plain(const OscillatorySpec& spec, const char* op) {
  if (!spec.G) throw PreconditionError(std::string(op) + ": integrand missing");
  if (spec.eps.star_count() != 0) {
    throw PreconditionError(std::string(op) + ": sign vector must not contain *");
  }
  if (spec.G->dimension() != spec.eps.size()) {
    throw PreconditionError(std::string(op) + ": integrand dimension must equal 2q");
  }
}

void require_fbm_weights_match(std::span<const double> w, const SignVector& eps, bool& match) {
  match = w.size() == eps.size();
  for (std::size_t j = 0; match && j < w.size(); ++j) {
    match = eps[j].has_value() && double(*eps[j]) == w[j];
  }
}

Term sigma_term(const OscillatorySpec& spec, const OperatorSeq& sigma) {
  const auto summary = reduce(spec.eps, sigma);
  const std::size_t n = spec.eps.size();
  Term t;
  t.n = n;
  t.source.resize(n);
  t.phase.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    t.source[j] = int(j);
    if (summary.reduced.is_star(j)) continue;
    t.free.push_back(j);
    t.phase[j] = *summary.reduced[j];
  }
  std::vector<std::size_t> diff;
  for (std::size_t k = 0; k < sigma.q(); ++k) {
    const std::size_t pos = OperatorSeq::position(k);
    switch (sigma[k]) {
      case Op::PhiMinus:
        t.source[pos] = pos == 0 ? kFromZero : int(pos - 1);
        break;
      case Op::PhiPlus:
        t.source[pos] = pos + 1 == n ? kFromUpper : int(pos + 1);
        break;
      case Op::Del:
        diff.push_back(pos);
        break;
    }
  }
  t.weight = sigma.sign();
  if (auto closed = spec.G->reduced(spec.eps, sigma)) {
    t.g = std::move(closed);
  } else {
    auto G = spec.G;
    t.g = [G, diff](std::span<const double> u) { return G->partial(u, diff); };
  }
  return t;
}

std::complex<double> ipow_i_lambda(double lambda, int q) {
  std::complex<double> z = 1.0;
  for (int k = 0; k < q; ++k) z *= std::complex<double>(0.0, 2.0 * kPi * lambda);
  return z;
}

}  // namespace

std::function<double(std::span<const double>)> Integrand::reduced(const SignVector&,
                                                                  const OperatorSeq&) const {
  return {};
}

std::shared_ptr<ExpLinearIntegrand> ExpLinearIntegrand::stable(const SignVector& eps,
                                                               double alpha) {
  return std::make_shared<ExpLinearIntegrand>(stable_char_coeffs(eps.numeric(), alpha));
}

double ExpLinearIntegrand::value(std::span<const double> u) const {
  double s = 0.0;
  for (std::size_t j = 0; j < b_.size(); ++j) s += b_[j] * u[j];
  return std::exp(s);
}

double ExpLinearIntegrand::partial(std::span<const double> u,
                                   std::span<const std::size_t> diff) const {
  double f = value(u);
  for (std::size_t p : diff) f *= b_.at(p);
  return f;
}

FbmCharFunction::FbmCharFunction(std::vector<double> weights, double H, double c)
    : w_(std::move(weights)), H_(H), c_(c) {
  validate_hurst(H);
  if (!(c > 0.0)) throw DomainError("FbmCharFunction: scale must be positive");
}

std::shared_ptr<FbmCharFunction> FbmCharFunction::of(const SignVector& eps, double H, double c) {
  std::vector<double> w;
  for (int v : eps.numeric()) w.push_back(v);
  return std::make_shared<FbmCharFunction>(std::move(w), H, c);
}

double FbmCharFunction::value(std::span<const double> u) const {
  return std::exp(-c_ * fbm_variance(w_, u, H_));
}

double FbmCharFunction::partial(std::span<const double> u,
                                std::span<const std::size_t> diff) const {
  const double base = value(u);
  if (diff.empty()) return base;
  double total = 0.0;
  for (const auto& p : enumerate_P2(diff)) {
    double prod = std::pow(c_, double(p.blocks.size()));
    for (const auto& b : p.blocks) {
      prod *= b.size() == 1 ? -fbm_variance_partial(w_, u, H_, b[0])
                            : -fbm_variance_mixed(w_, u, H_, b[0], b[1]);
    }
    total += prod;
  }
  return total * base;
}

std::function<double(std::span<const double>)> FbmCharFunction::reduced(
    const SignVector& eps, const OperatorSeq& sigma) const {
  bool match = false;
  require_fbm_weights_match(w_, eps, match);
  if (!match) return {};
  auto ex = std::make_shared<const SymbolicExpansion>(faa_di_bruno(reduce(eps, sigma)));
  const double H = H_;
  const double c = c_;
  return [ex, H, c](std::span<const double> u) {
    const auto& idx = ex->context.nontrivial_indices;
    double times[64];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      times[i] = u[idx[i]];
      if (i > 0 && !(times[i] > times[i - 1])) return 0.0;
    }
    if (!idx.empty() && !(times[0] > 0.0)) return 0.0;
    return eval_expansion(*ex, H, std::span<const double>(times, idx.size()), c);
  };
}

IntegralResult integrate_I(const OscillatorySpec& spec, const SimplexQuadOptions& opt) {
  if (!spec.G) throw PreconditionError("integrate_I: integrand missing");
  const std::size_t n = spec.eps.size();
  Term t = identity_term(n);
  t.free.clear();
  for (std::size_t j = 0; j < n; ++j) {
    if (spec.eps.is_star(j)) continue;
    t.free.push_back(j);
    t.phase[j] = *spec.eps[j];
  }
  if (spec.G->dimension() != t.free.size()) {
    throw PreconditionError("integrate_I: integrand dimension must equal the non-* count");
  }
  auto G = spec.G;
  if (t.free.size() == n) {
    t.g = [G](std::span<const double> u) { return G->value(u); };
  } else {
    auto free = t.free;
    t.g = [G, free](std::span<const double> u) {
      double v[64];
      for (std::size_t i = 0; i < free.size(); ++i) v[i] = u[free[i]];
      return G->value(std::span<const double>(v, free.size()));
    };
  }
  return run_term(t, spec.lambda, spec.T, opt);
}

IntegralResult integrate_I_sigma(const OscillatorySpec& spec, const OperatorSeq& sigma,
                                 const SimplexQuadOptions& opt) {
  require_plain(spec, "integrate_I_sigma");
  return run_term(sigma_term(spec, sigma), spec.lambda, spec.T, opt);
}

namespace {

class HaltonSequence {
 public:
  explicit HaltonSequence(std::size_t dim) : dim_(dim) {}
  void next(std::span<double> out) {
    static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    ++index_;
    for (std::size_t d = 0; d < dim_; ++d) {
      double f = 1.0, r = 0.0;
      std::uint64_t i = index_;
      while (i > 0) {
        f /= kPrimes[d];
        r += f * double(i % kPrimes[d]);
        i /= kPrimes[d];
      }
      out[d] = r;
    }
  }

 private:
  std::size_t dim_;
  std::uint64_t index_ = 0;
};

}  // namespace

std::complex<double> integrate_I_sigma_qmc(const OscillatorySpec& spec, const OperatorSeq& sigma,
                                           std::size_t points, LowDiscrepancy kind) {
  require_plain(spec, "integrate_I_sigma_qmc");
  if (points == 0) throw DomainError("integrate_I_sigma_qmc: need at least one point");
  if (points > 10'000'000) throw ResourceError("integrate_I_sigma_qmc: at most 10^7 points");
  const Term t = sigma_term(spec, sigma);
  const std::size_t d = t.free.size();
  const double T = spec.T;
  const std::complex<double> boundary =
      std::exp(std::complex<double>(0.0, -2.0 * kPi * spec.lambda * t.upper_phase * T));
  std::vector<double> u(t.n, 0.0);
  for (std::size_t j = 0; j < t.n; ++j) {
    if (t.source[j] == kFromUpper) u[j] = T;
  }
  auto eval = [&](std::span<const double> x) -> std::complex<double> {
    for (std::size_t L = 0; L < d; ++L) u[t.free[L]] = T * x[L];
    for (std::size_t j = 0; j < t.n; ++j) {
      if (t.source[j] >= 0 && std::size_t(t.source[j]) != j) u[j] = u[std::size_t(t.source[j])];
    }
    double ph = 0.0;
    for (std::size_t j = 0; j < t.n; ++j) {
      if (t.source[j] >= 0) ph += t.phase[j] * u[j];
    }
    const double gv = t.g(u);
    if (!std::isfinite(gv)) return 0.0;
    return gv * std::exp(std::complex<double>(0.0, -2.0 * kPi * spec.lambda * ph));
  };
  if (d == 0) return t.weight * boundary * eval({});

  std::vector<double> x(d);
  std::complex<double> sum = 0.0;
  if (kind == LowDiscrepancy::Sobol) {
    boost::random::sobol qrng(d);
    qrng.discard(d);  // skip the origin
    const double scale = 1.0 / (double(qrng.max()) + 1.0);
    for (std::size_t i = 0; i < points; ++i) {
      for (std::size_t L = 0; L < d; ++L) x[L] = (double(qrng()) + 0.5) * scale;
      std::sort(x.begin(), x.end());
      sum += eval(x);
    }
  } else {
    HaltonSequence h(d);
    for (std::size_t i = 0; i < points; ++i) {
      h.next(x);
      std::sort(x.begin(), x.end());
      sum += eval(x);
    }
  }
  double vol = 1.0;
  for (std::size_t k = 1; k <= d; ++k) vol *= T / double(k);
  return t.weight * boundary * vol * sum / double(points);
}

double relative_residual(std::complex<double> lhs, std::complex<double> rhs) {
  return std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1e-14);
}

IdentityCheck verify_ibp_step(const OscillatorySpec& spec, std::size_t j,
                              const SimplexQuadOptions& opt) {
  require_plain(spec, "verify_ibp_step");
  if (spec.lambda == 0.0) throw DomainError("verify_ibp_step: lambda must be nonzero");
  const std::size_t n = spec.eps.size();
  if (j >= n) throw PreconditionError("verify_ibp_step: coordinate out of range");
  const int ej = *spec.eps[j];
  if (ej == 0) throw DomainError("verify_ibp_step: eps_j must be nonzero");

  IdentityCheck chk;
  chk.lhs = integrate_I(spec, opt).value;

  auto G = spec.G;
  auto make = [&](const SignVector& e) {
    Term t = identity_term(n);
    t.free.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (e.is_star(k)) continue;
      t.free.push_back(k);
      t.phase[k] = *e[k];
    }
    t.g = [G](std::span<const double> u) { return G->value(u); };
    return t;
  };

  Term minus = make(apply_phi(spec.eps, j, PhiSign::Minus));
  minus.source[j] = j == 0 ? kFromZero : int(j - 1);

  Term plus = make(apply_phi(spec.eps, j, PhiSign::Plus));
  if (j + 1 == n) {
    plus.source[j] = kFromUpper;
    plus.upper_phase = ej;
  } else {
    plus.source[j] = int(j + 1);
  }

  Term del = make(spec.eps);
  const std::vector<std::size_t> diff{j};
  del.g = [G, diff](std::span<const double> u) { return G->partial(u, diff); };

  const auto im = run_term(minus, spec.lambda, spec.T, opt).value;
  const auto ip = run_term(plus, spec.lambda, spec.T, opt).value;
  const auto id = run_term(del, spec.lambda, spec.T, opt).value;
  chk.rhs = (im - ip + id) / std::complex<double>(0.0, 2.0 * kPi * spec.lambda * ej);
  chk.residual = relative_residual(chk.lhs, chk.rhs);
  return chk;
}

IdentityCheck verify_ibp_full(const OscillatorySpec& spec, const SimplexQuadOptions& opt) {
  require_plain(spec, "verify_ibp_full");
  if (spec.lambda == 0.0) throw DomainError("verify_ibp_full: lambda must be nonzero");
  const int q = int(spec.eps.q());
  IdentityCheck chk;
  chk.lhs = integrate_I(spec, opt).value;
  std::complex<double> sum = 0.0;
  for (const auto& sigma : enumerate_Omega(q)) sum += integrate_I_sigma(spec, sigma, opt).value;
  double prod_eps = 1.0;
  for (int k = 0; k < q; ++k) prod_eps *= *spec.eps[OperatorSeq::position(std::size_t(k))];
  chk.rhs = sum / (ipow_i_lambda(spec.lambda, q) * prod_eps);
  chk.residual = relative_residual(chk.lhs, chk.rhs);
  return chk;
}

namespace {

// E exp(-2 pi i xi2 (X(t) - X(s))) as a function of r = |t - s|.
double increment_char(const ProcessParams& p, double xi2, double r) {
  if (p.kind() == ProcessKind::Fbm) {
    return std::exp(-p.char_exponent_scale() * xi2 * xi2 * std::pow(r, 2.0 * p.hurst()));
  }
  return std::exp(-r * std::pow(2.0 * kPi * std::abs(xi2), p.alpha()));
}

}  // namespace

MomentDecomposition verify_moment_decomposition(int q, double xi1, double xi2,
                                                const ProcessParams& params,
                                                const MonteCarloRequest& mc,
                                                const SimplexQuadOptions& opt) {
  if (q != 1) throw PreconditionError("verify_moment_decomposition: only q = 1 is supported");
  if (xi2 == 0.0) throw DomainError("verify_moment_decomposition: xi2 must be nonzero");
  const double index = params.self_similarity_index();
  const double T = std::pow(std::abs(xi2), 1.0 / index);
  const double lambda = xi1 / T;

  MomentDecomposition out;
  std::complex<double> sum = 0.0;
  for (const auto& eps : enumerate_A(q)) {
    std::shared_ptr<const Integrand> G;
    if (params.kind() == ProcessKind::Fbm) {
      G = FbmCharFunction::of(eps, params.hurst(), params.char_exponent_scale());
    } else {
      G = ExpLinearIntegrand::stable(eps, params.alpha());
    }
    sum += integrate_I(OscillatorySpec{lambda, T, eps, G}, opt).value;
  }
  out.simplex = std::real(sum) * std::pow(T, -2.0 * q);

  // Direct integral over the square, split along the diagonal.
  QuadratureOptions qo;
  qo.rel_tol = opt.rel_tol;
  qo.abs_tol = 1e-15;
  qo.max_subdivisions = opt.max_subdivisions;
  const double osc = std::abs(xi1);
  qo.initial_panels = std::size_t(std::min(64.0, 1.0 + std::ceil(osc)));
  auto integrand = [&](double t, double s) {
    return std::cos(2.0 * kPi * xi1 * (t - s)) * increment_char(params, xi2, std::abs(t - s));
  };
  auto outer = [&](double t) {
    auto below = integrate_adaptive([&](double s) { return integrand(t, s); }, 0.0, t, qo);
    auto above = integrate_adaptive([&](double s) { return integrand(t, s); }, t, 1.0, qo);
    return std::real(below.value + above.value);
  };
  out.direct = std::real(integrate_adaptive(outer, 0.0, 1.0, qo).value);
  out.quad_residual = relative_residual(out.simplex, out.direct);

  if (mc.n_paths > 0) {
    if (params.kind() == ProcessKind::Fbm && params.char_exponent_scale() != kStandardCharScale) {
      throw PreconditionError(
          "verify_moment_decomposition: Monte Carlo needs the standard characteristic scale");
    }
    MomentGridOptions go;
    go.workers = mc.workers;
    const auto grid =
        moment_grid(params, q, std::vector<FrequencyPoint>{{xi1, xi2}}, mc.n_paths, mc.seed, mc.M,
                    go);
    out.mc_mean = grid.estimates[0].mean;
    out.mc_stderr = grid.estimates[0].stderr_;
    out.mc_z = std::abs(*out.mc_mean - out.simplex) / std::max(*out.mc_stderr, 1e-300);
  }
  return out;
}

double BoundSweep::spread() const {
  if (max_ratio.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(max_ratio.begin(), max_ratio.end());
  return *hi / *lo;
}

namespace {

template <class MakeG>
BoundSweep sweep(int q, std::span<const double> Ts, double lambda, const SimplexQuadOptions& opt,
                 MakeG make_g) {
  if (q < 1 || q > 2) throw PreconditionError("bound sweep: q must be 1 or 2");
  BoundSweep s;
  const auto eps_list = enumerate_A(q);
  const auto sig_list = enumerate_Omega(q);
  for (double T : Ts) {
    double best = 0.0;
    for (const auto& eps : eps_list) {
      const OscillatorySpec spec{lambda, T, eps, make_g(eps)};
      for (const auto& sigma : sig_list) {
        best = std::max(best, std::abs(integrate_I_sigma(spec, sigma, opt).value));
      }
    }
    s.T.push_back(T);
    s.max_ratio.push_back(best / std::pow(T, double(q)));
  }
  return s;
}

}  // namespace

BoundSweep check_bound_stable(int q, std::span<const double> T, double lambda, double alpha,
                              const SimplexQuadOptions& opt) {
  auto s = sweep(q, T, lambda, opt, [&](const SignVector& eps) {
    return std::static_pointer_cast<const Integrand>(ExpLinearIntegrand::stable(eps, alpha));
  });
  s.bound = std::pow(2.0, q);
  for (double r : s.max_ratio) s.holds = s.holds && r <= s.bound * (1.0 + 1e-9);
  return s;
}

BoundSweep check_bound_fbm(int q, std::span<const double> T, double H, double lambda, double c,
                           const SimplexQuadOptions& opt) {
  auto s = sweep(q, T, lambda, opt, [&](const SignVector& eps) {
    return std::static_pointer_cast<const Integrand>(FbmCharFunction::of(eps, H, c));
  });
  s.bound = s.max_ratio.empty() ? 0.0 : *std::max_element(s.max_ratio.begin(), s.max_ratio.end());
  for (double r : s.max_ratio) s.holds = s.holds && std::isfinite(r);
  return s;
}

}  // namespace fgdim
