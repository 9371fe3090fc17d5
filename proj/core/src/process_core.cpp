#include "fgdim/process_core.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <string>

#include "fgdim/errors.hpp"

namespace fgdim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void require_zero_sum(const CoeffVector& c, const char* op) {
  if (!c.zero_sum()) {
    throw DomainError(std::string(op) + ": coefficients must sum to zero (sum = " +
                      std::to_string(c.sum()) + ")");
  }
}

void require_index(std::size_t k, std::size_t n, const char* op) {
  if (k >= n) {
    throw PreconditionError(std::string(op) + ": index " + std::to_string(k) +
                            " out of range for length " + std::to_string(n));
  }
}

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

void validate_hurst(double H) {
  if (!(H > 0.0 && H < 1.0)) {
    std::ostringstream os;
    os << "hurst must lie in (0,1), got " << H;
    throw DomainError(os.str());
  }
}

ProcessParams ProcessParams::fbm(double hurst, double char_exponent_scale) {
  validate_hurst(hurst);
  if (!(char_exponent_scale > 0.0) || !std::isfinite(char_exponent_scale)) {
    throw DomainError("char_exponent_scale must be positive and finite");
  }
  return ProcessParams(ProcessKind::Fbm, hurst, 0.0, char_exponent_scale);
}

ProcessParams ProcessParams::stable(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    std::ostringstream os;
    os << "alpha must lie in (0,2], got " << alpha;
    throw DomainError(os.str());
  }
  return ProcessParams(ProcessKind::Stable, 0.0, alpha, std::pow(kTwoPi, alpha));
}

double ProcessParams::hurst() const {
  if (kind_ != ProcessKind::Fbm) throw PreconditionError("hurst is only defined for fbm");
  return hurst_;
}

double ProcessParams::alpha() const {
  if (kind_ != ProcessKind::Stable) throw PreconditionError("alpha is only defined for stable");
  return alpha_;
}

double ProcessParams::self_similarity_index() const noexcept {
  return kind_ == ProcessKind::Fbm ? hurst_ : 1.0 / alpha_;
}

CoeffVector::CoeffVector(std::vector<int> coeffs, std::vector<double> times)
    : coeffs_(std::move(coeffs)), times_(std::move(times)) {
  if (coeffs_.empty()) throw DomainError("CoeffVector: empty coefficient list");
  if (coeffs_.size() != times_.size()) {
    throw DomainError("CoeffVector: coefficients and times differ in length");
  }
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) throw DomainError("CoeffVector: zero coefficient at " + std::to_string(i));
    if (!std::isfinite(times_[i])) throw DomainError("CoeffVector: non-finite time");
    if (i == 0 ? times_[0] < 0.0 : !(times_[i] > times_[i - 1])) {
      throw DomainError("CoeffVector: times must be nonnegative and strictly increasing");
    }
  }
}

int CoeffVector::sum() const noexcept { return std::accumulate(coeffs_.begin(), coeffs_.end(), 0); }

int CoeffVector::max_abs() const noexcept {
  int m = 0;
  for (int a : coeffs_) m = std::max(m, std::abs(a));
  return m;
}

CoeffVector merge_coincident(std::span<const int> coeffs, std::span<const double> times,
                             double tol) {
  if (coeffs.size() != times.size()) throw DomainError("merge_coincident: length mismatch");
  std::vector<std::size_t> order(coeffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<int> a;
  std::vector<double> t;
  for (std::size_t idx : order) {
    if (!t.empty() && times[idx] - t.back() <= tol) {
      a.back() += coeffs[idx];
    } else {
      a.push_back(coeffs[idx]);
      t.push_back(times[idx]);
    }
  }
  std::vector<int> a2;
  std::vector<double> t2;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != 0) {
      a2.push_back(a[i]);
      t2.push_back(t[i]);
    }
  }
  return CoeffVector(std::move(a2), std::move(t2));
}

double cov_fbm(double s, double t, double H) {
  validate_hurst(H);
  if (s < 0.0 || t < 0.0) throw DomainError("cov_fbm: times must be nonnegative");
  const double h2 = 2.0 * H;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double var_linear_comb(const CoeffVector& c, double H) {
  validate_hurst(H);
  CompensatedSum acc;
  const auto a = c.coeffs();
  const auto t = c.times();
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc.add(double(a[i]) * a[i] * cov_fbm(t[i], t[i], H));
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      acc.add(2.0 * a[i] * a[j] * cov_fbm(t[i], t[j], H));
    }
  }
  return std::max(0.0, acc.value());
}

double g_a(const CoeffVector& c, double H) { return -var_linear_comb(c, H); }

double g_a_zero_sum(const CoeffVector& c, double H) {
  validate_hurst(H);
  require_zero_sum(c, "g_a_zero_sum");
  const auto a = c.coeffs();
  const auto s = c.times();
  CompensatedSum acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      acc.add(double(a[i]) * a[j] * std::pow(s[j] - s[i], 2.0 * H));
    }
  }
  return acc.value();
}

double dg(const CoeffVector& c, double H, std::size_t k) {
  validate_hurst(H);
  require_zero_sum(c, "dg");
  require_index(k, c.size(), "dg");
  const auto a = c.coeffs();
  const auto s = c.times();
  const double p = 2.0 * H - 1.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < k; ++j) acc += a[j] * std::pow(s[k] - s[j], p);
  for (std::size_t j = k + 1; j < a.size(); ++j) acc -= a[j] * std::pow(s[j] - s[k], p);
  return 2.0 * H * a[k] * acc;
}

double d2g(const CoeffVector& c, double H, std::size_t i, std::size_t j) {
  validate_hurst(H);
  require_zero_sum(c, "d2g");
  require_index(j, c.size(), "d2g");
  if (i >= j) throw PreconditionError("d2g: requires i < j");
  const double gap = c.time(j) - c.time(i);
  return -2.0 * H * (2.0 * H - 1.0) * c.coeff(i) * c.coeff(j) * std::pow(gap, 2.0 * H - 2.0);
}

double mixed_partial_g(const CoeffVector& c, double H, std::span<const std::size_t> idx) {
  std::vector<std::size_t> sorted(idx.begin(), idx.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw PreconditionError("mixed_partial_g: indices must be distinct");
  }
  for (std::size_t k : sorted) require_index(k, c.size(), "mixed_partial_g");
  switch (sorted.size()) {
    case 0:
      return g_a_zero_sum(c, H);
    case 1:
      return dg(c, H, sorted[0]);
    case 2:
      return d2g(c, H, sorted[0], sorted[1]);
    default:
      return 0.0;
  }
}

double fbm_variance(std::span<const double> coeffs, std::span<const double> times, double H) {
  if (coeffs.size() != times.size()) throw DomainError("fbm_variance: length mismatch");
  const double h2 = 2.0 * H;
  double total = 0.0;
  CompensatedSum acc;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    total += coeffs[i];
    for (std::size_t j = i + 1; j < coeffs.size(); ++j) {
      const double d = std::abs(times[i] - times[j]);
      if (d > 0.0) acc.add(-coeffs[i] * coeffs[j] * std::pow(d, h2));
    }
  }
  if (total != 0.0) {
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      if (times[j] > 0.0) acc.add(total * coeffs[j] * std::pow(times[j], h2));
    }
  }
  return acc.value();
}

double fbm_variance_partial(std::span<const double> coeffs, std::span<const double> times,
                            double H, std::size_t k) {
  if (coeffs.size() != times.size()) throw DomainError("fbm_variance_partial: length mismatch");
  require_index(k, coeffs.size(), "fbm_variance_partial");
  const double p = 2.0 * H - 1.0;
  double total = 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    total += coeffs[j];
    if (j == k) continue;
    const double d = times[k] - times[j];
    if (d != 0.0) acc -= coeffs[j] * sgn(d) * std::pow(std::abs(d), p);
  }
  if (total != 0.0) acc += total * std::pow(times[k], p);
  return 2.0 * H * coeffs[k] * acc;
}

double fbm_variance_mixed(std::span<const double> coeffs, std::span<const double> times,
                          double H, std::size_t i, std::size_t j) {
  if (coeffs.size() != times.size()) throw DomainError("fbm_variance_mixed: length mismatch");
  require_index(i, coeffs.size(), "fbm_variance_mixed");
  require_index(j, coeffs.size(), "fbm_variance_mixed");
  if (i == j) throw PreconditionError("fbm_variance_mixed: requires i != j");
  const double d = std::abs(times[i] - times[j]);
  return 2.0 * H * (2.0 * H - 1.0) * coeffs[i] * coeffs[j] * std::pow(d, 2.0 * H - 2.0);
}

std::vector<double> stable_char_coeffs(std::span<const int> eps, double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("stable_char_coeffs: alpha not in (0,2]");
  if (eps.empty()) throw DomainError("stable_char_coeffs: empty sign vector");
  int total = 0;
  for (int e : eps) {
    if (e != 1 && e != -1) throw DomainError("stable_char_coeffs: entries must be +1 or -1");
    total += e;
  }
  if (total != 0) throw DomainError("stable_char_coeffs: entries must sum to zero");
  const double scale = std::pow(kTwoPi, alpha);
  const std::size_t n = eps.size();
  std::vector<double> b(n);
  int tail_next = 0;
  for (std::size_t j = n; j-- > 0;) {
    const int tail = tail_next + eps[j];
    b[j] = -scale * (std::pow(std::abs(tail), alpha) - std::pow(std::abs(tail_next), alpha));
    tail_next = tail;
  }
  return b;
}

ZeroSumStructure zero_sum_structure(std::span<const int> a) {
  ZeroSumStructure z;
  std::vector<int> tail(a.size() + 1, 0);
  for (std::size_t i = a.size(); i-- > 0;) tail[i] = tail[i + 1] + a[i];
  for (std::size_t i = 0; i < a.size(); ++i) {
    (tail[i] == 0 ? z.zero_sum_indices : z.jstar).push_back(i);
  }
  return z;
}

namespace {

struct Factorization {
  Eigen::MatrixXd L;
  bool jitter = false;
};

Eigen::MatrixXd fbm_cov_matrix(std::span<const double> t, double H) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      C(i, j) = C(j, i) = cov_fbm(t[i], t[j], H);
    }
  }
  return C;
}

Factorization factor_spd(Eigen::MatrixXd C) {
  Eigen::LLT<Eigen::MatrixXd> llt(C);
  Factorization f;
  if (llt.info() == Eigen::Success) {
    f.L = llt.matrixL();
    bool ok = true;
    for (Eigen::Index i = 0; i < C.rows(); ++i) ok = ok && f.L(i, i) > 0.0;
    if (ok) return f;
  }
  C.diagonal().array() += 1e-12 * C.trace();
  llt.compute(C);
  if (llt.info() != Eigen::Success) {
    throw NumericError("covariance matrix is not positive definite (coincident times?)");
  }
  f.L = llt.matrixL();
  f.jitter = true;
  return f;
}

}  // namespace

bool LndCertificate::berman_holds(double rel_tol) const {
  return variance >= berman_rhs * (1.0 - rel_tol);
}

LndCertificate lnd_certificate(const CoeffVector& c, double H) {
  validate_hurst(H);
  const std::size_t n = c.size();
  if (n > 12) throw ResourceError("lnd_certificate: at most 12 times supported");
  const auto t = c.times();
  if (!(t[0] > 0.0)) throw DomainError("lnd_certificate: times must be positive");

  const Factorization f = factor_spd(fbm_cov_matrix(t, H));
  LndCertificate cert;
  cert.jitter_applied = f.jitter;
  cert.det_cov = 1.0;
  cert.conditional_variances.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double l = f.L(Eigen::Index(j), Eigen::Index(j));
    cert.conditional_variances[j] = l * l;
    cert.det_cov *= l * l;
  }

  const auto a = c.coeffs();
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) tail[j] = tail[j + 1] + a[j];

  double prod_sigma2 = 1.0;
  double weighted = 0.0;
  double kappa = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double gap = t[j] - (j == 0 ? 0.0 : t[j - 1]);
    const double s2 = std::pow(gap, 2.0 * H);
    prod_sigma2 *= s2;
    weighted += tail[j] * tail[j] * s2;
    if (j > 0) kappa = std::min(kappa, cert.conditional_variances[j] / s2);
  }
  cert.min_lnd_ratio = kappa;
  cert.berman_rhs = cert.det_cov / (double(n) * prod_sigma2) * weighted;
  cert.lower_bound = std::pow(kappa, double(n - 1)) / double(n) * weighted;
  cert.variance = var_linear_comb(c, H);
  return cert;
}

double conditional_variance(double t, std::span<const double> given, double H) {
  validate_hurst(H);
  if (t < 0.0) throw DomainError("conditional_variance: negative time");
  const double v = cov_fbm(t, t, H);
  if (given.empty()) return v;
  const Factorization f = factor_spd(fbm_cov_matrix(given, H));
  Eigen::VectorXd k(Eigen::Index(given.size()));
  for (std::size_t i = 0; i < given.size(); ++i) k(Eigen::Index(i)) = cov_fbm(t, given[i], H);
  const Eigen::VectorXd w = f.L.triangularView<Eigen::Lower>().solve(k);
  return std::max(0.0, v - w.squaredNorm());
}

namespace {

void require_bound_domain(const CoeffVector& c, double H, const char* op) {
  if (!(H > 0.5 && H < 1.0)) {
    throw DomainError(std::string(op) + ": requires H in (1/2, 1)");
  }
  require_zero_sum(c, op);
  if (!(c.time(0) > 0.0)) throw DomainError(std::string(op) + ": times must be positive");
}

}  // namespace

BoundReport dg_bound_check(const CoeffVector& c, double H, std::size_t k) {
  require_bound_domain(c, H, "dg_bound_check");
  require_index(k, c.size(), "dg_bound_check");
  const auto z = zero_sum_structure(c.coeffs());
  const double amax = c.max_abs();
  double sum = 0.0;
  for (std::size_t i : z.jstar) {
    const double prev = i == 0 ? 0.0 : c.time(i - 1);
    sum += std::pow(c.time(i) - prev, 2.0 * H - 1.0);
  }
  BoundReport r;
  r.lhs = std::abs(dg(c, H, k));
  r.rhs = 4.0 * H * double(c.size()) * amax * amax * sum;
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

PairProductReport ddg_product_bound_check(
    const CoeffVector& c, double H, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  require_bound_domain(c, H, "ddg_product_bound_check");
  std::vector<std::size_t> support;
  std::vector<std::pair<std::size_t, std::size_t>> ordered;
  for (auto [x, y] : pairs) {
    if (x == y) throw PreconditionError("ddg_product_bound_check: degenerate pair");
    require_index(std::max(x, y), c.size(), "ddg_product_bound_check");
    ordered.emplace_back(std::min(x, y), std::max(x, y));
    support.push_back(x);
    support.push_back(y);
  }
  std::sort(support.begin(), support.end());
  for (std::size_t i = 1; i < support.size(); ++i) {
    if (support[i] - support[i - 1] < 2) {
      throw PreconditionError("ddg_product_bound_check: positions must be separated by >= 2");
    }
  }
  std::sort(ordered.begin(), ordered.end());

  const auto z = zero_sum_structure(c.coeffs());
  std::vector<bool> in_jstar(c.size(), false);
  for (std::size_t i : z.jstar) in_jstar[i] = true;

  PairProductReport rep;
  const double amax = c.max_abs();
  double lhs = 1.0;
  double rhs = 1.0;
  for (auto [x, y] : ordered) {
    lhs *= std::abs(d2g(c, H, x, y));
    const auto next = std::upper_bound(support.begin(), support.end(), x);
    std::size_t tau = c.size();
    for (std::size_t i = x + 1; i <= *next; ++i) {
      if (in_jstar[i]) {
        tau = i;
        break;
      }
    }
    if (tau == c.size()) throw InternalError("ddg_product_bound_check: no witness index found");
    rep.tau.push_back(tau);
    rhs *= 2.0 * amax * amax * std::pow(c.time(tau) - c.time(tau - 1), 2.0 * H - 2.0);
  }
  rep.bound.lhs = lhs;
  rep.bound.rhs = rhs;
  rep.bound.holds = lhs <= rhs * (1.0 + 1e-12);
  return rep;
}

}  // namespace fgdim
