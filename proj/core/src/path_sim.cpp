#include "fgdim/path_sim.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fgdim/errors.hpp"
#include "fgdim/log.hpp"

namespace fgdim {

namespace {

// FFTW planning is not thread safe; execution of an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void validate_grid(std::size_t M) {
  if (M < 2 || M > kMaxGridSize || !is_power_of_two(M)) {
    throw DomainError("grid size M must be a power of two in [2, 2^20], got " +
                      std::to_string(M));
  }
}

double fgn_autocovariance(double H, double k) {
  const double h2 = 2.0 * H;
  k = std::abs(k);
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

struct FbmSampler::Impl {
  // Circulant: sqrt(lambda_k / N) for the length-N = 2M embedding.
  std::vector<double> amp;
  fftw_plan plan = nullptr;
  // Dense: lower Cholesky factor of the increment covariance.
  Eigen::MatrixXd chol;

  ~Impl() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

FbmSampler::FbmSampler(double H, std::size_t M, FbmMethod method)
    : H_(H), M_(M), method_(method), impl_(std::make_unique<Impl>()) {
  validate_hurst(H);
  validate_grid(M);
  const double scale = std::pow(1.0 / double(M), 2.0 * H);

  if (method_ != FbmMethod::Dense) {
    const std::size_t N = 2 * M;
    fftw_complex* buf = fftw_alloc_complex(N);
    for (std::size_t j = 0; j < N; ++j) {
      const double lag = j <= M ? double(j) : double(N - j);
      buf[j][0] = scale * fgn_autocovariance(H, lag);
      buf[j][1] = 0.0;
    }
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_plan p = fftw_plan_dft_1d(int(N), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
      fftw_execute(p);
      fftw_destroy_plan(p);
    }
    double max_eig = 0.0;
    min_eig_ = buf[0][0];
    for (std::size_t k = 0; k < N; ++k) {
      max_eig = std::max(max_eig, buf[k][0]);
      min_eig_ = std::min(min_eig_, buf[k][0]);
    }
    const bool bad = min_eig_ < -1e-10 * max_eig;
    if (bad && method_ == FbmMethod::Circulant) {
      fftw_free(buf);
      throw NumericError("circulant embedding has negative eigenvalues");
    }
    if (bad) {
      if (M > kMaxDenseGridSize) {
        fftw_free(buf);
        throw NumericError("circulant embedding failed and M exceeds the dense fallback limit");
      }
      log_message(LogLevel::Warning,
                  "circulant embedding not nonnegative; using dense factorization");
      method_ = FbmMethod::Dense;
    } else {
      impl_->amp.resize(N);
      for (std::size_t k = 0; k < N; ++k) {
        double lam = buf[k][0];
        if (lam < 0.0) {
          lam = 0.0;
          ++clipped_;
        }
        impl_->amp[k] = std::sqrt(lam / double(N));
      }
      if (clipped_ > 0) {
        log_message(LogLevel::Warning, "clipped " + std::to_string(clipped_) +
                                           " small negative embedding eigenvalues");
      }
      std::lock_guard lock(fftw_planner_mutex());
      impl_->plan = fftw_plan_dft_1d(int(N), buf, buf, FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
      method_ = FbmMethod::Circulant;
    }
    fftw_free(buf);
  }

  if (method_ == FbmMethod::Dense) {
    if (M > kMaxDenseGridSize) throw ResourceError("dense fBm sampler limited to M <= 2^10");
    const auto n = Eigen::Index(M);
    Eigen::MatrixXd C(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) C(i, j) = scale * fgn_autocovariance(H, double(i - j));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success) throw NumericError("fGn covariance not positive definite");
    impl_->chol = llt.matrixL();
  }
}

FbmSampler::~FbmSampler() = default;
FbmSampler::FbmSampler(FbmSampler&&) noexcept = default;
FbmSampler& FbmSampler::operator=(FbmSampler&&) noexcept = default;

void FbmSampler::sample_into(Generator& gen, std::span<double> out) const {
  if (out.size() != M_ + 1) throw PreconditionError("FbmSampler: output must hold M+1 values");
  out[0] = 0.0;
  if (method_ == FbmMethod::Circulant) {
    const std::size_t N = 2 * M_;
    std::vector<std::complex<double>> w(N);
    for (std::size_t k = 0; k < N; ++k) {
      const double re = gen.normal();
      const double im = gen.normal();
      w[k] = impl_->amp[k] * std::complex<double>(re, im);
    }
    auto* p = reinterpret_cast<fftw_complex*>(w.data());
    fftw_execute_dft(impl_->plan, p, p);
    double x = 0.0;
    for (std::size_t k = 0; k < M_; ++k) {
      x += w[k].real();
      out[k + 1] = x;
    }
  } else {
    const auto n = Eigen::Index(M_);
    Eigen::VectorXd z(n);
    for (Eigen::Index k = 0; k < n; ++k) z(k) = gen.normal();
    const Eigen::VectorXd inc = impl_->chol.triangularView<Eigen::Lower>() * z;
    double x = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      x += inc(k);
      out[std::size_t(k) + 1] = x;
    }
  }
}

PathSample FbmSampler::sample(const RngStream& rng) const {
  PathSample p{std::vector<double>(M_ + 1), ProcessParams::fbm(H_), rng.seed, rng.path_index,
               rng.stream_id};
  Generator gen(rng);
  sample_into(gen, p.values);
  return p;
}

namespace {

std::shared_ptr<const FbmSampler> cached_sampler(double H, std::size_t M) {
  static std::mutex m;
  static std::map<std::pair<double, std::size_t>, std::shared_ptr<const FbmSampler>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[{H, M}];
  if (!slot) {
    if (cache.size() > 16) {
      cache.clear();
      auto s = std::make_shared<const FbmSampler>(H, M);
      cache[{H, M}] = s;
      return s;
    }
    slot = std::make_shared<const FbmSampler>(H, M);
  }
  return slot;
}

}  // namespace

PathSample sample_fbm(double H, std::size_t M, const RngStream& rng) {
  validate_hurst(H);
  validate_grid(M);
  return cached_sampler(H, M)->sample(rng);
}

double stable_variate(double alpha, Generator& gen) {
  const double V = std::numbers::pi * (gen.uniform() - 0.5);
  if (alpha == 1.0) return std::tan(V);
  const double W = gen.exponential();
  return std::sin(alpha * V) / std::pow(std::cos(V), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * V) / W, (1.0 - alpha) / alpha);
}

void sample_stable_into(double alpha, Generator& gen, std::span<double> out) {
  if (out.size() < 2) throw PreconditionError("sample_stable_into: output too short");
  const double scale = std::pow(1.0 / double(out.size() - 1), 1.0 / alpha);
  out[0] = 0.0;
  double x = 0.0;
  for (std::size_t k = 1; k < out.size(); ++k) {
    x += scale * stable_variate(alpha, gen);
    out[k] = x;
  }
}

PathSample sample_stable(double alpha, std::size_t M, const RngStream& rng) {
  const auto params = ProcessParams::stable(alpha);
  validate_grid(M);
  PathSample p{std::vector<double>(M + 1), params, rng.seed, rng.path_index, rng.stream_id};
  Generator gen(rng);
  sample_stable_into(alpha, gen, p.values);
  return p;
}

PathSample sample_path(const ProcessParams& params, std::size_t M, const RngStream& rng) {
  if (params.kind() == ProcessKind::Fbm) {
    PathSample p = sample_fbm(params.hurst(), M, rng);
    p.params = params;
    return p;
  }
  return sample_stable(params.alpha(), M, rng);
}

void write_paths_csv(std::ostream& os, std::span<const PathSample> paths) {
  std::ostringstream line;
  line << std::setprecision(17);
  os << "path_index,k,t,X\n";
  for (const auto& p : paths) {
    const std::size_t M = p.M();
    for (std::size_t k = 0; k <= M; ++k) {
      line.str("");
      line << p.path_index << ',' << k << ',' << double(k) / double(M) << ',' << p.values[k]
           << '\n';
      os << line.str();
    }
  }
}

}  // namespace fgdim
