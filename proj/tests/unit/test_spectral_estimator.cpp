#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fgdim/errors.hpp"
#include "fgdim/spectral_estimator.hpp"

using namespace fgdim;

namespace {

constexpr double kPi = std::numbers::pi;

std::complex<double> naive_ft(const std::vector<double>& x, double xi1, double xi2) {
  const std::size_t M = x.size() - 1;
  std::complex<double> s = 0;
  for (std::size_t k = 0; k < M; ++k) {
    const double ph = -2 * kPi * (xi1 * double(k) / double(M) + xi2 * x[k]);
    s += std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return s / double(M);
}

// E|(1/M) sum_k e(-xi1 k/M - xi2 B(k/M))|^2 for fBm, exactly.
double discrete_second_moment(double H, std::size_t M, double xi1, double xi2) {
  double s = 0.0;
  for (std::size_t d = 0; d < M; ++d) {
    const double r = double(d) / double(M);
    const double term = std::cos(2 * kPi * xi1 * r) *
                        std::exp(-2 * kPi * kPi * xi2 * xi2 * std::pow(r, 2 * H));
    s += (d == 0 ? 1.0 : 2.0) * double(M - d) * term;
  }
  return s / double(M * M);
}

MomentGrid synthetic(double C, double slope, std::vector<double> r, double rel_err) {
  MomentGrid g;
  g.q = 1;
  for (double x : r) {
    g.points.push_back({0.0, x});
    const double m = C * std::pow(x, slope);
    g.estimates.push_back({m, rel_err * m, 1000});
  }
  return g;
}

}  // namespace

TEST(GraphFt, ElementaryValues) {
  const auto path = sample_fbm(0.6, 256, derive_stream(1, 0));
  EXPECT_EQ(graph_ft(path, {0.0, 0.0}).value, std::complex<double>(1.0, 0.0));
  EXPECT_EQ(image_ft(path, 0.0).value, std::complex<double>(1.0, 0.0));
  for (double n : {1.0, 3.0, -7.0, 100.0}) {
    EXPECT_LT(std::abs(graph_ft(path, {n, 0.0}).value), 1e-12) << n;
  }
  for (double xi1 : {-3.5, 0.0, 2.0, 40.0}) {
    for (double xi2 : {-6.0, 0.5, 3.0}) {
      const auto v = graph_ft(path, {xi1, xi2}).value;
      EXPECT_LE(std::abs(v), 1.0 + 1e-15);
      EXPECT_LT(std::abs(v - naive_ft(path.values, xi1, xi2)), 1e-12);
      const auto w = graph_ft(path, {-xi1, -xi2}).value;
      EXPECT_LT(std::abs(w - std::conj(v)), 1e-13);
    }
    EXPECT_EQ(image_ft(path, xi1).value, graph_ft(path, {0.0, xi1}).value);
  }
  EXPECT_THROW(graph_ft(path, {std::nan(""), 1.0}), DomainError);
  EXPECT_EQ(graph_ft_sum(path.values, {2.0, 1.0}), graph_ft(path, {2.0, 1.0}).value);
}

TEST(GraphFt, GateAnnotation) {
  const auto p = ProcessParams::fbm(0.5);
  const std::size_t M = 1024;
  EXPECT_NEAR(frequency_gate(p, M), std::pow(1024.0, 0.45), 1e-12);
  EXPECT_NEAR(frequency_gate(ProcessParams::stable(1.25), M, 0.2), std::pow(1024.0, 0.8 * 0.8),
              1e-9);
  const auto path = sample_fbm(0.5, M, derive_stream(2, 0));
  EXPECT_FALSE(graph_ft(path, {100.0, 10.0}).gate_warning);
  EXPECT_TRUE(graph_ft(path, {0.0, 30.0}).gate_warning);
  EXPECT_FALSE(graph_ft(path, {0.0, 30.0}, 0.0).gate_warning);
}

TEST(GraphFt, RiemannSumConvergesAtPathRate) {
  // Differences between grid M and 2M, with the coarse path a decimation of the fine one.
  const double H = 0.7;
  const FrequencyPoint xi{3.0, 2.0};
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t p = 0; p < 60; ++p) {
    const auto fine = sample_fbm(H, 4096, derive_stream(5, p));
    auto decimate = [&](std::size_t step) {
      std::vector<double> v;
      for (std::size_t k = 0; k < fine.values.size(); k += step) v.push_back(fine.values[k]);
      return v;
    };
    const auto a = graph_ft_sum(decimate(4), xi);
    const auto b = graph_ft_sum(decimate(2), xi);
    const auto c = graph_ft_sum(fine.values, xi);
    d1 += std::abs(a - b);
    d2 += std::abs(b - c);
  }
  const double ratio = d1 / d2;
  EXPECT_GT(ratio, 1.2);
  EXPECT_LT(ratio, 2.6);
}

TEST(Grids, LogGridAndRays) {
  const auto g = parse_log_grid("log:4:128:6");
  ASSERT_EQ(g.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(g[i], 4.0 * std::pow(2.0, double(i)), 1e-12);
  EXPECT_EQ(log_grid(3.0, 3.0, 1), std::vector<double>{3.0});
  for (const char* bad : {"lin:1:2:3", "log:1:2", "log:2:1:3", "log:0:1:3", "log:1:2:x", "log:1:2:0"}) {
    EXPECT_THROW(parse_log_grid(bad), DomainError) << bad;
  }
  const std::vector<double> r{2.0, 5.0};
  EXPECT_EQ(ray_points(Direction::Horizontal, r)[1], (FrequencyPoint{5.0, 1.0}));
  EXPECT_EQ(ray_points(Direction::Vertical, r)[0], (FrequencyPoint{0.0, 2.0}));
  EXPECT_EQ(ray_points(Direction::Diagonal, r)[1], (FrequencyPoint{5.0, 5.0}));
  EXPECT_THROW(ray_points(Direction::Custom, r), PreconditionError);
  for (Direction d : {Direction::Horizontal, Direction::Vertical, Direction::Diagonal, Direction::Custom}) {
    EXPECT_EQ(parse_direction(to_string(d)), d);
  }
  EXPECT_THROW(parse_direction("sideways"), DomainError);
}

TEST(Regions, Classification) {
  EXPECT_EQ(region_of({1.0, 0.0}), Region::Horizontal);
  EXPECT_EQ(region_of({0.0, 1.0}), Region::Vertical);
  EXPECT_EQ(region_of({1.0, 1.0}), Region::Horizontal);
  EXPECT_EQ(region_of({-2.0, 2.0}), Region::Horizontal);
  EXPECT_EQ(region_of({-1.0, 3.0}), Region::Vertical);
  EXPECT_EQ(region_of({-5.0, -3.0}), Region::Horizontal);
  EXPECT_THROW(region_of({0.0, 0.0}), DomainError);
}

TEST(MomentGrid, OriginAndDeterminism) {
  const auto p = ProcessParams::fbm(0.7);
  const std::vector<FrequencyPoint> pts{{0.0, 0.0}, {1.0, 2.0}, {0.0, 5.0}};
  MomentGridOptions one, three;
  one.workers = 1;
  three.workers = 3;
  const auto a = moment_grid(p, 2, pts, 150, 17, 256, one);
  const auto b = moment_grid(p, 2, pts, 150, 17, 256, three);
  EXPECT_EQ(a.estimates[0].mean, 1.0);
  EXPECT_EQ(a.estimates[0].stderr_, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(a.estimates[i].mean, b.estimates[i].mean);
    EXPECT_EQ(a.estimates[i].stderr_, b.estimates[i].stderr_);
    EXPECT_EQ(a.estimates[i].n_paths, 150u);
    EXPECT_GE(a.estimates[i].mean, 0.0);
  }
  const auto c = moment_grid(p, 2, pts, 150, 18, 256, one);
  EXPECT_NE(a.estimates[1].mean, c.estimates[1].mean);
}

TEST(MomentGrid, SamplesAndSummary) {
  const auto p = ProcessParams::stable(1.3);
  const std::vector<FrequencyPoint> pts{{2.0, 1.0}, {0.0, 3.0}};
  const std::size_t n = 120;
  const auto s = moment_samples(p, 1, pts, n, 4, 128);
  ASSERT_EQ(s.size(), n * 2);
  for (std::size_t j = 0; j < 2; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += s[i * 2 + j];
    m /= double(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += std::pow(s[i * 2 + j] - m, 2);
    const double se = std::sqrt(v / double(n - 1) / double(n));
    const auto g = summarize_samples(s, n, pts, 1, Direction::Custom);
    EXPECT_NEAR(g.estimates[j].mean, m, 1e-14);
    EXPECT_NEAR(g.estimates[j].stderr_, se, 1e-14);
  }
  // Path i of the grid is the path drawn from derive_stream(seed, i).
  const auto path = sample_stable(1.3, 128, derive_stream(4, 7));
  EXPECT_NEAR(s[7 * 2 + 1], std::norm(graph_ft(path, pts[1]).value), 1e-15);
  EXPECT_THROW(summarize_samples(s, n + 1, pts, 1, Direction::Custom), PreconditionError);
}

TEST(MomentGrid, Preconditions) {
  const auto p = ProcessParams::fbm(0.5);
  const std::vector<FrequencyPoint> pts{{0.0, 1.0}};
  EXPECT_THROW(moment_grid(p, 1, pts, 99, 1, 64), DomainError);
  EXPECT_THROW(moment_grid(p, 5, pts, 100, 1, 64), DomainError);
  EXPECT_THROW(moment_grid(p, 0, pts, 100, 1, 64), DomainError);
  EXPECT_THROW(moment_grid(p, 1, pts, 100, 1, 100), DomainError);
  EXPECT_THROW(moment_grid(p, 1, pts, kMaxMomentPaths + 1, 1, 64), ResourceError);
  const std::vector<FrequencyPoint> inf{{0.0, INFINITY}};
  EXPECT_THROW(moment_grid(p, 1, inf, 100, 1, 64), DomainError);
}

TEST(MomentGrid, MatchesExactDiscreteSecondMoment) {
  const std::size_t M = 256, n = 3000;
  for (double H : {0.4, 0.75}) {
    const std::vector<FrequencyPoint> pts{{0.0, 1.0}, {0.0, 3.0}, {2.0, 1.0}, {5.0, 0.5}};
    const auto g = moment_grid(ProcessParams::fbm(H), 1, pts, n, 31, M);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double want = discrete_second_moment(H, M, pts[i].xi1, pts[i].xi2);
      EXPECT_LT(std::abs(g.estimates[i].mean - want), 3.5 * g.estimates[i].stderr_)
          << "H=" << H << " point " << i << " want " << want << " got " << g.estimates[i].mean;
    }
  }
}

TEST(MomentGrid, ImageMomentMatchesContinuumQuadrature) {
  // Continuum oracle 2 int_0^1 (1-r) exp(-2 pi^2 xi^2 r^{2H}) dr against a fine grid.
  const double H = 0.6;
  const std::vector<FrequencyPoint> pts{{0.0, 1.0}, {0.0, 2.0}};
  const auto g = moment_grid(ProcessParams::fbm(H), 1, pts, 3000, 9, 2048);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double xi = pts[i].xi2;
    const std::size_t N = 200000;
    double s = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const double r = (double(k) + 0.5) / double(N);
      s += 2 * (1 - r) * std::exp(-2 * kPi * kPi * xi * xi * std::pow(r, 2 * H));
    }
    s /= double(N);
    EXPECT_LT(std::abs(g.estimates[i].mean - s), 3.5 * g.estimates[i].stderr_ + 2e-3) << xi;
  }
}

TEST(MomentGrid, SymmetryAndImageDomination) {
  const auto p = ProcessParams::fbm(0.7);
  std::vector<FrequencyPoint> pts;
  for (double x2 : {1.5, 4.0}) {
    pts.push_back({0.0, x2});
    for (double x1 : {1.0, 4.0, 12.0}) {
      pts.push_back({x1, x2});
      pts.push_back({-x1, -x2});
    }
  }
  for (int q : {1, 2}) {
    const auto g = moment_grid(p, q, pts, 1500, 12, 512);
    for (std::size_t b = 0; b < pts.size(); b += 7) {
      const auto& img = g.estimates[b];
      for (std::size_t k = 1; k < 7; k += 2) {
        const auto& plus = g.estimates[b + k];
        const auto& minus = g.estimates[b + k + 1];
        const double se = std::hypot(plus.stderr_, minus.stderr_);
        EXPECT_LT(std::abs(plus.mean - minus.mean), 3.5 * se);
        EXPECT_LE(plus.mean, img.mean + 3 * std::hypot(plus.stderr_, img.stderr_));
        EXPECT_LE(minus.mean, img.mean + 3 * std::hypot(minus.stderr_, img.stderr_));
      }
    }
  }
}

TEST(MomentGrid, BrownianVerticalDecreases) {
  const std::vector<double> r{4, 8, 16, 32, 64, 128};
  const auto pts = ray_points(Direction::Vertical, r);
  const auto g = moment_grid(ProcessParams::fbm(0.5), 1, pts, 1000, 3, 4096);
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_LT(g.estimates[i].mean,
              g.estimates[i - 1].mean + 2 * std::hypot(g.estimates[i].stderr_, g.estimates[i - 1].stderr_));
  }
}

TEST(FitDecay, ExactPowerLaws) {
  const std::vector<double> r{1, 2, 4, 8, 16, 32, 64};
  for (double slope : {-2.0, -0.37, -4.5}) {
    const auto f = fit_decay(synthetic(3.0, slope, r, 0.01));
    EXPECT_NEAR(f.slope, slope, 1e-10);
    EXPECT_NEAR(f.intercept, std::log(3.0), 1e-10);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(f.slope_stderr, 0.0, 1e-10);
    EXPECT_EQ(f.n_points, 5u);
    EXPECT_DOUBLE_EQ(f.fit_range.first, 4.0);
    EXPECT_DOUBLE_EQ(f.fit_range.second, 64.0);
    EXPECT_TRUE(f.weighted);
  }
  const auto u = fit_decay(synthetic(1.0, -2.0, r, 0.0));
  EXPECT_FALSE(u.weighted);
  EXPECT_NEAR(u.slope, -2.0, 1e-12);
}

TEST(FitDecay, WeightedLeastSquaresOracle) {
  const std::vector<double> r{1, 2, 3, 5, 8, 13, 21};
  auto g = synthetic(2.0, -1.5, r, 0.05);
  const double noise[] = {0.0, 0.0, 0.03, -0.02, 0.04, -0.05, 0.01};
  for (std::size_t i = 0; i < r.size(); ++i) {
    g.estimates[i].mean *= std::exp(noise[i]);
    g.estimates[i].stderr_ *= 1.0 + 0.3 * double(i);
  }
  FitOptions opt;
  opt.skip_smallest = 0;
  const auto f = fit_decay(g, opt);
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double w = std::pow(g.estimates[i].mean / g.estimates[i].stderr_, 2);
    sw += w;
    sx += w * std::log(r[i]);
    sy += w * std::log(g.estimates[i].mean);
  }
  const double xb = sx / sw, yb = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double w = std::pow(g.estimates[i].mean / g.estimates[i].stderr_, 2);
    sxx += w * std::pow(std::log(r[i]) - xb, 2);
    sxy += w * (std::log(r[i]) - xb) * (std::log(g.estimates[i].mean) - yb);
  }
  EXPECT_NEAR(f.slope, sxy / sxx, 1e-12);
  EXPECT_NEAR(f.intercept, yb - f.slope * xb, 1e-12);
}

TEST(FitDecay, Errors) {
  const std::vector<double> r{1, 2, 4, 8, 16};
  EXPECT_THROW(fit_decay(synthetic(1.0, -1.0, r, 0.01)), InsufficientSignalError);
  auto noisy = synthetic(1.0, -1.0, {1, 2, 4, 8, 16, 32, 64}, 0.01);
  noisy.estimates[4].stderr_ = noisy.estimates[4].mean;
  EXPECT_THROW(fit_decay(noisy), InsufficientSignalError);
  auto unsorted = synthetic(1.0, -1.0, {1, 2, 4, 8, 16, 32, 64}, 0.01);
  std::swap(unsorted.points[5], unsorted.points[6]);
  std::swap(unsorted.estimates[5], unsorted.estimates[6]);
  EXPECT_NO_THROW(fit_decay(unsorted));
  auto dup = synthetic(1.0, -1.0, {1, 2, 4, 8, 8, 32, 64}, 0.01);
  EXPECT_THROW(fit_decay(dup), PreconditionError);
  auto mismatch = synthetic(1.0, -1.0, {1, 2, 4, 8, 16, 32}, 0.01);
  mismatch.estimates.pop_back();
  EXPECT_THROW(fit_decay(mismatch), PreconditionError);
}

TEST(FourierDim, StructureAndBudget) {
  FourierDimOptions opt;
  opt.M = 512;
  opt.n_freqs = 6;
  opt.r_min = 2;
  opt.r_max = 16;
  opt.bootstrap = 50;
  opt.seed = 3;
  const std::vector<int> qs{1};
  const auto e = fourier_dim_lower(ProcessParams::fbm(0.5), qs, 2 * 6 * 400, opt);
  EXPECT_EQ(e.paths_per_fit, 400u);
  EXPECT_DOUBLE_EQ(e.estimate, std::min(e.gamma_horizontal, e.gamma_vertical));
  EXPECT_LE(e.ci_lo, e.ci_hi);
  EXPECT_GT(e.estimate, 0.0);
  const auto again = fourier_dim_lower(ProcessParams::fbm(0.5), qs, 2 * 6 * 400, opt);
  EXPECT_EQ(again.estimate, e.estimate);
  EXPECT_EQ(again.ci_lo, e.ci_lo);
  const std::vector<int> none;
  EXPECT_THROW(fourier_dim_lower(ProcessParams::fbm(0.5), none, 10000, opt), DomainError);
  EXPECT_THROW(fourier_dim_lower(ProcessParams::fbm(0.5), qs, 100, opt), ResourceError);
}
