#include "verify_suites.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "fgdim/combinatorics.hpp"
#include "fgdim/errors.hpp"
#include "fgdim/process_core.hpp"
#include "fgdim/rng.hpp"
#include "fgdim/simplex_quadrature.hpp"

namespace fgdim::cli {

namespace {

double tol_or(const VerifyConfig& cfg, double dflt) { return cfg.tol.value_or(dflt); }

VerifyRow make_row(std::string suite, int q, double residual, double tolerance) {
  VerifyRow r;
  r.suite = std::move(suite);
  r.q = q;
  r.residual = residual;
  r.tolerance = tolerance;
  r.pass = std::isfinite(residual) && residual <= tolerance;
  return r;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + '"';
}

// --- ibp -------------------------------------------------------------------------

void suite_ibp(const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  const int q = cfg.q;
  if (q > 2) throw ResourceError("verify ibp: q <= 2 (higher q needs 6-dimensional quadrature)");
  const double c = kPiCharScale;
  const std::vector<double> Hs = q == 1 ? std::vector<double>{0.6, 0.75, 0.9} : std::vector<double>{0.75};
  const std::vector<double> lams = q == 1 ? std::vector<double>{1.0, 5.0} : std::vector<double>{1.0};
  const std::vector<double> Ts = q == 1 ? std::vector<double>{0.5, 1.0, 2.0} : std::vector<double>{1.0};
  for (const auto& eps : enumerate_A(q)) {
    for (double H : Hs) {
      auto G = FbmCharFunction::of(eps, H, c);
      for (double lam : lams) {
        for (double T : Ts) {
          const OscillatorySpec spec{lam, T, eps, G};
          for (std::size_t j = 0; j < eps.size(); ++j) {
            const auto chk = verify_ibp_step(spec, j);
            auto r = make_row("ibp", q, chk.residual, tol_or(cfg, 1e-6));
            r.h_or_alpha = H;
            r.lambda = lam;
            r.T = T;
            r.eps = eps.to_string();
            r.sigma = "step:" + std::to_string(j + 1);
            rows.push_back(std::move(r));
          }
        }
      }
    }
  }
  const double full_tol = q == 1 ? 1e-7 : 1e-4;
  for (const auto& eps : enumerate_A(q)) {
    const OscillatorySpec fb{1.0, 1.0, eps, FbmCharFunction::of(eps, 0.75, c)};
    auto r = make_row("ibp", q, verify_ibp_full(fb).residual, tol_or(cfg, full_tol));
    r.h_or_alpha = 0.75;
    r.lambda = 1.0;
    r.T = 1.0;
    r.eps = eps.to_string();
    r.sigma = "full:fbm";
    rows.push_back(std::move(r));

    const OscillatorySpec st{1.0, 1.0, eps, ExpLinearIntegrand::stable(eps, 1.5)};
    auto s = make_row("ibp", q, verify_ibp_full(st).residual, tol_or(cfg, full_tol));
    s.h_or_alpha = 1.5;
    s.lambda = 1.0;
    s.T = 1.0;
    s.eps = eps.to_string();
    s.sigma = "full:stable";
    rows.push_back(std::move(s));
  }
}

// --- fdb -------------------------------------------------------------------------

// Nested central differences of F over the variables in `vars`.
template <class F>
double nested_fd(F& f, std::vector<double>& t, const std::vector<std::size_t>& vars,
                 std::size_t level, double h) {
  if (level == vars.size()) return f(t);
  const std::size_t v = vars[level];
  const double t0 = t[v];
  t[v] = t0 + h;
  const double up = nested_fd(f, t, vars, level + 1, h);
  t[v] = t0 - h;
  const double dn = nested_fd(f, t, vars, level + 1, h);
  t[v] = t0;
  return (up - dn) / (2.0 * h);
}

void suite_fdb(const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  const double c = kPiCharScale;
  const double Hs[] = {0.3, 0.5, 0.7, 0.9};
  for (int q = 1; q <= std::min(cfg.q, 3); ++q) {
    Generator gen(derive_stream(cfg.seed, 1000 + std::uint64_t(q)));
    const auto A = enumerate_A(q);
    const auto Om = enumerate_Omega(q);
    double worst = 0.0;
    std::size_t n = std::max<std::size_t>(cfg.instances / 5, 1);
    for (std::size_t inst = 0; inst < n; ++inst) {
      const auto& eps = A[gen.bounded(A.size())];
      const auto& sigma = Om[gen.bounded(Om.size())];
      const double H = Hs[inst % 4];
      const auto ex = faa_di_bruno(reduce(eps, sigma));
      const std::size_t I = ex.context.I();
      // Sorted times with gaps of at least 0.05, including from the origin.
      std::vector<double> t(I);
      double acc = 0.0;
      std::vector<double> w(I + 1);
      double sw = 0.0;
      for (auto& x : w) sw += (x = gen.uniform());
      const double slack = 1.0 - 0.05 * double(I + 1);
      for (std::size_t i = 0; i < I; ++i) {
        acc += 0.05 + slack * w[i] / sw;
        t[i] = acc;
      }
      std::vector<double> a(ex.context.coeffs.begin(), ex.context.coeffs.end());
      auto F = [&](const std::vector<double>& u) { return std::exp(-c * fbm_variance(a, u, H)); };
      const double h = 0.05e-3;
      const double fd = nested_fd(F, t, ex.context.diff_positions, 0, h);
      const double ev = eval_expansion(ex, H, t, c);
      const double scale =
          F(t) * std::pow(0.05, -double(ex.context.diff_positions.size()));
      worst = std::max(worst, std::abs(ev - fd) / (std::abs(fd) + 1e-8 * scale));
    }
    auto r = make_row("fdb", q, worst, tol_or(cfg, 1e-4));
    r.eps = "random:" + std::to_string(n);
    r.sigma = "random";
    rows.push_back(std::move(r));
  }
}

// --- lnd -------------------------------------------------------------------------

std::vector<double> random_times(Generator& gen, std::size_t n, double min_gap) {
  std::vector<double> w(n + 1);
  double sw = 0.0;
  for (auto& x : w) sw += (x = gen.uniform());
  const double slack = 1.0 - min_gap * double(n + 1);
  std::vector<double> t(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += min_gap + slack * w[i] / sw;
    t[i] = acc;
  }
  return t;
}

int random_coeff(Generator& gen) {
  const int v = int(gen.bounded(6));
  return v < 3 ? v - 3 : v - 2;
}

std::vector<int> random_zero_sum(Generator& gen, std::size_t n) {
  for (;;) {
    std::vector<int> a(n);
    int s = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) s += (a[i] = random_coeff(gen));
    if (s != 0 && std::abs(s) <= 3) {
      a[n - 1] = -s;
      return a;
    }
  }
}

void suite_lnd(const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  const double Hs[] = {0.3, 0.5, 0.7, 0.9};
  for (double H : Hs) {
    Generator gen(derive_stream(cfg.seed, 2000 + std::uint64_t(H * 10)));
    double det_err = 0.0, berman = 0.0, lower = 0.0, mono = 0.0;
    for (std::size_t inst = 0; inst < cfg.instances; ++inst) {
      const std::size_t n = 1 + gen.bounded(8);
      const auto t = random_times(gen, n, 0.01);
      std::vector<int> a(n);
      for (auto& x : a) x = random_coeff(gen);
      const auto cert = lnd_certificate(CoeffVector(a, t), H);
      double prod = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        prod *= conditional_variance(t[j], std::span<const double>(t.data(), j), H);
      }
      det_err = std::max(det_err, std::abs(cert.det_cov - prod) / std::abs(prod));
      berman = std::max(berman, (cert.berman_rhs - cert.variance) / cert.variance);
      lower = std::max(lower, (cert.lower_bound - cert.variance) / cert.variance);
    }
    for (std::size_t inst = 0; inst < std::max<std::size_t>(cfg.instances / 5, 1); ++inst) {
      const std::size_t n = 2 + gen.bounded(7);
      auto s = random_times(gen, n, 0.01);
      const std::size_t pick = gen.bounded(n);
      const double t = s[pick];
      s.erase(s.begin() + std::ptrdiff_t(pick));
      std::vector<double> small;
      for (double x : s) {
        if (gen.uniform() < 0.5) small.push_back(x);
      }
      const double v_small = conditional_variance(t, small, H);
      const double v_big = conditional_variance(t, s, H);
      mono = std::max(mono, (v_big - v_small) / v_small);
    }
    const double tol = tol_or(cfg, 1e-10);
    for (auto [name, res] : {std::pair{"det", det_err}, std::pair{"berman", std::max(berman, 0.0)},
                             std::pair{"lower_bound", std::max(lower, 0.0)},
                             std::pair{"monotone", std::max(mono, 0.0)}}) {
      auto r = make_row("lnd", 1, res, tol);
      r.h_or_alpha = H;
      r.eps = name;
      r.sigma = "random:" + std::to_string(cfg.instances);
      rows.push_back(std::move(r));
    }

    if (H <= 0.5) continue;
    double dg_worst = 0.0, pair_worst = 0.0;
    const std::size_t n_bound = cfg.instances * 100;
    for (std::size_t inst = 0; inst < n_bound; ++inst) {
      const std::size_t n = 2 + gen.bounded(7);
      const auto a = random_zero_sum(gen, n);
      const auto t = random_times(gen, n, 1e-4);
      const CoeffVector cv(a, t);
      const auto rep = dg_bound_check(cv, H, gen.bounded(n));
      if (rep.rhs > 0.0) dg_worst = std::max(dg_worst, rep.lhs / rep.rhs - 1.0);
      // Pairs among positions separated by at least 2.
      std::vector<std::size_t> pos;
      for (std::size_t i = gen.bounded(2); i < n; i += 2 + gen.bounded(2)) pos.push_back(i);
      if (pos.size() % 2) pos.pop_back();
      if (pos.empty()) continue;
      std::vector<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t i = 0; i + 1 < pos.size(); i += 2) pairs.emplace_back(pos[i], pos[i + 1]);
      const auto pr = ddg_product_bound_check(cv, H, pairs);
      if (pr.bound.rhs > 0.0) pair_worst = std::max(pair_worst, pr.bound.lhs / pr.bound.rhs - 1.0);
    }
    for (auto [name, res] : {std::pair{"dg_bound", dg_worst}, std::pair{"ddg_product", pair_worst}}) {
      auto r = make_row("lnd", 1, std::max(res, 0.0), tol_or(cfg, 1e-12));
      r.h_or_alpha = H;
      r.eps = name;
      r.sigma = "random:" + std::to_string(n_bound);
      rows.push_back(std::move(r));
    }
  }
}

// --- counts ----------------------------------------------------------------------

unsigned long long binom(unsigned n, unsigned k) {
  unsigned long long r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void suite_counts(const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  const int qmax = std::min(cfg.q, 6);
  auto add = [&](int q, const std::string& label, unsigned long long got,
                 unsigned long long want) {
    auto r = make_row("counts", q, std::abs(double(got) - double(want)), tol_or(cfg, 0.0));
    r.eps = label + "=" + std::to_string(got);
    r.sigma = "expected=" + std::to_string(want);
    rows.push_back(std::move(r));
  };
  for (int q = 1; q <= qmax; ++q) {
    add(q, "#A_" + std::to_string(2 * q), enumerate_A(q).size(), binom(2 * unsigned(q), unsigned(q)));
    unsigned long long pow3 = 1;
    for (int i = 0; i < q; ++i) pow3 *= 3;
    add(q, "#Omega^" + std::to_string(q), enumerate_Omega(q).size(), pow3);
  }
  const unsigned long long inv[] = {1, 1, 2, 4, 10, 26};
  for (std::size_t l = 0; l <= std::min<std::size_t>(std::size_t(qmax) + 1, 5); ++l) {
    std::vector<std::size_t> pos(l);
    for (std::size_t i = 0; i < l; ++i) pos[i] = 2 * i;
    add(int(l), "#P2(" + std::to_string(l) + ")", enumerate_P2(pos).size(), inv[l]);
  }
}

// --- bounds ----------------------------------------------------------------------

void suite_bounds(const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  const std::vector<double> Ts{0.25, 1.0, 4.0, 16.0};
  for (int q = 1; q <= std::min(cfg.q, 2); ++q) {
    const auto s = check_bound_stable(q, Ts, 1.0, 1.5);
    for (std::size_t i = 0; i < s.T.size(); ++i) {
      auto r = make_row("bounds", q, s.max_ratio[i], tol_or(cfg, s.bound));
      r.h_or_alpha = 1.5;
      r.lambda = 1.0;
      r.T = s.T[i];
      r.eps = "max";
      r.sigma = "stable";
      rows.push_back(std::move(r));
    }
  }
  const auto f = check_bound_fbm(1, Ts, 0.75);
  auto r = make_row("bounds", 1, f.spread(), tol_or(cfg, 10.0));
  r.h_or_alpha = 0.75;
  r.lambda = 1.0;
  r.eps = "max";
  r.sigma = "fbm:spread";
  rows.push_back(std::move(r));
}

// --- moments ---------------------------------------------------------------------

void suite_moments(const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  const std::pair<double, double> xis[] = {{0.0, 4.0}, {2.0, 4.0}, {4.0, 2.0}};
  for (double H : {0.5, 0.75}) {
    for (auto [x1, x2] : xis) {
      MonteCarloRequest mc;
      mc.n_paths = cfg.mc_paths;
      mc.M = 4096;
      mc.seed = cfg.seed;
      mc.workers = cfg.workers;
      const auto m = verify_moment_decomposition(1, x1, x2, ProcessParams::fbm(H), mc);
      const double T = std::pow(std::abs(x2), 1.0 / H);
      std::ostringstream xi;
      xi << "xi=(" << x1 << ";" << x2 << ")";
      auto r = make_row("moments", 1, m.quad_residual, tol_or(cfg, 1e-6));
      r.h_or_alpha = H;
      r.lambda = x1 / T;
      r.T = T;
      r.eps = xi.str();
      r.sigma = "quadrature";
      rows.push_back(r);
      if (m.mc_z) {
        auto s = make_row("moments", 1, *m.mc_z, 3.0);
        s.h_or_alpha = H;
        s.lambda = r.lambda;
        s.T = T;
        s.eps = xi.str();
        s.sigma = "monte_carlo";
        rows.push_back(s);
      }
    }
  }
}

}  // namespace

void run_suite(const std::string& suite, const VerifyConfig& cfg, std::vector<VerifyRow>& rows) {
  if (suite == "all") {
    for (const auto& s : kSuites) {
      if (s != "all") run_suite(s, cfg, rows);
    }
  } else if (suite == "ibp") {
    suite_ibp(cfg, rows);
  } else if (suite == "fdb") {
    suite_fdb(cfg, rows);
  } else if (suite == "lnd") {
    suite_lnd(cfg, rows);
  } else if (suite == "counts") {
    suite_counts(cfg, rows);
  } else if (suite == "bounds") {
    suite_bounds(cfg, rows);
  } else if (suite == "moments") {
    suite_moments(cfg, rows);
  } else {
    throw DomainError("unknown suite '" + suite + "'");
  }
}

void write_verify_csv(std::ostream& os, const std::vector<VerifyRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  os << kVerifyHeader << '\n';
  for (const auto& r : rows) {
    os << r.suite << ',' << r.q << ',' << opt(r.h_or_alpha) << ',' << opt(r.lambda) << ','
       << opt(r.T) << ',' << csv_field(r.eps) << ',' << csv_field(r.sigma) << ','
       << fmt(r.residual) << ',' << fmt(r.tolerance) << ',' << (r.pass ? "true" : "false")
       << '\n';
  }
}

}  // namespace fgdim::cli
