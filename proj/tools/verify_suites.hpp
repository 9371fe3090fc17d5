#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fgdim::cli {

struct VerifyRow {
  std::string suite;
  int q = 1;
  std::optional<double> h_or_alpha;
  std::optional<double> lambda;
  std::optional<double> T;
  std::string eps;
  std::string sigma;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyConfig {
  int q = 1;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::size_t instances = 1000;
  std::size_t mc_paths = 0;
  std::size_t workers = 0;
};

inline const std::vector<std::string> kSuites = {"ibp",    "fdb",     "lnd", "counts",
                                                 "bounds", "moments", "all"};

/// Rows of one suite ("all" runs every suite). Rows are appended to `rows` as
/// they complete so that a partial report survives an exception.
void run_suite(const std::string& suite, const VerifyConfig& cfg, std::vector<VerifyRow>& rows);

inline constexpr const char* kVerifyHeader =
    "suite,q,H_or_alpha,lambda,T,eps,sigma,residual,tolerance,pass";

void write_verify_csv(std::ostream& os, const std::vector<VerifyRow>& rows);

}  // namespace fgdim::cli
