#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace okr::harness {

// Pinned CSV schemas; golden-file tests in the suite keep them stable.
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr const char* kSeedCsvHeader =
    "t,k_dist_to_target,rho_dist_to_target,rho_dist_to_frho,atoms";
inline constexpr const char* kAggregateCsvHeader =
    "t,k_mean,k_median,k_p10,k_p90,rho_mean,rho_median,rho_p10,rho_p90,"
    "frho_mean,frho_median,frho_p10,frho_p90";
inline constexpr const char* kMixingCsvHeader = "t,phi,beta,envelope_D,envelope_r";
inline constexpr const char* kBoundsCsvHeader =
    "theta,lambda,ck2,M,delta,D,r,t,e_init_bound,e_samp_sq_bound,mixing_factor,composite_rate";
inline constexpr const char* kCoverageCsvHeader = "t,bound,violations,seeds,fraction,delta";
inline constexpr const char* kCompareCsvHeader = "t,k_mean_iid,k_mean_dep,ratio";

/// Line-oriented CSV writer with byte-stable float formatting (%.17g round
/// trips doubles exactly, so identical runs emit identical files).
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
    out_ << header << '\n';
  }

  void field(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    sep();
    row_ += buf;
  }

  void field(long v) {
    sep();
    row_ += std::to_string(v);
  }

  void field(long long v) {
    sep();
    row_ += std::to_string(v);
  }

  void field(const std::string& v) {
    sep();
    row_ += v;
  }

  void end_row() {
    out_ << row_ << '\n';
    row_.clear();
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) row_ += ',';
    first_ = false;
  }

  std::ofstream out_;
  std::string row_;
  bool first_ = true;
};

}  // namespace okr::harness
