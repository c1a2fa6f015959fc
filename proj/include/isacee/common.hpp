// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace isacee {

using cplx = std::complex<double>;
using Eigen::ArrayXXd;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double v) { return 10.0 * std::log10(v); }
// dBm -> mW (all powers in this project are carried in mW, noise normalized to 1).
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

/// Numerically degenerate FIM (nonpositive Schur complement); carries the offending value.
class degenerate_fim_error : public std::runtime_error {
 public:
  explicit degenerate_fim_error(const std::string& what, double value)
      : std::runtime_error(what), offending_value(value) {}
  double offending_value;
};

/// Thresholds cannot be met under the power budget.
class infeasible_scenario_error : public std::runtime_error {
 public:
  explicit infeasible_scenario_error(const std::string& what) : std::runtime_error(what) {}
};

/// Conic solver failed to converge; carries iteration diagnostics in what().
class solver_error : public std::runtime_error {
 public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

/// Deterministic per-task seed derivation (splitmix64 step on the root seed).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace isacee
