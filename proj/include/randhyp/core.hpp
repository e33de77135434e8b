#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace randhyp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Base of every error raised by the library. `kind()` is a stable machine
/// readable tag used in structured error records.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
    : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

/// Invalid parameters or preconditions supplied by the caller.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// A factorization lost too much precision to be trusted.
class ConditioningError : public Error {
public:
  explicit ConditioningError(const std::string& what) : Error("conditioning", what) {}
};

/// A measure-zero configuration (exact zero on a grid vertex or saddle) that
/// the extraction cannot resolve.
class DegeneracyError : public Error {
public:
  explicit DegeneracyError(const std::string& what) : Error("degeneracy", what) {}
};

/// Too many degenerate trials in one experiment.
class DegeneracyBudgetError : public Error {
public:
  explicit DegeneracyBudgetError(const std::string& what) : Error("degeneracy_budget", what) {}
};

class QuadratureError : public Error {
public:
  explicit QuadratureError(const std::string& what) : Error("quadrature", what) {}
};

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Surface measure of the unit sphere S^n in R^(n+1).
double unit_sphere_area(int n);

/// Binomial coefficient as an exact integer (throws on overflow).
Index binomial(int n, int k);

/// Geodesic distance on the unit sphere between unit vectors.
inline double geodesic_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
  // atan2 form stays accurate for nearly equal and nearly antipodal points.
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

} // namespace randhyp
