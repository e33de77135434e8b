#pragma once

#include "randhyp/core.hpp"

#include <cstdint>
#include <functional>

namespace randhyp {

/// Shared evaluation budget for nested adaptive integrations.
struct QuadratureBudget {
  std::int64_t remaining = 50'000'000;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b] to absolute
/// tolerance `tol`. Throws QuadratureError when the budget runs out.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          QuadratureBudget& budget, int max_depth = 40);

} // namespace randhyp
