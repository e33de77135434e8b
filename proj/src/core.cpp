#include "randhyp/core.hpp"

#include <limits>

namespace randhyp {

double unit_ball_volume(int n) {
  if (n < 0) throw ConfigError("unit_ball_volume: negative dimension");
  return std::exp(0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0));
}

double unit_sphere_area(int n) {
  if (n < 0) throw ConfigError("unit_sphere_area: negative dimension");
  return 2.0 * std::exp(0.5 * (n + 1) * std::log(std::numbers::pi) - std::lgamma(0.5 * (n + 1)));
}

Index binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Index result = 1;
  for (int i = 1; i <= k; ++i) {
    const Index factor = n - k + i;
    if (result > std::numeric_limits<Index>::max() / factor)
      throw ConfigError("binomial: overflow");
    result = result * factor / i;
  }
  return result;
}

} // namespace randhyp
