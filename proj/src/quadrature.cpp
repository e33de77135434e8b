#include "randhyp/quadrature.hpp"

#include <array>

namespace randhyp {
namespace {

constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the center.
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double kronrod;
  double error;
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrod[j] * sum;
    if (j % 2 == 1) gauss += kGauss[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

double recurse(const std::function<double(double)>& f, double a, double b, double tol,
               QuadratureBudget& budget, int depth) {
  budget.remaining -= 15;
  if (budget.remaining < 0) throw QuadratureError("adaptive quadrature exceeded its evaluation budget");
  const Segment s = gk15(f, a, b);
  if (s.error <= tol || depth <= 0) {
    if (s.error > tol) throw QuadratureError("adaptive quadrature reached maximum subdivision depth");
    return s.kronrod;
  }
  const double mid = 0.5 * (a + b);
  return recurse(f, a, mid, 0.5 * tol, budget, depth - 1) + recurse(f, mid, b, 0.5 * tol, budget, depth - 1);
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          QuadratureBudget& budget, int max_depth) {
  if (!(tol > 0.0)) throw ConfigError("integrate_adaptive: tolerance must be positive");
  return recurse(f, a, b, tol, budget, max_depth);
}

} // namespace randhyp
