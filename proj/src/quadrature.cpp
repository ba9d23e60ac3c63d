#include "acps/quadrature.hpp"

#include "acps/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace acps {
namespace {

// Newton iteration on the Legendre polynomial P_n from the Tricomi initial
// guesses; the rule is symmetric, so only the non-negative half is solved.
QuadratureRule compute_reference(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // n == 1: P_1 = x, P_0 = 1.
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1)
    rule.nodes[n / 2] = 0.0;
  return rule;
}

} // namespace

const QuadratureRule &reference_gauss_legendre(int n) {
  if (n < 1)
    throw DomainError("Gauss-Legendre rule needs n >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const QuadratureRule>> cache;
  const std::lock_guard lock(mutex);
  auto &slot = cache[n];
  if (!slot)
    slot = std::make_unique<const QuadratureRule>(compute_reference(n));
  return *slot;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("Gauss-Legendre interval must satisfy a < b");
  const QuadratureRule &ref = reference_gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  QuadratureRule out;
  out.nodes.resize(n);
  out.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    out.nodes[i] = mid + half * ref.nodes[i];
    out.weights[i] = half * ref.weights[i];
  }
  return out;
}

void QuadratureGrid::validate() const {
  if (!std::isfinite(u_min) || !std::isfinite(u_max) || !(u_min < u_max))
    throw DomainError("quadrature grid needs finite u_min < u_max");
  if (nodes_per_side < 8)
    throw DomainError("quadrature grid needs at least 8 nodes per side");
}

} // namespace acps
