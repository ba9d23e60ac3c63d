#pragma once

#include <vector>

namespace acps {

/// Nodes and weights of a quadrature rule, nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b]. Exact for polynomials of degree
/// up to 2n-1. Throws DomainError unless n >= 1 and a < b.
QuadratureRule gauss_legendre(int n, double a, double b);

/// The n-point rule on [-1, 1], computed once per n and cached for the life
/// of the process. Thread-safe.
const QuadratureRule &reference_gauss_legendre(int n);

/// Truncated integration domain used by the score integrals. Scores are
/// only comparable between forecasts evaluated on the same grid.
struct QuadratureGrid {
  double u_min = -1.0;
  double u_max = 1.0;
  int nodes_per_side = 128;

  /// Throws DomainError unless u_min < u_max (both finite) and N >= 8.
  void validate() const;
  double length() const { return u_max - u_min; }

  bool operator==(const QuadratureGrid &) const = default;
};

} // namespace acps
