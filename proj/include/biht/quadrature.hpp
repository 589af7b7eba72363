#pragma once

#include <functional>
#include <vector>

namespace biht {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Computes the order-point rule by Newton iteration on the Legendre
// recurrence. Order 16 integrates polynomials up to degree 31 exactly.
GaussLegendreRule gauss_legendre_rule(int order);

// Composite Gauss-Legendre integral of f over [a, b] split into equal
// panels. With smooth integrands the error decays spectrally in the rule
// order and the panel count controls resolution of scale features.
double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 const GaussLegendreRule& rule);

}  // namespace biht
