#include "biht/quadrature.hpp"

#include <cmath>

#include "biht/errors.hpp"

namespace biht {

GaussLegendreRule gauss_legendre_rule(int order) {
  if (order < 1) throw InvalidParams("gauss_legendre_rule: order must be positive");
  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-based initial guess for the i-th root of P_order.
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Three-term recurrence for P_order(x) and its derivative.
      double p0 = 1.0;
      double p1 = x;
      for (int n = 2; n <= order; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels,
                 const GaussLegendreRule& rule) {
  if (panels < 1) throw InvalidParams("integrate: panels must be positive");
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    const double scale = 0.5 * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      panel += rule.weights[i] * f(mid + scale * rule.nodes[i]);
    total += scale * panel;
  }
  return total;
}

}  // namespace biht
