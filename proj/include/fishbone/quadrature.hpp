#ifndef FISHBONE_QUADRATURE_HPP
#define FISHBONE_QUADRATURE_HPP

#include <Eigen/Dense>

namespace fishbone {

struct GaussLegendreRule {
    Eigen::VectorXd nodes;    // on [-1, 1], ascending
    Eigen::VectorXd weights;
};

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix of
// the Legendre recurrence, weights 2 * (first eigenvector component)^2.
GaussLegendreRule gauss_legendre(int points);

/// Integrates f over [a, b] with a cached rule of the given size.
template <typename F>
double integrate_gauss_legendre(F&& f, double a, double b, const GaussLegendreRule& rule)
{
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

}  // namespace fishbone

#endif  // FISHBONE_QUADRATURE_HPP
