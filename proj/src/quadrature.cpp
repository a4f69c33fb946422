#include "fishbone/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace fishbone {

GaussLegendreRule gauss_legendre(int points)
{
    if (points < 1)
        throw std::invalid_argument("Gauss-Legendre rule needs at least one point");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
    for (int k = 1; k < points; ++k) {
        const double beta = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussLegendreRule rule;
    rule.nodes = solver.eigenvalues();
    rule.weights = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
    return rule;
}

}  // namespace fishbone
