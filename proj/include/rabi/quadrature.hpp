#pragma once

#include <cstddef>
#include <vector>

namespace rabi {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
    // Affine map from [-1, 1] onto [a, b].
    QuadratureRule mapped(double a, double b) const;
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(std::size_t n);

// Barycentric interpolation on Chebyshev points of the second kind
// x_j = cos(pi j / (n - 1)) mapped onto [a, b].
class ChebyshevInterpolator {
public:
    ChebyshevInterpolator(double a, double b, std::size_t n);

    const std::vector<double>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    double lower() const { return a_; }
    double upper() const { return b_; }

    // Cardinal weights l_j(x) such that p(x) = sum_j l_j(x) f(x_j).
    std::vector<double> cardinal(double x) const;
    double evaluate(const std::vector<double>& values, double x) const;

private:
    double a_;
    double b_;
    std::vector<double> nodes_;
    std::vector<double> bary_;
};

} // namespace rabi
