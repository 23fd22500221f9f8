#include "rabi/quadrature.hpp"

#include "rabi/errors.hpp"
#include "rabi/units.hpp"

#include <cmath>

namespace rabi {

QuadratureRule QuadratureRule::mapped(double a, double b) const
{
    QuadratureRule out;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    out.nodes.reserve(size());
    out.weights.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
        out.nodes.push_back(mid + half * nodes[i]);
        out.weights.push_back(half * weights[i]);
    }
    return out;
}

QuadratureRule gauss_legendre(std::size_t n)
{
    if (n == 0)
        throw ConfigError("gauss_legendre: need at least one node");
    QuadratureRule rule;
    if (n == 1) {
        rule.nodes = {0.0};
        rule.weights = {2.0};
        return rule;
    }
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        // Tricomi's approximation as the starting guess
        double x = std::cos(constants::pi * (double(i) + 0.75) / (double(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = pk;
            }
            dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

ChebyshevInterpolator::ChebyshevInterpolator(double a, double b, std::size_t n) : a_(a), b_(b)
{
    if (n < 2 || !(b > a))
        throw ConfigError("Chebyshev interpolator needs n >= 2 and b > a");
    nodes_.resize(n);
    bary_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = std::cos(constants::pi * double(j) / double(n - 1));
        nodes_[j] = 0.5 * (a + b) + 0.5 * (b - a) * x;
        bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
    }
}

std::vector<double> ChebyshevInterpolator::cardinal(double x) const
{
    std::vector<double> l(nodes_.size(), 0.0);
    double denom = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double diff = x - nodes_[j];
        if (diff == 0.0) {
            std::fill(l.begin(), l.end(), 0.0);
            l[j] = 1.0;
            return l;
        }
        l[j] = bary_[j] / diff;
        denom += l[j];
    }
    for (double& v : l)
        v /= denom;
    return l;
}

double ChebyshevInterpolator::evaluate(const std::vector<double>& values, double x) const
{
    const std::vector<double> l = cardinal(x);
    double sum = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j)
        sum += l[j] * values[j];
    return sum;
}

} // namespace rabi
