#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace scatter::quadrature {

struct Rule {
    std::vector<double> nodes;    // ascending on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; cached per n.
const Rule& gauss_legendre(int n);

/// Legendre polynomials P_0..P_{n-1} at x.
void legendre_values(double x, std::span<double> out);

/// m_j = integral over [-1, 1] of log|t - x| P_j(t) dt for j < n, with -1 < x < 1.
std::vector<double> legendre_log_moments(int n, double x);

/// Product-integration weights: integral of log|t - x| l_j(t) dt where l_j is the
/// Lagrange basis polynomial on the Gauss-Legendre nodes of `rule`.
std::vector<double> log_weights(const Rule& rule, double x);

/// Lagrange basis on fixed nodes, evaluated by the barycentric formula.
class LagrangeBasis {
public:
    explicit LagrangeBasis(std::span<const double> nodes);

    /// Writes l_j(x) for every node j.
    void evaluate(double x, std::span<double> out) const;
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

private:
    std::vector<double> nodes_;
    std::vector<double> bary_;
};

using Complex = std::complex<double>;

/// Adaptive bisection with 16-point Gauss-Legendre panels for a vector-valued integrand
/// over [a, b]; `f(s, out)` overwrites out (size m) with the integrand at s. A panel is
/// accepted when it agrees with its two halves to rel_tol times the max-norm of the
/// one-panel estimate over [a, b].
std::vector<Complex> integrate_adaptive(const std::function<void(double, std::span<Complex>)>& f,
                                        std::size_t m, double a, double b, double rel_tol,
                                        int max_depth = 48);

} // namespace scatter::quadrature
