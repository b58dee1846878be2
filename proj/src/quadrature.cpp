#include "scatter/quadrature.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace scatter::quadrature {

namespace {

Rule build_gauss_legendre(int n)
{
    Rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p0 = 1.0;
                p1 = x;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return rule;
}

} // namespace

const Rule& gauss_legendre(int n)
{
    if (n < 1) {
        throw Error(ErrorCode::InvalidInput, "Gauss-Legendre rule needs n >= 1");
    }
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<Rule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        slot = std::make_unique<Rule>(build_gauss_legendre(n));
    }
    return *slot;
}

void legendre_values(double x, std::span<double> out)
{
    if (out.empty()) {
        return;
    }
    out[0] = 1.0;
    if (out.size() > 1) {
        out[1] = x;
    }
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        const double kk = static_cast<double>(k);
        out[k + 1] = ((2.0 * kk + 1.0) * x * out[k] - kk * out[k - 1]) / (kk + 1.0);
    }
}

std::vector<double> legendre_log_moments(int n, double x)
{
    // F_m = integral of log|t - x| P_m'(t) dt
    //     = log(1 - x) - (-1)^m log(1 + x) + 2 Q_m(x),
    // and P_j = (P_{j+1}' - P_{j-1}') / (2j + 1).
    std::vector<double> q(static_cast<std::size_t>(n) + 2);
    q[0] = 0.5 * std::log((1.0 + x) / (1.0 - x));
    q[1] = x * q[0] - 1.0;
    for (int m = 1; m + 1 < n + 2; ++m) {
        q[m + 1] = ((2.0 * m + 1.0) * x * q[m] - m * q[m - 1]) / (m + 1.0);
    }
    const double lm = std::log(1.0 - x);
    const double lp = std::log(1.0 + x);
    auto big_f = [&](int m) {
        if (m == 0) {
            return 0.0;
        }
        return lm - ((m % 2 == 0) ? 1.0 : -1.0) * lp + 2.0 * q[static_cast<std::size_t>(m)];
    };
    std::vector<double> moments(static_cast<std::size_t>(n));
    moments[0] = (1.0 - x) * lm + (1.0 + x) * lp - 2.0;
    for (int j = 1; j < n; ++j) {
        moments[static_cast<std::size_t>(j)] = (big_f(j + 1) - big_f(j - 1)) / (2.0 * j + 1.0);
    }
    return moments;
}

std::vector<double> log_weights(const Rule& rule, double x)
{
    const int n = static_cast<int>(rule.nodes.size());
    const auto moments = legendre_log_moments(n, x);
    std::vector<double> p(static_cast<std::size_t>(n));
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        legendre_values(rule.nodes[static_cast<std::size_t>(j)], p);
        double acc = 0.0;
        for (int m = 0; m < n; ++m) {
            acc += 0.5 * (2.0 * m + 1.0) * p[static_cast<std::size_t>(m)] * moments[static_cast<std::size_t>(m)];
        }
        out[static_cast<std::size_t>(j)] = rule.weights[static_cast<std::size_t>(j)] * acc;
    }
    return out;
}

LagrangeBasis::LagrangeBasis(std::span<const double> nodes) : nodes_(nodes.begin(), nodes.end())
{
    bary_.assign(nodes_.size(), 1.0);
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        for (std::size_t m = 0; m < nodes_.size(); ++m) {
            if (m != j) {
                bary_[j] /= (nodes_[j] - nodes_[m]);
            }
        }
    }
}

void LagrangeBasis::evaluate(double x, std::span<double> out) const
{
    double denom = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
        const double d = x - nodes_[j];
        if (d == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
            out[j] = 1.0;
            return;
        }
        out[j] = bary_[j] / d;
        denom += out[j];
    }
    for (double& v : out) {
        v /= denom;
    }
}

namespace {

struct Adaptive {
    const std::function<void(double, std::span<Complex>)>& f;
    std::size_t m;
    const Rule& rule;
    std::vector<Complex> scratch;

    void panel(double a, double b, std::span<Complex> out)
    {
        std::fill(out.begin(), out.end(), Complex{});
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            f(mid + half * rule.nodes[q], scratch);
            const double w = half * rule.weights[q];
            for (std::size_t j = 0; j < m; ++j) {
                out[j] += w * scratch[j];
            }
        }
    }

    void recurse(double a, double b, std::span<const Complex> whole, double tol, int depth,
                 std::span<Complex> acc)
    {
        const double mid = 0.5 * (a + b);
        std::vector<Complex> left(m);
        std::vector<Complex> right(m);
        panel(a, mid, left);
        panel(mid, b, right);
        double err = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            err = std::max(err, std::abs(left[j] + right[j] - whole[j]));
        }
        if (err <= tol || depth <= 0) {
            for (std::size_t j = 0; j < m; ++j) {
                acc[j] += left[j] + right[j];
            }
            return;
        }
        recurse(a, mid, left, tol, depth - 1, acc);
        recurse(mid, b, right, tol, depth - 1, acc);
    }
};

} // namespace

std::vector<Complex> integrate_adaptive(const std::function<void(double, std::span<Complex>)>& f,
                                        std::size_t m, double a, double b, double rel_tol, int max_depth)
{
    Adaptive ad{f, m, gauss_legendre(16), std::vector<Complex>(m)};
    std::vector<Complex> whole(m);
    ad.panel(a, b, whole);
    double scale = 0.0;
    for (const Complex& v : whole) {
        scale = std::max(scale, std::abs(v));
    }
    const double tol = rel_tol * std::max(scale, 1e-300);
    std::vector<Complex> acc(m);
    ad.recurse(a, b, whole, tol, max_depth, acc);
    return acc;
}

} // namespace scatter::quadrature
