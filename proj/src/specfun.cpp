#include "scatter/specfun.hpp"

#include "scatter/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace scatter::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

struct MillerResult {
    std::vector<double> j;  // J_0..J_nmax
    double neumann0 = 0.0;  // sum_{k>=1} (-1)^k J_2k / k
    double neumann1 = 0.0;  // sum_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k
};

int miller_start(int nmax, double x)
{
    const double top = std::max(static_cast<double>(nmax), x);
    int m = static_cast<int>(top + 30.0 + 6.0 * std::cbrt(top));
    return m + (m % 2);
}

// Backward recurrence J_{m-1} = (2m/x) J_m - J_{m+1}, normalized by J_0 + 2 sum J_2k = 1.
MillerResult miller(int nmax, double x)
{
    MillerResult out;
    out.j.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
    const int start = miller_start(nmax, x);
    const double two_over_x = 2.0 / x;

    double next = 0.0;   // J_{m+1}
    double cur = 1e-30;  // J_m
    double norm_sum = 0.0;
    double s0 = 0.0;
    double s1 = 0.0;
    for (int m = start; m >= 0; --m) {
        if (m <= nmax) {
            out.j[static_cast<std::size_t>(m)] = cur;
        }
        if (m % 2 == 0) {
            if (m > 0) {
                const int k = m / 2;
                norm_sum += 2.0 * cur;
                s0 += ((k % 2 == 0) ? 1.0 : -1.0) * cur / k;
            } else {
                norm_sum += cur;
            }
        } else {
            const int k_lo = (m + 1) / 2;  // m = 2k - 1
            double c = ((k_lo % 2 == 0) ? 1.0 : -1.0) / k_lo;
            if (m >= 3) {
                const int k_hi = (m - 1) / 2;  // m = 2k + 1
                c -= ((k_hi % 2 == 0) ? 1.0 : -1.0) / k_hi;
            }
            s1 += c * cur;
        }
        if (m == 0) {
            break;
        }
        const double prev = m * two_over_x * cur - next;
        next = cur;
        cur = prev;
        if (std::abs(cur) > 1e250) {
            constexpr double scale = 1e-250;
            cur *= scale;
            next *= scale;
            norm_sum *= scale;
            s0 *= scale;
            s1 *= scale;
            for (int i = m; i <= nmax; ++i) {
                out.j[static_cast<std::size_t>(i)] *= scale;
            }
        }
    }
    for (double& v : out.j) {
        v /= norm_sum;
    }
    out.neumann0 = s0 / norm_sum;
    out.neumann1 = s1 / norm_sum;
    return out;
}

// Hankel expansion: H_nu(x) ~ sqrt(2/(pi x)) (P + iQ) exp(i(x - nu pi/2 - pi/4)).
Complex hankel_asymptotic(int nu, double x)
{
    const double mu = 4.0 * nu * nu;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
        const double mag = std::abs(term);
        if (mag > last && k > 2) {
            break;
        }
        last = mag;
        const int r = k % 4;
        // i^k pattern: P collects even k with sign (-1)^{k/2}, Q odd k with (-1)^{(k-1)/2}.
        if (r == 0) {
            p += term;
        } else if (r == 1) {
            q += term;
        } else if (r == 2) {
            p -= term;
        } else {
            q -= term;
        }
        if (mag < 1e-17) {
            break;
        }
    }
    const double chi = x - (0.5 * nu + 0.25) * kPi;
    const double amp = std::sqrt(2.0 / (kPi * x));
    return amp * Complex(p, q) * Complex(std::cos(chi), std::sin(chi));
}

void require_order(int n)
{
    if (n < 0) {
        throw Error(ErrorCode::NegativeOrder, "order " + std::to_string(n));
    }
}

void require_positive(double x)
{
    if (!(x > 0.0)) {
        throw Error(ErrorCode::NonpositiveArgument, "argument must be positive");
    }
}

// Y_0, Y_1 from the Neumann series; valid for moderate x.
std::pair<double, double> y01_neumann(const MillerResult& m, double x)
{
    const double lg = std::log(0.5 * x) + kEulerGamma;
    const double y0 = (2.0 / kPi) * lg * m.j[0] - (4.0 / kPi) * m.neumann0;
    const double y1 = (2.0 / kPi) * (lg * m.j[1] - m.j[0] / x) + (2.0 / kPi) * m.neumann1;
    return {y0, y1};
}

// Ascending series for orders 0 and 1; used for x < kSeriesSwitch where they converge
// in a dozen terms without cancellation.
Hankel01 hankel01_series(double x)
{
    const double t = 0.25 * x * x;
    double j0 = 0.0;
    double j1 = 0.0;
    double s0 = 0.0;
    double s1 = 0.0;
    double term0 = 1.0;  // t^k / (k!)^2
    double term1 = 1.0;  // t^k / (k! (k+1)!)
    double hk = 0.0;
    for (int k = 0; k < 40; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double hk1 = hk + 1.0 / (k + 1);
        j0 += sign * term0;
        j1 += sign * term1;
        s0 -= sign * hk * term0;
        s1 += sign * (hk + hk1) * term1;
        if (term0 < 1e-18 && k > 2) {
            break;
        }
        term0 *= t / ((k + 1.0) * (k + 1.0));
        term1 *= t / ((k + 1.0) * (k + 2.0));
        hk = hk1;
    }
    j1 *= 0.5 * x;
    const double lg = std::log(0.5 * x) + kEulerGamma;
    const double y0 = (2.0 / kPi) * (lg * j0 + s0);
    const double y1 = (2.0 / kPi) * lg * j1 - 2.0 / (kPi * x) - (0.5 * x / kPi) * s1;
    return {Complex(j0, y0), Complex(j1, y1)};
}

} // namespace

std::vector<double> bessel_j_sequence(int nmax, double x)
{
    require_order(nmax);
    if (x < 0.0) {
        throw Error(ErrorCode::NonpositiveArgument, "argument must be nonnegative");
    }
    if (x == 0.0) {
        std::vector<double> j(static_cast<std::size_t>(nmax) + 1, 0.0);
        j[0] = 1.0;
        return j;
    }
    auto j = miller(std::max(nmax, 1), x).j;
    if (x > kAsymptoticSwitch) {
        j[0] = hankel_asymptotic(0, x).real();
        j[1] = hankel_asymptotic(1, x).real();
    }
    j.resize(static_cast<std::size_t>(nmax) + 1);
    return j;
}

std::vector<double> bessel_y_sequence(int nmax, double x)
{
    require_order(nmax);
    require_positive(x);
    std::vector<double> y(static_cast<std::size_t>(std::max(nmax, 1)) + 1);
    if (x > kAsymptoticSwitch) {
        y[0] = hankel_asymptotic(0, x).imag();
        y[1] = hankel_asymptotic(1, x).imag();
    } else {
        const auto [y0, y1] = y01_neumann(miller(1, x), x);
        y[0] = y0;
        y[1] = y1;
    }
    for (int n = 1; n < nmax; ++n) {
        y[n + 1] = (2.0 * n / x) * y[n] - y[n - 1];
    }
    y.resize(static_cast<std::size_t>(nmax) + 1);
    return y;
}

double bessel_j(int n, double x)
{
    require_order(n);
    if (x < 0.0) {
        throw Error(ErrorCode::NonpositiveArgument, "argument must be nonnegative");
    }
    if (x == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    if (n <= 1 && x > kAsymptoticSwitch) {
        return hankel_asymptotic(n, x).real();
    }
    return miller(std::max(n, 1), x).j[static_cast<std::size_t>(n)];
}

double bessel_y(int n, double x)
{
    require_order(n);
    require_positive(x);
    return bessel_y_sequence(n, x)[static_cast<std::size_t>(n)];
}

Complex hankel1(int n, double x)
{
    require_order(n);
    require_positive(x);
    return {bessel_j(n, x), bessel_y(n, x)};
}

Hankel01 hankel01(double x)
{
    require_positive(x);
    if (x > kAsymptoticSwitch) {
        return {hankel_asymptotic(0, x), hankel_asymptotic(1, x)};
    }
    if (x < kSeriesSwitch) {
        return hankel01_series(x);
    }
    const auto m = miller(1, x);
    const auto [y0, y1] = y01_neumann(m, x);
    return {Complex(m.j[0], y0), Complex(m.j[1], y1)};
}

double bessel_j0_zero(int m)
{
    if (m < 1) {
        throw Error(ErrorCode::InvalidInput, "zero index must be >= 1");
    }
    const double beta = (m - 0.25) * kPi;
    double x = beta + 1.0 / (8.0 * beta);
    for (int it = 0; it < 50; ++it) {
        const double step = bessel_j(0, x) / bessel_j(1, x);
        x += step;
        if (std::abs(step) < 1e-15 * x) {
            break;
        }
    }
    return x;
}

} // namespace scatter::specfun
