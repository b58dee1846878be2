#pragma once

#include <complex>
#include <vector>

// Bessel functions of the first and second kind and Hankel functions of the first
// kind for integer order and real positive argument.
//
// Moderate arguments use Miller's backward recurrence for J_n normalized by
// J_0 + 2 sum J_2k = 1, with Y_0 and Y_1 from their Neumann series in J_2k. Large
// arguments use the Hankel asymptotic expansion, and the kernel pair H_0, H_1 uses the
// ascending series for small arguments. Higher orders of Y come from upward recurrence.
namespace scatter::specfun {

using Complex = std::complex<double>;

/// Arguments above this use the asymptotic expansion for orders 0 and 1.
inline constexpr double kAsymptoticSwitch = 20.0;
/// Below this, orders 0 and 1 come from the ascending series.
inline constexpr double kSeriesSwitch = 2.0;
inline constexpr double kEulerGamma = 0.57721566490153286061;

double bessel_j(int n, double x);
double bessel_y(int n, double x);
Complex hankel1(int n, double x);

/// J_0..J_nmax at x >= 0.
std::vector<double> bessel_j_sequence(int nmax, double x);
/// Y_0..Y_nmax at x > 0.
std::vector<double> bessel_y_sequence(int nmax, double x);

struct Hankel01 {
    Complex h0;
    Complex h1;
};

/// H_0^(1)(x) and H_1^(1)(x) in one pass; hot path of the layer-potential kernels.
Hankel01 hankel01(double x);

/// m-th positive zero of J_0 by Newton iteration from McMahon's estimate.
double bessel_j0_zero(int m);

} // namespace scatter::specfun
