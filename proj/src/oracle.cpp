#include "scatter/oracle.hpp"

#include "scatter/error.hpp"
#include "scatter/specfun.hpp"

#include <cmath>
#include <numbers>

namespace scatter::oracle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

void check_ka(double k, double a)
{
    if (!(k > 0.0) || !(a > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "wavenumber and radius must be positive");
    }
    if (k * a > kMaxKa) {
        throw Error(ErrorCode::KaTooLarge, "ka above the validated range of the modal series");
    }
}

// c_n = J_n(ka) / H_n(ka), n = 0..nmax.
std::vector<Complex> coefficients(double ka, int nmax)
{
    const auto j = specfun::bessel_j_sequence(nmax, ka);
    const auto y = specfun::bessel_y_sequence(nmax, ka);
    std::vector<Complex> c(static_cast<std::size_t>(nmax) + 1);
    for (std::size_t n = 0; n < c.size(); ++n) {
        c[n] = j[n] / Complex(j[n], y[n]);
    }
    return c;
}

// i^n
Complex ipow(int n)
{
    switch (n % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

} // namespace

int disk_truncation(double ka) { return static_cast<int>(std::ceil(ka)) + 20; }

solver::FarFieldPattern disk_far_field(double k, double a, Vec2 omega, int directions, int extra_terms)
{
    check_ka(k, a);
    if (directions < 1) {
        throw Error(ErrorCode::InvalidInput, "need at least one direction");
    }
    const auto wave = solver::make_wave(k, omega);
    const int nmax = disk_truncation(k * a) + extra_terms;
    const auto c = coefficients(k * a, nmax);
    const double theta_w = std::atan2(wave.omega.y, wave.omega.x);
    const Complex scale = -std::sqrt(2.0 / (kPi * k)) * std::exp(-kI * (kPi / 4.0));

    solver::FarFieldPattern f;
    f.wave = wave;
    for (int m = 0; m < directions; ++m) {
        const double th = 2.0 * kPi * m / directions;
        const double psi = th - theta_w;
        // Sum from the highest order down so the small terms accumulate first.
        Complex s;
        for (int n = nmax; n >= 1; --n) {
            s += 2.0 * c[static_cast<std::size_t>(n)] * std::cos(n * psi);
        }
        s += c[0];
        f.directions.push_back({std::cos(th), std::sin(th)});
        f.values.push_back(scale * s);
    }
    return f;
}

double disk_tail(double k, double a)
{
    check_ka(k, a);
    const int nmax = disk_truncation(k * a);
    const auto c = coefficients(k * a, nmax + 10);
    double tail = 0.0;
    for (int n = nmax + 1; n <= nmax + 10; ++n) {
        tail += 2.0 * std::abs(c[static_cast<std::size_t>(n)]);
    }
    return tail;
}

FieldValue disk_total_field(double k, double a, Vec2 omega, Vec2 x)
{
    check_ka(k, a);
    const double r = norm(x);
    if (r < a * (1.0 - 1e-12)) {
        throw Error(ErrorCode::PointInsideDisk, "evaluation point lies inside the disk");
    }
    const auto wave = solver::make_wave(k, omega);
    const int nmax = disk_truncation(k * a);
    const auto c = coefficients(k * a, nmax);
    const auto jr = specfun::bessel_j_sequence(nmax + 1, k * r);
    const auto yr = specfun::bessel_y_sequence(nmax + 1, k * r);
    const double theta = std::atan2(x.y, x.x);
    const double psi = theta - std::atan2(wave.omega.y, wave.omega.x);

    // u^s = -sum_n eps_n i^n c_n H_n(kr) cos(n psi), eps_0 = 1, eps_n = 2.
    Complex us;
    Complex dr;
    Complex dtheta;
    for (int n = nmax; n >= 0; --n) {
        const auto un = static_cast<std::size_t>(n);
        const Complex h{jr[un], yr[un]};
        const Complex hnext{jr[un + 1], yr[un + 1]};
        const Complex dh = k * ((n / (k * r)) * h - hnext);  // d/dr H_n(kr)
        const double eps = n == 0 ? 1.0 : 2.0;
        const Complex w = -eps * ipow(n) * c[un];
        us += w * h * std::cos(n * psi);
        dr += w * dh * std::cos(n * psi);
        dtheta += -w * h * static_cast<double>(n) * std::sin(n * psi);
    }
    const Vec2 er{std::cos(theta), std::sin(theta)};
    const Vec2 et = perp(er);
    const FieldValue inc = solver::incident_field(wave, x);
    FieldValue u;
    u.value = inc.value + us;
    u.gradient[0] = inc.gradient[0] + dr * er.x + dtheta * et.x / r;
    u.gradient[1] = inc.gradient[1] + dr * er.y + dtheta * et.y / r;
    return u;
}

SyntheticField plane_standing(double k, Vec2 n)
{
    SyntheticField f;
    f.kind = SyntheticField::Kind::PlaneStanding;
    f.k = k;
    f.normal = normalized(n);
    return f;
}

SyntheticField radial_bessel(double k, Vec2 center)
{
    SyntheticField f;
    f.kind = SyntheticField::Kind::RadialBessel;
    f.k = k;
    f.center = center;
    return f;
}

SyntheticField sum_of_plane_waves(double k, std::vector<PlaneTerm> terms)
{
    SyntheticField f;
    f.kind = SyntheticField::Kind::SumOfPlaneWaves;
    f.k = k;
    for (auto& t : terms) {
        t.direction = normalized(t.direction);
    }
    f.terms = std::move(terms);
    return f;
}

RealValue synthetic_eval(const SyntheticField& f, Vec2 x)
{
    const double k = f.k;
    switch (f.kind) {
    case SyntheticField::Kind::PlaneStanding: {
        const double p = k * dot(f.normal, x);
        return {std::sin(p), k * std::cos(p) * f.normal};
    }
    case SyntheticField::Kind::RadialBessel: {
        const Vec2 d = x - f.center;
        const double r = norm(d);
        if (r == 0.0) {
            return {1.0, {}};
        }
        const double j1 = specfun::bessel_j(1, k * r);
        return {specfun::bessel_j(0, k * r), (-k * j1 / r) * d};
    }
    case SyntheticField::Kind::SumOfPlaneWaves: {
        RealValue v;
        for (const auto& t : f.terms) {
            const double p = k * dot(t.direction, x) + t.phase;
            v.value += t.amplitude * std::sin(p);
            v.gradient += (t.amplitude * k * std::cos(p)) * t.direction;
        }
        return v;
    }
    }
    return {};
}

FieldValue SyntheticAdapter::eval(Vec2 x) const
{
    if (status(x) == PointStatus::InD) {
        throw Error(ErrorCode::PointInsideScatterer, "evaluation point lies in the obstacle");
    }
    const auto v = synthetic_eval(f_, x);
    return {v.value, {v.gradient.x, v.gradient.y}};
}

PointStatus SyntheticAdapter::status(Vec2 x) const
{
    if (!s_.empty() && geometry::classify_point(s_, x) != geometry::PointClass::Exterior) {
        return PointStatus::InD;
    }
    return PointStatus::InG;
}

} // namespace scatter::oracle
