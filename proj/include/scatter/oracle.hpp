#pragma once

#include "scatter/field.hpp"
#include "scatter/geometry.hpp"
#include "scatter/solver.hpp"

#include <vector>

// Reference solutions: the sound-soft circular cylinder by its modal series, and real
// analytic Helmholtz fields for exercising the nodal and path code.
namespace scatter::oracle {

inline constexpr double kMaxKa = 30.0;

/// ceil(ka) + 20.
int disk_truncation(double ka);

/// Far-field pattern of the sound-soft disk of radius a centered at the origin, at M
/// uniform directions. `extra_terms` extends the truncation. Throws KaTooLarge.
solver::FarFieldPattern disk_far_field(double k, double a, Vec2 omega, int directions, int extra_terms = 0);

/// Sum of |J_n(ka) / H_n(ka)| over the ten orders past the truncation.
double disk_tail(double k, double a);

/// Total field and gradient outside the disk. Throws KaTooLarge, PointInsideDisk.
FieldValue disk_total_field(double k, double a, Vec2 omega, Vec2 x);

/// One term amplitude * sin(k direction.x + phase).
struct PlaneTerm {
    Vec2 direction;
    double amplitude = 1.0;
    double phase = 0.0;
};

struct SyntheticField {
    enum class Kind { PlaneStanding, RadialBessel, SumOfPlaneWaves } kind = Kind::PlaneStanding;
    double k = 1.0;
    Vec2 normal{1.0, 0.0};         // PlaneStanding
    Vec2 center;                   // RadialBessel
    std::vector<PlaneTerm> terms;  // SumOfPlaneWaves
};

/// sin(k n.x).
SyntheticField plane_standing(double k, Vec2 n);
/// J_0(k |x - center|).
SyntheticField radial_bessel(double k, Vec2 center = {});
SyntheticField sum_of_plane_waves(double k, std::vector<PlaneTerm> terms);

struct RealValue {
    double value = 0.0;
    Vec2 gradient;
};

RealValue synthetic_eval(const SyntheticField& f, Vec2 x);

/// A synthetic field seen through the Field interface, with points of an optional
/// scatterer reported as InD.
class SyntheticAdapter final : public Field {
public:
    explicit SyntheticAdapter(SyntheticField f, geometry::Scatterer s = {}) : f_(std::move(f)), s_(std::move(s)) {}

    [[nodiscard]] FieldValue eval(Vec2 x) const override;
    [[nodiscard]] PointStatus status(Vec2 x) const override;
    [[nodiscard]] double wavenumber() const override { return f_.k; }
    [[nodiscard]] bool complex_valued() const override { return false; }
    [[nodiscard]] const SyntheticField& field() const { return f_; }

private:
    SyntheticField f_;
    geometry::Scatterer s_;
};

} // namespace scatter::oracle
