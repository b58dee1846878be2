#pragma once

#include "scatter/vec2.hpp"

#include <array>
#include <complex>

namespace scatter {

using Complex = std::complex<double>;

/// Value and gradient of a (possibly complex) scalar field at one point.
struct FieldValue {
    Complex value;
    std::array<Complex, 2> gradient;

    [[nodiscard]] Vec2 real_gradient() const { return {gradient[0].real(), gradient[1].real()}; }
    [[nodiscard]] Vec2 imag_gradient() const { return {gradient[0].imag(), gradient[1].imag()}; }
};

enum class PointStatus { InG, InD, NearBoundary };

/// A Helmholtz solution that can be probed pointwise, e.g. a computed total field or an
/// analytic test field. The nodal and path machinery operates on v = Re u.
class Field {
public:
    virtual ~Field() = default;

    /// Throws if status(x) is not InG.
    [[nodiscard]] virtual FieldValue eval(Vec2 x) const = 0;
    [[nodiscard]] virtual PointStatus status(Vec2 x) const = 0;
    [[nodiscard]] virtual double wavenumber() const = 0;
    /// False for real-valued fields whose imaginary part vanishes identically.
    [[nodiscard]] virtual bool complex_valued() const = 0;
};

} // namespace scatter
