#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scatter {

enum class ErrorCode {
    SelfIntersecting,
    DegenerateEdge,
    TooFewVertices,
    OverlappingPolygons,
    SeedInsideScatterer,
    NegativeOrder,
    NonpositiveArgument,
    FreeCellsUnsupported,
    ResolutionTooLow,
    SingularSystem,
    PointInsideScatterer,
    TooCloseToBoundary,
    KaTooLarge,
    PointInsideDisk,
    ResolutionTooCoarse,
    DisconnectedAdjacency,
    NoRegularBoundaryPoint,
    TargetOnCriticalPoint,
    NoRouteToInfinity,
    StartInvalid,
    WindowTooSmall,
    InvalidInput,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace scatter
