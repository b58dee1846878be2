#include "scatter/error.hpp"

namespace scatter {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::SelfIntersecting: return "SelfIntersecting";
    case ErrorCode::DegenerateEdge: return "DegenerateEdge";
    case ErrorCode::TooFewVertices: return "TooFewVertices";
    case ErrorCode::OverlappingPolygons: return "OverlappingPolygons";
    case ErrorCode::SeedInsideScatterer: return "SeedInsideScatterer";
    case ErrorCode::NegativeOrder: return "NegativeOrder";
    case ErrorCode::NonpositiveArgument: return "NonpositiveArgument";
    case ErrorCode::FreeCellsUnsupported: return "FreeCellsUnsupported";
    case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::PointInsideScatterer: return "PointInsideScatterer";
    case ErrorCode::TooCloseToBoundary: return "TooCloseToBoundary";
    case ErrorCode::KaTooLarge: return "KaTooLarge";
    case ErrorCode::PointInsideDisk: return "PointInsideDisk";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::DisconnectedAdjacency: return "DisconnectedAdjacency";
    case ErrorCode::NoRegularBoundaryPoint: return "NoRegularBoundaryPoint";
    case ErrorCode::TargetOnCriticalPoint: return "TargetOnCriticalPoint";
    case ErrorCode::NoRouteToInfinity: return "NoRouteToInfinity";
    case ErrorCode::StartInvalid: return "StartInvalid";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

} // namespace scatter
