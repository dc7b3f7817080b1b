#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace splitfit {

using Vec3 = Eigen::Vector3d;

/// Base class for all recoverable pipeline errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInput : Error {
    using Error::Error;
};
struct GridTooSmall : Error {
    using Error::Error;
};
struct OutOfStencil : Error {
    using Error::Error;
};
struct ResolutionMismatch : Error {
    using Error::Error;
};
struct MalformedFile : Error {
    using Error::Error;
};
struct ValueOutOfRange : Error {
    using Error::Error;
};
struct NoCells : Error {
    using Error::Error;
};
struct TooFewPoints : Error {
    using Error::Error;
};
struct NonConvergent : Error {
    using Error::Error;
};
struct AllKindsFailed : Error {
    using Error::Error;
};
struct NoModelFound : Error {
    using Error::Error;
};
struct NoIntersection : Error {
    using Error::Error;
};
struct InconsistentTopology : Error {
    using Error::Error;
};
struct EmptyExtent : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct SchemaMismatch : Error {
    using Error::Error;
};

}  // namespace splitfit
