#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace lcbf {

using Vec2 = Eigen::Vector2d;

enum class ErrorKind {
    Parse,
    Validation,
    InvalidArgument,
    Geometry,
    DegenerateTrainingSet,
    HardMarginInfeasible,
    StartUnsafe,
    Io,
};

// Single exception type for the library; the C API maps `kind()` onto status codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Value and gradient of a scalar barrier over the plane. Positive means safe.
class Barrier {
public:
    virtual ~Barrier() = default;
    virtual double value(const Vec2& x) const = 0;
    virtual Vec2 gradient(const Vec2& x) const = 0;
};

}  // namespace lcbf
