#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace cavelast {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Ordered vertex list of a closed curve; the closing segment back to the
// first vertex is implicit.
using Polyline = std::vector<Vec2>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value was requested outside the domain of a density (det F <= 0, z = 0).
class DomainError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& key, int line, const std::string& what)
        : Error(format(key, line, what)), key_(key), line_(line) {}

    const std::string& key() const { return key_; }
    int line() const { return line_; }

private:
    static std::string format(const std::string& key, int line, const std::string& what) {
        std::string msg = "config error";
        if (line > 0) msg += " at line " + std::to_string(line);
        if (!key.empty()) msg += " (key '" + key + "')";
        return msg + ": " + what;
    }

    std::string key_;
    int line_;
};

// Energy evaluated on a deformation with a non-positive element Jacobian.
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, int triangle)
        : Error(what + " (triangle " + std::to_string(triangle) + ")"), triangle_(triangle) {}

    int triangle() const { return triangle_; }

private:
    int triangle_;
};

// Query point lies on a loop, where the degree is undefined.
class OnBoundaryError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    PreconditionError(const std::string& what, double bound)
        : Error(what), bound_(bound) {}

    // Admissible bound associated with the violated precondition.
    double bound() const { return bound_; }

private:
    double bound_;
};

inline Mat2 cofactor(const Mat2& F) {
    Mat2 c;
    c << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
    return c;
}

// Rotation by +90 degrees.
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace cavelast
