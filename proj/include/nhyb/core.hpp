#pragma once

/// Basic value types shared by every module: 2D points/vectors, 2x2 matrices
/// and the library's exception type.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nhyb {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product.
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
/// Twice the signed area of (a, b, c); positive for counterclockwise order.
constexpr double orient2d(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

/// Dense 2x2 matrix, row-major. Coefficient fields are symmetric in practice,
/// but the Nitsche form needs the transpose explicitly so the type stays general.
struct Mat2 {
    double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 scalar(double s) { return {s, 0.0, 0.0, s}; }
    static constexpr Mat2 diag(double a, double b) { return {a, 0.0, 0.0, b}; }
    static constexpr Mat2 symmetric(double a11, double a12, double a22) { return {a11, a12, a12, a22}; }

    constexpr Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, yx * v.x + yy * v.y}; }
    constexpr Mat2 operator+(const Mat2& o) const { return {xx + o.xx, xy + o.xy, yx + o.yx, yy + o.yy}; }
    constexpr Mat2 operator-(const Mat2& o) const { return {xx - o.xx, xy - o.xy, yx - o.yx, yy - o.yy}; }
    constexpr Mat2 operator*(double s) const { return {xx * s, xy * s, yx * s, yy * s}; }
    constexpr Mat2 transposed() const { return {xx, yx, xy, yy}; }
    constexpr double trace() const { return xx + yy; }
    constexpr double det() const { return xx * yy - xy * yx; }
    double frobenius() const { return std::sqrt(xx * xx + xy * xy + yx * yx + yy * yy); }

    /// Eigenvalues of the symmetric part, ascending.
    std::array<double, 2> sym_eigenvalues() const {
        const double a = xx, d = yy, b = 0.5 * (xy + yx);
        const double mean = 0.5 * (a + d);
        const double rad = std::hypot(0.5 * (a - d), b);
        return {mean - rad, mean + rad};
    }
    constexpr bool operator==(const Mat2&) const = default;
};

constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }

enum class ErrorCode {
    InvalidArgument,
    BufferEscapesDomain,
    DegenerateShape,
    MeshingFailed,
    NestingViolated,
    NoInterfaceElements,
    RingVertexOffBoundary,
    NonCoercive,
    UntaggedBoundary,
    CoverageGap,
    QuadratureOrderTooLow,
    PointOutsideMesh,
    BadBounds,
    NonzeroRhoOnInterface,
    NotConverged,
    Breakdown,
    CellSolveFailed,
    EmptyRegion,
    Io,
    Config,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::BufferEscapesDomain: return "BufferEscapesDomain";
        case ErrorCode::DegenerateShape: return "DegenerateShape";
        case ErrorCode::MeshingFailed: return "MeshingFailed";
        case ErrorCode::NestingViolated: return "NestingViolated";
        case ErrorCode::NoInterfaceElements: return "NoInterfaceElements";
        case ErrorCode::RingVertexOffBoundary: return "RingVertexOffBoundary";
        case ErrorCode::NonCoercive: return "NonCoercive";
        case ErrorCode::UntaggedBoundary: return "UntaggedBoundary";
        case ErrorCode::CoverageGap: return "CoverageGap";
        case ErrorCode::QuadratureOrderTooLow: return "QuadratureOrderTooLow";
        case ErrorCode::PointOutsideMesh: return "PointOutsideMesh";
        case ErrorCode::BadBounds: return "BadBounds";
        case ErrorCode::NonzeroRhoOnInterface: return "NonzeroRhoOnInterface";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::Breakdown: return "Breakdown";
        case ErrorCode::CellSolveFailed: return "CellSolveFailed";
        case ErrorCode::EmptyRegion: return "EmptyRegion";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

constexpr double pi = 3.14159265358979323846;

}  // namespace nhyb
