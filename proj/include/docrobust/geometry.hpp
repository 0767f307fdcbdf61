#pragma once

#include <array>
#include <cstdint>

#include "docrobust/raster.hpp"

namespace docrobust {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

/// Row-major 3x3 matrix acting on homogeneous column vectors.
using Matrix3 = std::array<double, 9>;

Matrix3 identity_matrix() noexcept;
Matrix3 translation_matrix(double tx, double ty) noexcept;
/// Rotation by theta (radians) about (cx, cy): p' = R (p - c) + c with
/// R = [[cos, -sin], [sin, cos]].
Matrix3 rotation_matrix(double theta, double cx, double cy) noexcept;
Matrix3 multiply(const Matrix3& a, const Matrix3& b) noexcept;
double determinant(const Matrix3& m) noexcept;
/// Throws TransformError when |det| <= 1e-12.
Matrix3 invert(const Matrix3& m);
/// Homogeneous multiply followed by the divide by w'.
Point2 apply(const Matrix3& m, Point2 p) noexcept;

/// Homography with H * src_i ~ dst_i for the four pairs, normalized so that
/// H[2][2] = 1. Throws TransformError when three points of either quad are
/// collinear or the system is singular.
Matrix3 solve_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst);

/// True when no three of the four points are collinear (relative tolerance).
bool quad_is_non_degenerate(const std::array<Point2, 4>& quad) noexcept;

inline constexpr std::uint8_t default_fill = 255;

/// Bilinear sample at pixel-index coordinates; neighbours outside the image
/// contribute the fill value. Returns a normalized value.
double sample_bilinear(const RasterImage& img, double x, double y, int channel, std::uint8_t fill) noexcept;
double sample_bilinear(const Plane& plane, double x, double y) noexcept;

/// Inverse-mapped perspective warp. `forward` maps source pixel-index
/// coordinates to destination pixel-index coordinates.
RasterImage warp_perspective(const RasterImage& img, const Matrix3& forward, std::uint8_t fill = default_fill);

/// out(x, y) = in(x + dx(x, y), y + dy(x, y)), bilinear, constant fill.
RasterImage warp_displacement(const RasterImage& img, const Plane& dx, const Plane& dy,
                              std::uint8_t fill = default_fill);

} // namespace docrobust
