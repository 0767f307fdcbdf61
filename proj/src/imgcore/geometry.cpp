#include "docrobust/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace docrobust {

Matrix3 identity_matrix() noexcept { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Matrix3 translation_matrix(double tx, double ty) noexcept { return {1, 0, tx, 0, 1, ty, 0, 0, 1}; }

Matrix3 rotation_matrix(double theta, double cx, double cy) noexcept
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c, -s, cx - c * cx + s * cy, s, c, cy - s * cx - c * cy, 0, 0, 1};
}

Matrix3 multiply(const Matrix3& a, const Matrix3& b) noexcept
{
    Matrix3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k)
                s += a[std::size_t(3 * i + k)] * b[std::size_t(3 * k + j)];
            r[std::size_t(3 * i + j)] = s;
        }
    return r;
}

double determinant(const Matrix3& m) noexcept
{
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Matrix3 invert(const Matrix3& m)
{
    const double det = determinant(m);
    if (!(std::abs(det) > 1e-12))
        throw TransformError("matrix is singular (|det| <= 1e-12)");
    const double inv = 1.0 / det;
    return {(m[4] * m[8] - m[5] * m[7]) * inv, (m[2] * m[7] - m[1] * m[8]) * inv, (m[1] * m[5] - m[2] * m[4]) * inv,
            (m[5] * m[6] - m[3] * m[8]) * inv, (m[0] * m[8] - m[2] * m[6]) * inv, (m[2] * m[3] - m[0] * m[5]) * inv,
            (m[3] * m[7] - m[4] * m[6]) * inv, (m[1] * m[6] - m[0] * m[7]) * inv, (m[0] * m[4] - m[1] * m[3]) * inv};
}

Point2 apply(const Matrix3& m, Point2 p) noexcept
{
    const double x = m[0] * p.x + m[1] * p.y + m[2];
    const double y = m[3] * p.x + m[4] * p.y + m[5];
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    return {x / w, y / w};
}

bool quad_is_non_degenerate(const std::array<Point2, 4>& q) noexcept
{
    double extent = 0.0;
    for (const auto& a : q)
        for (const auto& b : q)
            extent = std::max({extent, std::abs(a.x - b.x), std::abs(a.y - b.y)});
    if (!(extent > 0.0))
        return false;
    const double tol = 1e-9 * extent * extent;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k) {
                const double cross = (q[std::size_t(j)].x - q[std::size_t(i)].x) * (q[std::size_t(k)].y - q[std::size_t(i)].y) -
                                     (q[std::size_t(j)].y - q[std::size_t(i)].y) * (q[std::size_t(k)].x - q[std::size_t(i)].x);
                if (std::abs(cross) <= tol)
                    return false;
            }
    return true;
}

namespace {

// Similarity transform moving the centroid to the origin with mean distance sqrt(2).
Matrix3 conditioning(const std::array<Point2, 4>& pts)
{
    double cx = 0.0, cy = 0.0;
    for (const auto& p : pts) {
        cx += p.x;
        cy += p.y;
    }
    cx /= 4.0;
    cy /= 4.0;
    double d = 0.0;
    for (const auto& p : pts)
        d += std::hypot(p.x - cx, p.y - cy);
    d /= 4.0;
    const double s = std::sqrt(2.0) / d;
    return {s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1};
}

} // namespace

Matrix3 solve_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst)
{
    if (!quad_is_non_degenerate(src) || !quad_is_non_degenerate(dst))
        throw TransformError("homography: degenerate corner configuration (three points collinear)");

    const Matrix3 ts = conditioning(src);
    const Matrix3 td = conditioning(dst);
    std::array<Point2, 4> s{}, d{};
    for (std::size_t i = 0; i < 4; ++i) {
        s[i] = apply(ts, src[i]);
        d[i] = apply(td, dst[i]);
    }

    // Rows: h0 x + h1 y + h2 - h6 x X - h7 y X = X, likewise for Y.
    double a[8][9] = {};
    for (std::size_t i = 0; i < 4; ++i) {
        double* rx = a[2 * i];
        double* ry = a[2 * i + 1];
        rx[0] = s[i].x, rx[1] = s[i].y, rx[2] = 1.0;
        rx[6] = -s[i].x * d[i].x, rx[7] = -s[i].y * d[i].x, rx[8] = d[i].x;
        ry[3] = s[i].x, ry[4] = s[i].y, ry[5] = 1.0;
        ry[6] = -s[i].x * d[i].y, ry[7] = -s[i].y * d[i].y, ry[8] = d[i].y;
    }
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        if (std::abs(a[pivot][col]) < 1e-12)
            throw TransformError("homography: singular correspondence system");
        if (pivot != col)
            for (int k = 0; k < 9; ++k)
                std::swap(a[col][k], a[pivot][k]);
        for (int r = 0; r < 8; ++r) {
            if (r == col)
                continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0)
                continue;
            for (int k = col; k < 9; ++k)
                a[r][k] -= f * a[col][k];
        }
    }
    Matrix3 hn{};
    for (int i = 0; i < 8; ++i)
        hn[std::size_t(i)] = a[i][8] / a[i][i];
    hn[8] = 1.0;

    Matrix3 h = multiply(invert(td), multiply(hn, ts));
    if (std::abs(h[8]) < 1e-300)
        throw TransformError("homography: cannot normalize H[2][2]");
    const double n = h[8];
    for (double& v : h)
        v /= n;
    return h;
}

double sample_bilinear(const RasterImage& img, double x, double y, int channel, std::uint8_t fill) noexcept
{
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    // Far outside: every neighbour is fill.
    if (fx < -1.0 || fy < -1.0 || fx > double(img.width()) || fy > double(img.height()))
        return normalize(fill);
    const int x0 = int(fx);
    const int y0 = int(fy);
    const double tx = x - fx;
    const double ty = y - fy;
    auto px = [&](int xi, int yi) {
        if (xi < 0 || yi < 0 || xi >= img.width() || yi >= img.height())
            return normalize(fill);
        return normalize(img.at(xi, yi, channel));
    };
    const double top = px(x0, y0) * (1.0 - tx) + px(x0 + 1, y0) * tx;
    const double bot = px(x0, y0 + 1) * (1.0 - tx) + px(x0 + 1, y0 + 1) * tx;
    return top * (1.0 - ty) + bot * ty;
}

double sample_bilinear(const Plane& plane, double x, double y) noexcept
{
    const double cx = std::clamp(x, 0.0, double(plane.width() - 1));
    const double cy = std::clamp(y, 0.0, double(plane.height() - 1));
    const int x0 = int(std::floor(cx));
    const int y0 = int(std::floor(cy));
    const int x1 = std::min(x0 + 1, plane.width() - 1);
    const int y1 = std::min(y0 + 1, plane.height() - 1);
    const double tx = cx - x0;
    const double ty = cy - y0;
    const double top = plane.at(x0, y0) * (1.0 - tx) + plane.at(x1, y0) * tx;
    const double bot = plane.at(x0, y1) * (1.0 - tx) + plane.at(x1, y1) * tx;
    return top * (1.0 - ty) + bot * ty;
}

RasterImage warp_perspective(const RasterImage& img, const Matrix3& forward, std::uint8_t fill)
{
    if (img.empty())
        throw ParameterError("warp_perspective: empty image");
    const Matrix3 inv = invert(forward);
    RasterImage out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double sx = inv[0] * x + inv[1] * y + inv[2];
            const double sy = inv[3] * x + inv[4] * y + inv[5];
            const double sw = inv[6] * x + inv[7] * y + inv[8];
            for (int c = 0; c < img.channels(); ++c)
                out.at(x, y, c) = sw > 0.0 ? quantize(sample_bilinear(img, sx / sw, sy / sw, c, fill)) : fill;
        }
    return out;
}

RasterImage warp_displacement(const RasterImage& img, const Plane& dx, const Plane& dy, std::uint8_t fill)
{
    if (dx.width() != img.width() || dx.height() != img.height() || !dx.same_shape(dy))
        throw ParameterError("warp_displacement: displacement fields must match the image size");
    RasterImage out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double sx = x + dx.at(x, y);
            const double sy = y + dy.at(x, y);
            for (int c = 0; c < img.channels(); ++c)
                out.at(x, y, c) = quantize(sample_bilinear(img, sx, sy, c, fill));
        }
    return out;
}

} // namespace docrobust
