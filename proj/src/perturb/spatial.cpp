#include <cmath>
#include <numbers>

#include "docrobust/errors.hpp"
#include "docrobust/perturb.hpp"

namespace docrobust {

double draw_rotation_angle(const SeverityParams& p, SeededRng& rng)
{
    if (p.angle)
        return *p.angle;
    if (p.theta_min <= 0.0)
        return rng.uniform(-p.theta_max, p.theta_max);
    const double mag = rng.uniform(p.theta_min, p.theta_max);
    return rng.bernoulli(0.5) ? mag : -mag;
}

Matrix3 continuous_to_index(const Matrix3& continuous) noexcept
{
    return multiply(translation_matrix(-0.5, -0.5), multiply(continuous, translation_matrix(0.5, 0.5)));
}

namespace {

AnnotatedPage map_page(const AnnotatedPage& page, const Matrix3& continuous, int* dropped)
{
    AnnotatedPage out;
    out.page_id = page.page_id;
    out.image = warp_perspective(page.image, continuous_to_index(continuous));
    out.annotations = transform_annotations(
        page.annotations, [&](Point2 p) { return apply(continuous, p); }, page.image.width(), page.image.height(),
        dropped);
    return out;
}

nlohmann::json matrix_json(const Matrix3& m)
{
    nlohmann::json j = nlohmann::json::array();
    for (double v : m)
        j.push_back(v);
    return j;
}

} // namespace

PerturbResult rotate_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng)
{
    const double theta = draw_rotation_angle(p, rng);
    PerturbResult r;
    r.realized["theta"] = theta;
    r.realized["canvas"] = "fixed";
    if (theta == 0.0) {
        r.page = page;
        return r;
    }
    const Matrix3 m = rotation_matrix(theta * std::numbers::pi / 180.0, 0.5 * page.image.width(),
                                      0.5 * page.image.height());
    int dropped = 0;
    r.page = map_page(page, m, &dropped);
    r.realized["dropped_annotations"] = dropped;
    return r;
}

AnnotatedPage warp_with_noise(const AnnotatedPage& page, const Plane& rx, const Plane& ry, double sigma, double alpha)
{
    const int w = page.image.width();
    const int h = page.image.height();
    if (rx.width() != w || rx.height() != h || !rx.same_shape(ry))
        throw ParameterError("warp_with_noise: noise fields must match the image size");
    if (alpha == 0.0)
        return page;

    Plane dx = sigma > 0.0 ? gaussian_smooth_field(rx, sigma) : rx;
    Plane dy = sigma > 0.0 ? gaussian_smooth_field(ry, sigma) : ry;
    for (double& v : dx.values())
        v *= alpha;
    for (double& v : dy.values())
        v *= alpha;

    AnnotatedPage out;
    out.page_id = page.page_id;
    out.image = warp_displacement(page.image, dx, dy);

    // Content at source s lands where x + D(x) = s; solve by fixed point in
    // index coordinates, starting from the negated displacement at s.
    auto track = [&](Point2 p) {
        const double qx = p.x - 0.5;
        const double qy = p.y - 0.5;
        double x = qx - sample_bilinear(dx, qx, qy);
        double y = qy - sample_bilinear(dy, qx, qy);
        for (int it = 0; it < 50; ++it) {
            const double nx = qx - sample_bilinear(dx, x, y);
            const double ny = qy - sample_bilinear(dy, x, y);
            const bool done = std::abs(nx - x) < 1e-9 && std::abs(ny - y) < 1e-9;
            x = nx;
            y = ny;
            if (done)
                break;
        }
        return Point2{x + 0.5, y + 0.5};
    };
    out.annotations = transform_annotations(page.annotations, track, w, h);
    return out;
}

// Amplitude anchor: alpha = R_alpha * min(w, h) / warp_alpha_divisor.
inline constexpr double warp_alpha_divisor = 100.0;

PerturbResult warp_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng)
{
    const int w = page.image.width();
    const int h = page.image.height();
    const double base = std::min(w, h);
    const double sigma = p.r_sigma * base;
    const double alpha = p.r_alpha * base / warp_alpha_divisor;
    PerturbResult r;
    r.realized["sigma"] = sigma;
    r.realized["alpha"] = alpha;
    if (alpha == 0.0) {
        r.page = page;
        return r;
    }
    Plane rx(w, h), ry(w, h);
    for (double& v : rx.values())
        v = rng.uniform(-1.0, 1.0);
    for (double& v : ry.values())
        v = rng.uniform(-1.0, 1.0);
    r.page = warp_with_noise(page, rx, ry, sigma, alpha);
    return r;
}

namespace {

bool convex_like(const std::array<Point2, 4>& q) noexcept
{
    for (int i = 0; i < 4; ++i) {
        const Point2& a = q[std::size_t(i)];
        const Point2& b = q[std::size_t((i + 1) % 4)];
        const Point2& c = q[std::size_t((i + 2) % 4)];
        const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if (!(cross > 0.0))
            return false;
    }
    return true;
}

} // namespace

PerturbResult keystone_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng)
{
    const double W = page.image.width();
    const double H = page.image.height();
    PerturbResult r;
    if (p.r_k == 0.0) {
        r.page = page;
        r.realized["homography"] = matrix_json(identity_matrix());
        return r;
    }
    const std::array<Point2, 4> src = {{{0.0, 0.0}, {W, 0.0}, {W, H}, {0.0, H}}};
    constexpr int max_attempts = 8;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        std::array<Point2, 4> dst = src;
        nlohmann::json offsets = nlohmann::json::array();
        for (auto& c : dst) {
            const double ox = rng.normal(0.0, p.r_k * W);
            const double oy = rng.normal(0.0, p.r_k * H);
            c.x += ox;
            c.y += oy;
            offsets.push_back({ox, oy});
        }
        if (!quad_is_non_degenerate(dst) || !convex_like(dst))
            continue;
        const Matrix3 hm = solve_homography(src, dst);
        int dropped = 0;
        r.page = map_page(page, hm, &dropped);
        r.realized["corner_offsets"] = offsets;
        r.realized["attempts"] = attempt;
        r.realized["homography"] = matrix_json(hm);
        r.realized["dropped_annotations"] = dropped;
        return r;
    }
    throw TransformError("keystoning: no valid corner draw after 8 attempts");
}

} // namespace docrobust
