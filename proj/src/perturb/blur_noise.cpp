#include <algorithm>
#include <cmath>
#include <numbers>

#include "docrobust/errors.hpp"
#include "docrobust/perturb.hpp"

namespace docrobust {

Kernel2D defocus_kernel(int k)
{
    if (k < 0)
        throw ParameterError("defocus: K_g must be >= 0");
    if (k == 0)
        return Kernel2D::identity();
    const int size = 2 * k + 1;
    const double sigma = 0.3 * ((size - 1) * 0.5 - 1.0) + 0.8;
    return gaussian_kernel(size, sigma);
}

PerturbResult defocus_page(const AnnotatedPage& page, const SeverityParams& p)
{
    PerturbResult r;
    const Kernel2D k = defocus_kernel(p.k_g);
    r.realized["kernel_size"] = k.width();
    r.realized["sigma"] = p.k_g == 0 ? 0.0 : 0.3 * (p.k_g - 1.0) + 0.8;
    if (p.k_g == 0) {
        r.page = page;
        return r;
    }
    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = convolve(page.image, k);
    return r;
}

Kernel2D motion_kernel(int size, double theta_deg)
{
    if (size < 1 || size % 2 == 0)
        throw ParameterError("motion kernel size must be odd and >= 1");
    if (size == 1)
        return Kernel2D::identity();
    const int c = size / 2;
    const double line = 1.0 / size;
    // Horizontal line through the centre row, zero elsewhere.
    auto base = [&](int i, int j) { return (j == c && i >= 0 && i < size) ? line : 0.0; };
    const double t = theta_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(t);
    const double st = std::sin(t);
    std::vector<double> w(std::size_t(size) * std::size_t(size));
    double total = 0.0;
    for (int j = 0; j < size; ++j)
        for (int i = 0; i < size; ++i) {
            const double dx = i - c;
            const double dy = j - c;
            const double sx = ct * dx + st * dy + c;
            const double sy = -st * dx + ct * dy + c;
            const double fx = std::floor(sx);
            const double fy = std::floor(sy);
            const int x0 = int(fx);
            const int y0 = int(fy);
            const double tx = sx - fx;
            const double ty = sy - fy;
            const double v = base(x0, y0) * (1 - tx) * (1 - ty) + base(x0 + 1, y0) * tx * (1 - ty) +
                             base(x0, y0 + 1) * (1 - tx) * ty + base(x0 + 1, y0 + 1) * tx * ty;
            w[std::size_t(j) * std::size_t(size) + std::size_t(i)] = v;
            total += v;
        }
    for (double& v : w)
        v /= total;
    return {size, size, std::move(w)};
}

PerturbResult vibrate_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng)
{
    const double theta = p.angle ? *p.angle : rng.uniform(0.0, 180.0);
    PerturbResult r;
    r.realized["theta"] = theta;
    r.realized["kernel_size"] = p.k_m;
    if (p.k_m <= 1) {
        r.page = page;
        return r;
    }
    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = convolve(page.image, motion_kernel(p.k_m, theta));
    return r;
}

RasterImage compose_speckle(const RasterImage& img, const Plane& n_fg, const Plane& n_bg)
{
    if (n_fg.width() != img.width() || n_fg.height() != img.height() || !n_fg.same_shape(n_bg))
        throw ParameterError("compose_speckle: blob fields must match the image size");
    RasterImage out(img.width(), img.height(), img.channels());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) {
                const double v = normalize(img.at(x, y, c));
                out.at(x, y, c) = quantize(std::min(std::max(v, n_fg.at(x, y)), 1.0 - n_bg.at(x, y)));
            }
    return out;
}

namespace {

// Disc of full amplitude with a Gaussian rim, merged by maximum.
void render_blob(Plane& field, double cx, double cy, double radius, double amp)
{
    const double soft = 0.3 * radius + 0.5;
    const double reach = radius + 3.0 * soft;
    const int x0 = std::max(0, int(std::floor(cx - reach)));
    const int x1 = std::min(field.width() - 1, int(std::ceil(cx + reach)));
    const int y0 = std::max(0, int(std::floor(cy - reach)));
    const int y1 = std::min(field.height() - 1, int(std::ceil(cy + reach)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
            const double e = d <= radius ? 1.0 : std::exp(-(d - radius) * (d - radius) / (2.0 * soft * soft));
            field.at(x, y) = std::max(field.at(x, y), amp * e);
        }
}

} // namespace

PerturbResult speckle_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng)
{
    const int W = page.image.width();
    const int H = page.image.height();
    const int count = int(std::lround(p.d_b * double(W) * double(H)));
    PerturbResult r;
    r.realized["blobs_per_polarity"] = count;
    if (count == 0) {
        r.page = page;
        return r;
    }
    Plane fg(W, H), bg(W, H);
    double radius_sum = 0.0;
    for (Plane* field : {&fg, &bg})
        for (int i = 0; i < count; ++i) {
            const double cx = rng.uniform(0.0, W);
            const double cy = rng.uniform(0.0, H);
            const double radius = rng.uniform(1.0, 4.0) * p.level * rng.uniform(0.7, 1.3);
            const double amp = rng.uniform(0.7, 1.0);
            render_blob(*field, cx, cy, radius, amp);
            radius_sum += radius;
        }
    r.realized["mean_radius"] = radius_sum / (2.0 * count);
    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = compose_speckle(page.image, fg, bg);
    return r;
}

std::vector<Point2> fiber_path(Point2 start, std::span<const double> thetas, double step)
{
    std::vector<Point2> pts;
    pts.reserve(thetas.size() + 1);
    pts.push_back(start);
    double sx = 0.0, sy = 0.0;
    for (double t : thetas) {
        sx += std::cos(t) * step;
        sy += std::sin(t) * step;
        pts.push_back({start.x + sx, start.y + sy});
    }
    return pts;
}

PerturbResult texture_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng)
{
    const int W = page.image.width();
    const int H = page.image.height();
    constexpr double step = 1.5;
    constexpr double dark_strength = 0.25;
    constexpr double light_strength = 0.15;
    PerturbResult r;
    r.realized["fibers"] = p.n_f;
    if (p.n_f == 0) {
        r.realized["dark"] = 0;
        r.page = page;
        return r;
    }

    // Per-pixel survival factors; a fiber touches each pixel at most once.
    Plane keep_dark(W, H, 1.0), keep_light(W, H, 1.0);
    std::vector<int> last(std::size_t(W) * std::size_t(H), -1);
    int dark_count = 0;
    std::vector<double> thetas;
    for (int f = 0; f < p.n_f; ++f) {
        const double sx = std::clamp(rng.normal(0.5 * W, 0.35 * W), 0.0, std::nextafter(double(W), 0.0));
        const double sy = std::clamp(rng.normal(0.5 * H, 0.35 * H), 0.0, std::nextafter(double(H), 0.0));
        const int n = rng.uniform_int(20, 80);
        double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
        thetas.clear();
        for (int k = 0; k < n; ++k) {
            t = rng.cauchy(t, 0.15);
            thetas.push_back(t);
        }
        const bool dark = rng.bernoulli(0.5);
        dark_count += dark;
        Plane& keep = dark ? keep_dark : keep_light;
        const double factor = 1.0 - (dark ? dark_strength : light_strength);
        const auto pts = fiber_path({sx, sy}, thetas, step);
        auto mark = [&](double x, double y) {
            if (x < 0.0 || y < 0.0 || x >= W || y >= H)
                return;
            const int xi = int(x);
            const int yi = int(y);
            int& seen = last[std::size_t(yi) * std::size_t(W) + std::size_t(xi)];
            if (seen == f)
                return;
            seen = f;
            keep.at(xi, yi) *= factor;
        };
        mark(pts[0].x, pts[0].y);
        for (std::size_t k = 1; k < pts.size(); ++k) {
            // 0.5 px sub-steps keep the 1-px trace connected.
            for (int s = 1; s <= 3; ++s) {
                const double a = s / 3.0;
                mark(pts[k - 1].x + a * (pts[k].x - pts[k - 1].x), pts[k - 1].y + a * (pts[k].y - pts[k - 1].y));
            }
        }
    }
    r.realized["dark"] = dark_count;
    r.realized["light"] = p.n_f - dark_count;

    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = page.image;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const double kd = keep_dark.at(x, y);
            const double ml = 1.0 - keep_light.at(x, y);
            if (kd == 1.0 && ml == 0.0)
                continue;
            for (int c = 0; c < page.image.channels(); ++c) {
                const double v = normalize(page.image.at(x, y, c));
                r.page.image.at(x, y, c) = quantize((1.0 - ml) * (kd * v) + ml);
            }
        }
    return r;
}

} // namespace docrobust
