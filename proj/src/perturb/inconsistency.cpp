#include <algorithm>
#include <climits>
#include <cmath>
#include <new>
#include <numbers>

#include "docrobust/errors.hpp"
#include "docrobust/perturb.hpp"

namespace docrobust {

namespace {

// Even-odd scanline fill of one polygon into `plane`, sampling at pixel centres.
void fill_polygon(Plane& plane, const Polygon& poly, double value)
{
    if (poly.size() < 3)
        return;
    std::vector<double> xs;
    for (int y = 0; y < plane.height(); ++y) {
        const double yc = y + 0.5;
        xs.clear();
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Point2& a = poly[i];
            const Point2& b = poly[(i + 1) % poly.size()];
            if ((a.y <= yc) == (b.y <= yc))
                continue;
            xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const int from = std::max(0, int(std::ceil(xs[k] - 0.5)));
            const int to = std::min(plane.width() - 1, int(std::ceil(xs[k + 1] - 0.5)) - 1);
            for (int x = from; x <= to; ++x)
                plane.at(x, y) = value;
        }
    }
}

} // namespace

Plane illumination_mask(int width, int height, std::span<const Polygon> polygons)
{
    Plane mask(width, height, 1.0);
    for (const auto& poly : polygons)
        fill_polygon(mask, poly, 0.0);
    if (polygons.empty())
        return mask;
    Plane blurred = gaussian_smooth_field(mask, 0.05 * std::min(width, height));
    for (double& v : blurred.values())
        v = std::clamp(v, 0.0, 1.0);
    return blurred;
}

RasterImage apply_illumination(const RasterImage& img, const Plane& mask, bool glare, double strength)
{
    if (mask.width() != img.width() || mask.height() != img.height())
        throw ParameterError("apply_illumination: mask size must match the image");
    RasterImage out(img.width(), img.height(), img.channels());
    const double lift = strength / 255.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double m = mask.at(x, y);
            for (int c = 0; c < img.channels(); ++c) {
                const double v = normalize(img.at(x, y, c));
                out.at(x, y, c) =
                    quantize(glare ? std::min(1.0, v + lift * (1.0 - m)) : v * (m + strength * (1.0 - m)));
            }
        }
    return out;
}

PerturbResult illuminate_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng)
{
    const int W = page.image.width();
    const int H = page.image.height();
    const bool glare = p.glare ? *p.glare : rng.bernoulli(0.5);
    const int n_poly = rng.uniform_int(1, 3);
    std::vector<Polygon> polys;
    nlohmann::json jp = nlohmann::json::array();
    for (int i = 0; i < n_poly; ++i) {
        const int nv = rng.uniform_int(5, 8);
        const Point2 c{rng.uniform(0.0, W), rng.uniform(0.0, H)};
        const double base = rng.uniform(0.15, 0.35) * std::min(W, H);
        std::vector<double> angles(static_cast<std::size_t>(nv));
        for (double& a : angles)
            a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        std::sort(angles.begin(), angles.end());
        Polygon poly;
        nlohmann::json jv = nlohmann::json::array();
        for (double a : angles) {
            const double rad = base * rng.uniform(0.6, 1.0);
            poly.push_back({c.x + rad * std::cos(a), c.y + rad * std::sin(a)});
            jv.push_back({poly.back().x, poly.back().y});
        }
        polys.push_back(std::move(poly));
        jp.push_back(jv);
    }
    const double strength = glare ? p.v_l : p.v_s;
    PerturbResult r;
    r.realized["mode"] = glare ? "glare" : "shadow";
    r.realized["strength"] = strength;
    r.realized["polygons"] = jp;
    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = apply_illumination(page.image, illumination_mask(W, H, polys), glare, strength);
    return r;
}

namespace {

struct AxisSample {
    int i0, i1;
    float t;
};

// Per-channel supersampled morphology, processed in tiles. A tile whose
// source neighbourhood is flat reproduces that value exactly, so it is
// copied through instead of being expanded.
void ink_channel(const RasterImage& img, int channel, const StructuringElement& se, MorphMode mode, int S,
                 RasterImage& out)
{
    const int W = img.width();
    const int H = img.height();
    const int r = se.radius();
    const int SW = S * W;
    const int SH = S * H;
    constexpr int tile = 32;
    const int margin = (r + S - 1) / S + 1;

    auto axis = [S](int n) {
        // Upscaled index u samples the source at (u + 0.5) / S - 0.5, clamped.
        std::vector<AxisSample> v(std::size_t(n) * std::size_t(S));
        for (int u = 0; u < n * S; ++u) {
            const double c = std::clamp((u + 0.5) / S - 0.5, 0.0, double(n - 1));
            const int i0 = int(std::floor(c));
            v[std::size_t(u)] = {i0, std::min(i0 + 1, n - 1), float(c - i0)};
        }
        return v;
    };
    const auto xs = axis(W);
    const auto ys = axis(H);

    std::vector<float> buf, res;
    for (int ty = 0; ty < H; ty += tile)
        for (int tx = 0; tx < W; tx += tile) {
            const int x1 = std::min(W, tx + tile);
            const int y1 = std::min(H, ty + tile);
            std::uint8_t lo = 255, hi = 0;
            for (int y = std::max(0, ty - margin); y < std::min(H, y1 + margin); ++y)
                for (int x = std::max(0, tx - margin); x < std::min(W, x1 + margin); ++x) {
                    lo = std::min(lo, img.at(x, y, channel));
                    hi = std::max(hi, img.at(x, y, channel));
                }
            if (lo == hi) {
                for (int y = ty; y < y1; ++y)
                    for (int x = tx; x < x1; ++x)
                        out.at(x, y, channel) = lo;
                continue;
            }

            const int bw = (x1 - tx) * S + 2 * r;
            const int bh = (y1 - ty) * S + 2 * r;
            buf.resize(std::size_t(bw) * std::size_t(bh));
            for (int j = 0; j < bh; ++j) {
                const AxisSample& sy = ys[std::size_t(reflect_index(ty * S - r + j, SH))];
                float* row = buf.data() + std::size_t(j) * std::size_t(bw);
                for (int i = 0; i < bw; ++i) {
                    const AxisSample& sx = xs[std::size_t(reflect_index(tx * S - r + i, SW))];
                    const float a = img.at(sx.i0, sy.i0, channel);
                    const float b = img.at(sx.i1, sy.i0, channel);
                    const float c = img.at(sx.i0, sy.i1, channel);
                    const float d = img.at(sx.i1, sy.i1, channel);
                    const float top = a + sx.t * (b - a);
                    const float bot = c + sx.t * (d - c);
                    row[i] = top + sy.t * (bot - top);
                }
            }
            const int ow = bw - 2 * r;
            const int oh = bh - 2 * r;
            res.resize(std::size_t(ow) * std::size_t(oh));
            morph_valid(buf, bw, bh, se, mode, res);
            const double inv = 1.0 / (double(S) * double(S));
            for (int y = ty; y < y1; ++y)
                for (int x = tx; x < x1; ++x) {
                    double acc = 0.0;
                    for (int j = 0; j < S; ++j) {
                        const float* row = res.data() + std::size_t((y - ty) * S + j) * std::size_t(ow) +
                                           std::size_t((x - tx) * S);
                        for (int i = 0; i < S; ++i)
                            acc += row[i];
                    }
                    out.at(x, y, channel) = std::uint8_t(std::clamp(std::floor(acc * inv + 0.5), 0.0, 255.0));
                }
        }
}

} // namespace

RasterImage ink_morph(const RasterImage& img, int kernel, MorphMode mode, int scale)
{
    if (img.empty())
        throw ParameterError("ink perturbation: empty image");
    if (scale < 1)
        throw ParameterError("ink perturbation: supersampling factor must be >= 1");
    if (kernel <= 1)
        return img;
    if (std::int64_t(scale) * img.width() > INT_MAX / 4 || std::int64_t(scale) * img.height() > INT_MAX / 4)
        throw ResourceError("ink perturbation: supersampled page of " + std::to_string(img.width()) + "x" +
                            std::to_string(img.height()) + " at factor " + std::to_string(scale) +
                            " exceeds addressable size; use a smaller ink scale");
    const auto se = StructuringElement::ellipse(kernel);
    RasterImage out(img.width(), img.height(), img.channels());
    try {
        for (int c = 0; c < img.channels(); ++c)
            ink_channel(img, c, se, mode, scale, out);
    } catch (const std::bad_alloc&) {
        throw ResourceError("ink perturbation: out of memory at supersampling factor " + std::to_string(scale) +
                            "; use a smaller ink scale");
    }
    return out;
}

PerturbResult ink_bleed_page(const AnnotatedPage& page, const SeverityParams& p)
{
    PerturbResult r;
    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = ink_morph(page.image, p.k_e, MorphMode::erode, p.ink_scale);
    r.realized["kernel"] = p.k_e;
    r.realized["scale"] = p.ink_scale;
    return r;
}

PerturbResult ink_holdout_page(const AnnotatedPage& page, const SeverityParams& p)
{
    PerturbResult r;
    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = ink_morph(page.image, p.k_d, MorphMode::dilate, p.ink_scale);
    r.realized["kernel"] = p.k_d;
    r.realized["scale"] = p.ink_scale;
    return r;
}

} // namespace docrobust
