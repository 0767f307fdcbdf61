#include <algorithm>
#include <cmath>
#include <numbers>

#include "docrobust/errors.hpp"
#include "docrobust/glyphs.hpp"
#include "docrobust/image_io.hpp"
#include "docrobust/perturb.hpp"

namespace docrobust {

std::size_t stamp_text(RasterImage& img, std::string_view text, double cx, double cy, double glyph_px,
                       double theta_deg, std::uint8_t gray, double opacity)
{
    if (!(glyph_px > 0.0) || text.empty())
        return 0;
    const double cell = glyph_px / glyph_rows;
    const double tw = text_cells(text) * cell;
    const double th = glyph_px;
    const double reach = 0.5 * std::hypot(tw, th) + 1.0;
    const double t = theta_deg * std::numbers::pi / 180.0;
    const double c = std::cos(t);
    const double s = std::sin(t);
    const double wv = normalize(gray);

    const int x0 = std::max(0, int(std::floor(cx - reach)));
    const int x1 = std::min(img.width() - 1, int(std::ceil(cx + reach)));
    const int y0 = std::max(0, int(std::floor(cy - reach)));
    const int y1 = std::min(img.height() - 1, int(std::ceil(cy + reach)));
    std::size_t covered = 0;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            // Undo the stamp rotation to land in text space.
            const double u = (c * dx + s * dy + 0.5 * tw) / cell;
            const double v = (-s * dx + c * dy + 0.5 * th) / cell;
            if (!text_covers(text, u, v))
                continue;
            ++covered;
            for (int ch = 0; ch < img.channels(); ++ch)
                img.at(x, y, ch) = quantize(opacity * wv + (1.0 - opacity) * normalize(img.at(x, y, ch)));
        }
    return covered;
}

PerturbResult watermark_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng,
                             const ResourcePool& pool)
{
    const double W = page.image.width();
    const double H = page.image.height();
    const double glyph_px = p.r_z * 0.01 * H * 10.0;
    const double opacity = p.alpha_w / 255.0;
    PerturbResult r;
    r.page = page;
    r.realized["text"] = pool.watermark_text;
    r.realized["gray"] = pool.watermark_gray;
    r.realized["glyph_height"] = glyph_px;
    nlohmann::json stamps = nlohmann::json::array();
    for (int i = 0; i < p.stamps; ++i) {
        const double x = rng.uniform(0.0, W);
        const double y = rng.uniform(0.0, H);
        const double theta = rng.uniform(0.0, 360.0);
        const std::size_t n =
            stamp_text(r.page.image, pool.watermark_text, x, y, glyph_px, theta, pool.watermark_gray, opacity);
        stamps.push_back({{"x", x}, {"y", y}, {"theta", theta}, {"pixels", n}});
    }
    r.realized["stamps"] = stamps;
    return r;
}

namespace {

// Smooth two-colour gradient with a low-frequency ripple.
RasterImage procedural_background(int w, int h, int channels, SeededRng& rng)
{
    double c0[3], c1[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = rng.uniform();
        c1[c] = rng.uniform();
    }
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double fx = rng.uniform(1.0, 4.0);
    const double fy = rng.uniform(1.0, 4.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double ux = std::cos(phi);
    const double uy = std::sin(phi);
    const double span = std::abs(ux) * w + std::abs(uy) * h;

    RasterImage out(w, h, channels);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double proj = ((x + 0.5 - 0.5 * w) * ux + (y + 0.5 - 0.5 * h) * uy) / span + 0.5;
            const double ripple =
                0.15 * std::sin(2.0 * std::numbers::pi * (fx * (x + 0.5) / w + fy * (y + 0.5) / h) + phase);
            double rgb[3];
            for (int c = 0; c < 3; ++c)
                rgb[c] = std::clamp(c0[c] + (c1[c] - c0[c]) * proj + ripple, 0.0, 1.0);
            if (channels == 1) {
                out.at(x, y) = quantize(0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]);
            } else {
                for (int c = 0; c < 3; ++c)
                    out.at(x, y, c) = quantize(rgb[c]);
            }
        }
    return out;
}

} // namespace

PerturbResult background_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng,
                              const ResourcePool& pool)
{
    const int W = page.image.width();
    const int H = page.image.height();
    const int C = page.image.channels();
    PerturbResult r;
    r.realized["alpha_a"] = p.alpha_a;
    r.realized["alpha_b"] = p.alpha_b;
    nlohmann::json placed = nlohmann::json::array();
    if (p.n_i == 0) {
        r.page = page;
        r.realized["images"] = placed;
        return r;
    }

    RasterImage canvas = page.image;
    for (int i = 0; i < p.n_i; ++i) {
        const int w = std::clamp(int(std::lround(rng.uniform(0.2, 0.5) * W)), 1, W);
        const int h = std::clamp(int(std::lround(rng.uniform(0.2, 0.5) * H)), 1, H);
        const int x = rng.uniform_int(0, W - w);
        const int y = rng.uniform_int(0, H - h);
        RasterImage patch;
        nlohmann::json rec = {{"x", x}, {"y", y}, {"w", w}, {"h", h}};
        if (!pool.backgrounds.empty()) {
            const int idx = rng.uniform_int(0, int(pool.backgrounds.size()) - 1);
            patch = resize_bilinear(with_channels(pool.backgrounds[std::size_t(idx)], C), w, h);
            rec["source"] = idx;
        } else {
            patch = procedural_background(w, h, C, rng);
            rec["source"] = "procedural";
        }
        for (int yy = 0; yy < h; ++yy)
            for (int xx = 0; xx < w; ++xx)
                for (int c = 0; c < C; ++c)
                    canvas.at(x + xx, y + yy, c) = patch.at(xx, yy, c);
        placed.push_back(rec);
    }
    r.realized["images"] = placed;

    r.page.page_id = page.page_id;
    r.page.annotations = page.annotations;
    r.page.image = RasterImage(W, H, C);
    const auto a = page.image.data();
    const auto b = canvas.data();
    auto o = r.page.image.data();
    const double wb = (1.0 - p.alpha_a) * p.alpha_b;
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = quantize(p.alpha_a * normalize(a[i]) + wb * normalize(b[i]));
    return r;
}

ResourcePool ResourcePool::from_directory(const std::filesystem::path& dir)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw IoError("background pool directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file())
            continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    ResourcePool pool;
    for (const auto& f : files)
        pool.backgrounds.push_back(read_image(f));
    return pool;
}

} // namespace docrobust
