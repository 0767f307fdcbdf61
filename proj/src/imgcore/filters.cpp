#include "docrobust/filters.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace docrobust {

Kernel2D::Kernel2D(int width, int height, std::vector<double> weights)
    : width_(width), height_(height), weights_(std::move(weights))
{
    if (width < 1 || height < 1 || width % 2 == 0 || height % 2 == 0)
        throw ParameterError("kernel extents must be odd and >= 1, got " + std::to_string(width) + "x" +
                             std::to_string(height));
    if (weights_.size() != std::size_t(width) * std::size_t(height))
        throw ParameterError("kernel weight count does not match its extents");
    for (double w : weights_)
        if (!std::isfinite(w))
            throw ParameterError("kernel weights must be finite");
}

double Kernel2D::sum() const noexcept
{
    double s = 0.0;
    for (double w : weights_)
        s += w;
    return s;
}

Kernel2D gaussian_kernel(int size, double sigma)
{
    if (size < 1 || size % 2 == 0)
        throw ParameterError("gaussian kernel size must be odd and >= 1, got " + std::to_string(size));
    if (!(sigma > 0.0))
        throw ParameterError("gaussian sigma must be positive");
    const int r = size / 2;
    std::vector<double> w(std::size_t(size) * std::size_t(size));
    double total = 0.0;
    for (int y = -r; y <= r; ++y)
        for (int x = -r; x <= r; ++x) {
            const double v = std::exp(-double(x * x + y * y) / (2.0 * sigma * sigma));
            w[std::size_t(y + r) * std::size_t(size) + std::size_t(x + r)] = v;
            total += v;
        }
    for (double& v : w)
        v /= total;
    return {size, size, std::move(w)};
}

Plane convolve(const Plane& plane, const Kernel2D& k)
{
    const int w = plane.width();
    const int h = plane.height();
    const int rx = k.width() / 2;
    const int ry = k.height() / 2;
    const int pw = w + 2 * rx;

    // Reflect-padded copy so the inner loop is branch free.
    std::vector<double> padded(std::size_t(pw) * std::size_t(h + 2 * ry));
    for (int y = 0; y < h + 2 * ry; ++y) {
        const int sy = reflect_index(y - ry, h);
        for (int x = 0; x < pw; ++x)
            padded[std::size_t(y) * std::size_t(pw) + std::size_t(x)] = plane.at(reflect_index(x - rx, w), sy);
    }

    // out(x, y) = sum w(i, j) in(x - (i - rx), y - (j - ry)); in padded
    // coordinates the source column is x + (kw - 1 - i).
    struct Tap {
        int dx, dy;
        double weight;
    };
    std::vector<Tap> taps;
    for (int j = 0; j < k.height(); ++j)
        for (int i = 0; i < k.width(); ++i)
            if (k.at(i, j) != 0.0)
                taps.push_back({k.width() - 1 - i, k.height() - 1 - j, k.at(i, j)});

    Plane out(w, h);
    auto dst = out.values();
    for (int y = 0; y < h; ++y) {
        double* row = dst.data() + std::size_t(y) * std::size_t(w);
        for (const Tap& t : taps) {
            const double* src = padded.data() + std::size_t(y + t.dy) * std::size_t(pw) + std::size_t(t.dx);
            for (int x = 0; x < w; ++x)
                row[x] += t.weight * src[x];
        }
    }
    return out;
}

RasterImage convolve(const RasterImage& img, const Kernel2D& k)
{
    if (img.empty())
        throw ParameterError("convolve: empty image");
    auto planes = to_planes(img);
    for (auto& p : planes)
        p = convolve(p, k);
    return from_planes(planes);
}

namespace {

std::vector<double> gaussian_taps(double sigma)
{
    const int r = int(std::ceil(3.0 * sigma));
    std::vector<double> taps(std::size_t(2 * r + 1));
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        taps[std::size_t(i + r)] = std::exp(-double(i) * double(i) / (2.0 * sigma * sigma));
        total += taps[std::size_t(i + r)];
    }
    for (double& t : taps)
        t /= total;
    return taps;
}

} // namespace

Plane gaussian_smooth_field(const Plane& field, double sigma)
{
    if (!(sigma > 0.0))
        throw ParameterError("gaussian_smooth_field: sigma must be positive");
    const auto taps = gaussian_taps(sigma);
    const int r = int(taps.size() / 2);
    const int w = field.width();
    const int h = field.height();

    Plane horiz(w, h);
    std::vector<double> padded(std::size_t(w + 2 * r));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w + 2 * r; ++x)
            padded[std::size_t(x)] = field.at(reflect_index(x - r, w), y);
        double* row = horiz.values().data() + std::size_t(y) * std::size_t(w);
        for (std::size_t t = 0; t < taps.size(); ++t) {
            const double wt = taps[t];
            const double* src = padded.data() + t;
            for (int x = 0; x < w; ++x)
                row[x] += wt * src[x];
        }
    }

    Plane out(w, h);
    for (int y = 0; y < h; ++y) {
        double* row = out.values().data() + std::size_t(y) * std::size_t(w);
        for (std::size_t t = 0; t < taps.size(); ++t) {
            const int sy = reflect_index(y + int(t) - r, h);
            const double wt = taps[t];
            const double* src = horiz.values().data() + std::size_t(sy) * std::size_t(w);
            for (int x = 0; x < w; ++x)
                row[x] += wt * src[x];
        }
    }
    return out;
}

RasterImage to_luma(const RasterImage& img)
{
    if (img.channels() == 1)
        return img;
    if (img.channels() != 3)
        throw ParameterError("to_luma: expected 1 or 3 channels");
    RasterImage out(img.width(), img.height(), 1);
    const auto src = img.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        const double v = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
        dst[i] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
    return out;
}

RasterImage with_channels(const RasterImage& img, int channels)
{
    if (img.channels() == channels)
        return img;
    if (channels == 1)
        return to_luma(img);
    if (channels != 3 || img.channels() != 1)
        throw ParameterError("with_channels: unsupported conversion");
    RasterImage out(img.width(), img.height(), 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = img.at(x, y);
    return out;
}

Plane resize_bilinear(const Plane& src, int width, int height)
{
    if (width <= 0 || height <= 0)
        throw ParameterError("resize_bilinear: target size must be positive");
    const double sx = double(src.width()) / double(width);
    const double sy = double(src.height()) / double(height);

    struct Sample {
        int i0, i1;
        double t;
    };
    auto axis = [](int n_out, int n_in, double scale) {
        std::vector<Sample> s(static_cast<std::size_t>(n_out));
        for (int o = 0; o < n_out; ++o) {
            const double c = std::clamp((o + 0.5) * scale - 0.5, 0.0, double(n_in - 1));
            const int i0 = int(std::floor(c));
            const int i1 = std::min(i0 + 1, n_in - 1);
            s[std::size_t(o)] = {i0, i1, c - i0};
        }
        return s;
    };
    const auto xs = axis(width, src.width(), sx);
    const auto ys = axis(height, src.height(), sy);

    Plane out(width, height);
    for (int y = 0; y < height; ++y) {
        const auto& ry = ys[std::size_t(y)];
        for (int x = 0; x < width; ++x) {
            const auto& rx = xs[std::size_t(x)];
            const double top = src.at(rx.i0, ry.i0) * (1.0 - rx.t) + src.at(rx.i1, ry.i0) * rx.t;
            const double bot = src.at(rx.i0, ry.i1) * (1.0 - rx.t) + src.at(rx.i1, ry.i1) * rx.t;
            out.at(x, y) = top * (1.0 - ry.t) + bot * ry.t;
        }
    }
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int width, int height)
{
    auto planes = to_planes(img);
    for (auto& p : planes)
        p = resize_bilinear(p, width, height);
    return from_planes(planes);
}

} // namespace docrobust
