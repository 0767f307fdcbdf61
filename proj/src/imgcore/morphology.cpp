#include "docrobust/morphology.hpp"

#include <algorithm>
#include <string>

namespace docrobust {

StructuringElement::StructuringElement(int size) : size_(size)
{
    const int r = size / 2;
    const double rr = (r + 0.5) * (r + 0.5);
    half_widths_.resize(std::size_t(size));
    for (int dy = -r; dy <= r; ++dy) {
        int e = 0;
        while (e + 1 <= r && double((e + 1) * (e + 1) + dy * dy) <= rr)
            ++e;
        half_widths_[std::size_t(dy + r)] = e;
    }
}

StructuringElement StructuringElement::ellipse(int size)
{
    if (size < 1 || size % 2 == 0)
        throw ParameterError("structuring element size must be odd and >= 1, got " + std::to_string(size));
    return StructuringElement(size);
}

bool StructuringElement::contains(int dx, int dy) const noexcept
{
    const int r = radius();
    if (dy < -r || dy > r)
        return false;
    const int e = half_widths_[std::size_t(dy + r)];
    return dx >= -e && dx <= e;
}

namespace {

template <class T>
struct MinOp {
    T operator()(T a, T b) const noexcept { return b < a ? b : a; }
};
template <class T>
struct MaxOp {
    T operator()(T a, T b) const noexcept { return a < b ? b : a; }
};

// Row extrema are built incrementally: run_e(x) = op(run_{e-1}(x), v(x-e), v(x+e)).
// The vertical pass then combines one run per footprint row.
template <class T, class Op>
void footprint_filter(const T* src, int width, int height, const StructuringElement& se, T* dst, Op op)
{
    const int r = se.radius();
    const int ow = width - 2 * r;
    const int oh = height - 2 * r;
    const auto& hw = se.row_half_widths();
    const int max_e = *std::max_element(hw.begin(), hw.end());

    // runs[e] holds, for every source row, the run extremum of half-width e
    // evaluated at output columns (source column x + r).
    std::vector<std::vector<T>> runs(std::size_t(max_e + 1), std::vector<T>(std::size_t(ow) * std::size_t(height)));
    for (int y = 0; y < height; ++y) {
        const T* row = src + std::size_t(y) * std::size_t(width);
        T* base = runs[0].data() + std::size_t(y) * std::size_t(ow);
        for (int x = 0; x < ow; ++x)
            base[x] = row[x + r];
        for (int e = 1; e <= max_e; ++e) {
            const T* prev = runs[std::size_t(e - 1)].data() + std::size_t(y) * std::size_t(ow);
            T* cur = runs[std::size_t(e)].data() + std::size_t(y) * std::size_t(ow);
            for (int x = 0; x < ow; ++x)
                cur[x] = op(prev[x], op(row[x + r - e], row[x + r + e]));
        }
    }

    for (int y = 0; y < oh; ++y) {
        T* out = dst + std::size_t(y) * std::size_t(ow);
        const T* first = runs[std::size_t(hw[0])].data() + std::size_t(y) * std::size_t(ow);
        std::copy(first, first + ow, out);
        for (int dy = 1; dy < se.size(); ++dy) {
            const T* run = runs[std::size_t(hw[std::size_t(dy)])].data() + std::size_t(y + dy) * std::size_t(ow);
            for (int x = 0; x < ow; ++x)
                out[x] = op(out[x], run[x]);
        }
    }
}

template <class T>
void filter_dispatch(const T* src, int width, int height, const StructuringElement& se, MorphMode mode, T* dst)
{
    if (mode == MorphMode::erode)
        footprint_filter(src, width, height, se, dst, MinOp<T>{});
    else
        footprint_filter(src, width, height, se, dst, MaxOp<T>{});
}

template <class T, class Get>
std::vector<T> reflect_pad(int w, int h, int r, Get get)
{
    const int pw = w + 2 * r;
    std::vector<T> padded(std::size_t(pw) * std::size_t(h + 2 * r));
    for (int y = 0; y < h + 2 * r; ++y) {
        const int sy = reflect_index(y - r, h);
        for (int x = 0; x < pw; ++x)
            padded[std::size_t(y) * std::size_t(pw) + std::size_t(x)] = get(reflect_index(x - r, w), sy);
    }
    return padded;
}

} // namespace

RasterImage morph(const RasterImage& img, const StructuringElement& se, MorphMode mode)
{
    if (img.empty())
        throw ParameterError("morph: empty image");
    const int w = img.width();
    const int h = img.height();
    const int r = se.radius();
    RasterImage out(w, h, img.channels());
    std::vector<std::uint8_t> result(img.pixel_count());
    for (int c = 0; c < img.channels(); ++c) {
        const auto padded = reflect_pad<std::uint8_t>(w, h, r, [&](int x, int y) { return img.at(x, y, c); });
        filter_dispatch(padded.data(), w + 2 * r, h + 2 * r, se, mode, result.data());
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(x, y, c) = result[std::size_t(y) * std::size_t(w) + std::size_t(x)];
    }
    return out;
}

Plane morph(const Plane& plane, const StructuringElement& se, MorphMode mode)
{
    const int w = plane.width();
    const int h = plane.height();
    const int r = se.radius();
    const auto padded = reflect_pad<double>(w, h, r, [&](int x, int y) { return plane.at(x, y); });
    Plane out(w, h);
    filter_dispatch(padded.data(), w + 2 * r, h + 2 * r, se, mode, out.values().data());
    return out;
}

void morph_valid(std::span<const float> src, int width, int height, const StructuringElement& se, MorphMode mode,
                 std::span<float> dst)
{
    const int r = se.radius();
    if (width <= 2 * r || height <= 2 * r)
        throw ParameterError("morph_valid: buffer smaller than the footprint margin");
    if (src.size() != std::size_t(width) * std::size_t(height) ||
        dst.size() != std::size_t(width - 2 * r) * std::size_t(height - 2 * r))
        throw ParameterError("morph_valid: buffer sizes do not match the stated extents");
    filter_dispatch(src.data(), width, height, se, mode, dst.data());
}

} // namespace docrobust
