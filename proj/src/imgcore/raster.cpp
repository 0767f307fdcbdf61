#include "docrobust/raster.hpp"

#include <string>

namespace docrobust {

namespace {

void check_shape(int width, int height, int channels)
{
    if (width <= 0 || height <= 0)
        throw ParameterError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                             std::to_string(height));
    if (channels != 1 && channels != 3)
        throw ParameterError("image must have 1 or 3 channels, got " + std::to_string(channels));
}

} // namespace

RasterImage::RasterImage(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels)
{
    check_shape(width, height, channels);
    data_.assign(std::size_t(width) * std::size_t(height) * std::size_t(channels), fill);
}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data))
{
    check_shape(width, height, channels);
    if (data_.size() != std::size_t(width) * std::size_t(height) * std::size_t(channels))
        throw ParameterError("pixel buffer length does not match width x height x channels");
}

std::vector<Plane> to_planes(const RasterImage& img)
{
    std::vector<Plane> planes(std::size_t(img.channels()), Plane(img.width(), img.height()));
    const auto src = img.data();
    const std::size_t n = img.pixel_count();
    const int ch = img.channels();
    for (int c = 0; c < ch; ++c) {
        auto dst = planes[std::size_t(c)].values();
        for (std::size_t i = 0; i < n; ++i)
            dst[i] = normalize(src[i * std::size_t(ch) + std::size_t(c)]);
    }
    return planes;
}

RasterImage from_planes(std::span<const Plane> planes)
{
    if (planes.empty())
        throw ParameterError("from_planes: no planes");
    const int w = planes[0].width();
    const int h = planes[0].height();
    for (const auto& p : planes)
        if (p.width() != w || p.height() != h)
            throw ParameterError("from_planes: plane shapes differ");
    RasterImage out(w, h, int(planes.size()));
    auto dst = out.data();
    const std::size_t n = out.pixel_count();
    const std::size_t ch = planes.size();
    for (std::size_t c = 0; c < ch; ++c) {
        const auto src = planes[c].values();
        for (std::size_t i = 0; i < n; ++i)
            dst[i * ch + c] = quantize(src[i]);
    }
    return out;
}

} // namespace docrobust
