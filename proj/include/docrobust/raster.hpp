#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "docrobust/errors.hpp"

namespace docrobust {

/// 8-bit interleaved raster with 1 (luma) or 3 (RGB) channels, row-major.
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int width, int height, int channels, std::uint8_t fill = 0);
    RasterImage(int width, int height, int channels, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return std::size_t(width_) * std::size_t(height_); }

    std::uint8_t at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    bool operator==(const RasterImage&) const = default;

private:
    std::size_t index(int x, int y, int c) const noexcept
    {
        return (std::size_t(y) * std::size_t(width_) + std::size_t(x)) * std::size_t(channels_) + std::size_t(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Real-valued single-channel grid. Used both for normalized pixel planes
/// ([0,1]) and for unbounded fields (displacements, masks, blob fields).
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, double fill = 0.0)
        : width_(width), height_(height), values_(std::size_t(width) * std::size_t(height), fill)
    {
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    double at(int x, int y) const noexcept { return values_[std::size_t(y) * std::size_t(width_) + std::size_t(x)]; }
    double& at(int x, int y) noexcept { return values_[std::size_t(y) * std::size_t(width_) + std::size_t(x)]; }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    bool same_shape(const Plane& o) const noexcept { return width_ == o.width_ && height_ == o.height_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> values_;
};

/// Round-half-up re-quantization of a normalized value.
inline std::uint8_t quantize(double v) noexcept
{
    if (!(v > 0.0))
        return 0;
    if (v >= 1.0)
        return 255;
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

inline double normalize(std::uint8_t s) noexcept { return double(s) / 255.0; }

/// Split into normalized [0,1] planes, one per channel.
std::vector<Plane> to_planes(const RasterImage& img);

/// Inverse of to_planes; values are clamped to [0,1] then re-quantized.
RasterImage from_planes(std::span<const Plane> planes);

/// Reflect-101 index mapping ("mirror without repeating the edge").
inline int reflect_index(int i, int n) noexcept
{
    if (n == 1)
        return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0)
        i += period;
    return i < n ? i : period - i;
}

} // namespace docrobust
