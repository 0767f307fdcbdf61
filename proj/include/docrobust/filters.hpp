#pragma once

#include <vector>

#include "docrobust/raster.hpp"

namespace docrobust {

/// Dense real kernel with odd extents; the anchor is the center cell.
class Kernel2D {
public:
    Kernel2D() : Kernel2D(1, 1, {1.0}) {}
    Kernel2D(int width, int height, std::vector<double> weights);

    static Kernel2D identity() { return {}; }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double at(int x, int y) const noexcept { return weights_[std::size_t(y) * std::size_t(width_) + std::size_t(x)]; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double sum() const noexcept;

private:
    int width_;
    int height_;
    std::vector<double> weights_;
};

/// Isotropic Gaussian sampled at integer offsets and normalized to sum 1.
Kernel2D gaussian_kernel(int size, double sigma);

/// True 2-D convolution, out(p) = sum_k w(k) * in(p - k), per channel, with
/// reflect-101 borders. Arithmetic runs on normalized planes.
RasterImage convolve(const RasterImage& img, const Kernel2D& k);
Plane convolve(const Plane& plane, const Kernel2D& k);

/// Separable Gaussian smoothing of a real field, radius ceil(3 sigma),
/// reflect-101 border.
Plane gaussian_smooth_field(const Plane& field, double sigma);

/// BT.601 luma (0.299, 0.587, 0.114), round-half-up; 1-channel passes through.
RasterImage to_luma(const RasterImage& img);

/// Convert to the requested channel count (luma down, replicate up).
RasterImage with_channels(const RasterImage& img, int channels);

/// Bilinear resize with half-pixel centers and clamped edges.
Plane resize_bilinear(const Plane& src, int width, int height);
RasterImage resize_bilinear(const RasterImage& img, int width, int height);

} // namespace docrobust
