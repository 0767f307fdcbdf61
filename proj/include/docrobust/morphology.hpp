#pragma once

#include <span>
#include <vector>

#include "docrobust/raster.hpp"

namespace docrobust {

/// Elliptical footprint of odd size. Cell (dx, dy) belongs to it when
/// (dx / R)^2 + (dy / R)^2 <= 1 with R = radius + 1/2, so size 3 is the full
/// 3x3 square and larger sizes round off the corners. Every row of the
/// footprint is a contiguous run centered on dx = 0.
class StructuringElement {
public:
    static StructuringElement ellipse(int size);

    int size() const noexcept { return size_; }
    int radius() const noexcept { return size_ / 2; }
    bool contains(int dx, int dy) const noexcept;
    /// Horizontal half-extent of the row at offset dy (index dy + radius).
    const std::vector<int>& row_half_widths() const noexcept { return half_widths_; }

private:
    explicit StructuringElement(int size);

    int size_;
    std::vector<int> half_widths_;
};

enum class MorphMode { erode, dilate };

/// Erosion = footprint minimum, dilation = footprint maximum, per channel,
/// reflect-101 borders.
RasterImage morph(const RasterImage& img, const StructuringElement& se, MorphMode mode);
Plane morph(const Plane& plane, const StructuringElement& se, MorphMode mode);

/// Footprint filter over a buffer that already carries a `radius` margin on
/// every side; writes the (w - 2r) x (h - 2r) interior result.
void morph_valid(std::span<const float> src, int width, int height, const StructuringElement& se, MorphMode mode,
                 std::span<float> dst);

} // namespace docrobust
