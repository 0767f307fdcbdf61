#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "docrobust/geometry.hpp"
#include "docrobust/raster.hpp"

namespace docrobust {

/// Axis-aligned box in continuous pixel coordinates (COCO convention: x, y is
/// the top-left edge, pixel (i, j) covers [i, i+1) x [j, j+1)).
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const noexcept { return w * h; }
    Point2 center() const noexcept { return {x + 0.5 * w, y + 0.5 * h}; }
    bool operator==(const Box&) const = default;
};

using Polygon = std::vector<Point2>;

struct Annotation {
    std::int64_t id = 0;          ///< source annotation id
    std::int64_t category_id = 0;
    Box box;
    std::vector<Polygon> polygons; ///< empty when the source carries no segmentation
    double area = 0.0;             ///< COCO "area"; 0 means derive from the box
    int iscrowd = 0;

    bool operator==(const Annotation&) const = default;
};

struct AnnotatedPage {
    RasterImage image;
    std::vector<Annotation> annotations;
    std::string page_id;

    bool operator==(const AnnotatedPage&) const = default;
};

/// Axis-aligned bounding box of a vertex set.
Box bounding_box(std::span<const Point2> pts) noexcept;

/// Sutherland-Hodgman clip of a polygon against [0, w] x [0, h].
Polygon clip_polygon(const Polygon& poly, double width, double height);

/// Map every annotation through a point transform given in continuous
/// coordinates: polygons vertex by vertex, plain boxes through their four
/// corners. Boxes become the bounding box of the mapped geometry clipped to
/// the canvas. Annotations that collapse to zero area are dropped; the
/// number dropped is returned through `dropped` when non-null.
std::vector<Annotation> transform_annotations(const std::vector<Annotation>& anns,
                                              const std::function<Point2(Point2)>& map, int width, int height,
                                              int* dropped = nullptr);

} // namespace docrobust
