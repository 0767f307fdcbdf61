#include "docrobust/page.hpp"

#include <algorithm>
#include <limits>

namespace docrobust {

Box bounding_box(std::span<const Point2> pts) noexcept
{
    if (pts.empty())
        return {};
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (const auto& p : pts) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    return {x0, y0, x1 - x0, y1 - y0};
}

namespace {

template <class Inside, class Intersect>
Polygon clip_edge(const Polygon& in, Inside inside, Intersect intersect)
{
    Polygon out;
    if (in.empty())
        return out;
    Point2 prev = in.back();
    bool prev_in = inside(prev);
    for (const auto& cur : in) {
        const bool cur_in = inside(cur);
        if (cur_in) {
            if (!prev_in)
                out.push_back(intersect(prev, cur));
            out.push_back(cur);
        } else if (prev_in) {
            out.push_back(intersect(prev, cur));
        }
        prev = cur;
        prev_in = cur_in;
    }
    return out;
}

Point2 at_x(Point2 a, Point2 b, double x)
{
    const double t = (x - a.x) / (b.x - a.x);
    return {x, a.y + t * (b.y - a.y)};
}

Point2 at_y(Point2 a, Point2 b, double y)
{
    const double t = (y - a.y) / (b.y - a.y);
    return {a.x + t * (b.x - a.x), y};
}

} // namespace

Polygon clip_polygon(const Polygon& poly, double width, double height)
{
    Polygon p = clip_edge(poly, [](Point2 q) { return q.x >= 0.0; }, [](Point2 a, Point2 b) { return at_x(a, b, 0.0); });
    p = clip_edge(p, [&](Point2 q) { return q.x <= width; }, [&](Point2 a, Point2 b) { return at_x(a, b, width); });
    p = clip_edge(p, [](Point2 q) { return q.y >= 0.0; }, [](Point2 a, Point2 b) { return at_y(a, b, 0.0); });
    p = clip_edge(p, [&](Point2 q) { return q.y <= height; }, [&](Point2 a, Point2 b) { return at_y(a, b, height); });
    return p;
}

std::vector<Annotation> transform_annotations(const std::vector<Annotation>& anns,
                                              const std::function<Point2(Point2)>& map, int width, int height,
                                              int* dropped)
{
    std::vector<Annotation> out;
    out.reserve(anns.size());
    int lost = 0;
    const double W = width;
    const double H = height;
    for (const auto& a : anns) {
        Annotation t = a;
        if (!a.polygons.empty()) {
            t.polygons.clear();
            std::vector<Point2> all;
            for (const auto& poly : a.polygons) {
                Polygon mapped;
                mapped.reserve(poly.size());
                for (const auto& v : poly)
                    mapped.push_back(map(v));
                Polygon clipped = clip_polygon(mapped, W, H);
                if (clipped.size() >= 3) {
                    all.insert(all.end(), clipped.begin(), clipped.end());
                    t.polygons.push_back(std::move(clipped));
                }
            }
            t.box = bounding_box(all);
        } else {
            const Point2 corners[4] = {map({a.box.x, a.box.y}), map({a.box.x + a.box.w, a.box.y}),
                                       map({a.box.x + a.box.w, a.box.y + a.box.h}), map({a.box.x, a.box.y + a.box.h})};
            const Box b = bounding_box(corners);
            const double x0 = std::clamp(b.x, 0.0, W);
            const double y0 = std::clamp(b.y, 0.0, H);
            const double x1 = std::clamp(b.x + b.w, 0.0, W);
            const double y1 = std::clamp(b.y + b.h, 0.0, H);
            t.box = {x0, y0, x1 - x0, y1 - y0};
        }
        if (!(t.box.w > 0.0) || !(t.box.h > 0.0)) {
            ++lost;
            continue;
        }
        if (a.area > 0.0 && a.box.area() > 0.0)
            t.area = a.area * t.box.area() / a.box.area();
        out.push_back(std::move(t));
    }
    if (dropped)
        *dropped = lost;
    return out;
}

} // namespace docrobust
