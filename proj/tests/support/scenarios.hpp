#pragma once

// Shared test scenes: marker pages for geometric consistency, a small text
// card for IQA checks.

#include <cmath>
#include <optional>

#include "docrobust/perturb.hpp"
#include "docrobust/synth.hpp"

namespace scenario {

/// 200x200 white page with one 5x5 black marker and its matching box.
inline docrobust::AnnotatedPage marker_page(std::uint64_t seed)
{
    docrobust::SeededRng rng(seed);
    const int size = 200;
    const int x0 = rng.uniform_int(60, 135);
    const int y0 = rng.uniform_int(60, 135);
    docrobust::AnnotatedPage page;
    page.page_id = "marker-" + std::to_string(seed);
    page.image = docrobust::RasterImage(size, size, 1, 255);
    for (int y = y0; y < y0 + 5; ++y)
        for (int x = x0; x < x0 + 5; ++x)
            page.image.at(x, y) = 0;
    docrobust::Annotation a;
    a.id = 1;
    a.category_id = 1;
    a.box = {double(x0), double(y0), 5.0, 5.0};
    a.area = 25.0;
    page.annotations.push_back(a);
    return page;
}

/// Darkness-weighted centroid in continuous coordinates.
inline std::optional<docrobust::Point2> dark_centroid(const docrobust::RasterImage& img)
{
    double sx = 0.0, sy = 0.0, sw = 0.0;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const double w = 255.0 - img.at(x, y);
            sx += w * (x + 0.5);
            sy += w * (y + 0.5);
            sw += w;
        }
    if (sw <= 0.0)
        return std::nullopt;
    return docrobust::Point2{sx / sw, sy / sw};
}

/// Distance between the marker centroid and the transformed annotation
/// centre after one seeded application; infinity if the annotation is gone.
inline double marker_error(docrobust::PerturbationId id, int level, std::uint64_t trial)
{
    const auto page = marker_page(trial);
    const docrobust::PerturbationSpec spec{id, level, trial, {}};
    const auto [out, prov] = docrobust::apply(spec, page, {});
    const auto c = dark_centroid(out.image);
    if (!c || out.annotations.size() != 1)
        return INFINITY;
    const auto m = out.annotations[0].box.center();
    return std::hypot(c->x - m.x, c->y - m.y);
}

/// 256x256 document-like card used by the IQA checks.
inline docrobust::AnnotatedPage text_card()
{
    return docrobust::synth_page(7, 0, {256, 256, 1});
}

} // namespace scenario
