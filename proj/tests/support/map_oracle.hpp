#pragma once

// Brute-force mAP: greedy matching in score order, then for every recall
// point the best precision over all ranking prefixes that reach it.

#include <algorithm>
#include <set>
#include <vector>

#include "docrobust/detmetrics.hpp"
#include "docrobust/rng.hpp"

namespace oracle {

inline double box_iou(const docrobust::Box& a, const docrobust::Box& b)
{
    const double x0 = std::max(a.x, b.x), x1 = std::min(a.x + a.w, b.x + b.w);
    const double y0 = std::max(a.y, b.y), y1 = std::min(a.y + a.h, b.y + b.h);
    const double inter = (x1 > x0 && y1 > y0) ? (x1 - x0) * (y1 - y0) : 0.0;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

/// AP in 0..1 for one category; scores must be distinct.
inline double brute_ap(const std::vector<docrobust::GroundTruth>& gts, const std::vector<docrobust::Detection>& dets,
                       std::int64_t cat, double thr)
{
    std::vector<docrobust::Detection> d;
    for (const auto& x : dets)
        if (x.category_id == cat)
            d.push_back(x);
    std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    std::vector<int> g;
    for (int i = 0; i < int(gts.size()); ++i)
        if (gts[std::size_t(i)].category_id == cat)
            g.push_back(i);
    std::vector<bool> taken(gts.size(), false);
    std::vector<double> prec, rec;
    int tp = 0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        int best = -1;
        double best_v = -1.0;
        for (int i : g) {
            const auto& gt = gts[std::size_t(i)];
            if (taken[std::size_t(i)] || gt.image_id != d[k].image_id)
                continue;
            const double v = box_iou(gt.box, d[k].box);
            if (v >= thr && v > best_v) {
                best = i;
                best_v = v;
            }
        }
        if (best >= 0) {
            taken[std::size_t(best)] = true;
            ++tp;
        }
        prec.push_back(tp / double(k + 1));
        rec.push_back(tp / double(g.size()));
    }
    double sum = 0.0;
    for (int r = 0; r <= 100; ++r) {
        const double target = r / 100.0;
        double best = 0.0;
        for (std::size_t k = 0; k < prec.size(); ++k)
            if (rec[k] >= target)
                best = std::max(best, prec[k]);
        sum += best;
    }
    return sum / 101.0;
}

/// mAP on the 0..100 scale over the categories present in the ground truth.
inline double brute_map(const std::vector<docrobust::GroundTruth>& gts, const std::vector<docrobust::Detection>& dets)
{
    std::set<std::int64_t> cats;
    for (const auto& g : gts)
        cats.insert(g.category_id);
    double total = 0.0;
    for (std::int64_t c : cats) {
        double s = 0.0;
        for (double t : docrobust::iou_thresholds)
            s += 100.0 * brute_ap(gts, dets, c, t);
        total += s / double(docrobust::iou_thresholds.size());
    }
    return total / double(cats.size());
}

struct MicroInstance {
    std::vector<docrobust::GroundTruth> gts;
    std::vector<docrobust::Detection> dets;
};

/// Up to 3 images with up to 5 ground-truth and 5 detected boxes each, two
/// categories, integer-grid boxes (so IoU ties and exact hits occur) and
/// distinct scores.
inline MicroInstance micro_instance(docrobust::SeededRng& rng)
{
    MicroInstance m;
    const int images = rng.uniform_int(1, 3);
    auto box = [&] {
        const double x = rng.uniform_int(0, 20), y = rng.uniform_int(0, 20);
        return docrobust::Box{x, y, double(rng.uniform_int(1, 12)), double(rng.uniform_int(1, 12))};
    };
    std::vector<double> scores;
    for (int i = 0; i < images; ++i) {
        const int ng = rng.uniform_int(i == 0 ? 1 : 0, 5);
        for (int k = 0; k < ng; ++k)
            m.gts.push_back({i, rng.uniform_int(1, 2), box()});
        const int nd = rng.uniform_int(0, 5);
        for (int k = 0; k < nd; ++k) {
            docrobust::Detection d{i, rng.uniform_int(1, 2), box(), 0.0};
            // Half the detections start from a ground-truth box so matches are common.
            if (!m.gts.empty() && rng.bernoulli(0.5)) {
                const auto& g = m.gts[std::size_t(rng.uniform_int(0, int(m.gts.size()) - 1))];
                if (g.image_id == i) {
                    d.box = g.box;
                    d.box.w += rng.uniform_int(0, 2);
                    d.category_id = g.category_id;
                }
            }
            m.dets.push_back(d);
        }
    }
    for (std::size_t k = 0; k < m.dets.size(); ++k)
        m.dets[k].score = (double(rng.uniform_int(0, 1000)) * 16 + double(k)) / 16017.0;
    return m;
}

} // namespace oracle
