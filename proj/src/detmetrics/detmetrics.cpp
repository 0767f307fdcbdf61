#include "docrobust/detmetrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

#include "docrobust/errors.hpp"

namespace docrobust {

double iou(const Box& a, const Box& b) noexcept
{
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

// Indices of `dets` in descending score order, ties kept in input order.
std::vector<std::size_t> ranked(std::span<const Detection> dets)
{
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
    return order;
}

} // namespace

std::optional<double> average_precision(std::span<const GroundTruth> gts, std::span<const Detection> dets,
                                        std::int64_t category, double iou_thr)
{
    std::unordered_map<std::int64_t, std::vector<std::size_t>> gt_by_image;
    std::size_t n_gt = 0;
    for (std::size_t i = 0; i < gts.size(); ++i)
        if (gts[i].category_id == category) {
            gt_by_image[gts[i].image_id].push_back(i);
            ++n_gt;
        }
    if (n_gt == 0)
        return std::nullopt;

    std::vector<bool> used(gts.size(), false);
    std::vector<bool> tp_flags;
    for (std::size_t d : ranked(dets)) {
        const Detection& det = dets[d];
        if (det.category_id != category)
            continue;
        std::size_t best = gts.size();
        double best_iou = iou_thr;
        if (auto it = gt_by_image.find(det.image_id); it != gt_by_image.end())
            for (std::size_t g : it->second) {
                if (used[g])
                    continue;
                const double v = iou(det.box, gts[g].box);
                if (v >= best_iou && (best == gts.size() || v > best_iou)) {
                    best = g;
                    best_iou = v;
                }
            }
        if (best != gts.size())
            used[best] = true;
        tp_flags.push_back(best != gts.size());
    }

    const std::size_t n = tp_flags.size();
    std::vector<double> recall(n), precision(n);
    double tp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        tp += tp_flags[i] ? 1.0 : 0.0;
        recall[i] = tp / double(n_gt);
        precision[i] = tp / double(i + 1);
    }
    for (std::size_t i = n; i-- > 1;)
        precision[i - 1] = std::max(precision[i - 1], precision[i]);

    double sum = 0.0;
    for (int r = 0; r < recall_points; ++r) {
        const double target = r / double(recall_points - 1);
        const auto it = std::lower_bound(recall.begin(), recall.end(), target);
        if (it != recall.end())
            sum += precision[std::size_t(it - recall.begin())];
    }
    return sum / recall_points;
}

EvalResult mean_average_precision(std::span<const GroundTruth> gts, std::span<const Detection> dets)
{
    if (gts.empty())
        throw EvaluationError("mAP needs at least one ground-truth box");

    // Keep the top-scoring detections of each image.
    std::vector<Detection> kept;
    {
        std::unordered_map<std::int64_t, std::size_t> per_image;
        for (std::size_t d : ranked(dets))
            if (per_image[dets[d].image_id]++ < max_detections_per_image)
                kept.push_back(dets[d]);
    }

    EvalResult res;
    res.ground_truths = gts.size();
    res.detections = kept.size();
    std::set<std::int64_t> gt_cats, det_cats;
    for (const auto& g : gts)
        gt_cats.insert(g.category_id);
    for (const auto& d : kept)
        det_cats.insert(d.category_id);
    for (std::int64_t c : det_cats)
        if (!gt_cats.count(c))
            res.skipped_categories.push_back(c);

    double total = 0.0;
    for (std::int64_t c : gt_cats) {
        auto& row = res.per_category[c];
        double cat_sum = 0.0;
        for (std::size_t t = 0; t < iou_thresholds.size(); ++t) {
            row[t] = 100.0 * *average_precision(gts, kept, c, iou_thresholds[t]);
            cat_sum += row[t];
        }
        total += cat_sum / double(iou_thresholds.size());
    }
    res.map = total / double(gt_cats.size());
    return res;
}

nlohmann::json EvalResult::to_json() const
{
    nlohmann::json cats = nlohmann::json::object();
    for (const auto& [c, row] : per_category) {
        double mean = 0.0;
        for (double v : row)
            mean += v;
        cats[std::to_string(c)] = {{"ap", mean / double(row.size())},
                                   {"ap50", row[0]},
                                   {"ap75", row[5]},
                                   {"per_threshold", row}};
    }
    return {{"map", map},
            {"categories", cats},
            {"skipped_categories", skipped_categories},
            {"ground_truths", ground_truths},
            {"detections", detections},
            {"iou_thresholds", iou_thresholds}};
}

std::vector<std::pair<int, int>> missing_cells(const MapMatrix& m)
{
    std::vector<std::pair<int, int>> out;
    for (int p = 1; p <= 12; ++p)
        for (int s = 1; s <= 3; ++s)
            if (!m.count({p, s}))
                out.emplace_back(p, s);
    return out;
}

std::string describe_cells(std::span<const std::pair<int, int>> cells)
{
    std::string s;
    for (const auto& [p, l] : cells) {
        if (!s.empty())
            s += ", ";
        s += "P" + std::to_string(p) + "/L" + std::to_string(l);
    }
    return s;
}

double p_avg(const MapMatrix& m)
{
    const auto missing = missing_cells(m);
    if (!missing.empty())
        throw EvaluationError("mAP matrix is missing cells: " + describe_cells(missing));
    double sum = 0.0;
    for (int p = 1; p <= 12; ++p)
        for (int s = 1; s <= 3; ++s)
            sum += m.at({p, s});
    return sum / 36.0;
}

} // namespace docrobust
