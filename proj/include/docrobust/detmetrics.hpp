#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "docrobust/page.hpp"

namespace docrobust {

struct GroundTruth {
    std::int64_t image_id = 0;
    std::int64_t category_id = 0;
    Box box;
};

struct Detection {
    std::int64_t image_id = 0;
    std::int64_t category_id = 0;
    Box box;
    double score = 0.0;
};

/// 0.50, 0.55, ..., 0.95
inline constexpr std::array<double, 10> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                                         0.75, 0.80, 0.85, 0.90, 0.95};
inline constexpr int recall_points = 101;
inline constexpr std::size_t max_detections_per_image = 100;

double iou(const Box& a, const Box& b) noexcept;

/// 101-point interpolated AP (0..1) for one category at one IoU threshold.
/// Detections are ranked by descending score (stable); each one takes the
/// unmatched ground truth of highest IoU >= thr in its image, ties going to
/// the earlier ground truth. Returns nullopt when the category has no
/// ground truth.
std::optional<double> average_precision(std::span<const GroundTruth> gts, std::span<const Detection> dets,
                                        std::int64_t category, double iou_thr);

struct EvalResult {
    /// AP (0..100) per category, one entry per IoU threshold.
    std::map<std::int64_t, std::array<double, iou_thresholds.size()>> per_category;
    /// Categories that only appear among detections.
    std::vector<std::int64_t> skipped_categories;
    double map = 0.0; ///< 0..100
    std::size_t ground_truths = 0;
    std::size_t detections = 0;

    nlohmann::json to_json() const;
};

/// COCO-style mAP over the threshold sweep, keeping at most 100 detections
/// per image (highest scores). Throws EvaluationError on empty ground truth.
EvalResult mean_average_precision(std::span<const GroundTruth> gts, std::span<const Detection> dets);

/// mAP per (perturbation 1..12, level 1..3).
using MapMatrix = std::map<std::pair<int, int>, double>;

/// Cells absent from a 12 x 3 matrix, in (perturbation, level) order.
std::vector<std::pair<int, int>> missing_cells(const MapMatrix& m);

/// "P1/L2, P7/L3" style listing.
std::string describe_cells(std::span<const std::pair<int, int>> cells);

/// Mean over the full 12 x 3 matrix. Throws EvaluationError naming absent
/// cells.
double p_avg(const MapMatrix& m);

} // namespace docrobust
