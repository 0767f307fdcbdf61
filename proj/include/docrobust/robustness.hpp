#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "docrobust/detmetrics.hpp"

namespace docrobust {

/// 100 - mAP; mAP must lie in [0, 100].
double degradation(double map_value);

/// Per-level effect: (sum f + sum D) / (M K), M = f.size(), K = d.size().
double mpe_level(std::span<const double> f, std::span<const double> d);

struct LevelInputs {
    std::vector<double> f; ///< M information losses
    std::vector<double> d; ///< K baseline degradations
};

/// Per-perturbation effect: sum over the N levels of (sum f + sum D),
/// divided by N M K.
double mpe(std::span<const LevelInputs> levels, int n, int m, int k);

/// 100 / N * sum_s D_s / mPE_s.
double rd(std::span<const double> d, std::span<const double> mpe_levels);

/// Mean of exactly 12 RD values.
double mrd(std::span<const double> rd_values);

/// Inputs of the effect measure for every (perturbation, level) cell.
struct MpeTable {
    std::map<std::pair<int, int>, LevelInputs> cells;
    int levels = 3;
    int metrics = 2;
    int baselines = 1;

    /// Cell mPE (per-level form).
    double level_value(int perturbation, int level) const;
    /// Per-perturbation mPE over all levels.
    double perturbation_value(int perturbation) const;
    /// Throws EvaluationError when cells are absent or sized inconsistently.
    void validate() const;
    nlohmann::json to_json() const;
};

/// Table from per-cell mean losses (each cell's f values) and one mAP matrix
/// per baseline model.
MpeTable make_mpe_table(const std::map<std::pair<int, int>, std::vector<double>>& losses,
                        std::span<const MapMatrix> baselines);

struct RobustnessReport {
    struct Cell {
        double map = 0.0;
        double degradation = 0.0;
        double mpe = 0.0;
        double ratio = 0.0; ///< 100 D / mPE
    };
    struct Row {
        int perturbation = 0;
        std::array<Cell, 3> levels;
        double map = 0.0; ///< mean over levels
        double mpe = 0.0;
        double rd = 0.0;
    };
    std::string model;
    std::optional<double> clean_map;
    std::vector<Row> rows; ///< P1..P12
    double p_avg = 0.0;
    double mrd = 0.0;
    MpeTable mpe_table;

    nlohmann::json to_json() const;
    std::string to_csv() const;
    /// Rebuilds a report from its JSON form.
    static RobustnessReport from_json(const nlohmann::json& j);
};

inline constexpr const char* report_schema = "docrobust.report/1";

RobustnessReport build_report(const std::string& model, const MapMatrix& target, const MpeTable& table,
                              std::optional<double> clean_map);

} // namespace docrobust
