#include "docrobust/robustness.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "docrobust/errors.hpp"
#include "docrobust/perturb.hpp"

namespace docrobust {

double degradation(double map_value)
{
    if (!(map_value >= 0.0 && map_value <= 100.0))
        throw ParameterError("mAP must lie in [0, 100], got " + std::to_string(map_value));
    return 100.0 - map_value;
}

double mpe_level(std::span<const double> f, std::span<const double> d)
{
    if (f.empty() || d.empty())
        throw ParameterError("mPE needs at least one information loss and one degradation");
    const double sum = std::accumulate(f.begin(), f.end(), 0.0) + std::accumulate(d.begin(), d.end(), 0.0);
    return sum / (double(f.size()) * double(d.size()));
}

double mpe(std::span<const LevelInputs> levels, int n, int m, int k)
{
    if (n < 1 || m < 1 || k < 1)
        throw ParameterError("mPE needs N, M, K >= 1");
    if (int(levels.size()) < n)
        throw EvaluationError("mPE: level " + std::to_string(levels.size() + 1) + " of " + std::to_string(n) +
                              " is missing");
    if (int(levels.size()) > n)
        throw EvaluationError("mPE: got " + std::to_string(levels.size()) + " levels, expected " + std::to_string(n));
    double sum = 0.0;
    for (int s = 0; s < n; ++s) {
        const LevelInputs& l = levels[std::size_t(s)];
        if (int(l.f.size()) != m || int(l.d.size()) != k)
            throw EvaluationError("mPE: level " + std::to_string(s + 1) + " is incomplete (expected " +
                                  std::to_string(m) + " losses and " + std::to_string(k) + " degradations)");
        sum += std::accumulate(l.f.begin(), l.f.end(), 0.0) + std::accumulate(l.d.begin(), l.d.end(), 0.0);
    }
    return sum / (double(n) * double(m) * double(k));
}

double rd(std::span<const double> d, std::span<const double> mpe_levels)
{
    if (d.empty() || d.size() != mpe_levels.size())
        throw ParameterError("RD needs one degradation per level and matching mPE values");
    double sum = 0.0;
    for (std::size_t s = 0; s < d.size(); ++s) {
        if (!(mpe_levels[s] > 0.0))
            throw EvaluationError("RD: mPE of level " + std::to_string(s + 1) +
                                  " is zero; the perturbation had no measured effect");
        sum += d[s] / mpe_levels[s];
    }
    return 100.0 * sum / double(d.size());
}

double mrd(std::span<const double> rd_values)
{
    if (rd_values.size() != 12)
        throw ParameterError("mRD needs exactly 12 RD values, got " + std::to_string(rd_values.size()));
    return std::accumulate(rd_values.begin(), rd_values.end(), 0.0) / 12.0;
}

void MpeTable::validate() const
{
    std::vector<std::pair<int, int>> missing;
    for (int p = 1; p <= 12; ++p)
        for (int s = 1; s <= levels; ++s) {
            const auto it = cells.find({p, s});
            if (it == cells.end()) {
                missing.emplace_back(p, s);
                continue;
            }
            if (int(it->second.f.size()) != metrics || int(it->second.d.size()) != baselines)
                throw EvaluationError("mPE inputs for P" + std::to_string(p) + "/L" + std::to_string(s) +
                                      " have the wrong number of components");
        }
    if (!missing.empty())
        throw EvaluationError("mPE inputs are missing cells: " + describe_cells(missing));
}

double MpeTable::level_value(int perturbation, int level) const
{
    const auto it = cells.find({perturbation, level});
    if (it == cells.end())
        throw EvaluationError("mPE inputs are missing cells: " + describe_cells(std::vector{std::pair{perturbation, level}}));
    return mpe_level(it->second.f, it->second.d);
}

double MpeTable::perturbation_value(int perturbation) const
{
    std::vector<LevelInputs> ls;
    for (int s = 1; s <= levels; ++s) {
        const auto it = cells.find({perturbation, s});
        if (it == cells.end())
            break;
        ls.push_back(it->second);
    }
    return mpe(ls, levels, metrics, baselines);
}

nlohmann::json MpeTable::to_json() const
{
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& [key, in] : cells)
        jc.push_back({{"perturbation", "P" + std::to_string(key.first)}, {"level", key.second}, {"f", in.f}, {"d", in.d}});
    return {{"N", levels}, {"M", metrics}, {"K", baselines}, {"cells", jc}};
}

MpeTable make_mpe_table(const std::map<std::pair<int, int>, std::vector<double>>& losses,
                        std::span<const MapMatrix> baselines)
{
    if (baselines.empty())
        throw ParameterError("mPE needs at least one baseline model");
    MpeTable t;
    t.baselines = int(baselines.size());
    t.metrics = losses.empty() ? 2 : int(losses.begin()->second.size());
    std::vector<std::pair<int, int>> missing;
    for (int p = 1; p <= 12; ++p)
        for (int s = 1; s <= 3; ++s) {
            const auto it = losses.find({p, s});
            bool complete = it != losses.end();
            for (const auto& b : baselines)
                complete = complete && b.count({p, s});
            if (!complete) {
                missing.emplace_back(p, s);
                continue;
            }
            LevelInputs in;
            in.f = it->second;
            for (const auto& b : baselines)
                in.d.push_back(degradation(b.at({p, s})));
            t.cells[{p, s}] = std::move(in);
        }
    if (!missing.empty())
        throw EvaluationError("mPE inputs are missing cells: " + describe_cells(missing));
    t.validate();
    return t;
}

RobustnessReport build_report(const std::string& model, const MapMatrix& target, const MpeTable& table,
                              std::optional<double> clean_map)
{
    if (const auto missing = missing_cells(target); !missing.empty())
        throw EvaluationError("target mAP matrix is missing cells: " + describe_cells(missing));
    if (table.levels != 3)
        throw EvaluationError("reports cover exactly three severity levels");
    table.validate();
    if (clean_map)
        degradation(*clean_map);

    RobustnessReport r;
    r.model = model;
    r.clean_map = clean_map;
    r.mpe_table = table;
    std::vector<double> rds;
    for (int p = 1; p <= 12; ++p) {
        RobustnessReport::Row row;
        row.perturbation = p;
        std::vector<double> d, m;
        for (int s = 1; s <= 3; ++s) {
            auto& c = row.levels[std::size_t(s - 1)];
            c.map = target.at({p, s});
            c.degradation = degradation(c.map);
            c.mpe = table.level_value(p, s);
            if (!(c.mpe > 0.0))
                throw EvaluationError("RD: mPE of P" + std::to_string(p) + "/L" + std::to_string(s) +
                                      " is zero; the perturbation had no measured effect");
            c.ratio = 100.0 * c.degradation / c.mpe;
            d.push_back(c.degradation);
            m.push_back(c.mpe);
        }
        row.map = (row.levels[0].map + row.levels[1].map + row.levels[2].map) / 3.0;
        row.mpe = table.perturbation_value(p);
        row.rd = rd(d, m);
        rds.push_back(row.rd);
        r.rows.push_back(row);
    }
    r.p_avg = p_avg(target);
    r.mrd = mrd(rds);
    return r;
}

nlohmann::json RobustnessReport::to_json() const
{
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json lv = nlohmann::json::array();
        for (int s = 0; s < 3; ++s) {
            const Cell& c = row.levels[std::size_t(s)];
            lv.push_back({{"level", s + 1},
                          {"map", c.map},
                          {"degradation", c.degradation},
                          {"mpe", c.mpe},
                          {"rd_ratio", c.ratio}});
        }
        const auto id = PerturbationId(row.perturbation);
        rows_j.push_back({{"perturbation", perturbation_code(id)},
                          {"name", perturbation_name(id)},
                          {"levels", lv},
                          {"map", row.map},
                          {"mpe", row.mpe},
                          {"rd", row.rd}});
    }
    return {{"schema", report_schema},
            {"model", model},
            {"clean_map", clean_map ? nlohmann::json(*clean_map) : nlohmann::json(nullptr)},
            {"perturbations", rows_j},
            {"p_avg", p_avg},
            {"mrd", mrd},
            {"mpe_inputs", mpe_table.to_json()}};
}

namespace {

std::string num(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string RobustnessReport::to_csv() const
{
    std::string out = "row,perturbation,level,map,degradation,mpe,rd\n";
    for (const auto& row : rows) {
        const std::string code = perturbation_code(PerturbationId(row.perturbation));
        for (int s = 0; s < 3; ++s) {
            const Cell& c = row.levels[std::size_t(s)];
            out += "level," + code + "," + std::to_string(s + 1) + "," + num(c.map) + "," + num(c.degradation) + "," +
                   num(c.mpe) + "," + num(c.ratio) + "\n";
        }
        out += "perturbation," + code + ",," + num(row.map) + "," + num(100.0 - row.map) + "," + num(row.mpe) + "," +
               num(row.rd) + "\n";
    }
    out += "aggregate,P-Avg,," + num(p_avg) + "," + num(100.0 - p_avg) + ",,\n";
    out += "aggregate,mRD,,,,," + num(mrd) + "\n";
    if (clean_map)
        out += "aggregate,clean,," + num(*clean_map) + "," + num(100.0 - *clean_map) + ",,\n";
    return out;
}

RobustnessReport RobustnessReport::from_json(const nlohmann::json& j)
{
    if (j.value("schema", "") != report_schema)
        throw ValidationError("not a robustness report (schema must be " + std::string(report_schema) + ")");
    MapMatrix target;
    for (const auto& row : j.at("perturbations")) {
        const int p = int(parse_perturbation(row.at("perturbation").get<std::string>()));
        for (const auto& c : row.at("levels"))
            target[{p, c.at("level").get<int>()}] = c.at("map").get<double>();
    }
    const auto& mi = j.at("mpe_inputs");
    MpeTable t;
    t.levels = mi.at("N").get<int>();
    t.metrics = mi.at("M").get<int>();
    t.baselines = mi.at("K").get<int>();
    for (const auto& c : mi.at("cells")) {
        const int p = int(parse_perturbation(c.at("perturbation").get<std::string>()));
        t.cells[{p, c.at("level").get<int>()}] = {c.at("f").get<std::vector<double>>(),
                                                  c.at("d").get<std::vector<double>>()};
    }
    std::optional<double> clean;
    if (!j.at("clean_map").is_null())
        clean = j.at("clean_map").get<double>();
    return build_report(j.at("model").get<std::string>(), target, t, clean);
}

} // namespace docrobust
