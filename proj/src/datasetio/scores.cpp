#include <cmath>

#include "../internal/parallel.hpp"
#include "docrobust/datasetio.hpp"
#include "docrobust/errors.hpp"
#include "docrobust/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace docrobust {

std::size_t PredictionSet::size() const
{
    std::size_t n = 0;
    for (const auto& [id, v] : by_image)
        n += v.size();
    return n;
}

std::vector<Detection> PredictionSet::flat() const
{
    std::vector<Detection> out;
    for (const auto& [id, v] : by_image)
        out.insert(out.end(), v.begin(), v.end());
    return out;
}

PredictionSet parse_predictions(const json& j)
{
    if (!j.is_array())
        throw ValidationError("predictions must be a JSON array of detection records");
    PredictionSet out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& r = j[i];
        const std::string ctx = "prediction record " + std::to_string(i);
        auto num = [&](const json& v, const char* what) {
            if (!v.is_number() || !std::isfinite(v.get<double>()))
                throw ValidationError(ctx + ": " + what + " must be a finite number");
            return v.get<double>();
        };
        auto integer = [&](const char* key) {
            if (!r.is_object() || !r.contains(key) || !r[key].is_number_integer())
                throw ValidationError(ctx + ": \"" + key + "\" must be an integer");
            return r[key].get<std::int64_t>();
        };
        Detection d;
        d.image_id = integer("image_id");
        d.category_id = integer("category_id");
        if (!r.contains("bbox") || !r["bbox"].is_array() || r["bbox"].size() != 4)
            throw ValidationError(ctx + ": bbox must hold four numbers");
        d.box = {num(r["bbox"][0], "bbox"), num(r["bbox"][1], "bbox"), num(r["bbox"][2], "bbox"),
                 num(r["bbox"][3], "bbox")};
        if (d.box.w < 0)
            throw ValidationError(ctx + ": negative width");
        if (d.box.h < 0)
            throw ValidationError(ctx + ": negative height");
        if (!r.contains("score"))
            throw ValidationError(ctx + ": missing score");
        d.score = num(r["score"], "score");
        if (d.score < 0.0 || d.score > 1.0)
            throw ValidationError(ctx + ": score " + r["score"].dump() + " outside [0, 1]");
        out.by_image[d.image_id].push_back(d);
    }
    return out;
}

PredictionSet load_predictions(const fs::path& path)
{
    return parse_predictions(read_json(path));
}

json predictions_to_json(const std::vector<Detection>& dets)
{
    json out = json::array();
    for (const auto& d : dets)
        out.push_back({{"image_id", d.image_id},
                       {"category_id", d.category_id},
                       {"bbox", {d.box.x, d.box.y, d.box.w, d.box.h}},
                       {"score", d.score}});
    return out;
}

std::vector<IqaSummary> summarize(const std::vector<IqaRecord>& records)
{
    std::vector<IqaSummary> out;
    std::map<std::string, std::size_t> index;
    for (const auto& r : records) {
        auto [it, fresh] = index.try_emplace(r.variant, out.size());
        if (fresh)
            out.push_back({r.variant, r.perturbation, r.level});
        IqaSummary& s = out[it->second];
        if (!r.score) {
            ++s.missing;
            continue;
        }
        ++s.count;
        s.ms_ssim += r.score->ms_ssim;
        s.cw_ssim += r.score->cw_ssim;
        s.loss_ms += r.score->loss_ms;
        s.loss_cw += r.score->loss_cw;
    }
    for (auto& s : out)
        if (s.count) {
            const double n = double(s.count);
            s.ms_ssim /= n;
            s.cw_ssim /= n;
            s.loss_ms /= n;
            s.loss_cw /= n;
        }
    return out;
}

bool IqaRun::complete() const
{
    for (const auto& r : records)
        if (!r.score)
            return false;
    return true;
}

json IqaRun::records_json() const
{
    json out = json::array();
    for (const auto& r : records) {
        json o = {{"image_id", r.image_id}, {"variant", r.variant}, {"perturbation", r.perturbation}, {"level", r.level}};
        if (r.score) {
            o["ms_ssim"] = r.score->ms_ssim;
            o["cw_ssim"] = r.score->cw_ssim;
            o["loss_ms"] = r.score->loss_ms;
            o["loss_cw"] = r.score->loss_cw;
        } else {
            o["missing"] = true;
            o["error"] = r.error;
        }
        out.push_back(std::move(o));
    }
    return out;
}

json IqaRun::summary_json() const
{
    json out = json::array();
    for (const auto& s : summary) {
        json o = {{"variant", s.variant}, {"perturbation", s.perturbation}, {"level", s.level},
                  {"count", s.count},     {"missing", s.missing}};
        if (s.count) {
            o["ms_ssim"] = s.ms_ssim;
            o["cw_ssim"] = s.cw_ssim;
            o["loss_ms"] = s.loss_ms;
            o["loss_cw"] = s.loss_cw;
        }
        out.push_back(std::move(o));
    }
    return out;
}

IqaRun IqaRun::from_records_json(const json& j)
{
    if (!j.is_array())
        throw ValidationError("IQA file must be a JSON array of records");
    IqaRun run;
    try {
        for (const auto& o : j) {
            IqaRecord r;
            r.image_id = o.at("image_id").get<std::int64_t>();
            r.variant = o.at("variant").get<std::string>();
            r.perturbation = o.at("perturbation").get<std::string>();
            r.level = o.at("level").get<int>();
            if (o.value("missing", false)) {
                r.error = o.value("error", "");
            } else {
                IqaScore s;
                s.ms_ssim = o.at("ms_ssim").get<double>();
                s.cw_ssim = o.at("cw_ssim").get<double>();
                s.loss_ms = o.at("loss_ms").get<double>();
                s.loss_cw = o.at("loss_cw").get<double>();
                r.score = s;
            }
            run.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed IQA record: ") + e.what());
    }
    run.summary = summarize(run.records);
    return run;
}

IqaRun score_manifest(const Manifest& m, const fs::path& out_root, const CocoDataset& clean, unsigned threads,
                      const PyramidConfig& cfg)
{
    cfg.validate();
    // Entries of one image share the clean reference, so work is split per image.
    std::vector<std::int64_t> order;
    std::map<std::int64_t, std::vector<std::size_t>> by_image;
    for (std::size_t k = 0; k < m.entries.size(); ++k) {
        auto& v = by_image[m.entries[k].image_id];
        if (v.empty())
            order.push_back(m.entries[k].image_id);
        v.push_back(k);
    }

    IqaRun run;
    run.records.resize(m.entries.size());
    for (std::size_t k = 0; k < m.entries.size(); ++k) {
        const auto& e = m.entries[k];
        run.records[k] = {e.image_id, e.variant, e.perturbation, e.level, std::nullopt, {}};
    }

    detail::parallel_for(order.size(), threads, [&](std::size_t i) {
        const std::int64_t id = order[i];
        const auto& idx = by_image.at(id);
        std::optional<IqaReference> ref;
        std::string clean_error;
        try {
            const auto& im = clean.image(id);
            const fs::path p = clean.image_root / im.file_name;
            if (!fs::exists(p))
                clean_error = "clean image missing: " + im.file_name;
            else
                ref.emplace(read_image(p), cfg);
        } catch (const ValidationError& e) {
            clean_error = e.what();
        }
        for (std::size_t k : idx) {
            IqaRecord& r = run.records[k];
            if (!ref) {
                r.error = clean_error;
                continue;
            }
            const fs::path p = out_root / m.entries[k].output;
            if (!fs::exists(p)) {
                r.error = "perturbed image missing: " + m.entries[k].output;
                continue;
            }
            r.score = ref->score(read_image(p));
        }
    });
    run.summary = summarize(run.records);
    return run;
}

std::map<std::pair<int, int>, std::vector<double>> iqa_losses(const IqaRun& run)
{
    std::map<std::pair<int, int>, std::vector<double>> out;
    for (const auto& s : run.summary) {
        if (s.perturbation == "chain" || s.count == 0)
            continue;
        out[{int(parse_perturbation(s.perturbation)), s.level}] = {s.loss_ms, s.loss_cw};
    }
    return out;
}

json degradation_to_json(const std::vector<DegradationRecord>& recs)
{
    json out = json::array();
    for (const auto& r : recs)
        out.push_back({{"model", r.model},
                       {"perturbation", perturbation_code(PerturbationId(r.perturbation))},
                       {"level", r.level},
                       {"map", r.map},
                       {"degradation", r.degradation}});
    return out;
}

std::vector<DegradationRecord> degradation_from_json(const json& j)
{
    if (!j.is_array())
        throw ValidationError("degradation file must be a JSON array");
    std::vector<DegradationRecord> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            DegradationRecord r;
            r.model = j[i].value("model", "");
            r.perturbation = int(parse_perturbation(j[i].at("perturbation").get<std::string>()));
            r.level = j[i].at("level").get<int>();
            r.map = j[i].at("map").get<double>();
            r.degradation = j[i].contains("degradation") ? j[i]["degradation"].get<double>() : 100.0 - r.map;
            if (r.degradation != 100.0 - r.map)
                throw ValidationError("degradation must equal 100 - map");
            out.push_back(r);
        } catch (const json::exception& e) {
            throw ValidationError("degradation record " + std::to_string(i) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("degradation record " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

MapMatrix to_map_matrix(const std::vector<DegradationRecord>& recs)
{
    MapMatrix m;
    for (const auto& r : recs)
        if (!m.emplace(std::pair{r.perturbation, r.level}, r.map).second)
            throw ValidationError("duplicate degradation record for " +
                                  describe_cells(std::vector{std::pair{r.perturbation, r.level}}));
    return m;
}

} // namespace docrobust
