#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "../internal/parallel.hpp"
#include "docrobust/datasetio.hpp"
#include "docrobust/errors.hpp"
#include "docrobust/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace docrobust {

Variant single_variant(PerturbationId id, int level, const ParamOverrides& overrides)
{
    Variant v;
    v.name = perturbation_code(id) + "_L" + std::to_string(level);
    v.stages.push_back({id, level, 0, overrides});
    validate(v.stages.back());
    return v;
}

Variant chain_variant(std::string_view chain_text)
{
    Variant v;
    v.stages = parse_chain(chain_text, 0);
    v.name = "chain";
    for (const auto& s : v.stages)
        v.name += "_" + perturbation_code(s.id) + "-" + std::to_string(s.level);
    return v;
}

std::vector<Variant> full_grid(const ParamOverrides& overrides)
{
    std::vector<Variant> out;
    for (int p = 1; p <= 12; ++p) {
        const auto id = PerturbationId(p);
        const auto owned = overridable_parameters(id);
        ParamOverrides mine;
        for (const auto& [k, v] : overrides)
            if (std::find(owned.begin(), owned.end(), k) != owned.end())
                mine[k] = v;
        for (int s = 1; s <= 3; ++s)
            out.push_back(single_variant(id, s, mine));
    }
    return out;
}

namespace {

json stage_json(const PerturbationSpec& s)
{
    return {{"perturbation", perturbation_code(s.id)}, {"level", s.level}, {"overrides", s.overrides}};
}

json variant_json(const Variant& v)
{
    json stages = json::array();
    for (const auto& s : v.stages)
        stages.push_back(stage_json(s));
    return {{"name", v.name}, {"stages", stages}, {"annotations", v.name + "/annotations.json"}};
}

Variant variant_from_json(const json& j)
{
    Variant v;
    v.name = j.at("name").get<std::string>();
    for (const auto& s : j.at("stages")) {
        PerturbationSpec spec;
        spec.id = parse_perturbation(s.at("perturbation").get<std::string>());
        spec.level = s.at("level").get<int>();
        spec.overrides = s.value("overrides", json::object()).get<ParamOverrides>();
        v.stages.push_back(spec);
    }
    return v;
}

json entry_json(const ManifestEntry& e)
{
    json child;
    if (const auto it = e.provenance.find("chain"); it != e.provenance.end()) {
        child = json::array();
        for (const auto& st : *it)
            child.push_back(st.at("child_seed"));
    } else {
        child = e.provenance.at("child_seed");
    }
    return {{"image_id", e.image_id},     {"variant", e.variant},   {"perturbation", e.perturbation},
            {"level", e.level},           {"child_seed", child},    {"provenance", e.provenance},
            {"output", e.output},         {"sha256", e.output_sha256}, {"annotations", e.annotations}};
}

ManifestEntry entry_from_json(const json& j)
{
    ManifestEntry e;
    e.image_id = j.at("image_id").get<std::int64_t>();
    e.variant = j.at("variant").get<std::string>();
    e.perturbation = j.at("perturbation").get<std::string>();
    e.level = j.at("level").get<int>();
    e.provenance = j.at("provenance");
    e.output = j.at("output").get<std::string>();
    e.output_sha256 = j.at("sha256").get<std::string>();
    e.annotations = j.at("annotations").get<std::string>();
    return e;
}

// File stem for an image: its file name without extension, path separators
// flattened so every output sits directly in the variant's images folder.
std::string output_stem(const CocoImage& im)
{
    std::string s = fs::path(im.file_name).replace_extension().generic_string();
    for (char& c : s)
        if (c == '/' || c == '\\' || c == ':')
            c = '_';
    return s;
}

std::vector<PerturbationSpec> seeded(const Variant& v, std::uint64_t seed)
{
    auto stages = v.stages;
    for (auto& s : stages)
        s.seed = seed;
    return stages;
}

std::pair<AnnotatedPage, ProvenanceRecord> run_variant(const Variant& v, std::uint64_t seed, const AnnotatedPage& page,
                                                       const ResourcePool& pool)
{
    const auto stages = seeded(v, seed);
    if (stages.size() == 1)
        return apply(stages[0], page, pool);
    return chain(stages, page, pool);
}

struct Done {
    ManifestEntry entry;
    int width = 0;
    int height = 0;
    std::vector<Annotation> annotations;
};

json done_json(const Done& d)
{
    CocoDataset tmp;
    for (const auto& a : d.annotations)
        tmp.annotations.push_back({d.entry.image_id, a});
    return {{"entry", entry_json(d.entry)},
            {"width", d.width},
            {"height", d.height},
            {"annotations", coco_to_json(tmp)["annotations"]}};
}

Done done_from_json(const json& j)
{
    Done d;
    d.entry = entry_from_json(j.at("entry"));
    d.width = j.at("width").get<int>();
    d.height = j.at("height").get<int>();
    // Reuse the COCO parser with a throwaway image and open category set.
    json doc = {{"images", {{{"id", d.entry.image_id}, {"file_name", "x"}, {"width", d.width}, {"height", d.height}}}},
                {"categories", json::array()},
                {"annotations", j.at("annotations")}};
    std::set<std::int64_t> cats;
    for (const auto& a : j.at("annotations"))
        cats.insert(a.at("category_id").get<std::int64_t>());
    for (auto c : cats)
        doc["categories"].push_back({{"id", c}, {"name", "c"}});
    for (auto& ca : parse_coco(doc, {}).annotations)
        d.annotations.push_back(std::move(ca.ann));
    return d;
}

} // namespace

json Manifest::to_json() const
{
    json vs = json::array(), es = json::array();
    for (const auto& v : variants)
        vs.push_back(variant_json(v));
    for (const auto& e : entries)
        es.push_back(entry_json(e));
    return {{"schema", manifest_schema},
            {"tool_version", tool_version},
            {"source_fingerprint", source_fingerprint},
            {"pool_fingerprint", pool_fingerprint},
            {"base_seed", base_seed},
            {"variants", vs},
            {"entries", es}};
}

Manifest Manifest::from_json(const json& j)
{
    if (!j.is_object() || j.value("schema", "") != manifest_schema)
        throw ValidationError("not a manifest (schema must be " + std::string(manifest_schema) + ")");
    try {
        Manifest m;
        m.tool_version = j.at("tool_version").get<std::string>();
        m.source_fingerprint = j.at("source_fingerprint").get<std::string>();
        m.pool_fingerprint = j.at("pool_fingerprint").get<std::string>();
        m.base_seed = j.at("base_seed").get<std::uint64_t>();
        for (const auto& v : j.at("variants"))
            m.variants.push_back(variant_from_json(v));
        for (const auto& e : j.at("entries"))
            m.entries.push_back(entry_from_json(e));
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
}

const ManifestEntry& Manifest::find(std::int64_t image_id, std::string_view variant) const
{
    for (const auto& e : entries)
        if (e.image_id == image_id && e.variant == variant)
            return e;
    throw ValidationError("manifest has no entry for image " + std::to_string(image_id) + " / " + std::string(variant));
}

Manifest load_manifest(const fs::path& path)
{
    return Manifest::from_json(read_json(path));
}

Manifest write_perturbed_dataset(const CocoDataset& ds, const std::vector<Variant>& variants, const ResourcePool& pool,
                                 const fs::path& out, const GenerateOptions& opt)
{
    if (variants.empty())
        throw ParameterError("no variants selected");
    std::set<std::string> names;
    for (const auto& v : variants) {
        if (v.stages.empty())
            throw ParameterError("variant " + v.name + " has no stages");
        for (const auto& s : v.stages)
            validate(s);
        if (!names.insert(v.name).second)
            throw ParameterError("duplicate variant " + v.name);
    }
    std::vector<std::string> stems;
    {
        std::set<std::string> seen;
        for (const auto& im : ds.images) {
            stems.push_back(output_stem(im));
            if (!seen.insert(stems.back()).second)
                throw ValidationError("two images map to the output name " + stems.back());
        }
    }

    Manifest m;
    m.tool_version = std::string(tool_version());
    m.source_fingerprint = dataset_fingerprint(ds);
    m.pool_fingerprint = pool_fingerprint(pool);
    m.base_seed = opt.base_seed;
    m.variants = variants;

    fs::create_directories(out);
    const fs::path ckpt = out / "checkpoint.jsonl";
    json header = {{"schema", "docrobust.checkpoint/1"},
                   {"source_fingerprint", m.source_fingerprint},
                   {"pool_fingerprint", m.pool_fingerprint},
                   {"tool_version", m.tool_version},
                   {"base_seed", m.base_seed},
                   {"variants", json::array()}};
    for (const auto& v : variants)
        header["variants"].push_back(variant_json(v));

    const std::size_t n_img = ds.images.size(), n_var = variants.size();
    std::vector<std::optional<Done>> done(n_img * n_var);
    std::map<std::pair<std::int64_t, std::string>, std::size_t> slot;
    for (std::size_t i = 0; i < n_img; ++i)
        for (std::size_t v = 0; v < n_var; ++v)
            slot[{ds.images[i].id, variants[v].name}] = i * n_var + v;

    // Resume from a checkpoint written for the same inputs; stale or damaged
    // records are simply regenerated.
    bool resume = false;
    if (std::ifstream in(ckpt); in) {
        std::string line;
        if (std::getline(in, line) && json::accept(line) && json::parse(line) == header) {
            resume = true;
            while (std::getline(in, line)) {
                if (!json::accept(line))
                    continue;
                try {
                    Done d = done_from_json(json::parse(line));
                    const auto it = slot.find({d.entry.image_id, d.entry.variant});
                    if (it == slot.end())
                        continue;
                    const fs::path f = out / d.entry.output;
                    if (fs::exists(f) && sha256_file(f) == d.entry.output_sha256)
                        done[it->second] = std::move(d);
                } catch (const std::exception&) {
                }
            }
        }
    }
    std::ofstream log(ckpt, resume ? std::ios::app : std::ios::trunc);
    if (!log)
        throw IoError("cannot write " + ckpt.string());
    if (!resume)
        log << header.dump() << "\n" << std::flush;

    for (const auto& v : variants)
        fs::create_directories(out / v.name / "images");

    std::mutex log_mu;
    detail::parallel_for(n_img, opt.threads, [&](std::size_t i) {
        std::optional<AnnotatedPage> page;
        for (std::size_t v = 0; v < n_var; ++v) {
            auto& cell = done[i * n_var + v];
            if (cell)
                continue;
            if (!page)
                page = ds.page(ds.images[i].id);
            const Variant& var = variants[v];
            auto [res, prov] = run_variant(var, opt.base_seed, *page, pool);
            const auto bytes = encode_png(res.image);
            Done d;
            d.entry.image_id = ds.images[i].id;
            d.entry.variant = var.name;
            d.entry.perturbation = var.stages.size() == 1 ? perturbation_code(var.stages[0].id) : "chain";
            d.entry.level = var.stages.size() == 1 ? var.stages[0].level : 0;
            d.entry.provenance = std::move(prov);
            d.entry.output = var.name + "/images/" + stems[i] + ".png";
            d.entry.output_sha256 = sha256_hex(bytes.data(), bytes.size());
            d.entry.annotations = var.name + "/annotations.json";
            d.width = res.image.width();
            d.height = res.image.height();
            d.annotations = std::move(res.annotations);

            // Write to a temporary name first so a crash never leaves a
            // truncated file under the final name.
            const fs::path final_path = out / d.entry.output;
            fs::path tmp = final_path;
            tmp += ".part";
            write_text(tmp, std::string(bytes.begin(), bytes.end()));
            fs::rename(tmp, final_path);
            {
                std::lock_guard lock(log_mu);
                log << done_json(d).dump() << "\n" << std::flush;
                if (!log)
                    throw IoError("cannot append to " + ckpt.string());
                if (opt.progress)
                    opt.progress(d.entry);
            }
            cell = std::move(d);
        }
    });

    for (std::size_t v = 0; v < n_var; ++v) {
        CocoDataset vd;
        vd.categories = ds.categories;
        for (std::size_t i = 0; i < n_img; ++i) {
            const Done& d = *done[i * n_var + v];
            vd.images.push_back({ds.images[i].id, stems[i] + ".png", d.width, d.height});
            for (const auto& a : d.annotations)
                vd.annotations.push_back({ds.images[i].id, a});
        }
        save_coco(vd, out / variants[v].name / "annotations.json");
    }
    for (std::size_t i = 0; i < n_img; ++i)
        for (std::size_t v = 0; v < n_var; ++v)
            m.entries.push_back(done[i * n_var + v]->entry);
    write_json(out / "manifest.json", m.to_json());
    log.close();
    fs::remove(ckpt);
    return m;
}

std::string replay_entry(const Manifest& m, const ManifestEntry& e, const CocoDataset& ds, const ResourcePool& pool)
{
    const auto it = std::find_if(m.variants.begin(), m.variants.end(), [&](const Variant& v) { return v.name == e.variant; });
    if (it == m.variants.end())
        throw ValidationError("manifest does not define variant " + e.variant);
    const auto page = ds.page(e.image_id);
    const auto bytes = encode_png(run_variant(*it, m.base_seed, page, pool).first.image);
    return sha256_hex(bytes.data(), bytes.size());
}

} // namespace docrobust
