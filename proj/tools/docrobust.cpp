// Command-line front end: perturb -> iqa -> eval -> report.

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "docrobust/datasetio.hpp"
#include "docrobust/errors.hpp"
#include "docrobust/image_io.hpp"
#include "docrobust/robustness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace docrobust;

namespace {

constexpr std::uint64_t default_seed = 42;

void emit_error(const char* kind, const std::string& message, const json& details = nullptr)
{
    json e = {{"error", {{"kind", kind}, {"message", message}}}};
    if (!details.is_null())
        e["error"]["details"] = details;
    std::cerr << e.dump() << std::endl;
}

unsigned default_threads()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, sep);)
        if (!item.empty())
            out.push_back(item);
    return out;
}

ParamOverrides parse_overrides(const std::vector<std::string>& items)
{
    ParamOverrides out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParameterError("override must look like key=value: " + item);
        try {
            std::size_t used = 0;
            const double v = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1)
                throw std::invalid_argument(item);
            out[item.substr(0, eq)] = v;
        } catch (const std::logic_error&) {
            throw ParameterError("override value is not a number: " + item);
        }
    }
    return out;
}

// --- perturb ---------------------------------------------------------------

struct PerturbArgs {
    std::string input, output, chain, perturbations, levels, pool;
    bool all = false;
    std::uint64_t seed = default_seed;
    unsigned threads = default_threads();
    std::vector<std::string> overrides;
    std::string watermark_text;
};

int cmd_perturb(const PerturbArgs& a)
{
    const ParamOverrides overrides = parse_overrides(a.overrides);
    std::vector<Variant> variants;
    if (!a.chain.empty()) {
        if (a.all || !a.perturbations.empty())
            throw ParameterError("--chain cannot be combined with --all or --perturbations");
        if (!overrides.empty())
            throw ParameterError("--override applies to single perturbations, not chains");
        variants.push_back(chain_variant(a.chain));
    } else if (!a.perturbations.empty()) {
        if (a.all)
            throw ParameterError("--all and --perturbations are mutually exclusive");
        std::vector<int> levels = {1, 2, 3};
        if (!a.levels.empty()) {
            levels.clear();
            for (const auto& l : split(a.levels, ',')) {
                if (l.size() != 1 || l[0] < '1' || l[0] > '3')
                    throw ParameterError("levels must be 1, 2 or 3, got " + l);
                levels.push_back(l[0] - '0');
            }
        }
        std::set<std::string> used;
        for (const auto& code : split(a.perturbations, ',')) {
            const auto id = parse_perturbation(code);
            const auto owned = overridable_parameters(id);
            ParamOverrides mine;
            for (const auto& [k, v] : overrides)
                if (std::find(owned.begin(), owned.end(), k) != owned.end()) {
                    mine[k] = v;
                    used.insert(k);
                }
            for (int l : levels)
                variants.push_back(single_variant(id, l, mine));
        }
        for (const auto& [k, v] : overrides)
            if (!used.count(k))
                throw ParameterError("override " + k + " does not belong to any selected perturbation");
    } else {
        if (!a.levels.empty())
            throw ParameterError("--levels needs --perturbations");
        variants = full_grid(overrides);
        for (const auto& [k, v] : overrides) {
            bool owned = false;
            for (int p = 1; p <= 12 && !owned; ++p) {
                const auto o = overridable_parameters(PerturbationId(p));
                owned = std::find(o.begin(), o.end(), k) != o.end();
            }
            if (!owned)
                throw ParameterError("unknown override " + k);
        }
    }

    ResourcePool pool;
    std::string pool_dir = a.pool;
    if (pool_dir.empty())
        if (const char* env = std::getenv("DOCROBUST_POOL"))
            pool_dir = env;
    if (!pool_dir.empty())
        pool = ResourcePool::from_directory(pool_dir);
    if (!a.watermark_text.empty())
        pool.watermark_text = a.watermark_text;

    const CocoDataset ds = load_coco(a.input);
    GenerateOptions opt;
    opt.threads = a.threads;
    opt.base_seed = a.seed;
    const Manifest m = write_perturbed_dataset(ds, variants, pool, a.output, opt);
    const fs::path manifest_path = fs::path(a.output) / "manifest.json";
    std::cout << json{{"manifest", manifest_path.string()},
                      {"sha256", sha256_file(manifest_path)},
                      {"images", ds.images.size()},
                      {"variants", m.variants.size()},
                      {"entries", m.entries.size()}}
                     .dump()
              << std::endl;
    return 0;
}

// --- iqa -------------------------------------------------------------------

struct IqaArgs {
    std::string clean, manifest, output, summary;
    unsigned threads = default_threads();
};

int cmd_iqa(const IqaArgs& a)
{
    const fs::path manifest_path = a.manifest;
    const Manifest m = load_manifest(manifest_path);
    const CocoDataset clean = load_coco(a.clean);
    // With files missing the hash cannot match; those entries are listed below instead.
    if (clean.missing_files.empty() && dataset_fingerprint(clean) != m.source_fingerprint)
        throw ValidationError("clean dataset does not match the manifest's source fingerprint");
    const fs::path root = manifest_path.parent_path();
    const IqaRun run = score_manifest(m, root, clean, a.threads);

    const fs::path out = a.output.empty() ? root / "iqa.json" : fs::path(a.output);
    fs::path summary = a.summary;
    if (summary.empty())
        summary = out.parent_path() / (out.stem().string() + "_summary.json");
    write_json(out, run.records_json());
    write_json(summary, run.summary_json());

    json missing = json::array();
    for (const auto& r : run.records)
        if (!r.score)
            missing.push_back({{"image_id", r.image_id}, {"variant", r.variant}, {"reason", r.error}});
    std::cout << json{{"records", run.records.size()},
                      {"output", out.string()},
                      {"summary", summary.string()},
                      {"complete", run.complete()}}
                     .dump()
              << std::endl;
    if (!run.complete()) {
        emit_error("evaluation_error", std::to_string(missing.size()) + " records lack an image; scores are incomplete",
                   missing);
        return 1;
    }
    return 0;
}

// --- eval ------------------------------------------------------------------

struct EvalArgs {
    std::string gt, manifest, predictions, output, degradation, model = "model";
};

// Predicted categories must be declared by the ground truth.
void check_categories(const CocoDataset& gt, const PredictionSet& preds, const std::string& what)
{
    std::set<std::int64_t> declared, predicted;
    for (const auto& c : gt.categories)
        declared.insert(c.id);
    for (const auto& [id, dets] : preds.by_image)
        for (const auto& d : dets)
            predicted.insert(d.category_id);
    std::vector<std::int64_t> diff;
    std::set_symmetric_difference(declared.begin(), declared.end(), predicted.begin(), predicted.end(),
                                  std::back_inserter(diff));
    if (!std::includes(declared.begin(), declared.end(), predicted.begin(), predicted.end())) {
        std::string s;
        for (auto c : diff)
            s += (s.empty() ? "" : ", ") + std::to_string(c);
        throw EvaluationError(what + ": category mismatch between ground truth and predictions (symmetric difference: " +
                              s + ")");
    }
}

json evaluate(const CocoDataset& gt, const fs::path& pred_file, const std::string& what)
{
    const PredictionSet preds = load_predictions(pred_file);
    check_categories(gt, preds, what);
    return mean_average_precision(gt.ground_truth(), preds.flat()).to_json();
}

int cmd_eval(const EvalArgs& a)
{
    if (a.manifest.empty()) {
        if (a.gt.empty())
            throw ParameterError("eval needs --gt or --manifest");
        if (fs::is_directory(a.predictions))
            throw ParameterError("with --gt alone, --predictions must be a results file");
        const json res = evaluate(load_coco(a.gt), a.predictions, "clean");
        json out = {{"schema", "docrobust.eval/1"}, {"model", a.model}, {"clean", res}};
        if (a.output.empty())
            std::cout << out.dump(2) << std::endl;
        else
            write_json(a.output, out);
        return 0;
    }

    const fs::path manifest_path = a.manifest;
    const Manifest m = load_manifest(manifest_path);
    const fs::path root = manifest_path.parent_path();
    const fs::path pred_dir = a.predictions;
    if (!fs::is_directory(pred_dir))
        throw ParameterError("with --manifest, --predictions must be a directory of <variant>.json files");

    json out = {{"schema", "docrobust.eval/1"}, {"model", a.model}, {"clean", nullptr}};
    if (!a.gt.empty() && fs::exists(pred_dir / "clean.json"))
        out["clean"] = evaluate(load_coco(a.gt), pred_dir / "clean.json", "clean");

    json variants = json::array();
    std::vector<DegradationRecord> deg;
    for (const auto& v : m.variants) {
        const fs::path pf = pred_dir / (v.name + ".json");
        if (!fs::exists(pf))
            continue;
        const json res = evaluate(load_coco(root / v.name / "annotations.json"), pf, v.name);
        json o = {{"variant", v.name}, {"result", res}};
        if (v.stages.size() == 1) {
            const int p = int(v.stages[0].id), s = v.stages[0].level;
            o["perturbation"] = perturbation_code(v.stages[0].id);
            o["level"] = s;
            const double map = res["map"].get<double>();
            deg.push_back({a.model, p, s, map, degradation(map)});
        }
        variants.push_back(std::move(o));
    }
    const auto missing = missing_cells(to_map_matrix(deg));
    out["variants"] = variants;
    out["degradation"] = degradation_to_json(deg);
    out["matrix_complete"] = missing.empty();
    json miss = json::array();
    for (const auto& [p, s] : missing)
        miss.push_back("P" + std::to_string(p) + "/L" + std::to_string(s));
    out["missing_cells"] = miss;
    if (missing.empty())
        out["p_avg"] = p_avg(to_map_matrix(deg));

    const fs::path dest = a.output.empty() ? root / "eval.json" : fs::path(a.output);
    write_json(dest, out);
    if (!a.degradation.empty())
        write_json(a.degradation, degradation_to_json(deg));
    std::cout << json{{"output", dest.string()},
                      {"variants", variants.size()},
                      {"matrix_complete", missing.empty()},
                      {"clean_map", out["clean"].is_null() ? json(nullptr) : out["clean"]["map"]}}
                     .dump()
              << std::endl;
    return 0;
}

// --- report ----------------------------------------------------------------

struct ReportArgs {
    std::string iqa, target, output, format = "json", model;
    std::vector<std::string> baselines;
};

struct ModelFile {
    std::string model;
    MapMatrix matrix;
    std::optional<double> clean;
};

// Accepts an eval output or a bare degradation array.
ModelFile read_model_file(const fs::path& path)
{
    const json j = read_json(path);
    ModelFile f;
    std::vector<DegradationRecord> recs;
    if (j.is_array()) {
        recs = degradation_from_json(j);
    } else if (j.is_object() && j.contains("degradation")) {
        recs = degradation_from_json(j["degradation"]);
        f.model = j.value("model", "");
        if (j.contains("clean") && j["clean"].is_object())
            f.clean = j["clean"]["map"].get<double>();
    } else {
        throw ValidationError(path.string() + " is neither an eval file nor a degradation array");
    }
    if (f.model.empty() && !recs.empty())
        f.model = recs.front().model;
    f.matrix = to_map_matrix(recs);
    if (const auto missing = missing_cells(f.matrix); !missing.empty())
        throw EvaluationError(path.string() + " is missing cells: " + describe_cells(missing));
    return f;
}

int cmd_report(const ReportArgs& a)
{
    const IqaRun iqa = IqaRun::from_records_json(read_json(a.iqa));
    std::vector<MapMatrix> baselines;
    for (const auto& b : a.baselines)
        baselines.push_back(read_model_file(b).matrix);
    const ModelFile target = read_model_file(a.target);
    const MpeTable table = make_mpe_table(iqa_losses(iqa), baselines);
    const auto report = build_report(a.model.empty() ? target.model : a.model, target.matrix, table, target.clean);
    const std::string text = a.format == "csv" ? report.to_csv() : report.to_json().dump(2) + "\n";
    if (a.output.empty())
        std::cout << text;
    else
        write_text(a.output, text);
    return 0;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
    std::string output;
    int count = 10;
    std::uint64_t seed = default_seed;
    SynthOptions opt;
};

int cmd_synth(const SynthArgs& a)
{
    const auto ds = write_synthetic_dataset(a.output, a.seed, a.count, a.opt);
    std::cout << json{{"output", a.output}, {"images", ds.images.size()}, {"annotations", ds.annotations.size()}}.dump()
              << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Document layout robustness benchmark: perturb, score, evaluate, report"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    PerturbArgs pa;
    auto* perturb = app.add_subcommand("perturb", "Write perturbed variants of a COCO dataset");
    perturb->add_option("--input", pa.input, "COCO json, or a directory with annotations.json and images/")->required();
    perturb->add_option("--output", pa.output, "Output directory")->required();
    perturb->add_flag("--all", pa.all, "All 12 perturbations at 3 levels (default)");
    perturb->add_option("--perturbations", pa.perturbations, "Comma-separated ids, e.g. P1,P9");
    perturb->add_option("--levels", pa.levels, "Comma-separated levels for --perturbations (default 1,2,3)");
    perturb->add_option("--chain", pa.chain, "Composition applied left to right, e.g. \"P2:1,P4:1\"");
    perturb->add_option("--seed", pa.seed, "Base seed")->capture_default_str();
    perturb->add_option("--pool", pa.pool, "Background image directory (default: $DOCROBUST_POOL)");
    perturb->add_option("--watermark-text", pa.watermark_text, "Watermark text");
    perturb->add_option("--override", pa.overrides, "Parameter override key=value (repeatable)");
    perturb->add_option("--threads", pa.threads, "Worker threads")->check(CLI::PositiveNumber);

    IqaArgs ia;
    auto* iqa = app.add_subcommand("iqa", "Score perturbed images against their clean sources");
    iqa->add_option("--clean", ia.clean, "Clean COCO dataset")->required();
    iqa->add_option("--manifest", ia.manifest, "manifest.json written by perturb")->required();
    iqa->add_option("--output", ia.output, "Per-entry records (default <manifest dir>/iqa.json)");
    iqa->add_option("--summary", ia.summary, "Per-variant means (default <output stem>_summary.json)");
    iqa->add_option("--threads", ia.threads, "Worker threads")->check(CLI::PositiveNumber);

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "COCO-style mAP of predictions");
    eval->add_option("--gt", ea.gt, "Clean ground truth");
    eval->add_option("--manifest", ea.manifest, "Evaluate every variant of a perturbed dataset");
    eval->add_option("--predictions", ea.predictions,
                     "Results file, or a directory of <variant>.json (and clean.json) files")
        ->required();
    eval->add_option("--model", ea.model, "Model name recorded in the output")->capture_default_str();
    eval->add_option("--output", ea.output, "Output file (default <manifest dir>/eval.json, or stdout)");
    eval->add_option("--degradation", ea.degradation, "Also write the degradation array here");

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Robustness report: per-perturbation RD, mRD and P-Avg");
    report->add_option("--iqa", ra.iqa, "IQA records from the iqa command")->required();
    report->add_option("--baseline", ra.baselines, "Baseline eval or degradation file (repeatable)")->required();
    report->add_option("--target", ra.target, "Target model eval or degradation file")->required();
    report->add_option("--model", ra.model, "Model name (default: from the target file)");
    report->add_option("--format", ra.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    report->add_option("--output", ra.output, "Output file (default stdout)");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Write a synthetic document corpus as a COCO dataset");
    synth->add_option("--output", sa.output, "Output directory")->required();
    synth->add_option("--count", sa.count, "Number of pages")->check(CLI::PositiveNumber)->capture_default_str();
    synth->add_option("--seed", sa.seed, "Seed")->capture_default_str();
    synth->add_option("--width", sa.opt.width, "Page width")->capture_default_str();
    synth->add_option("--height", sa.opt.height, "Page height")->capture_default_str();
    synth->add_option("--channels", sa.opt.channels, "1 or 3")->check(CLI::IsMember({1, 3}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage_error", e.what());
        return 2;
    }

    try {
        if (*perturb)
            return cmd_perturb(pa);
        if (*iqa)
            return cmd_iqa(ia);
        if (*eval)
            return cmd_eval(ea);
        if (*report)
            return cmd_report(ra);
        if (*synth)
            return cmd_synth(sa);
    } catch (const Error& e) {
        emit_error(e.kind(), e.what());
        return 1;
    } catch (const fs::filesystem_error& e) {
        emit_error("io_error", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("internal_error", e.what());
        return 1;
    }
    return 1;
}
