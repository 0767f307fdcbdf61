#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "docrobust/detmetrics.hpp"
#include "docrobust/iqa.hpp"
#include "docrobust/page.hpp"
#include "docrobust/perturb.hpp"
#include "docrobust/synth.hpp"

namespace docrobust {

std::string_view tool_version() noexcept;

struct CocoImage {
    std::int64_t id = 0;
    std::string file_name;
    int width = 0;
    int height = 0;

    bool operator==(const CocoImage&) const = default;
};

struct CocoCategory {
    std::int64_t id = 0;
    std::string name;
    std::string supercategory;

    bool operator==(const CocoCategory&) const = default;
};

struct CocoAnnotation {
    std::int64_t image_id = 0;
    Annotation ann;

    bool operator==(const CocoAnnotation&) const = default;
};

struct CocoDataset {
    std::vector<CocoImage> images;
    std::vector<CocoAnnotation> annotations;
    std::vector<CocoCategory> categories;
    /// Directory that image file names are relative to.
    std::filesystem::path image_root;
    /// Image files that did not exist at load time; fatal only when read.
    std::vector<std::string> missing_files;
    /// Boxes that had to be clipped to their image during loading.
    std::size_t clipped_boxes = 0;

    const CocoImage& image(std::int64_t id) const;
    std::vector<Annotation> annotations_of(std::int64_t image_id) const;
    /// Loads the pixels and annotations of one image; page_id is the image id.
    AnnotatedPage page(std::int64_t image_id) const;
    std::vector<GroundTruth> ground_truth() const;

    /// Structural equality of images, annotations and categories.
    bool same_content(const CocoDataset& other) const;
};

/// Reads a COCO annotation file, or a directory holding annotations.json and
/// an images/ folder. Images resolve against `images/` next to the JSON when
/// that folder exists, else against the JSON's own directory.
CocoDataset load_coco(const std::filesystem::path& path);
CocoDataset parse_coco(const nlohmann::json& j, const std::filesystem::path& image_root);
nlohmann::json coco_to_json(const CocoDataset& ds);
void save_coco(const CocoDataset& ds, const std::filesystem::path& json_path);

/// Content hash over the annotation JSON and every image file.
std::string dataset_fingerprint(const CocoDataset& ds);
std::string pool_fingerprint(const ResourcePool& pool);

/// Writes `count` synthetic pages as a COCO dataset under `dir`.
CocoDataset write_synthetic_dataset(const std::filesystem::path& dir, std::uint64_t seed, int count,
                                    const SynthOptions& opt = {});

/// One output variant: a single perturbation or a left-to-right chain.
struct Variant {
    std::string name; ///< "P4_L2" or "chain_P2-1_P4-1"
    std::vector<PerturbationSpec> stages;
};

/// Stage seeds are filled in from the base seed at generation time.
Variant single_variant(PerturbationId id, int level, const ParamOverrides& overrides = {});
Variant chain_variant(std::string_view chain_text);
/// All 36 (perturbation, level) variants in P1/L1 .. P12/L3 order. Overrides
/// apply to the perturbations that own them.
std::vector<Variant> full_grid(const ParamOverrides& overrides = {});

struct ManifestEntry {
    std::int64_t image_id = 0;
    std::string variant;
    std::string perturbation; ///< "P4", or "chain"
    int level = 0;            ///< 0 for chains
    nlohmann::json provenance; ///< child seed(s) and realized parameters
    std::string output;       ///< relative to the output root
    std::string output_sha256;
    std::string annotations;  ///< the variant's COCO file, relative to the output root
};

struct Manifest {
    std::string tool_version;
    std::string source_fingerprint;
    std::string pool_fingerprint;
    std::uint64_t base_seed = 0;
    std::vector<Variant> variants;
    std::vector<ManifestEntry> entries; ///< ordered by (image id, variant order)

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& j);
    const ManifestEntry& find(std::int64_t image_id, std::string_view variant) const;
};

inline constexpr const char* manifest_schema = "docrobust.manifest/1";

Manifest load_manifest(const std::filesystem::path& path);

struct GenerateOptions {
    unsigned threads = 1;
    std::uint64_t base_seed = 42;
    /// Called after each entry is checkpointed (from worker threads, serialized).
    std::function<void(const ManifestEntry&)> progress;
};

/// Writes <out>/<variant>/images/<stem>.png plus <out>/<variant>/annotations.json
/// for every image x variant, and <out>/manifest.json. Progress goes to
/// <out>/checkpoint.jsonl; a rerun with the same inputs resumes from it.
Manifest write_perturbed_dataset(const CocoDataset& ds, const std::vector<Variant>& variants,
                                 const ResourcePool& pool, const std::filesystem::path& out,
                                 const GenerateOptions& opt = {});

/// Re-executes one entry against the source image and returns the PNG hash.
std::string replay_entry(const Manifest& m, const ManifestEntry& e, const CocoDataset& ds, const ResourcePool& pool);

/// Detections keyed by image id, each group in file order.
struct PredictionSet {
    std::map<std::int64_t, std::vector<Detection>> by_image;

    std::size_t size() const;
    std::vector<Detection> flat() const;
};

PredictionSet parse_predictions(const nlohmann::json& j);
PredictionSet load_predictions(const std::filesystem::path& path);
nlohmann::json predictions_to_json(const std::vector<Detection>& dets);

struct IqaRecord {
    std::int64_t image_id = 0;
    std::string variant;
    std::string perturbation;
    int level = 0;
    std::optional<IqaScore> score; ///< absent when an input image is missing
    std::string error;
};

struct IqaSummary {
    std::string variant;
    std::string perturbation;
    int level = 0;
    std::size_t count = 0;
    std::size_t missing = 0;
    double ms_ssim = 0.0;
    double cw_ssim = 0.0;
    double loss_ms = 0.0;
    double loss_cw = 0.0;
};

struct IqaRun {
    std::vector<IqaRecord> records; ///< one per manifest entry, manifest order
    std::vector<IqaSummary> summary; ///< one per variant, first-seen order

    bool complete() const;
    /// JSON array of per-entry records.
    nlohmann::json records_json() const;
    /// JSON array of per-variant means.
    nlohmann::json summary_json() const;
    /// Rebuilds records and summary from a records array.
    static IqaRun from_records_json(const nlohmann::json& j);
};

std::vector<IqaSummary> summarize(const std::vector<IqaRecord>& records);

/// Scores every manifest entry against its clean source image.
IqaRun score_manifest(const Manifest& m, const std::filesystem::path& out_root, const CocoDataset& clean,
                      unsigned threads = 1, const PyramidConfig& cfg = {});

/// Per-cell loss vectors {loss_ms, loss_cw} from single-perturbation variants.
std::map<std::pair<int, int>, std::vector<double>> iqa_losses(const IqaRun& run);

struct DegradationRecord {
    std::string model;
    int perturbation = 0;
    int level = 0;
    double map = 0.0;
    double degradation = 0.0;
};

nlohmann::json degradation_to_json(const std::vector<DegradationRecord>& recs);
std::vector<DegradationRecord> degradation_from_json(const nlohmann::json& j);
MapMatrix to_map_matrix(const std::vector<DegradationRecord>& recs);

/// Reads a JSON file, reporting parse errors with line and column.
nlohmann::json read_json(const std::filesystem::path& path);
/// Writes JSON with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace docrobust
