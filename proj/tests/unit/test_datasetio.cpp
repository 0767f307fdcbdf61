#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "docrobust/datasetio.hpp"
#include "docrobust/errors.hpp"
#include "docrobust/image_io.hpp"

using namespace docrobust;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
    {
        path = fs::temp_directory_path() / ("docrobust_test_" + name);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

json minimal_json()
{
    return {{"images", {{{"id", 7}, {"file_name", "a.png"}, {"width", 40}, {"height", 30}}}},
            {"annotations",
             {{{"id", 1}, {"image_id", 7}, {"category_id", 2}, {"bbox", {1.5, 2, 10, 12.25}}, {"area", 100.0}}}},
            {"categories", {{{"id", 2}, {"name", "title"}}}}};
}

} // namespace

TEST_SUITE("coco")
{
    TEST_CASE("minimal dataset round-trips")
    {
        TempDir dir("coco_rt");
        write_json(dir.path / "in.json", minimal_json());
        const auto a = load_coco(dir.path / "in.json");
        REQUIRE(a.images.size() == 1);
        CHECK(a.annotations[0].ann.box == Box{1.5, 2, 10, 12.25});
        CHECK(a.missing_files == std::vector<std::string>{"a.png"});
        save_coco(a, dir.path / "out.json");
        const auto b = load_coco(dir.path / "out.json");
        CHECK(a.same_content(b));
        save_coco(b, dir.path / "out2.json");
        CHECK(slurp(dir.path / "out.json") == slurp(dir.path / "out2.json"));
    }

    TEST_CASE("segmentation, crowd flag and supercategory survive the round trip")
    {
        auto j = minimal_json();
        j["annotations"][0]["segmentation"] = {{1.5, 2, 11.5, 2, 11.5, 14.25, 1.5, 14.25}};
        j["annotations"][0]["iscrowd"] = 1;
        j["categories"][0]["supercategory"] = "layout";
        const auto a = parse_coco(j, {});
        const auto b = parse_coco(coco_to_json(a), {});
        CHECK(a.same_content(b));
        CHECK(b.annotations[0].ann.polygons.size() == 1);
        CHECK(b.annotations[0].ann.iscrowd == 1);
        CHECK(b.categories[0].supercategory == "layout");
        CHECK(b.ground_truth().empty());
    }

    TEST_CASE("dangling references name the id")
    {
        auto j = minimal_json();
        j["annotations"][0]["image_id"] = 99;
        CHECK_THROWS_WITH_AS(parse_coco(j, {}), doctest::Contains("unknown image id 99"), ValidationError);
        j = minimal_json();
        j["annotations"][0]["category_id"] = 5;
        CHECK_THROWS_WITH_AS(parse_coco(j, {}), doctest::Contains("unknown category id 5"), ValidationError);
        j = minimal_json();
        j["images"].push_back(j["images"][0]);
        CHECK_THROWS_WITH_AS(parse_coco(j, {}), doctest::Contains("duplicate image id 7"), ValidationError);
    }

    TEST_CASE("five layout categories")
    {
        json j = minimal_json();
        j["categories"] = json::array();
        const char* names[] = {"text", "title", "list", "table", "figure"};
        for (int i = 0; i < 5; ++i)
            j["categories"].push_back({{"id", i + 1}, {"name", names[i]}});
        const auto ds = parse_coco(j, {});
        REQUIRE(ds.categories.size() == 5);
        CHECK(ds.categories[4].name == "figure");
    }

    TEST_CASE("parse errors carry line and column")
    {
        TempDir dir("coco_parse");
        write_text(dir.path / "bad.json", "{\n  \"images\": [],\n  \"categories\": [,]\n}\n");
        CHECK_THROWS_WITH_AS(load_coco(dir.path / "bad.json"), doctest::Contains("bad.json:3:"), ValidationError);
        CHECK_THROWS_AS(load_coco(dir.path / "nothing.json"), IoError);
    }

    TEST_CASE("boxes are clipped to the image")
    {
        auto j = minimal_json();
        j["annotations"][0]["bbox"] = {-5, 20, 20, 20};
        const auto ds = parse_coco(j, {});
        CHECK(ds.clipped_boxes == 1);
        CHECK(ds.annotations[0].ann.box == Box{0, 20, 15, 10});
        j["annotations"][0]["bbox"] = {0, 0, -1, 3};
        CHECK_THROWS_AS(parse_coco(j, {}), ValidationError);
    }

    TEST_CASE("missing image files are fatal only when read")
    {
        TempDir dir("coco_missing");
        write_json(dir.path / "annotations.json", minimal_json());
        const auto ds = load_coco(dir.path);
        CHECK(ds.missing_files.size() == 1);
        CHECK_THROWS_AS(ds.page(7), IoError);
    }

    TEST_CASE("synthetic dataset loads back with page ids from image ids")
    {
        TempDir dir("coco_synth");
        const auto ds = write_synthetic_dataset(dir.path, 3, 2, {200, 240, 1});
        CHECK(ds.images.size() == 2);
        CHECK(ds.missing_files.empty());
        CHECK(ds.categories.size() == 5);
        const auto page = ds.page(2);
        CHECK(page.page_id == "2");
        CHECK(page.image.width() == 200);
        CHECK(page.annotations.size() == ds.annotations_of(2).size());
        CHECK(dataset_fingerprint(ds) == dataset_fingerprint(load_coco(dir.path)));
    }
}

TEST_SUITE("perturbed dataset")
{
    TEST_CASE("variant naming")
    {
        CHECK(full_grid().size() == 36);
        CHECK(full_grid().front().name == "P1_L1");
        CHECK(full_grid().back().name == "P12_L3");
        CHECK(chain_variant("P2:1,P4:1").name == "chain_P2-1_P4-1");
        const auto g = full_grid({{"alpha_w", 10.0}});
        CHECK(g[9].stages[0].overrides.count("alpha_w") == 1); // P4_L1
        CHECK(g[0].stages[0].overrides.empty());
    }

    TEST_CASE("full grid over two images")
    {
        TempDir dir("gen_grid");
        const auto ds = write_synthetic_dataset(dir.path / "src", 5, 2, {200, 220, 1});
        const auto m = write_perturbed_dataset(ds, full_grid(), {}, dir.path / "out", {1, 42});
        CHECK(m.entries.size() == 72);
        std::set<std::string> outputs;
        for (const auto& e : m.entries) {
            CHECK(outputs.insert(e.output).second);
            CHECK(sha256_file(dir.path / "out" / e.output) == e.output_sha256);
        }
        std::size_t pngs = 0;
        for (const auto& f : fs::recursive_directory_iterator(dir.path / "out"))
            pngs += f.path().extension() == ".png";
        CHECK(pngs == 72);
        CHECK_FALSE(fs::exists(dir.path / "out" / "checkpoint.jsonl"));

        const auto& wm = m.find(1, "P4_L2");
        CHECK(wm.provenance["params"]["alpha_w"] == 153.0);
        CHECK(wm.provenance["params"]["r_z"] == 4.0);
        CHECK(wm.level == 2);
        CHECK(wm.perturbation == "P4");

        // Per-variant annotation files are valid COCO.
        const auto rot = load_coco(dir.path / "out" / "P1_L3");
        CHECK(rot.missing_files.empty());
        CHECK(rot.images.size() == 2);
        CHECK(rot.page(1).image.width() == 200);

        // Manifest replay and reload.
        for (std::size_t k = 0; k < m.entries.size(); k += 7)
            CHECK(replay_entry(m, m.entries[k], ds, {}) == m.entries[k].output_sha256);
        const auto back = load_manifest(dir.path / "out" / "manifest.json");
        CHECK(back.to_json() == m.to_json());
        CHECK(back.source_fingerprint == dataset_fingerprint(ds));

        // Same seed again, with more threads: identical bytes.
        const std::string first = slurp(dir.path / "out" / "manifest.json");
        write_perturbed_dataset(ds, full_grid(), {}, dir.path / "again", {4, 42});
        CHECK(slurp(dir.path / "again" / "manifest.json") == first);
        CHECK(slurp(dir.path / "again" / "P1_L3" / "annotations.json") ==
              slurp(dir.path / "out" / "P1_L3" / "annotations.json"));

        // A different seed changes the stochastic variants.
        const auto other = write_perturbed_dataset(ds, {single_variant(PerturbationId::speckle, 2)}, {},
                                                   dir.path / "seed7", {1, 7});
        CHECK(other.entries[0].output_sha256 != m.find(1, "P11_L2").output_sha256);
    }

    TEST_CASE("chain variant")
    {
        TempDir dir("gen_chain");
        const auto ds = write_synthetic_dataset(dir.path / "src", 5, 1, {200, 220, 1});
        const auto m = write_perturbed_dataset(ds, {chain_variant("P2:1,P4:1")}, {}, dir.path / "out");
        REQUIRE(m.entries.size() == 1);
        CHECK(m.entries[0].perturbation == "chain");
        CHECK(m.entries[0].provenance["chain"].size() == 2);
        CHECK(m.to_json()["entries"][0]["child_seed"].size() == 2);
        CHECK(replay_entry(m, m.entries[0], ds, {}) == m.entries[0].output_sha256);
    }

    TEST_CASE("interrupted run resumes from its checkpoint")
    {
        TempDir dir("gen_resume");
        const auto ds = write_synthetic_dataset(dir.path / "src", 9, 3, {200, 220, 1});
        const std::vector<Variant> vs = {single_variant(PerturbationId::defocus, 1),
                                         single_variant(PerturbationId::rotation, 2)};
        const auto reference = write_perturbed_dataset(ds, vs, {}, dir.path / "ref");

        // Abort after three entries, as a crash would.
        GenerateOptions crash;
        int written = 0;
        crash.progress = [&](const ManifestEntry&) {
            if (++written == 3)
                throw std::runtime_error("interrupted");
        };
        CHECK_THROWS_AS(write_perturbed_dataset(ds, vs, {}, dir.path / "out", crash), std::runtime_error);
        CHECK(fs::exists(dir.path / "out" / "checkpoint.jsonl"));
        CHECK_FALSE(fs::exists(dir.path / "out" / "manifest.json"));
        const fs::path kept = dir.path / "out" / reference.entries[0].output;
        const auto stamp = fs::last_write_time(kept);

        int redone = 0;
        GenerateOptions resume;
        resume.progress = [&](const ManifestEntry&) { ++redone; };
        const auto m = write_perturbed_dataset(ds, vs, {}, dir.path / "out", resume);
        CHECK(redone == 3);
        CHECK(fs::last_write_time(kept) == stamp);
        CHECK(slurp(dir.path / "out" / "manifest.json") == slurp(dir.path / "ref" / "manifest.json"));
        CHECK(slurp(dir.path / "out" / "P1_L2" / "annotations.json") ==
              slurp(dir.path / "ref" / "P1_L2" / "annotations.json"));
        CHECK_FALSE(fs::exists(dir.path / "out" / "checkpoint.jsonl"));
        CHECK(m.entries.size() == 6);
    }

    TEST_CASE("invalid selections")
    {
        TempDir dir("gen_bad");
        const auto ds = write_synthetic_dataset(dir.path / "src", 5, 1, {200, 220, 1});
        CHECK_THROWS_AS(write_perturbed_dataset(ds, {}, {}, dir.path / "out"), ParameterError);
        const auto v = single_variant(PerturbationId::defocus, 1);
        CHECK_THROWS_AS(write_perturbed_dataset(ds, {v, v}, {}, dir.path / "out"), ParameterError);
        CHECK_THROWS_AS(single_variant(PerturbationId::defocus, 4), ParameterError);
        CHECK_THROWS_AS(chain_variant("P2:1,P99:1"), ParameterError);
    }
}

TEST_SUITE("predictions")
{
    TEST_CASE("empty list is valid")
    {
        CHECK(parse_predictions(json::array()).size() == 0);
    }

    TEST_CASE("grouping by image")
    {
        const json j = {{{"image_id", 1}, {"category_id", 1}, {"bbox", {0, 0, 1, 1}}, {"score", 0.5}},
                        {{"image_id", 2}, {"category_id", 1}, {"bbox", {0, 0, 1, 1}}, {"score", 0.5}},
                        {{"image_id", 1}, {"category_id", 3}, {"bbox", {0, 0, 1, 1}}, {"score", 1.0}}};
        const auto p = parse_predictions(j);
        CHECK(p.by_image.size() == 2);
        CHECK(p.by_image.at(1).size() == 2);
        CHECK(p.by_image.at(2).size() == 1);
        CHECK(predictions_to_json(p.flat()).size() == 3);
    }

    TEST_CASE("invalid records report their index")
    {
        json j = {{{"image_id", 1}, {"category_id", 1}, {"bbox", {0, 0, 1, 1}}, {"score", 0.5}},
                  {{"image_id", 1}, {"category_id", 1}, {"bbox", {0, 0, -1, 1}}, {"score", 0.5}}};
        CHECK_THROWS_WITH_AS(parse_predictions(j), doctest::Contains("record 1: negative width"), ValidationError);
        j[1]["bbox"] = {0, 0, 1, 1};
        j[1]["score"] = 1.5;
        CHECK_THROWS_WITH_AS(parse_predictions(j), doctest::Contains("record 1"), ValidationError);
        j[1]["score"] = -0.01;
        CHECK_THROWS_AS(parse_predictions(j), ValidationError);
        CHECK_THROWS_AS(parse_predictions(json::object()), ValidationError);
    }
}

TEST_SUITE("scores")
{
    TEST_CASE("identity manifest has zero loss; missing files are listed")
    {
        TempDir dir("iqa_identity");
        const auto ds = write_synthetic_dataset(dir.path, 4, 2, {200, 200, 1});
        Manifest m;
        for (const auto& im : ds.images)
            m.entries.push_back({im.id, "P9_L1", "P9", 1, json::object(), im.file_name, "", ""});
        m.entries.push_back({1, "P9_L2", "P9", 2, json::object(), "absent.png", "", ""});
        const auto run = score_manifest(m, ds.image_root, ds, 2);
        REQUIRE(run.records.size() == m.entries.size());
        for (std::size_t k = 0; k < 2; ++k) {
            REQUIRE(run.records[k].score);
            CHECK(run.records[k].score->loss_ms == doctest::Approx(0.0).epsilon(1e-9));
            CHECK(run.records[k].score->loss_cw == doctest::Approx(0.0).epsilon(1e-9));
        }
        CHECK_FALSE(run.records[2].score);
        CHECK_FALSE(run.complete());
        REQUIRE(run.summary.size() == 2);
        CHECK(run.summary[0].count == 2);
        CHECK(run.summary[1].missing == 1);

        const auto back = IqaRun::from_records_json(run.records_json());
        CHECK(back.records_json() == run.records_json());
        CHECK(back.summary_json() == run.summary_json());
        const auto losses = iqa_losses(run);
        CHECK(losses.size() == 1);
        CHECK(losses.at({9, 1}).size() == 2);
    }

    TEST_CASE("degradation file round trip")
    {
        std::vector<DegradationRecord> recs = {{"m", 3, 2, 61.5, 38.5}, {"m", 12, 1, 100.0, 0.0}};
        const auto back = degradation_from_json(degradation_to_json(recs));
        REQUIRE(back.size() == 2);
        CHECK(back[0].perturbation == 3);
        CHECK(to_map_matrix(back).at({3, 2}) == 61.5);
        json bad = degradation_to_json(recs);
        bad[0]["degradation"] = 10.0;
        CHECK_THROWS_WITH_AS(degradation_from_json(bad), doctest::Contains("record 0"), ValidationError);
        recs.push_back(recs[0]);
        CHECK_THROWS_AS(to_map_matrix(recs), ValidationError);
    }
}
