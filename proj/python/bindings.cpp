#include <cstring>
#include <set>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "docrobust/datasetio.hpp"
#include "docrobust/detmetrics.hpp"
#include "docrobust/errors.hpp"
#include "docrobust/iqa.hpp"
#include "docrobust/perturb.hpp"
#include "docrobust/robustness.hpp"
#include "docrobust/synth.hpp"

namespace py = pybind11;
using namespace docrobust;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage to_raster(const U8Array& a)
{
    if (a.ndim() == 2) {
        RasterImage img(int(a.shape(1)), int(a.shape(0)), 1);
        std::memcpy(img.data().data(), a.data(), img.data().size());
        return img;
    }
    if (a.ndim() == 3 && (a.shape(2) == 1 || a.shape(2) == 3)) {
        RasterImage img(int(a.shape(1)), int(a.shape(0)), int(a.shape(2)));
        std::memcpy(img.data().data(), a.data(), img.data().size());
        return img;
    }
    throw ParameterError("images must be uint8 arrays shaped (H, W) or (H, W, 1|3)");
}

U8Array to_array(const RasterImage& img)
{
    std::vector<py::ssize_t> shape = {img.height(), img.width()};
    if (img.channels() == 3)
        shape.push_back(3);
    U8Array out(shape);
    std::memcpy(out.mutable_data(), img.data().data(), img.data().size());
    return out;
}

// JSON crosses the boundary as text; the Python package decodes it.
std::string dump(const nlohmann::json& j)
{
    return j.dump();
}

Box to_box(const std::vector<double>& b)
{
    if (b.size() != 4)
        throw ParameterError("boxes are [x, y, w, h]");
    return {b[0], b[1], b[2], b[3]};
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Document layout robustness toolkit (native core)";
    m.attr("__version__") = std::string(tool_version());

    // Later registrations are tried first, so the subclasses win over the base.
    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ParameterError>(m, "ParameterError", base);
    py::register_exception<TransformError>(m, "TransformError", base);
    py::register_exception<EvaluationError>(m, "EvaluationError", base);
    py::register_exception<ResourceError>(m, "ResourceError", base);
    py::register_exception<IoError>(m, "IoError", base);
    py::register_exception<ValidationError>(m, "ValidationError", base);

    // Perturbations.
    m.def("perturbation_code", [](int p) { return perturbation_code(PerturbationId(p)); });
    m.def("perturbation_name", [](int p) { return std::string(perturbation_name(PerturbationId(p))); });
    m.def("parse_perturbation", [](const std::string& s) { return int(parse_perturbation(s)); });
    m.def(
        "severity_params_json",
        [](int p, int level, const ParamOverrides& overrides) {
            return dump(resolve_params(PerturbationId(p), level, overrides).to_json());
        },
        py::arg("perturbation"), py::arg("level"), py::arg("overrides") = ParamOverrides{});
    m.def(
        "apply_json",
        [](const U8Array& image, const std::string& annotations_json, const std::string& page_id, int p, int level,
           std::uint64_t seed, const ParamOverrides& overrides) {
            AnnotatedPage page;
            page.image = to_raster(image);
            page.page_id = page_id;
            // Reuse the COCO parser for the annotation list.
            auto anns = nlohmann::json::parse(annotations_json);
            nlohmann::json doc = {
                {"images", {{{"id", 0}, {"file_name", ""}, {"width", page.image.width()}, {"height", page.image.height()}}}},
                {"categories", nlohmann::json::array()},
                {"annotations", nlohmann::json::array()}};
            std::set<std::int64_t> cats;
            for (auto& a : anns) {
                a["image_id"] = 0;
                cats.insert(a.at("category_id").get<std::int64_t>());
                doc["annotations"].push_back(a);
            }
            for (auto c : cats)
                doc["categories"].push_back({{"id", c}, {"name", std::to_string(c)}});
            for (auto& ca : parse_coco(doc, {}).annotations)
                page.annotations.push_back(ca.ann);

            std::pair<AnnotatedPage, ProvenanceRecord> res;
            {
                py::gil_scoped_release release;
                res = apply({PerturbationId(p), level, seed, overrides}, page, ResourcePool{});
            }
            CocoDataset tmp;
            for (const auto& a : res.first.annotations)
                tmp.annotations.push_back({0, a});
            auto out_anns = coco_to_json(tmp)["annotations"];
            for (auto& a : out_anns)
                a.erase("image_id");
            return py::make_tuple(to_array(res.first.image), dump(out_anns), dump(res.second));
        },
        py::arg("image"), py::arg("annotations_json"), py::arg("page_id"), py::arg("perturbation"), py::arg("level"),
        py::arg("seed"), py::arg("overrides") = ParamOverrides{});
    m.def(
        "synth_page",
        [](std::uint64_t seed, int index, int width, int height, int channels) {
            const auto page = docrobust::synth_page(seed, index, {width, height, channels});
            return to_array(page.image);
        },
        py::arg("seed"), py::arg("index") = 0, py::arg("width") = 600, py::arg("height") = 800, py::arg("channels") = 1);

    // Image quality.
    m.def(
        "ms_ssim",
        [](const U8Array& a, const U8Array& b) {
            const auto x = to_raster(a), y = to_raster(b);
            py::gil_scoped_release release;
            return ms_ssim(x, y);
        },
        py::arg("x"), py::arg("y"));
    m.def(
        "cw_ssim",
        [](const U8Array& a, const U8Array& b) {
            const auto x = to_raster(a), y = to_raster(b);
            py::gil_scoped_release release;
            return cw_ssim(x, y);
        },
        py::arg("x"), py::arg("y"));

    // Detection metrics.
    m.def("iou", [](const std::vector<double>& a, const std::vector<double>& b) { return iou(to_box(a), to_box(b)); });
    m.def(
        "mean_average_precision_json",
        [](const std::vector<std::tuple<std::int64_t, std::int64_t, std::vector<double>>>& gts,
           const std::vector<std::tuple<std::int64_t, std::int64_t, std::vector<double>, double>>& dets) {
            std::vector<GroundTruth> g;
            for (const auto& [img, cat, box] : gts)
                g.push_back({img, cat, to_box(box)});
            std::vector<Detection> d;
            for (const auto& [img, cat, box, score] : dets)
                d.push_back({img, cat, to_box(box), score});
            return dump(mean_average_precision(g, d).to_json());
        },
        py::arg("ground_truths"), py::arg("detections"));

    // Robustness formulas.
    m.def("degradation", &degradation, py::arg("map_value"));
    m.def(
        "mpe_level", [](const std::vector<double>& f, const std::vector<double>& d) { return mpe_level(f, d); },
        py::arg("f"), py::arg("d"));
    m.def(
        "mpe",
        [](const std::vector<std::pair<std::vector<double>, std::vector<double>>>& levels, int n, int mm, int k) {
            std::vector<LevelInputs> l;
            for (const auto& [f, d] : levels)
                l.push_back({f, d});
            return mpe(l, n, mm, k);
        },
        py::arg("levels"), py::arg("n"), py::arg("m"), py::arg("k"));
    m.def(
        "rd", [](const std::vector<double>& d, const std::vector<double>& mp) { return rd(d, mp); }, py::arg("d"),
        py::arg("mpe_levels"));
    m.def(
        "mrd", [](const std::vector<double>& v) { return mrd(v); }, py::arg("rd_values"));

    // Datasets.
    m.def(
        "load_coco_json", [](const std::filesystem::path& p) { return dump(coco_to_json(load_coco(p))); },
        py::arg("path"));
    m.def(
        "write_synthetic_dataset",
        [](const std::filesystem::path& dir, std::uint64_t seed, int count, int width, int height) {
            write_synthetic_dataset(dir, seed, count, {width, height, 1});
        },
        py::arg("dir"), py::arg("seed"), py::arg("count"), py::arg("width") = 600, py::arg("height") = 800);
}
