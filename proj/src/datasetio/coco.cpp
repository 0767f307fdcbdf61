#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "docrobust/datasetio.hpp"
#include "docrobust/errors.hpp"
#include "docrobust/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace docrobust {

std::string_view tool_version() noexcept
{
    return DOCROBUST_VERSION;
}

json read_json(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        const std::size_t at = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const std::size_t line = 1 + std::size_t(std::count(text.begin(), text.begin() + std::ptrdiff_t(at), '\n'));
        const std::size_t nl = text.rfind('\n', at == 0 ? 0 : at - 1);
        const std::size_t col = at - (nl == std::string::npos ? 0 : nl + 1) + 1;
        std::size_t line_start = nl == std::string::npos ? 0 : nl + 1;
        std::string context = text.substr(line_start, text.find('\n', line_start) - line_start);
        if (context.size() > 80)
            context = context.substr(0, 80) + "...";
        throw ValidationError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                              ": invalid JSON near `" + context + "`");
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out)
        throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j)
{
    write_text(path, j.dump(2) + "\n");
}

namespace {

std::string where(std::string_view section, std::size_t index)
{
    return std::string(section) + "[" + std::to_string(index) + "]";
}

const json& field(const json& obj, const char* key, const std::string& ctx)
{
    if (!obj.is_object())
        throw ValidationError(ctx + " is not an object");
    const auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError(ctx + " lacks \"" + key + "\"");
    return *it;
}

std::int64_t int_field(const json& obj, const char* key, const std::string& ctx)
{
    const json& v = field(obj, key, ctx);
    if (v.is_number_integer())
        return v.get<std::int64_t>();
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
        return std::int64_t(v.get<double>());
    throw ValidationError(ctx + ".\"" + key + "\" must be an integer");
}

double num_field(const json& v, const std::string& ctx)
{
    if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw ValidationError(ctx + " must be a finite number");
    return v.get<double>();
}

std::string str_field(const json& obj, const char* key, const std::string& ctx)
{
    const json& v = field(obj, key, ctx);
    if (!v.is_string())
        throw ValidationError(ctx + ".\"" + key + "\" must be a string");
    return v.get<std::string>();
}

const json& array_field(const json& obj, const char* key, const std::string& ctx, bool required)
{
    static const json empty = json::array();
    const auto it = obj.find(key);
    if (it == obj.end()) {
        if (required)
            throw ValidationError(ctx + " lacks \"" + key + "\"");
        return empty;
    }
    if (!it->is_array())
        throw ValidationError(ctx + ".\"" + key + "\" must be an array");
    return *it;
}

} // namespace

CocoDataset parse_coco(const json& j, const fs::path& image_root)
{
    if (!j.is_object())
        throw ValidationError("COCO file must hold a JSON object");
    CocoDataset ds;
    ds.image_root = image_root;

    std::set<std::int64_t> image_ids, cat_ids, ann_ids;
    std::unordered_map<std::int64_t, std::pair<int, int>> dims;
    const json& images = array_field(j, "images", "dataset", true);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const std::string ctx = where("images", i);
        CocoImage im;
        im.id = int_field(images[i], "id", ctx);
        im.file_name = str_field(images[i], "file_name", ctx);
        im.width = int(int_field(images[i], "width", ctx));
        im.height = int(int_field(images[i], "height", ctx));
        if (im.width <= 0 || im.height <= 0)
            throw ValidationError(ctx + " (id " + std::to_string(im.id) + ") has a non-positive size");
        if (!image_ids.insert(im.id).second)
            throw ValidationError("duplicate image id " + std::to_string(im.id));
        dims[im.id] = {im.width, im.height};
        ds.images.push_back(std::move(im));
    }

    const json& cats = array_field(j, "categories", "dataset", true);
    for (std::size_t i = 0; i < cats.size(); ++i) {
        const std::string ctx = where("categories", i);
        CocoCategory c;
        c.id = int_field(cats[i], "id", ctx);
        c.name = str_field(cats[i], "name", ctx);
        if (cats[i].contains("supercategory"))
            c.supercategory = str_field(cats[i], "supercategory", ctx);
        if (!cat_ids.insert(c.id).second)
            throw ValidationError("duplicate category id " + std::to_string(c.id));
        ds.categories.push_back(std::move(c));
    }

    const json& anns = array_field(j, "annotations", "dataset", false);
    for (std::size_t i = 0; i < anns.size(); ++i) {
        const std::string ctx = where("annotations", i);
        CocoAnnotation ca;
        ca.ann.id = int_field(anns[i], "id", ctx);
        ca.image_id = int_field(anns[i], "image_id", ctx);
        ca.ann.category_id = int_field(anns[i], "category_id", ctx);
        if (!ann_ids.insert(ca.ann.id).second)
            throw ValidationError("duplicate annotation id " + std::to_string(ca.ann.id));
        if (!image_ids.count(ca.image_id))
            throw ValidationError("annotation " + std::to_string(ca.ann.id) + " references unknown image id " +
                                  std::to_string(ca.image_id));
        if (!cat_ids.count(ca.ann.category_id))
            throw ValidationError("annotation " + std::to_string(ca.ann.id) + " references unknown category id " +
                                  std::to_string(ca.ann.category_id));
        const json& bbox = field(anns[i], "bbox", ctx);
        if (!bbox.is_array() || bbox.size() != 4)
            throw ValidationError(ctx + ".bbox must hold four numbers");
        Box b{num_field(bbox[0], ctx + ".bbox"), num_field(bbox[1], ctx + ".bbox"), num_field(bbox[2], ctx + ".bbox"),
              num_field(bbox[3], ctx + ".bbox")};
        if (b.w < 0 || b.h < 0)
            throw ValidationError("annotation " + std::to_string(ca.ann.id) + " has a negative box size");
        const auto [W, H] = dims.at(ca.image_id);
        const double x0 = std::clamp(b.x, 0.0, double(W)), y0 = std::clamp(b.y, 0.0, double(H));
        const double x1 = std::clamp(b.x + b.w, 0.0, double(W)), y1 = std::clamp(b.y + b.h, 0.0, double(H));
        const Box clipped{x0, y0, x1 - x0, y1 - y0};
        if (!(clipped == b)) {
            ++ds.clipped_boxes;
            b = clipped;
        }
        ca.ann.box = b;

        if (const auto seg = anns[i].find("segmentation"); seg != anns[i].end() && seg->is_array()) {
            // Polygon form only; run-length masks are left to the box.
            for (const json& poly : *seg) {
                if (!poly.is_array() || poly.size() % 2 != 0)
                    throw ValidationError(ctx + ".segmentation polygons need an even number of coordinates");
                if (poly.size() < 6)
                    continue;
                Polygon p;
                for (std::size_t k = 0; k < poly.size(); k += 2)
                    p.push_back({num_field(poly[k], ctx + ".segmentation"), num_field(poly[k + 1], ctx + ".segmentation")});
                ca.ann.polygons.push_back(std::move(p));
            }
        }
        ca.ann.area = anns[i].contains("area") ? num_field(anns[i]["area"], ctx + ".area") : b.area();
        ca.ann.iscrowd = anns[i].contains("iscrowd") ? int(int_field(anns[i], "iscrowd", ctx)) : 0;
        ds.annotations.push_back(std::move(ca));
    }

    for (const auto& im : ds.images)
        if (!image_root.empty() && !fs::exists(image_root / im.file_name))
            ds.missing_files.push_back(im.file_name);
    return ds;
}

CocoDataset load_coco(const fs::path& path)
{
    fs::path json_path = path;
    if (fs::is_directory(path))
        json_path = path / "annotations.json";
    if (!fs::exists(json_path))
        throw IoError("annotation file not found: " + json_path.string());
    const fs::path dir = json_path.parent_path();
    const fs::path root = fs::is_directory(dir / "images") ? dir / "images" : dir;
    return parse_coco(read_json(json_path), root);
}

json coco_to_json(const CocoDataset& ds)
{
    json images = json::array(), anns = json::array(), cats = json::array();
    for (const auto& im : ds.images)
        images.push_back({{"id", im.id}, {"file_name", im.file_name}, {"width", im.width}, {"height", im.height}});
    for (const auto& ca : ds.annotations) {
        const Annotation& a = ca.ann;
        json o = {{"id", a.id},
                  {"image_id", ca.image_id},
                  {"category_id", a.category_id},
                  {"bbox", {a.box.x, a.box.y, a.box.w, a.box.h}},
                  {"area", a.area > 0.0 ? a.area : a.box.area()},
                  {"iscrowd", a.iscrowd}};
        if (!a.polygons.empty()) {
            json seg = json::array();
            for (const auto& p : a.polygons) {
                json flat = json::array();
                for (const auto& v : p) {
                    flat.push_back(v.x);
                    flat.push_back(v.y);
                }
                seg.push_back(std::move(flat));
            }
            o["segmentation"] = std::move(seg);
        }
        anns.push_back(std::move(o));
    }
    for (const auto& c : ds.categories) {
        json o = {{"id", c.id}, {"name", c.name}};
        if (!c.supercategory.empty())
            o["supercategory"] = c.supercategory;
        cats.push_back(std::move(o));
    }
    return {{"images", images}, {"annotations", anns}, {"categories", cats}};
}

void save_coco(const CocoDataset& ds, const fs::path& json_path)
{
    write_json(json_path, coco_to_json(ds));
}

const CocoImage& CocoDataset::image(std::int64_t id) const
{
    for (const auto& im : images)
        if (im.id == id)
            return im;
    throw ValidationError("unknown image id " + std::to_string(id));
}

std::vector<Annotation> CocoDataset::annotations_of(std::int64_t image_id) const
{
    std::vector<Annotation> out;
    for (const auto& ca : annotations)
        if (ca.image_id == image_id)
            out.push_back(ca.ann);
    return out;
}

AnnotatedPage CocoDataset::page(std::int64_t image_id) const
{
    const CocoImage& im = image(image_id);
    const fs::path p = image_root / im.file_name;
    if (!fs::exists(p))
        throw IoError("image file missing for image " + std::to_string(image_id) + ": " + p.string());
    AnnotatedPage page;
    page.image = read_image(p);
    if (page.image.width() != im.width || page.image.height() != im.height)
        throw ValidationError("image " + std::to_string(image_id) + " is " + std::to_string(page.image.width()) + "x" +
                              std::to_string(page.image.height()) + " but the annotations say " +
                              std::to_string(im.width) + "x" + std::to_string(im.height));
    page.annotations = annotations_of(image_id);
    page.page_id = std::to_string(image_id);
    return page;
}

std::vector<GroundTruth> CocoDataset::ground_truth() const
{
    std::vector<GroundTruth> out;
    for (const auto& ca : annotations)
        if (!ca.ann.iscrowd)
            out.push_back({ca.image_id, ca.ann.category_id, ca.ann.box});
    return out;
}

bool CocoDataset::same_content(const CocoDataset& other) const
{
    return images == other.images && annotations == other.annotations && categories == other.categories;
}

std::string dataset_fingerprint(const CocoDataset& ds)
{
    std::string text = coco_to_json(ds).dump();
    for (const auto& im : ds.images) {
        const fs::path p = ds.image_root / im.file_name;
        text += "\n" + im.file_name + " " + (fs::exists(p) ? sha256_file(p) : std::string("missing"));
    }
    return sha256_hex(text.data(), text.size());
}

std::string pool_fingerprint(const ResourcePool& pool)
{
    std::string text = pool.watermark_text + "\n" + std::to_string(pool.watermark_gray);
    for (const auto& img : pool.backgrounds) {
        text += "\n" + std::to_string(img.width()) + "x" + std::to_string(img.height()) + "x" +
                std::to_string(img.channels()) + ":";
        text.append(reinterpret_cast<const char*>(img.data().data()), img.data().size());
    }
    return sha256_hex(text.data(), text.size());
}

CocoDataset write_synthetic_dataset(const fs::path& dir, std::uint64_t seed, int count, const SynthOptions& opt)
{
    CocoDataset ds;
    for (std::size_t c = 0; c < synth_categories.size(); ++c)
        ds.categories.push_back({std::int64_t(c) + 1, std::string(synth_categories[c]), "layout"});
    fs::create_directories(dir / "images");
    std::int64_t next_ann = 1;
    const auto pages = synth_corpus(seed, count, opt);
    for (std::size_t i = 0; i < pages.size(); ++i) {
        const auto& pg = pages[i];
        CocoImage im{std::int64_t(i) + 1, pg.page_id + ".png", pg.image.width(), pg.image.height()};
        write_png(dir / "images" / im.file_name, pg.image);
        for (Annotation a : pg.annotations) {
            a.id = next_ann++;
            if (a.area <= 0.0)
                a.area = a.box.area();
            ds.annotations.push_back({im.id, std::move(a)});
        }
        ds.images.push_back(std::move(im));
    }
    save_coco(ds, dir / "annotations.json");
    return load_coco(dir);
}

} // namespace docrobust
