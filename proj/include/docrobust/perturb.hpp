#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "docrobust/filters.hpp"
#include "docrobust/geometry.hpp"
#include "docrobust/morphology.hpp"
#include "docrobust/page.hpp"
#include "docrobust/raster.hpp"
#include "docrobust/rng.hpp"

namespace docrobust {

enum class PerturbationId : int {
    rotation = 1,
    warping,
    keystoning,
    watermark,
    background,
    illumination,
    ink_bleeding,
    ink_holdout,
    defocus,
    vibration,
    speckle,
    texture,
};

enum class PerturbationGroup { spatial, content, inconsistency, blur, noise };

inline constexpr std::array<PerturbationId, 12> all_perturbations = {
    PerturbationId::rotation,     PerturbationId::warping,      PerturbationId::keystoning,
    PerturbationId::watermark,    PerturbationId::background,   PerturbationId::illumination,
    PerturbationId::ink_bleeding, PerturbationId::ink_holdout,  PerturbationId::defocus,
    PerturbationId::vibration,    PerturbationId::speckle,      PerturbationId::texture,
};

PerturbationGroup group_of(PerturbationId id) noexcept;
std::string_view group_name(PerturbationGroup g) noexcept;
/// "P1" .. "P12"
std::string perturbation_code(PerturbationId id);
/// Lower-case name, e.g. "ink_bleeding".
std::string_view perturbation_name(PerturbationId id) noexcept;
/// Accepts "P7", "p7", "7" or the name. Throws ParameterError otherwise.
PerturbationId parse_perturbation(std::string_view text);
bool is_geometric(PerturbationId id) noexcept;

/// Severity constants plus the auxiliary knobs each perturbation exposes.
/// Only the fields owned by `id` are meaningful.
struct SeverityParams {
    PerturbationId id = PerturbationId::rotation;
    int level = 1;

    double theta_min = 0.0; ///< |theta| range in degrees (P1)
    double theta_max = 0.0;
    double r_sigma = 0.0;   ///< P2
    double r_alpha = 0.0;
    double r_k = 0.0;       ///< P3
    double alpha_w = 0.0;   ///< P4, 0..255
    double r_z = 0.0;
    int n_i = 0;            ///< P5
    double v_l = 0.0;       ///< P6, 0..255
    double v_s = 0.0;
    int k_e = 0;            ///< P7
    int k_d = 0;            ///< P8
    int k_g = 0;            ///< P9
    int k_m = 0;            ///< P10
    double d_b = 0.0;       ///< P11
    int n_f = 0;            ///< P12

    std::optional<double> angle; ///< forced angle in degrees (P1, P10)
    int stamps = 3;              ///< P4 stamp count
    double alpha_a = 0.7;        ///< P5 composition weights
    double alpha_b = 1.0;
    std::optional<bool> glare;   ///< P6 forced mode
    int ink_scale = 10;          ///< P7/P8 supersampling factor

    /// Owned parameters only, keyed by their override names.
    nlohmann::json to_json() const;
};

/// Table constants for (id, level). Throws ParameterError for a level
/// outside 1..3.
SeverityParams severity_params(PerturbationId id, int level);

using ParamOverrides = std::map<std::string, double>;

/// Override keys accepted for a perturbation.
std::vector<std::string> overridable_parameters(PerturbationId id);
/// severity_params with overrides applied. Unknown keys, keys owned by
/// another perturbation and out-of-range values throw ParameterError.
SeverityParams resolve_params(PerturbationId id, int level, const ParamOverrides& overrides);

struct PerturbationSpec {
    PerturbationId id = PerturbationId::rotation;
    int level = 1;
    std::uint64_t seed = 0;
    ParamOverrides overrides;
};

struct ResourcePool {
    std::vector<RasterImage> backgrounds;
    std::string watermark_text = "WATERMARK";
    std::uint8_t watermark_gray = 128;

    /// Loads every PNG/JPEG directly inside `dir` in name order.
    static ResourcePool from_directory(const std::filesystem::path& dir);
};

struct PerturbResult {
    AnnotatedPage page;
    nlohmann::json realized = nlohmann::json::object();
};

PerturbResult rotate_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng);
PerturbResult warp_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng);
PerturbResult keystone_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng);
PerturbResult watermark_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng,
                             const ResourcePool& pool);
PerturbResult background_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng,
                              const ResourcePool& pool);
PerturbResult illuminate_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng);
PerturbResult ink_bleed_page(const AnnotatedPage& page, const SeverityParams& p);
PerturbResult ink_holdout_page(const AnnotatedPage& page, const SeverityParams& p);
PerturbResult defocus_page(const AnnotatedPage& page, const SeverityParams& p);
PerturbResult vibrate_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng);
PerturbResult speckle_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng);
PerturbResult texture_page(const AnnotatedPage& page, const SeverityParams& p, SeededRng& rng);

// Deterministic building blocks behind the page operations.

/// Rotation angle in degrees for the level's range.
double draw_rotation_angle(const SeverityParams& p, SeededRng& rng);
/// Index-space equivalent of a map given in continuous coordinates.
Matrix3 continuous_to_index(const Matrix3& continuous) noexcept;
/// Displacement warp for explicit noise fields: D = alpha * G_sigma(R).
AnnotatedPage warp_with_noise(const AnnotatedPage& page, const Plane& rx, const Plane& ry, double sigma, double alpha);
/// Blends a stamp of `text` centred on (cx, cy) (continuous coordinates),
/// glyph height `glyph_px`, rotated by theta degrees; returns the number of
/// covered pixels.
std::size_t stamp_text(RasterImage& img, std::string_view text, double cx, double cy, double glyph_px,
                       double theta_deg, std::uint8_t gray, double opacity);
/// Illumination mask: 1 on the canvas, 0 inside the polygons, then blurred.
Plane illumination_mask(int width, int height, std::span<const Polygon> polygons);
/// Shadow: I (M + s (1 - M)); glare: min(1, I + (s / 255) (1 - M)).
RasterImage apply_illumination(const RasterImage& img, const Plane& mask, bool glare, double strength);
/// Supersampled grayscale erosion/dilation. `scale` = 1 is plain morphology.
RasterImage ink_morph(const RasterImage& img, int kernel, MorphMode mode, int scale);
/// Square kernel of size 2k+1; k = 0 is the identity.
Kernel2D defocus_kernel(int k);
Kernel2D motion_kernel(int size, double theta_deg);
/// I' = min(max(I, N_fg), 1 - N_bg) per pixel.
RasterImage compose_speckle(const RasterImage& img, const Plane& n_fg, const Plane& n_bg);
/// Cumulative walk: point k = start + sum_{j<=k} step (cos t_j, sin t_j).
std::vector<Point2> fiber_path(Point2 start, std::span<const double> thetas, double step);

using ProvenanceRecord = nlohmann::json;

/// Checks the level range and that every override belongs to the perturbation.
void validate(const PerturbationSpec& spec);

std::pair<AnnotatedPage, ProvenanceRecord> apply(const PerturbationSpec& spec, const AnnotatedPage& page,
                                                 const ResourcePool& pool);
std::pair<AnnotatedPage, ProvenanceRecord> chain(std::span<const PerturbationSpec> specs, const AnnotatedPage& page,
                                                 const ResourcePool& pool);

/// "P2:1,P4:1" -> specs sharing one seed.
std::vector<PerturbationSpec> parse_chain(std::string_view text, std::uint64_t seed);

} // namespace docrobust
