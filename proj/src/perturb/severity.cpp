#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "docrobust/errors.hpp"
#include "docrobust/perturb.hpp"

namespace docrobust {

namespace {

constexpr std::array<std::string_view, 12> names = {
    "rotation", "warping",     "keystoning", "watermark", "background", "illumination",
    "ink_bleeding", "ink_holdout", "defocus", "vibration", "speckle", "texture",
};

std::size_t index_of(PerturbationId id) noexcept { return std::size_t(int(id) - 1); }

void check_level(int level)
{
    if (level < 1 || level > 3)
        throw ParameterError("severity level must be 1, 2 or 3, got " + std::to_string(level));
}

} // namespace

PerturbationGroup group_of(PerturbationId id) noexcept
{
    switch (id) {
    case PerturbationId::rotation:
    case PerturbationId::warping:
    case PerturbationId::keystoning:
        return PerturbationGroup::spatial;
    case PerturbationId::watermark:
    case PerturbationId::background:
        return PerturbationGroup::content;
    case PerturbationId::illumination:
    case PerturbationId::ink_bleeding:
    case PerturbationId::ink_holdout:
        return PerturbationGroup::inconsistency;
    case PerturbationId::defocus:
    case PerturbationId::vibration:
        return PerturbationGroup::blur;
    default:
        return PerturbationGroup::noise;
    }
}

std::string_view group_name(PerturbationGroup g) noexcept
{
    switch (g) {
    case PerturbationGroup::spatial:
        return "spatial";
    case PerturbationGroup::content:
        return "content";
    case PerturbationGroup::inconsistency:
        return "inconsistency";
    case PerturbationGroup::blur:
        return "blur";
    default:
        return "noise";
    }
}

std::string perturbation_code(PerturbationId id) { return "P" + std::to_string(int(id)); }

std::string_view perturbation_name(PerturbationId id) noexcept { return names[index_of(id)]; }

PerturbationId parse_perturbation(std::string_view text)
{
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    std::replace(t.begin(), t.end(), '-', '_');
    for (std::size_t i = 0; i < names.size(); ++i)
        if (t == names[i])
            return PerturbationId(int(i) + 1);
    std::string_view digits = t;
    if (!digits.empty() && digits.front() == 'p')
        digits.remove_prefix(1);
    if (!digits.empty() && digits.size() <= 2 &&
        std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const int n = std::stoi(std::string(digits));
        if (n >= 1 && n <= 12)
            return PerturbationId(n);
    }
    throw ParameterError("unknown perturbation '" + std::string(text) + "' (expected P1..P12 or a name)");
}

bool is_geometric(PerturbationId id) noexcept { return group_of(id) == PerturbationGroup::spatial; }

SeverityParams severity_params(PerturbationId id, int level)
{
    check_level(level);
    if (int(id) < 1 || int(id) > 12)
        throw ParameterError("perturbation id out of range");
    const std::size_t i = std::size_t(level - 1);
    SeverityParams p;
    p.id = id;
    p.level = level;
    switch (id) {
    case PerturbationId::rotation: {
        constexpr double lo[] = {0.0, 5.0, 10.0};
        constexpr double hi[] = {5.0, 10.0, 15.0};
        p.theta_min = lo[i];
        p.theta_max = hi[i];
        break;
    }
    case PerturbationId::warping: {
        constexpr double rs[] = {0.2, 0.06, 0.04};
        constexpr double ra[] = {2.0, 0.6, 0.4};
        p.r_sigma = rs[i];
        p.r_alpha = ra[i];
        break;
    }
    case PerturbationId::keystoning: {
        constexpr double rk[] = {0.02, 0.06, 0.1};
        p.r_k = rk[i];
        break;
    }
    case PerturbationId::watermark: {
        constexpr double aw[] = {51.0, 153.0, 255.0};
        constexpr double rz[] = {2.0, 4.0, 6.0};
        p.alpha_w = aw[i];
        p.r_z = rz[i];
        break;
    }
    case PerturbationId::background: {
        constexpr int ni[] = {1, 3, 5};
        p.n_i = ni[i];
        break;
    }
    case PerturbationId::illumination: {
        constexpr double vl[] = {51.0, 102.0, 153.0};
        constexpr double vs[] = {0.5, 0.25, 0.17};
        p.v_l = vl[i];
        p.v_s = vs[i];
        break;
    }
    case PerturbationId::ink_bleeding: {
        constexpr int k[] = {3, 7, 11};
        p.k_e = k[i];
        break;
    }
    case PerturbationId::ink_holdout: {
        constexpr int k[] = {3, 7, 11};
        p.k_d = k[i];
        break;
    }
    case PerturbationId::defocus: {
        constexpr int k[] = {1, 3, 5};
        p.k_g = k[i];
        break;
    }
    case PerturbationId::vibration: {
        constexpr int k[] = {3, 9, 15};
        p.k_m = k[i];
        break;
    }
    case PerturbationId::speckle: {
        constexpr double d[] = {1e-4, 3e-4, 5e-4};
        p.d_b = d[i];
        break;
    }
    case PerturbationId::texture: {
        constexpr int n[] = {300, 900, 1500};
        p.n_f = n[i];
        break;
    }
    }
    return p;
}

std::vector<std::string> overridable_parameters(PerturbationId id)
{
    switch (id) {
    case PerturbationId::rotation:
        return {"angle", "theta_max", "theta_min"};
    case PerturbationId::warping:
        return {"r_alpha", "r_sigma"};
    case PerturbationId::keystoning:
        return {"r_k"};
    case PerturbationId::watermark:
        return {"alpha_w", "r_z", "stamps"};
    case PerturbationId::background:
        return {"alpha_a", "alpha_b", "n_i"};
    case PerturbationId::illumination:
        return {"glare", "v_l", "v_s"};
    case PerturbationId::ink_bleeding:
        return {"ink_scale", "k_e"};
    case PerturbationId::ink_holdout:
        return {"ink_scale", "k_d"};
    case PerturbationId::defocus:
        return {"k_g"};
    case PerturbationId::vibration:
        return {"angle", "k_m"};
    case PerturbationId::speckle:
        return {"d_b"};
    case PerturbationId::texture:
        return {"n_f"};
    }
    return {};
}

namespace {

void require(bool ok, const std::string& key, const char* what)
{
    if (!ok)
        throw ParameterError("override '" + key + "' " + what);
}

int as_count(const std::string& key, double v)
{
    require(std::isfinite(v) && v == std::floor(v) && v >= 0.0 && v <= 1e7, key, "must be a non-negative integer");
    return int(v);
}

int as_odd(const std::string& key, double v)
{
    const int k = as_count(key, v);
    require(k % 2 == 1, key, "must be an odd kernel size >= 1");
    return k;
}

double in_range(const std::string& key, double v, double lo, double hi)
{
    require(std::isfinite(v) && v >= lo && v <= hi, key, "is out of range");
    return v;
}

} // namespace

SeverityParams resolve_params(PerturbationId id, int level, const ParamOverrides& overrides)
{
    SeverityParams p = severity_params(id, level);
    const auto allowed = overridable_parameters(id);
    for (const auto& [key, v] : overrides) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParameterError("override '" + key + "' is not a parameter of " + perturbation_code(id) + " (" +
                                 std::string(perturbation_name(id)) + ")");
        constexpr double inf = std::numeric_limits<double>::infinity();
        if (key == "angle")
            p.angle = in_range(key, v, -inf, inf);
        else if (key == "theta_min")
            p.theta_min = in_range(key, v, 0.0, 180.0);
        else if (key == "theta_max")
            p.theta_max = in_range(key, v, 0.0, 180.0);
        else if (key == "r_sigma")
            p.r_sigma = in_range(key, v, 0.0, inf);
        else if (key == "r_alpha")
            p.r_alpha = in_range(key, v, 0.0, inf);
        else if (key == "r_k")
            p.r_k = in_range(key, v, 0.0, 1.0);
        else if (key == "alpha_w")
            p.alpha_w = in_range(key, v, 0.0, 255.0);
        else if (key == "r_z")
            p.r_z = in_range(key, v, 0.0, 100.0);
        else if (key == "stamps")
            p.stamps = as_count(key, v);
        else if (key == "n_i")
            p.n_i = as_count(key, v);
        else if (key == "alpha_a")
            p.alpha_a = in_range(key, v, 0.0, 1.0);
        else if (key == "alpha_b")
            p.alpha_b = in_range(key, v, 0.0, 1.0);
        else if (key == "glare") {
            require(v == 0.0 || v == 1.0, key, "must be 0 (shadow) or 1 (glare)");
            p.glare = v == 1.0;
        } else if (key == "v_l")
            p.v_l = in_range(key, v, 0.0, 255.0);
        else if (key == "v_s")
            p.v_s = in_range(key, v, 0.0, 1.0);
        else if (key == "ink_scale") {
            p.ink_scale = as_count(key, v);
            require(p.ink_scale >= 1 && p.ink_scale <= 32, key, "must be in 1..32");
        } else if (key == "k_e")
            p.k_e = as_odd(key, v);
        else if (key == "k_d")
            p.k_d = as_odd(key, v);
        else if (key == "k_g")
            p.k_g = as_count(key, v);
        else if (key == "k_m")
            p.k_m = as_odd(key, v);
        else if (key == "d_b")
            p.d_b = in_range(key, v, 0.0, 1.0);
        else if (key == "n_f")
            p.n_f = as_count(key, v);
    }
    if (p.theta_min > p.theta_max)
        throw ParameterError("theta_min must not exceed theta_max");
    return p;
}

nlohmann::json SeverityParams::to_json() const
{
    nlohmann::json j = nlohmann::json::object();
    switch (id) {
    case PerturbationId::rotation:
        j["theta_min"] = theta_min;
        j["theta_max"] = theta_max;
        if (angle)
            j["angle"] = *angle;
        break;
    case PerturbationId::warping:
        j["r_sigma"] = r_sigma;
        j["r_alpha"] = r_alpha;
        break;
    case PerturbationId::keystoning:
        j["r_k"] = r_k;
        break;
    case PerturbationId::watermark:
        j["alpha_w"] = alpha_w;
        j["r_z"] = r_z;
        j["stamps"] = stamps;
        break;
    case PerturbationId::background:
        j["n_i"] = n_i;
        j["alpha_a"] = alpha_a;
        j["alpha_b"] = alpha_b;
        break;
    case PerturbationId::illumination:
        j["v_l"] = v_l;
        j["v_s"] = v_s;
        if (glare)
            j["glare"] = *glare ? 1 : 0;
        break;
    case PerturbationId::ink_bleeding:
        j["k_e"] = k_e;
        j["ink_scale"] = ink_scale;
        break;
    case PerturbationId::ink_holdout:
        j["k_d"] = k_d;
        j["ink_scale"] = ink_scale;
        break;
    case PerturbationId::defocus:
        j["k_g"] = k_g;
        break;
    case PerturbationId::vibration:
        j["k_m"] = k_m;
        if (angle)
            j["angle"] = *angle;
        break;
    case PerturbationId::speckle:
        j["d_b"] = d_b;
        break;
    case PerturbationId::texture:
        j["n_f"] = n_f;
        break;
    }
    return j;
}

void validate(const PerturbationSpec& spec)
{
    check_level(spec.level);
    (void)resolve_params(spec.id, spec.level, spec.overrides);
}

} // namespace docrobust
