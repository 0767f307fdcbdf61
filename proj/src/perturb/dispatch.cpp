#include <charconv>
#include <string>

#include "docrobust/errors.hpp"
#include "docrobust/perturb.hpp"

namespace docrobust {

std::pair<AnnotatedPage, ProvenanceRecord> apply(const PerturbationSpec& spec, const AnnotatedPage& page,
                                                 const ResourcePool& pool)
{
    if (page.image.empty())
        throw ParameterError("cannot perturb an empty page");
    const SeverityParams p = resolve_params(spec.id, spec.level, spec.overrides);
    // Illumination levels share one mask and glare/shadow draw per page, so a
    // level changes only the intensity.
    const int seed_level = spec.id == PerturbationId::illumination ? 0 : spec.level;
    const std::uint64_t seed = child_seed(spec.seed, page.page_id, int(spec.id), seed_level);
    SeededRng rng(seed);

    PerturbResult res;
    switch (spec.id) {
    case PerturbationId::rotation:
        res = rotate_page(page, p, rng);
        break;
    case PerturbationId::warping:
        res = warp_page(page, p, rng);
        break;
    case PerturbationId::keystoning:
        res = keystone_page(page, p, rng);
        break;
    case PerturbationId::watermark:
        res = watermark_page(page, p, rng, pool);
        break;
    case PerturbationId::background:
        res = background_page(page, p, rng, pool);
        break;
    case PerturbationId::illumination:
        res = illuminate_page(page, p, rng);
        break;
    case PerturbationId::ink_bleeding:
        res = ink_bleed_page(page, p);
        break;
    case PerturbationId::ink_holdout:
        res = ink_holdout_page(page, p);
        break;
    case PerturbationId::defocus:
        res = defocus_page(page, p);
        break;
    case PerturbationId::vibration:
        res = vibrate_page(page, p, rng);
        break;
    case PerturbationId::speckle:
        res = speckle_page(page, p, rng);
        break;
    case PerturbationId::texture:
        res = texture_page(page, p, rng);
        break;
    }

    ProvenanceRecord prov = {
        {"perturbation", perturbation_code(spec.id)},
        {"name", perturbation_name(spec.id)},
        {"group", group_name(group_of(spec.id))},
        {"level", spec.level},
        {"seed", spec.seed},
        {"child_seed", seed},
        {"params", p.to_json()},
        {"realized", std::move(res.realized)},
    };
    if (!spec.overrides.empty())
        prov["overrides"] = spec.overrides;
    return {std::move(res.page), std::move(prov)};
}

std::pair<AnnotatedPage, ProvenanceRecord> chain(std::span<const PerturbationSpec> specs, const AnnotatedPage& page,
                                                 const ResourcePool& pool)
{
    if (specs.empty())
        throw ParameterError("chain needs at least one perturbation");
    for (const auto& s : specs)
        validate(s);
    AnnotatedPage cur = page;
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : specs) {
        auto [next, prov] = apply(s, cur, pool);
        cur = std::move(next);
        stages.push_back(std::move(prov));
    }
    return {std::move(cur), ProvenanceRecord{{"chain", std::move(stages)}}};
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

} // namespace

std::vector<PerturbationSpec> parse_chain(std::string_view text, std::uint64_t seed)
{
    std::vector<PerturbationSpec> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view item = trim(text.substr(pos, comma - pos));
        const std::size_t colon = item.find(':');
        if (item.empty() || colon == std::string_view::npos)
            throw ParameterError("chain item '" + std::string(item) + "' must look like P<k>:<level>");
        PerturbationSpec s;
        s.id = parse_perturbation(trim(item.substr(0, colon)));
        const std::string_view lv = trim(item.substr(colon + 1));
        const auto [ptr, ec] = std::from_chars(lv.data(), lv.data() + lv.size(), s.level);
        if (ec != std::errc() || ptr != lv.data() + lv.size() || s.level < 1 || s.level > 3)
            throw ParameterError("chain item '" + std::string(item) + "' has an invalid level (expected 1..3)");
        s.seed = seed;
        out.push_back(std::move(s));
        pos = comma + 1;
    }
    return out;
}

} // namespace docrobust
