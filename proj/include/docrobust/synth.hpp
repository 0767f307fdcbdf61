#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "docrobust/page.hpp"

namespace docrobust {

/// Category ids used by generated pages (PubLayNet-style labels).
inline constexpr std::array<std::string_view, 5> synth_categories = {"text", "title", "list", "table", "figure"};

struct SynthOptions {
    int width = 600;
    int height = 800;
    int channels = 1;
};

/// Deterministic document-like page: a title, then paragraphs, lists,
/// ruled tables and figures in a single column, each annotated with a tight
/// box. The page id is "synth-NNNN".
AnnotatedPage synth_page(std::uint64_t seed, int index, const SynthOptions& opt = {});
std::vector<AnnotatedPage> synth_corpus(std::uint64_t seed, int count, const SynthOptions& opt = {});

/// Draw `text` with the embedded font, each font cell a `scale` x `scale`
/// block, top-left corner at (x, y). Returns the right edge in pixels.
int draw_text(RasterImage& img, int x, int y, std::string_view text, int scale, std::uint8_t value);

} // namespace docrobust
