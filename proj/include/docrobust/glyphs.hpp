#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace docrobust {

/// Embedded 5x7 monochrome bitmap font. Rows are top to bottom; bit 4 of each
/// row byte is the leftmost column. Lowercase letters map to uppercase and
/// unknown characters render blank.
struct Glyph {
    std::array<std::uint8_t, 7> rows{};
    bool pixel(int col, int row) const noexcept { return (rows[std::size_t(row)] >> (4 - col)) & 1u; }
};

inline constexpr int glyph_cols = 5;
inline constexpr int glyph_rows = 7;
/// Horizontal advance in font cells (one blank column between glyphs).
inline constexpr int glyph_advance = 6;

const Glyph& glyph_for(char c) noexcept;

/// Width of a rendered string in font cells (no trailing gap).
inline int text_cells(std::string_view text) noexcept
{
    return text.empty() ? 0 : int(text.size()) * glyph_advance - 1;
}

/// Coverage test for a point given in font-cell units relative to the
/// top-left corner of the string.
bool text_covers(std::string_view text, double u, double v) noexcept;

} // namespace docrobust
