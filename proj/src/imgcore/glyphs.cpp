#include "docrobust/glyphs.hpp"

#include <cmath>

namespace docrobust {

namespace {

constexpr Glyph blank{};

constexpr std::array<Glyph, 26> letters = {{
    {{0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}}, // A
    {{0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {{0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {{0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {{0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {{0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {{0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {{0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {{0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {{0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {{0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {{0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {{0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}}, // M
    {{0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {{0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {{0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {{0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {{0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {{0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {{0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {{0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {{0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {{0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {{0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {{0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
    {{0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}}, // Z
}};

constexpr std::array<Glyph, 10> digits = {{
    {{0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {{0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {{0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {{0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {{0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {{0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {{0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {{0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {{0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {{0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
}};

constexpr Glyph dash{{0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}};
constexpr Glyph dot{{0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}};
constexpr Glyph comma{{0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}};

} // namespace

const Glyph& glyph_for(char c) noexcept
{
    if (c >= 'a' && c <= 'z')
        c = char(c - 'a' + 'A');
    if (c >= 'A' && c <= 'Z')
        return letters[std::size_t(c - 'A')];
    if (c >= '0' && c <= '9')
        return digits[std::size_t(c - '0')];
    switch (c) {
    case '-':
        return dash;
    case '.':
        return dot;
    case ',':
        return comma;
    default:
        return blank;
    }
}

bool text_covers(std::string_view text, double u, double v) noexcept
{
    if (u < 0.0 || v < 0.0 || v >= glyph_rows)
        return false;
    const int cu = int(std::floor(u));
    const int idx = cu / glyph_advance;
    if (idx >= int(text.size()))
        return false;
    const int col = cu - idx * glyph_advance;
    if (col >= glyph_cols)
        return false;
    return glyph_for(text[std::size_t(idx)]).pixel(col, int(std::floor(v)));
}

} // namespace docrobust
