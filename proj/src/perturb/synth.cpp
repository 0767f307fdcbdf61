#include "docrobust/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "docrobust/errors.hpp"
#include "docrobust/glyphs.hpp"
#include "docrobust/rng.hpp"

namespace docrobust {

int draw_text(RasterImage& img, int x, int y, std::string_view text, int scale, std::uint8_t value)
{
    for (std::size_t k = 0; k < text.size(); ++k) {
        const Glyph& g = glyph_for(text[k]);
        const int gx = x + int(k) * glyph_advance * scale;
        for (int row = 0; row < glyph_rows; ++row)
            for (int col = 0; col < glyph_cols; ++col) {
                if (!g.pixel(col, row))
                    continue;
                for (int j = 0; j < scale; ++j)
                    for (int i = 0; i < scale; ++i) {
                        const int px = gx + col * scale + i;
                        const int py = y + row * scale + j;
                        if (px >= 0 && py >= 0 && px < img.width() && py < img.height())
                            for (int c = 0; c < img.channels(); ++c)
                                img.at(px, py, c) = value;
                    }
            }
    }
    return x + text_cells(text) * scale;
}

namespace {

constexpr int margin = 40;

struct Layout {
    RasterImage& img;
    SeededRng& rng;
    std::vector<Annotation>& anns;
    int width;
    int y = margin;

    std::string word(int min_len, int max_len)
    {
        const int n = rng.uniform_int(min_len, max_len);
        std::string w;
        for (int i = 0; i < n; ++i)
            w.push_back(char('A' + rng.uniform_int(0, 25)));
        return w;
    }

    // Fills one line of words no wider than `limit` pixels.
    std::string line(int scale, int limit)
    {
        std::string s;
        while (true) {
            std::string w = word(2, 9);
            const std::string next = s.empty() ? w : s + " " + w;
            if (text_cells(next) * scale > limit)
                break;
            s = next;
        }
        return s.empty() ? word(1, 2) : s;
    }

    void annotate(int category, int x0, int y0, int x1, int y1)
    {
        Annotation a;
        a.id = std::int64_t(anns.size()) + 1;
        a.category_id = category;
        a.box = {double(x0), double(y0), double(x1 - x0), double(y1 - y0)};
        a.area = a.box.area();
        anns.push_back(a);
    }

    int right() const { return width - margin; }

    void title()
    {
        const int scale = 3;
        const int lines = rng.uniform_int(1, 2);
        const int y0 = y;
        int x1 = margin;
        for (int i = 0; i < lines; ++i) {
            const std::string s = line(scale, int((right() - margin) * rng.uniform(0.5, 0.9)));
            x1 = std::max(x1, draw_text(img, margin, y, s, scale, 0));
            y += glyph_rows * scale + 8;
        }
        annotate(2, margin, y0, x1, y - 8);
        y += 14;
    }

    void paragraph(int room)
    {
        const int scale = 2;
        const int lines = std::min(rng.uniform_int(3, 8), room / 20);
        const int y0 = y;
        const int indent = rng.bernoulli(0.5) ? 24 : 0;
        int x1 = margin;
        for (int i = 0; i < lines; ++i) {
            const int x0 = margin + (i == 0 ? indent : 0);
            const int limit = right() - x0 - (i + 1 == lines ? rng.uniform_int(0, 200) : 0);
            x1 = std::max(x1, draw_text(img, x0, y, line(scale, limit), scale, 0));
            y += glyph_rows * scale + 6;
        }
        annotate(1, margin, y0, x1, y - 6);
        y += 16;
    }

    void list(int room)
    {
        const int scale = 2;
        const int items = std::min(rng.uniform_int(3, 5), room / 22);
        const int y0 = y;
        int x1 = margin;
        for (int i = 0; i < items; ++i) {
            for (int j = 4; j < 10; ++j)
                for (int k = 0; k < 6; ++k)
                    for (int c = 0; c < img.channels(); ++c)
                        img.at(margin + 4 + k, y + j, c) = 0;
            x1 = std::max(x1, draw_text(img, margin + 20, y, line(scale, int((right() - margin - 20) * 0.8)),
                                        scale, 0));
            y += glyph_rows * scale + 8;
        }
        annotate(3, margin, y0, x1, y - 8);
        y += 16;
    }

    void table(int room)
    {
        const int rows = std::min(rng.uniform_int(3, 6), (room - 2) / 24);
        const int cols = rng.uniform_int(3, 5);
        const int cell_h = 24;
        const int total_w = int((right() - margin) * rng.uniform(0.7, 1.0));
        const int cell_w = total_w / cols;
        const int y0 = y;
        const int x1 = margin + cell_w * cols;
        const int y1 = y0 + cell_h * rows;
        auto hline = [&](int yy) {
            for (int x = margin; x <= x1; ++x)
                for (int c = 0; c < img.channels(); ++c)
                    img.at(x, yy, c) = 0;
        };
        auto vline = [&](int xx) {
            for (int yy = y0; yy <= y1; ++yy)
                for (int c = 0; c < img.channels(); ++c)
                    img.at(xx, yy, c) = 0;
        };
        for (int r = 0; r <= rows; ++r)
            hline(y0 + r * cell_h);
        for (int c = 0; c <= cols; ++c)
            vline(margin + c * cell_w);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                draw_text(img, margin + c * cell_w + 5, y0 + r * cell_h + 5, word(1, std::max(1, cell_w / 12 - 1)),
                          2, r == 0 ? 0 : 40);
        annotate(4, margin, y0, x1 + 1, y1 + 1);
        y = y1 + 22;
    }

    void figure(int max_h)
    {
        const int h = std::min(max_h, rng.uniform_int(120, 220));
        const int w = int((right() - margin) * rng.uniform(0.5, 0.9));
        const int x0 = margin + (right() - margin - w) / 2;
        const int y0 = y;
        const double g0 = rng.uniform(0.55, 0.95);
        const double g1 = rng.uniform(0.55, 0.95);
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i) {
                const double t = (i + j) / double(w + h);
                for (int c = 0; c < img.channels(); ++c)
                    img.at(x0 + i, y0 + j, c) = quantize(g0 + (g1 - g0) * t);
            }
        const int shapes = rng.uniform_int(2, 5);
        for (int s = 0; s < shapes; ++s) {
            const double cx = x0 + rng.uniform(0.2, 0.8) * w;
            const double cy = y0 + rng.uniform(0.2, 0.8) * h;
            const double rad = rng.uniform(0.08, 0.25) * std::min(w, h);
            const std::uint8_t v = quantize(rng.uniform(0.0, 0.45));
            for (int j = 0; j < h; ++j)
                for (int i = 0; i < w; ++i)
                    if (std::hypot(x0 + i + 0.5 - cx, y0 + j + 0.5 - cy) <= rad)
                        for (int c = 0; c < img.channels(); ++c)
                            img.at(x0 + i, y0 + j, c) = v;
        }
        annotate(5, x0, y0, x0 + w, y0 + h);
        y += h + 22;
    }
};

} // namespace

AnnotatedPage synth_page(std::uint64_t seed, int index, const SynthOptions& opt)
{
    if (opt.width < 200 || opt.height < 200)
        throw ParameterError("synthetic pages must be at least 200x200");
    if (opt.channels != 1 && opt.channels != 3)
        throw ParameterError("synthetic pages have 1 or 3 channels");
    AnnotatedPage page;
    char id[32];
    std::snprintf(id, sizeof id, "synth-%04d", index);
    page.page_id = id;
    page.image = RasterImage(opt.width, opt.height, opt.channels, 255);
    SeededRng rng(child_seed(seed, "synth", index, 0));
    Layout lay{page.image, rng, page.annotations, opt.width};
    lay.title();
    const int bottom = opt.height - margin;
    while (true) {
        const double pick = rng.uniform();
        const int room = bottom - lay.y;
        if (room < 60)
            break;
        if (pick < 0.5)
            lay.paragraph(room);
        else if (pick < 0.65)
            lay.list(room);
        else if (pick < 0.8 && room >= 100)
            lay.table(room);
        else if (room >= 130)
            lay.figure(room - 2);
        else
            break;
    }
    return page;
}

std::vector<AnnotatedPage> synth_corpus(std::uint64_t seed, int count, const SynthOptions& opt)
{
    std::vector<AnnotatedPage> out;
    out.reserve(std::size_t(std::max(0, count)));
    for (int i = 0; i < count; ++i)
        out.push_back(synth_page(seed, i, opt));
    return out;
}

} // namespace docrobust
