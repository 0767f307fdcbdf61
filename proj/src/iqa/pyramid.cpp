#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "docrobust/errors.hpp"
#include "docrobust/filters.hpp"
#include "docrobust/iqa.hpp"

namespace docrobust {

namespace {

using cplx = std::complex<double>;

// FFTW planning is not thread safe; execution is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

// In-place 2D DFT of a row-major width x height grid. Backward transforms
// are normalized by 1/(width*height).
void dft2(std::vector<cplx>& data, int width, int height, bool forward)
{
    fftw_complex* buf = fftw_alloc_complex(data.size());
    if (!buf)
        throw ResourceError("fft buffer allocation failed");
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_2d(height, width, buf, buf, forward ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    std::copy(data.begin(), data.end(), reinterpret_cast<cplx*>(buf));
    fftw_execute(plan);
    const double scale = forward ? 1.0 : 1.0 / double(data.size());
    const cplx* out = reinterpret_cast<const cplx*>(buf);
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = out[i] * scale;
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
}

// Signed frequency index of DFT bin k on an n-point grid.
int signed_bin(int k, int n) { return k <= (n - 1) / 2 ? k : k - n; }

struct Grid {
    int width, height;
    std::vector<double> rad;   ///< 2 |f|, so 1 is Nyquist along an axis
    std::vector<double> angle; ///< atan2(fy, fx)
};

Grid make_grid(int width, int height)
{
    Grid g{width, height, {}, {}};
    g.rad.resize(std::size_t(width) * std::size_t(height));
    g.angle.resize(g.rad.size());
    for (int y = 0; y < height; ++y) {
        const double fy = double(signed_bin(y, height)) / height;
        for (int x = 0; x < width; ++x) {
            const double fx = double(signed_bin(x, width)) / width;
            const std::size_t i = std::size_t(y) * std::size_t(width) + std::size_t(x);
            g.rad[i] = 2.0 * std::hypot(fx, fy);
            g.angle[i] = std::atan2(fy, fx);
        }
    }
    return g;
}

// Raised-cosine lowpass in log2 radius: 1 below `edge - 1`, 0 above `edge`.
double low_mask(double rad, double edge)
{
    if (rad <= 0.0)
        return 1.0;
    const double t = std::log2(rad) - edge;
    if (t <= -1.0)
        return 1.0;
    if (t >= 0.0)
        return 0.0;
    return std::cos(0.5 * std::numbers::pi * (t + 1.0));
}

double high_mask(double rad, double edge)
{
    const double l = low_mask(rad, edge);
    return std::sqrt(std::max(0.0, 1.0 - l * l));
}

double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

// One-sided angular mask of orientation b out of k; summing |mask|^2 over b
// gives 2 on every direction, split between a frequency and its mirror.
double angle_mask(double angle, int b, int k)
{
    const int order = k - 1;
    const double c = std::pow(2.0, 2 * order) * factorial(order) * factorial(order) / (k * factorial(2 * order));
    double alfa = std::fmod(std::numbers::pi + angle - std::numbers::pi * b / k, 2.0 * std::numbers::pi);
    if (alfa < 0.0)
        alfa += 2.0 * std::numbers::pi;
    alfa -= std::numbers::pi;
    if (std::abs(alfa) >= 0.5 * std::numbers::pi)
        return 0.0;
    return 2.0 * std::sqrt(c) * std::pow(std::cos(alfa), order);
}

// Keeps the low half of the spectrum: bins whose signed index fits the new grid.
std::vector<cplx> crop_spectrum(const std::vector<cplx>& in, int w, int h, int nw, int nh)
{
    std::vector<cplx> out(std::size_t(nw) * std::size_t(nh));
    for (int y = 0; y < nh; ++y) {
        int sy = signed_bin(y, nh);
        sy = sy < 0 ? sy + h : sy;
        for (int x = 0; x < nw; ++x) {
            int sx = signed_bin(x, nw);
            sx = sx < 0 ? sx + w : sx;
            out[std::size_t(y) * std::size_t(nw) + std::size_t(x)] = in[std::size_t(sy) * std::size_t(w) + std::size_t(sx)];
        }
    }
    return out;
}

Plane real_part(const std::vector<cplx>& v, int w, int h)
{
    Plane p(w, h);
    for (std::size_t i = 0; i < v.size(); ++i)
        p.values()[i] = v[i].real();
    return p;
}

// Frequency masks for one pyramid geometry; built once per input size.
struct MaskSet {
    std::vector<double> high0, low0;
    struct Level {
        int width, height;
        std::vector<std::vector<double>> bands; ///< radial x angular, per orientation
        std::vector<double> low;
    };
    std::vector<Level> levels;
};

std::shared_ptr<const MaskSet> build_masks(int w, int h, int levels, int orientations)
{
    auto m = std::make_shared<MaskSet>();
    Grid g = make_grid(w, h);
    m->high0.resize(g.rad.size());
    m->low0.resize(g.rad.size());
    for (std::size_t i = 0; i < g.rad.size(); ++i) {
        m->high0[i] = high_mask(g.rad[i], 0.0);
        m->low0[i] = low_mask(g.rad[i], 0.0);
    }
    for (int level = 0; level < levels; ++level) {
        MaskSet::Level lv{w, h, {}, {}};
        lv.low.resize(g.rad.size());
        std::vector<double> radial(g.rad.size());
        for (std::size_t i = 0; i < g.rad.size(); ++i) {
            radial[i] = high_mask(g.rad[i], -1.0);
            lv.low[i] = low_mask(g.rad[i], -1.0);
        }
        for (int b = 0; b < orientations; ++b) {
            std::vector<double> band(g.rad.size());
            for (std::size_t i = 0; i < g.rad.size(); ++i)
                band[i] = radial[i] == 0.0 ? 0.0 : radial[i] * angle_mask(g.angle[i], b, orientations);
            lv.bands.push_back(std::move(band));
        }
        m->levels.push_back(std::move(lv));
        w = (w + 1) / 2;
        h = (h + 1) / 2;
        g = make_grid(w, h);
    }
    return m;
}

std::shared_ptr<const MaskSet> masks_for(int w, int h, int levels, int orientations)
{
    static std::mutex mu;
    static std::map<std::array<int, 4>, std::shared_ptr<const MaskSet>> cache;
    const std::array<int, 4> key = {w, h, levels, orientations};
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end())
            return it->second;
    }
    auto built = build_masks(w, h, levels, orientations);
    std::lock_guard lock(mu);
    // Keep the cache small; document corpora rarely mix many page sizes.
    if (cache.size() >= 16)
        cache.clear();
    return cache.emplace(key, std::move(built)).first->second;
}

} // namespace

ComplexPyramid complex_pyramid(const Plane& x, const PyramidConfig& cfg)
{
    cfg.validate();
    const int need = (1 << cfg.cw_levels) * cfg.cw_window;
    if (std::min(x.width(), x.height()) < need)
        throw ParameterError("complex_pyramid: image must be at least " + std::to_string(need) + " px on each side");

    const auto masks = masks_for(x.width(), x.height(), cfg.cw_levels, cfg.cw_orientations);
    int w = x.width();
    int h = x.height();
    std::vector<cplx> spec(x.size());
    for (std::size_t i = 0; i < spec.size(); ++i)
        spec[i] = x.values()[i];
    dft2(spec, w, h, true);

    ComplexPyramid out;
    {
        std::vector<cplx> hi(spec.size());
        for (std::size_t i = 0; i < spec.size(); ++i) {
            hi[i] = spec[i] * masks->high0[i];
            spec[i] *= masks->low0[i];
        }
        dft2(hi, w, h, false);
        out.highpass = real_part(hi, w, h);
    }

    for (int level = 0; level < cfg.cw_levels; ++level) {
        const MaskSet::Level& lv = masks->levels[std::size_t(level)];
        for (int b = 0; b < cfg.cw_orientations; ++b) {
            const auto& mask = lv.bands[std::size_t(b)];
            Subband sb;
            sb.level = level;
            sb.orientation = b;
            sb.width = w;
            sb.height = h;
            sb.coeffs.resize(spec.size());
            for (std::size_t i = 0; i < spec.size(); ++i)
                sb.coeffs[i] = spec[i] * mask[i];
            dft2(sb.coeffs, w, h, false);
            out.bands.push_back(std::move(sb));
        }
        for (std::size_t i = 0; i < spec.size(); ++i)
            spec[i] *= lv.low[i];
        const int nw = (w + 1) / 2;
        const int nh = (h + 1) / 2;
        spec = crop_spectrum(spec, w, h, nw, nh);
        // Quarter the bins so the smaller grid carries the same amplitudes.
        for (auto& v : spec)
            v *= 0.25;
        w = nw;
        h = nh;
    }
    dft2(spec, w, h, false);
    out.lowpass = real_part(spec, w, h);
    return out;
}

ComplexPyramid complex_pyramid(const RasterImage& x, const PyramidConfig& cfg)
{
    const RasterImage g = to_luma(x);
    Plane p(g.width(), g.height());
    for (std::size_t i = 0; i < p.size(); ++i)
        p.values()[i] = g.data()[i];
    return complex_pyramid(p, cfg);
}

namespace {

// Sliding-window sums over every fully covered n x n window, by running sums.
std::vector<double> box_sums(const std::vector<double>& v, int w, int h, int n)
{
    const int ow = w - n + 1;
    const int oh = h - n + 1;
    std::vector<double> rows(std::size_t(ow) * std::size_t(h));
    for (int y = 0; y < h; ++y) {
        const double* in = v.data() + std::size_t(y) * std::size_t(w);
        double* out = rows.data() + std::size_t(y) * std::size_t(ow);
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            s += in[k];
        out[0] = s;
        for (int x = 1; x < ow; ++x) {
            s += in[x + n - 1] - in[x - 1];
            out[x] = s;
        }
    }
    std::vector<double> out(std::size_t(ow) * std::size_t(oh));
    std::vector<double> acc(std::size_t(ow), 0.0);
    for (int k = 0; k < n; ++k)
        for (int x = 0; x < ow; ++x)
            acc[std::size_t(x)] += rows[std::size_t(k) * std::size_t(ow) + std::size_t(x)];
    for (int y = 0; y < oh; ++y) {
        if (y > 0)
            for (int x = 0; x < ow; ++x)
                acc[std::size_t(x)] += rows[std::size_t(y + n - 1) * std::size_t(ow) + std::size_t(x)] -
                                       rows[std::size_t(y - 1) * std::size_t(ow) + std::size_t(x)];
        std::copy(acc.begin(), acc.end(), out.begin() + std::ptrdiff_t(y) * ow);
    }
    return out;
}

double band_similarity(const Subband& a, const Subband& b, int n, double k)
{
    const std::size_t size = a.coeffs.size();
    std::vector<double> cr(size), ci(size), ea(size), eb(size);
    for (std::size_t i = 0; i < size; ++i) {
        const cplx p = a.coeffs[i];
        const cplx q = b.coeffs[i];
        // p * conj(q)
        cr[i] = p.real() * q.real() + p.imag() * q.imag();
        ci[i] = p.imag() * q.real() - p.real() * q.imag();
        ea[i] = p.real() * p.real() + p.imag() * p.imag();
        eb[i] = q.real() * q.real() + q.imag() * q.imag();
    }
    const auto sr = box_sums(cr, a.width, a.height, n);
    const auto si = box_sums(ci, a.width, a.height, n);
    const auto sa = box_sums(ea, a.width, a.height, n);
    const auto sb = box_sums(eb, a.width, a.height, n);
    double total = 0.0;
    for (std::size_t i = 0; i < sr.size(); ++i)
        total += (2.0 * std::hypot(sr[i], si[i]) + k) / (sa[i] + sb[i] + k);
    return total / double(sr.size());
}

} // namespace

double cw_ssim(const ComplexPyramid& px, const ComplexPyramid& py, const PyramidConfig& cfg)
{
    if (px.bands.size() != py.bands.size() || px.bands.empty())
        throw ParameterError("cw_ssim: pyramids have different band layouts");
    double total = 0.0;
    for (std::size_t i = 0; i < px.bands.size(); ++i) {
        const Subband& a = px.bands[i];
        const Subband& b = py.bands[i];
        if (a.width != b.width || a.height != b.height)
            throw ParameterError("cw_ssim: subband sizes differ");
        if (a.width < cfg.cw_window || a.height < cfg.cw_window)
            throw ParameterError("cw_ssim: subband smaller than the window");
        total += band_similarity(a, b, cfg.cw_window, cfg.cw_k);
    }
    return std::clamp(100.0 * std::max(0.0, total / double(px.bands.size())), 0.0, 100.0);
}

double cw_ssim(const RasterImage& x, const RasterImage& y, const PyramidConfig& cfg)
{
    if (x.width() != y.width() || x.height() != y.height())
        throw ParameterError("cw_ssim: images differ in size");
    return cw_ssim(complex_pyramid(x, cfg), complex_pyramid(y, cfg), cfg);
}

IqaScore score_pair(const RasterImage& clean, const RasterImage& perturbed, const PyramidConfig& cfg)
{
    IqaScore s;
    s.ms_ssim = ms_ssim(clean, perturbed, cfg);
    s.cw_ssim = cw_ssim(clean, perturbed, cfg);
    s.loss_ms = 100.0 - s.ms_ssim;
    s.loss_cw = 100.0 - s.cw_ssim;
    return s;
}

IqaReference::IqaReference(const RasterImage& clean, const PyramidConfig& cfg)
    : cfg_(cfg), luma_(to_luma(clean)), pyramid_(complex_pyramid(luma_, cfg))
{
}

IqaScore IqaReference::score(const RasterImage& perturbed) const
{
    if (perturbed.width() != luma_.width() || perturbed.height() != luma_.height())
        throw ParameterError("score: images differ in size");
    IqaScore s;
    s.ms_ssim = ms_ssim(luma_, perturbed, cfg_);
    s.cw_ssim = cw_ssim(pyramid_, complex_pyramid(perturbed, cfg_), cfg_);
    s.loss_ms = 100.0 - s.ms_ssim;
    s.loss_cw = 100.0 - s.cw_ssim;
    return s;
}

} // namespace docrobust
