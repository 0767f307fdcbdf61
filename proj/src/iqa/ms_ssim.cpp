#include <cmath>
#include <numeric>
#include <string>

#include "docrobust/errors.hpp"
#include "docrobust/filters.hpp"
#include "docrobust/iqa.hpp"

namespace docrobust {

std::vector<double> PyramidConfig::default_ms_weights()
{
    std::vector<double> w = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w)
        v /= total;
    return w;
}

void PyramidConfig::validate() const
{
    if (ms_scales < 1)
        throw ParameterError("ms_scales must be >= 1");
    if (int(ms_weights.size()) != ms_scales)
        throw ParameterError("ms_weights needs one entry per scale");
    const double total = std::accumulate(ms_weights.begin(), ms_weights.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
        throw ParameterError("ms_weights must sum to 1");
    if (ms_window < 1 || ms_window % 2 == 0 || cw_window < 1 || cw_window % 2 == 0)
        throw ParameterError("window sizes must be odd");
    if (!(ms_sigma > 0.0))
        throw ParameterError("ms_sigma must be positive");
    if (cw_levels < 1 || cw_orientations < 1)
        throw ParameterError("cw_levels and cw_orientations must be >= 1");
    if (!(cw_k >= 0.0))
        throw ParameterError("cw_k must be non-negative");
}

namespace {

Plane luma_plane(const RasterImage& img)
{
    const RasterImage g = to_luma(img);
    Plane p(g.width(), g.height());
    auto dst = p.values();
    const auto src = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = src[i];
    return p;
}

// Separable filter keeping only fully covered positions.
Plane filter_valid(const Plane& in, const std::vector<double>& taps)
{
    const int n = int(taps.size());
    const int w = in.width() - n + 1;
    const int h = in.height() - n + 1;
    Plane tmp(w, in.height());
    for (int y = 0; y < in.height(); ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += taps[std::size_t(k)] * in.at(x + k, y);
            tmp.at(x, y) = s;
        }
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += taps[std::size_t(k)] * tmp.at(x, y + k);
            out.at(x, y) = s;
        }
    return out;
}

Plane downsample2(const Plane& in)
{
    Plane out(in.width() / 2, in.height() / 2);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            out.at(x, y) = 0.25 * (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) + in.at(2 * x, 2 * y + 1) +
                                   in.at(2 * x + 1, 2 * y + 1));
    return out;
}

Plane product(const Plane& a, const Plane& b)
{
    Plane out(a.width(), a.height());
    const auto pa = a.values();
    const auto pb = b.values();
    auto po = out.values();
    for (std::size_t i = 0; i < po.size(); ++i)
        po[i] = pa[i] * pb[i];
    return out;
}

} // namespace

double ms_ssim(const RasterImage& x, const RasterImage& y, const PyramidConfig& cfg)
{
    cfg.validate();
    if (x.width() != y.width() || x.height() != y.height())
        throw ParameterError("ms_ssim: images differ in size");
    const int need = (1 << (cfg.ms_scales - 1)) * cfg.ms_window;
    if (std::min(x.width(), x.height()) < need)
        throw ParameterError("ms_ssim: images must be at least " + std::to_string(need) + " px on each side");

    std::vector<double> taps(std::size_t(cfg.ms_window));
    const int r = cfg.ms_window / 2;
    double total = 0.0;
    for (int i = -r; i <= r; ++i)
        total += taps[std::size_t(i + r)] = std::exp(-double(i * i) / (2.0 * cfg.ms_sigma * cfg.ms_sigma));
    for (double& t : taps)
        t /= total;

    const double c1 = (cfg.ms_k1 * 255.0) * (cfg.ms_k1 * 255.0);
    const double c2 = (cfg.ms_k2 * 255.0) * (cfg.ms_k2 * 255.0);

    Plane a = luma_plane(x);
    Plane b = luma_plane(y);
    double result = 1.0;
    for (int j = 0; j < cfg.ms_scales; ++j) {
        const Plane mu_a = filter_valid(a, taps);
        const Plane mu_b = filter_valid(b, taps);
        const Plane aa = filter_valid(product(a, a), taps);
        const Plane bb = filter_valid(product(b, b), taps);
        const Plane ab = filter_valid(product(a, b), taps);
        double cs_sum = 0.0;
        double l_sum = 0.0;
        const std::size_t n = mu_a.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double ma = mu_a.values()[i];
            const double mb = mu_b.values()[i];
            const double va = aa.values()[i] - ma * ma;
            const double vb = bb.values()[i] - mb * mb;
            const double cov = ab.values()[i] - ma * mb;
            cs_sum += (2.0 * cov + c2) / (va + vb + c2);
            l_sum += (2.0 * (ma * mb) + c1) / (ma * ma + mb * mb + c1);
        }
        const double wj = cfg.ms_weights[std::size_t(j)];
        result *= std::pow(std::max(0.0, cs_sum / double(n)), wj);
        if (j + 1 == cfg.ms_scales)
            result *= std::pow(std::max(0.0, l_sum / double(n)), wj);
        else {
            a = downsample2(a);
            b = downsample2(b);
        }
    }
    return std::clamp(100.0 * result, 0.0, 100.0);
}

} // namespace docrobust
