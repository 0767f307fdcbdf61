#pragma once

#include <array>
#include <complex>
#include <vector>

#include "docrobust/raster.hpp"

namespace docrobust {

struct PyramidConfig {
    int ms_scales = 5;
    /// Per-scale exponents, finest first. The published five-scale values sum
    /// to 1.0001 and are rescaled to sum to one.
    std::vector<double> ms_weights = default_ms_weights();
    int ms_window = 11;
    double ms_sigma = 1.5;
    double ms_k1 = 0.01;
    double ms_k2 = 0.03;

    int cw_levels = 3;
    int cw_orientations = 6;
    int cw_window = 7;
    double cw_k = 0.01;

    static std::vector<double> default_ms_weights();
    /// Throws ParameterError on inconsistent settings.
    void validate() const;
};

struct IqaScore {
    double ms_ssim = 100.0;
    double cw_ssim = 100.0;
    double loss_ms = 0.0;
    double loss_cw = 0.0;
};

/// Multi-scale SSIM on luma, 0..100.
double ms_ssim(const RasterImage& x, const RasterImage& y, const PyramidConfig& cfg = {});

struct Subband {
    int level = 0;
    int orientation = 0;
    int width = 0;
    int height = 0;
    std::vector<std::complex<double>> coeffs; ///< row-major
};

struct ComplexPyramid {
    Plane highpass;
    std::vector<Subband> bands; ///< level-major, then orientation
    Plane lowpass;
};

/// Complex steerable pyramid built with polar-separable frequency masks on
/// the periodic DFT grid. Input values are used as-is (0..255 for images).
ComplexPyramid complex_pyramid(const Plane& x, const PyramidConfig& cfg = {});
ComplexPyramid complex_pyramid(const RasterImage& x, const PyramidConfig& cfg = {});

/// Complex-wavelet SSIM on luma, 0..100.
double cw_ssim(const RasterImage& x, const RasterImage& y, const PyramidConfig& cfg = {});
/// Same, with precomputed pyramids.
double cw_ssim(const ComplexPyramid& px, const ComplexPyramid& py, const PyramidConfig& cfg = {});

IqaScore score_pair(const RasterImage& clean, const RasterImage& perturbed, const PyramidConfig& cfg = {});

/// Reusable clean-side state for scoring many variants of one image.
class IqaReference {
public:
    IqaReference(const RasterImage& clean, const PyramidConfig& cfg = {});
    IqaScore score(const RasterImage& perturbed) const;

private:
    PyramidConfig cfg_;
    RasterImage luma_;
    ComplexPyramid pyramid_;
};

} // namespace docrobust
