#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "docrobust/filters.hpp"
#include "docrobust/geometry.hpp"
#include "docrobust/image_io.hpp"
#include "docrobust/morphology.hpp"
#include "docrobust/rng.hpp"
#include "support/oracles.hpp"

using namespace docrobust;

namespace {

RasterImage impulse(int w, int h, int x, int y)
{
    RasterImage img(w, h, 1, 0);
    img.at(x, y) = 255;
    return img;
}

double plane_variance(const Plane& p)
{
    const auto v = p.values();
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    double s = 0.0;
    for (double x : v)
        s += (x - mean) * (x - mean);
    return s / double(v.size());
}

const std::filesystem::path data_dir = DOCROBUST_TEST_DATA_DIR;

} // namespace

TEST_SUITE("raster")
{
    TEST_CASE("buffer length must match the declared shape")
    {
        CHECK_THROWS_AS(RasterImage(2, 2, 1, std::vector<std::uint8_t>(3)), ParameterError);
        CHECK_THROWS_AS(RasterImage(0, 2, 1), ParameterError);
        CHECK_THROWS_AS(RasterImage(2, 2, 2), ParameterError);
        RasterImage ok(3, 2, 3, std::uint8_t(7));
        CHECK(ok.data().size() == 18);
    }

    TEST_CASE("quantize rounds half up and clamps")
    {
        CHECK(quantize(-0.1) == 0);
        CHECK(quantize(1.5) == 255);
        CHECK(quantize(0.5 / 255.0) == 1);
        for (int s = 0; s < 256; ++s)
            CHECK(quantize(normalize(std::uint8_t(s))) == s);
    }

    TEST_CASE("reflect-101 mirrors without repeating the edge")
    {
        CHECK(reflect_index(-1, 5) == 1);
        CHECK(reflect_index(-2, 5) == 2);
        CHECK(reflect_index(5, 5) == 3);
        CHECK(reflect_index(6, 5) == 2);
        CHECK(reflect_index(-7, 3) == oracle::reflect101(-7, 3));
        CHECK(reflect_index(4, 1) == 0);
        for (int i = -40; i < 40; ++i)
            CHECK(reflect_index(i, 4) == oracle::reflect101(i, 4));
    }
}

TEST_SUITE("convolve")
{
    TEST_CASE("identity kernel leaves the image unchanged")
    {
        SeededRng rng(3);
        const auto img = oracle::random_image(rng, 13, 9, 3);
        CHECK(convolve(img, Kernel2D::identity()) == img);
    }

    TEST_CASE("impulse response reproduces the kernel scaled by 255")
    {
        const auto k = gaussian_kernel(5, 1.1);
        const auto out = convolve(impulse(11, 11, 5, 5), k);
        for (int j = 0; j < 5; ++j)
            for (int i = 0; i < 5; ++i)
                CHECK(out.at(3 + i, 3 + j) == quantize(k.at(i, j)));
        CHECK(out.at(0, 0) == 0);
    }

    TEST_CASE("impulse response is the unflipped kernel for asymmetric kernels")
    {
        std::vector<double> w(9, 0.0);
        w[2] = 1.0; // top-right cell
        const auto out = convolve(impulse(7, 7, 3, 3), Kernel2D(3, 3, w));
        CHECK(out.at(4, 2) == 255);
        CHECK(out.at(2, 4) == 0);
    }

    TEST_CASE("constant image stays constant under a normalized kernel")
    {
        RasterImage img(17, 12, 1, 143);
        CHECK(convolve(img, gaussian_kernel(7, 1.4)) == img);
    }

    TEST_CASE("even kernel sizes are rejected")
    {
        CHECK_THROWS_AS(Kernel2D(2, 3, std::vector<double>(6, 1.0 / 6)), ParameterError);
        CHECK_THROWS_AS(gaussian_kernel(4, 1.0), ParameterError);
    }

    TEST_CASE("mean is preserved within half an intensity level")
    {
        SeededRng rng(11);
        RasterImage img(64, 64, 1, 255);
        for (int i = 0; i < 300; ++i)
            img.at(rng.uniform_int(8, 55), rng.uniform_int(8, 55)) = std::uint8_t(rng.uniform_int(0, 120));
        const auto out = convolve(img, gaussian_kernel(5, 1.0));
        const double m0 = std::accumulate(img.data().begin(), img.data().end(), 0.0) / 4096.0;
        const double m1 = std::accumulate(out.data().begin(), out.data().end(), 0.0) / 4096.0;
        CHECK(std::abs(m0 - m1) < 0.5);
    }
}

TEST_SUITE("gaussian_kernel")
{
    TEST_CASE("size 1 is the unit kernel")
    {
        const auto k = gaussian_kernel(1, 2.0);
        CHECK(k.width() == 1);
        CHECK(k.at(0, 0) == 1.0);
    }

    TEST_CASE("3x3 sigma 0.8 matches direct evaluation")
    {
        // Frozen from exp(-(x^2+y^2)/1.28) normalized over {-1,0,1}^2.
        const auto k = gaussian_kernel(3, 0.8);
        CHECK(k.at(1, 1) == doctest::Approx(0.27249597351072813).epsilon(1e-14));
        CHECK(k.at(0, 1) == doctest::Approx(0.12475774762164542).epsilon(1e-14));
        CHECK(k.at(0, 0) == doctest::Approx(0.057118259000672536).epsilon(1e-14));
    }

    TEST_CASE("weights sum to one and are flip symmetric")
    {
        for (int size : {1, 3, 5, 7, 11, 21})
            for (double sigma : {0.3, 0.8, 2.0, 5.0}) {
                const auto k = gaussian_kernel(size, sigma);
                CHECK(std::abs(k.sum() - 1.0) <= 1e-9);
                for (int y = 0; y < size; ++y)
                    for (int x = 0; x < size; ++x) {
                        CHECK(k.at(x, y) == k.at(size - 1 - x, y));
                        CHECK(k.at(x, y) == k.at(x, size - 1 - y));
                    }
            }
    }

    TEST_CASE("non-positive sigma is a parameter error")
    {
        CHECK_THROWS_AS(gaussian_kernel(3, 0.0), ParameterError);
        CHECK_THROWS_AS(gaussian_kernel(3, -1.0), ParameterError);
    }
}

TEST_SUITE("morph")
{
    TEST_CASE("3x3 ellipse is the full square; larger ellipses drop corners")
    {
        const auto se3 = StructuringElement::ellipse(3);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                CHECK(se3.contains(dx, dy));
        const auto se7 = StructuringElement::ellipse(7);
        CHECK(se7.contains(0, 0));
        CHECK(se7.contains(3, 0));
        CHECK_FALSE(se7.contains(3, 3));
        for (int dy = -3; dy <= 3; ++dy)
            for (int dx = -3; dx <= 3; ++dx) {
                CHECK(se7.contains(dx, dy) == se7.contains(-dx, dy));
                CHECK(se7.contains(dx, dy) == se7.contains(dx, -dy));
                CHECK(se7.contains(dx, dy) == oracle::in_ellipse(dx, dy, 7));
            }
        CHECK_THROWS_AS(StructuringElement::ellipse(4), ParameterError);
    }

    TEST_CASE("constant image is unchanged in both modes")
    {
        RasterImage img(10, 7, 3, 90);
        const auto se = StructuringElement::ellipse(5);
        CHECK(morph(img, se, MorphMode::erode) == img);
        CHECK(morph(img, se, MorphMode::dilate) == img);
    }

    TEST_CASE("single black pixel grows to a 3x3 block under erosion and vanishes under dilation")
    {
        RasterImage img(9, 9, 1, 255);
        img.at(4, 4) = 0;
        const auto se = StructuringElement::ellipse(3);
        const auto eroded = morph(img, se, MorphMode::erode);
        CHECK(eroded == oracle::min_max_filter(img, 3, true));
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 9; ++x)
                CHECK(eroded.at(x, y) == ((std::abs(x - 4) <= 1 && std::abs(y - 4) <= 1) ? 0 : 255));
        CHECK(morph(img, se, MorphMode::dilate) == RasterImage(9, 9, 1, 255));
    }

    TEST_CASE("matches brute-force min/max filters on random images")
    {
        SeededRng rng(2024);
        for (int trial = 0; trial < 40; ++trial) {
            const int size = (trial % 2 == 0) ? 3 : 7;
            const auto img = oracle::random_image(rng, 5 + trial % 13, 4 + trial % 11, trial % 3 == 0 ? 3 : 1);
            const auto se = StructuringElement::ellipse(size);
            CHECK(morph(img, se, MorphMode::erode) == oracle::min_max_filter(img, size, true));
            CHECK(morph(img, se, MorphMode::dilate) == oracle::min_max_filter(img, size, false));
        }
    }

    TEST_CASE("ordering properties hold pointwise")
    {
        SeededRng rng(77);
        const auto se = StructuringElement::ellipse(3);
        for (int trial = 0; trial < 25; ++trial) {
            const auto img = oracle::random_image(rng, 16, 16, 1);
            const auto e = morph(img, se, MorphMode::erode);
            const auto d = morph(img, se, MorphMode::dilate);
            const auto ed = morph(d, se, MorphMode::erode);
            for (std::size_t i = 0; i < img.data().size(); ++i) {
                CHECK(e.data()[i] <= img.data()[i]);
                CHECK(d.data()[i] >= img.data()[i]);
                CHECK(ed.data()[i] >= e.data()[i]);
            }
        }
    }
}

TEST_SUITE("homography")
{
    TEST_CASE("identical quads give the identity")
    {
        const std::array<Point2, 4> q{{{0, 0}, {10, 0}, {10, 8}, {0, 8}}};
        const auto h = solve_homography(q, q);
        const auto id = identity_matrix();
        for (std::size_t i = 0; i < 9; ++i)
            CHECK(h[i] == doctest::Approx(id[i]).epsilon(1e-12));
    }

    TEST_CASE("shifted unit square gives a translation")
    {
        const std::array<Point2, 4> src{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
        const std::array<Point2, 4> dst{{{1, 1}, {2, 1}, {2, 2}, {1, 2}}};
        const auto h = solve_homography(src, dst);
        const auto t = translation_matrix(1, 1);
        for (std::size_t i = 0; i < 9; ++i)
            CHECK(std::abs(h[i] - t[i]) < 1e-12);
        CHECK(h[8] == 1.0);
    }

    TEST_CASE("random quad pairs reproject within 1e-9")
    {
        SeededRng rng(5);
        int solved = 0;
        for (int trial = 0; trial < 200; ++trial) {
            std::array<Point2, 4> src{{{0, 0}, {600, 0}, {600, 800}, {0, 800}}};
            std::array<Point2, 4> dst{};
            for (std::size_t i = 0; i < 4; ++i) {
                src[i].x += rng.normal(0, 20);
                src[i].y += rng.normal(0, 20);
                dst[i] = {src[i].x + rng.normal(0, 60), src[i].y + rng.normal(0, 60)};
            }
            if (!quad_is_non_degenerate(dst))
                continue;
            const auto h = solve_homography(src, dst);
            for (std::size_t i = 0; i < 4; ++i) {
                // Independent homogeneous multiply.
                const double x = h[0] * src[i].x + h[1] * src[i].y + h[2];
                const double y = h[3] * src[i].x + h[4] * src[i].y + h[5];
                const double w = h[6] * src[i].x + h[7] * src[i].y + h[8];
                CHECK(std::abs(x / w - dst[i].x) < 1e-9);
                CHECK(std::abs(y / w - dst[i].y) < 1e-9);
            }
            ++solved;
        }
        CHECK(solved > 190);
    }

    TEST_CASE("collinear corners are a transform error")
    {
        const std::array<Point2, 4> good{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
        const std::array<Point2, 4> bad{{{0, 0}, {1, 1}, {2, 2}, {0, 1}}};
        CHECK_THROWS_AS(solve_homography(good, bad), TransformError);
        CHECK_THROWS_AS(solve_homography(bad, good), TransformError);
    }

    TEST_CASE("rotation matrix maps (10, 0) to (0, 10) at 90 degrees")
    {
        const auto r = rotation_matrix(std::acos(-1.0) / 2, 0, 0);
        const auto p = apply(r, {10, 0});
        CHECK(std::abs(p.x - 0.0) < 1e-9);
        CHECK(std::abs(p.y - 10.0) < 1e-9);
    }

    TEST_CASE("singular matrices cannot be inverted")
    {
        CHECK_THROWS_AS(invert(Matrix3{1, 2, 3, 2, 4, 6, 0, 0, 1}), TransformError);
    }
}

TEST_SUITE("warp")
{
    TEST_CASE("identity perspective warp is byte identical")
    {
        SeededRng rng(8);
        const auto img = oracle::random_image(rng, 23, 17, 3);
        CHECK(warp_perspective(img, identity_matrix()) == img);
    }

    TEST_CASE("translation by +5 shifts content and fills the left columns")
    {
        SeededRng rng(9);
        const auto img = oracle::random_image(rng, 20, 6, 1);
        const auto out = warp_perspective(img, translation_matrix(5, 0));
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 20; ++x)
                CHECK(out.at(x, y) == (x < 5 ? 255 : img.at(x - 5, y)));
    }

    TEST_CASE("fitted homography warp agrees with scalar resampling")
    {
        SeededRng rng(10);
        const auto img = oracle::random_image(rng, 24, 18, 1);
        const std::array<Point2, 4> src{{{0, 0}, {23, 0}, {23, 17}, {0, 17}}};
        const std::array<Point2, 4> dst{{{1.5, 0.5}, {22, 2}, {21.2, 16}, {0.3, 15.8}}};
        const auto h = solve_homography(src, dst);
        for (std::size_t i = 0; i < 4; ++i) {
            const auto p = apply(h, src[i]);
            CHECK(std::abs(p.x - dst[i].x) < 1e-6);
            CHECK(std::abs(p.y - dst[i].y) < 1e-6);
        }
        const auto out = warp_perspective(img, h);
        const auto inv = invert(h);
        for (int y = 0; y < 18; ++y)
            for (int x = 0; x < 24; ++x) {
                const auto s = apply(inv, {double(x), double(y)});
                const double expect = oracle::bilinear(img, s.x, s.y, 0, 255.0);
                CHECK(std::abs(double(out.at(x, y)) - expect) <= 0.5 + 1e-9);
            }
    }

    TEST_CASE("zero displacement is byte identical")
    {
        SeededRng rng(12);
        const auto img = oracle::random_image(rng, 15, 11, 3);
        const Plane zero(15, 11, 0.0);
        CHECK(warp_displacement(img, zero, zero) == img);
    }

    TEST_CASE("constant displacement is a translation")
    {
        SeededRng rng(13);
        const auto img = oracle::random_image(rng, 12, 5, 1);
        const auto out = warp_displacement(img, Plane(12, 5, 3.0), Plane(12, 5, 0.0));
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 12; ++x)
                CHECK(out.at(x, y) == (x + 3 < 12 ? img.at(x + 3, y) : 255));
    }

    TEST_CASE("smooth random field matches a per-pixel scalar resampler")
    {
        SeededRng rng(14);
        const auto img = oracle::random_image(rng, 8, 8, 1);
        Plane dx(8, 8), dy(8, 8);
        for (auto& v : dx.values())
            v = rng.uniform(-1, 1);
        for (auto& v : dy.values())
            v = rng.uniform(-1, 1);
        dx = gaussian_smooth_field(dx, 1.0);
        dy = gaussian_smooth_field(dy, 1.0);
        for (auto& v : dx.values())
            v *= 4.0;
        for (auto& v : dy.values())
            v *= 4.0;
        const auto out = warp_displacement(img, dx, dy);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                const double expect = oracle::bilinear(img, x + dx.at(x, y), y + dy.at(x, y), 0, 255.0);
                CHECK(std::abs(double(out.at(x, y)) - expect) <= 0.5 + 1e-9);
            }
    }

    TEST_CASE("field size mismatch is a parameter error")
    {
        RasterImage img(4, 4, 1);
        CHECK_THROWS_AS(warp_displacement(img, Plane(4, 3), Plane(4, 3)), ParameterError);
    }
}

TEST_SUITE("gaussian_smooth_field")
{
    TEST_CASE("constant field stays constant")
    {
        const auto out = gaussian_smooth_field(Plane(30, 20, 2.5), 3.0);
        for (double v : out.values())
            CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
    }

    TEST_CASE("variance of zero-mean noise shrinks with sigma")
    {
        SeededRng rng(15);
        Plane noise(128, 128);
        for (auto& v : noise.values())
            v = rng.uniform(-1, 1);
        const double v1 = plane_variance(gaussian_smooth_field(noise, 1.0));
        const double v4 = plane_variance(gaussian_smooth_field(noise, 4.0));
        const double v16 = plane_variance(gaussian_smooth_field(noise, 16.0));
        CHECK(v1 < plane_variance(noise));
        CHECK(v4 < v1);
        CHECK(v16 < v4);
    }

    TEST_CASE("impulse spreads into a bump that conserves mass")
    {
        Plane field(61, 61, 0.0);
        field.at(30, 30) = 1.0;
        const auto out = gaussian_smooth_field(field, 3.0);
        double mass = 0.0;
        for (double v : out.values())
            mass += v;
        CHECK(std::abs(mass - 1.0) < 1e-6);
        CHECK(out.at(30, 30) > out.at(31, 30));
        CHECK(out.at(31, 30) == doctest::Approx(out.at(29, 30)).epsilon(1e-12));
    }

    TEST_CASE("sigma must be positive")
    {
        CHECK_THROWS_AS(gaussian_smooth_field(Plane(3, 3), 0.0), ParameterError);
    }
}

TEST_SUITE("to_luma")
{
    TEST_CASE("gray input passes through")
    {
        SeededRng rng(1);
        const auto img = oracle::random_image(rng, 9, 9, 1);
        CHECK(to_luma(img) == img);
    }

    TEST_CASE("white and pure red")
    {
        RasterImage white(1, 1, 3, 255);
        CHECK(to_luma(white).at(0, 0) == 255);
        RasterImage red(1, 1, 3, 0);
        red.at(0, 0, 0) = 255;
        CHECK(to_luma(red).at(0, 0) == 76);
    }
}

TEST_SUITE("rng")
{
    TEST_CASE("equal seeds give equal streams")
    {
        SeededRng a(42), b(42);
        for (int i = 0; i < 10000; ++i)
            REQUIRE(a.next_u64() == b.next_u64());
    }

    TEST_CASE("the integer stream is pinned")
    {
        // SplitMix64 outputs for seed 0 (reference values of the published generator).
        SeededRng r(0);
        CHECK(r.next_u64() == 0xe220a8397b1dcdafULL);
        CHECK(r.next_u64() == 0x6e789e6aa1b965f4ULL);
        CHECK(r.next_u64() == 0x06c45d188009454fULL);
    }

    TEST_CASE("child streams for distinct images differ")
    {
        SeededRng a(child_seed(42, "page-1", 4, 2));
        SeededRng b(child_seed(42, "page-2", 4, 2));
        SeededRng c(child_seed(42, "page-1", 4, 3));
        int diff_ab = 0, diff_ac = 0;
        for (int i = 0; i < 16; ++i) {
            const auto va = a.next_u64();
            diff_ab += va != b.next_u64();
            diff_ac += va != c.next_u64();
        }
        CHECK(diff_ab == 16);
        CHECK(diff_ac == 16);
        CHECK(child_seed(42, "page-1", 4, 2) == child_seed(42, "page-1", 4, 2));
    }

    TEST_CASE("real-valued helpers stay in range")
    {
        SeededRng r(99);
        for (int i = 0; i < 5000; ++i) {
            const double u = r.uniform();
            CHECK(u >= 0.0);
            CHECK(u < 1.0);
            const int k = r.uniform_int(-3, 4);
            CHECK(k >= -3);
            CHECK(k <= 4);
            CHECK(std::isfinite(r.normal()));
        }
    }
}

TEST_SUITE("image_io")
{
    TEST_CASE("PNG round trip is lossless and deterministic")
    {
        SeededRng rng(21);
        for (int ch : {1, 3}) {
            const auto img = oracle::random_image(rng, 31, 7, ch);
            const auto bytes = encode_png(img);
            CHECK(decode_png(bytes) == img);
            CHECK(encode_png(img) == bytes);
        }
    }

    TEST_CASE("baseline JPEG decodes")
    {
        const auto gray = read_image(data_dir / "gradient_16x8.jpg");
        CHECK(gray.width() == 16);
        CHECK(gray.height() == 8);
        CHECK(gray.channels() == 1);
        CHECK(std::abs(int(gray.at(5, 0)) - 10) <= 3);
        const auto rgb = read_image(data_dir / "solid_6x4.jpg");
        CHECK(rgb.channels() == 3);
        CHECK(std::abs(int(rgb.at(2, 2, 0)) - 200) <= 3);
        CHECK(std::abs(int(rgb.at(2, 2, 1)) - 30) <= 3);
    }

    TEST_CASE("unknown formats and missing files are io errors")
    {
        CHECK_THROWS_AS(read_image(data_dir / "does-not-exist.png"), IoError);
        const std::vector<unsigned char> junk{'n', 'o', 'p', 'e', 0, 0, 0, 0, 0};
        CHECK_THROWS_AS(decode_png(junk), IoError);
    }

    TEST_CASE("sha256 of the empty string")
    {
        CHECK(sha256_hex("", 0) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
