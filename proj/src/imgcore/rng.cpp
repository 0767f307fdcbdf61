#include "docrobust/rng.hpp"

#include <cmath>
#include <numbers>

namespace docrobust {

namespace {
constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

void append_u64(std::uint64_t& h, std::uint64_t v) noexcept
{
    char bytes[8];
    for (int i = 0; i < 8; ++i)
        bytes[i] = char((v >> (8 * i)) & 0xff);
    h = fnv1a64(std::string_view(bytes, 8), h);
}
} // namespace

std::uint64_t SeededRng::mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t SeededRng::next_u64() noexcept
{
    ++counter_;
    return mix(seed_ + counter_ * golden_gamma);
}

double SeededRng::uniform() noexcept { return double(next_u64() >> 11) * 0x1.0p-53; }

int SeededRng::uniform_int(int lo, int hi) noexcept
{
    if (hi <= lo)
        return lo;
    const auto span = std::uint64_t(std::int64_t(hi) - std::int64_t(lo) + 1);
    return int(std::int64_t(lo) + std::int64_t(next_u64() % span));
}

double SeededRng::normal() noexcept
{
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SeededRng::cauchy(double location, double scale) noexcept
{
    return location + scale * std::tan(std::numbers::pi * (uniform() - 0.5));
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) noexcept
{
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t child_seed(std::uint64_t base_seed, std::string_view image_id, int perturbation, int level) noexcept
{
    std::uint64_t h = fnv1a64({});
    append_u64(h, base_seed);
    append_u64(h, image_id.size());
    h = fnv1a64(image_id, h);
    append_u64(h, std::uint64_t(std::int64_t(perturbation)));
    append_u64(h, std::uint64_t(std::int64_t(level)));
    return SeededRng::mix(h);
}

} // namespace docrobust
