#include "girsanov/rng.hpp"

namespace girsanov {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

PathRng::PathRng(std::uint64_t seed)
{
    std::uint64_t sm = seed;
    for (auto& word : s_)
        word = splitmix64(sm);
}

PathRng::PathRng(const RngSpec& spec, std::uint64_t path_index)
{
    // Hash the three key words together before expanding the state.
    std::uint64_t sm = spec.seed;
    std::uint64_t key = splitmix64(sm);
    sm = key ^ spec.stream;
    key = splitmix64(sm);
    sm = key ^ path_index;
    key = splitmix64(sm);
    sm = key;
    for (auto& word : s_)
        word = splitmix64(sm);
}

PathRng::result_type PathRng::operator()()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double PathRng::uniform()
{
    // 53 random bits, shifted off zero.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

RngSpec replicate(const RngSpec& base, std::uint64_t r)
{
    std::uint64_t sm = base.seed ^ (0xd1b54a32d192ed03ULL * (r + 1));
    return RngSpec{splitmix64(sm), base.stream};
}

} // namespace girsanov
