#pragma once

#include <cstdint>
#include <limits>

namespace girsanov {

/// Seed of an experiment. Every path draws from its own stream keyed by
/// (seed, stream, path_index), so results do not depend on scheduling.
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** engine; satisfies UniformRandomBitGenerator so the std
/// distributions can sit on top of it.
class PathRng {
public:
    using result_type = std::uint64_t;

    explicit PathRng(std::uint64_t seed);
    PathRng(const RngSpec& spec, std::uint64_t path_index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0,1).
    double uniform();

private:
    std::uint64_t s_[4];
};

/// Stream spec for replication r of an experiment seeded with `base`.
RngSpec replicate(const RngSpec& base, std::uint64_t r);

} // namespace girsanov
