#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace adverin {

// Deterministic PRNG: xoshiro256++ seeded through splitmix64.
// Identical seed + identical call sequence gives identical output on every
// platform; all experiment streams are derived from a single 64-bit seed.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Uniform in [0, 1), 53 mantissa bits.
    double uniform();

    // Uniform integer in [0, bound); bound must be nonzero. Rejection
    // sampled, so the result is exactly uniform.
    uint64_t below(uint64_t bound);

    // k distinct indices from [0, pool_size), uniform over k-subsets
    // (partial Fisher-Yates). Throws if k > pool_size.
    std::vector<std::size_t> choice_k(std::size_t pool_size, std::size_t k);

    // Standard normal via the Marsaglia polar method.
    double normal();

private:
    std::array<uint64_t, 4> state_;
};

// splitmix64 scramble of a single word.
uint64_t splitmix64(uint64_t x);

// Folds a list of words into one seed. Used to derive independent
// substreams, e.g. mix_seed({master, kStreamShuffle, epoch}).
uint64_t mix_seed(std::initializer_list<uint64_t> parts);

// Stream tags so substreams never collide across purposes. Keeping the
// attack stream separate from the shuffle stream is what makes a
// delta=0 attack run bit-identical to the plain baseline.
enum StreamTag : uint64_t {
    kStreamShuffle = 1,
    kStreamAttack = 2,
    kStreamInit = 3,
    kStreamRegion = 4,
    kStreamGen = 5,
};

}  // namespace adverin
