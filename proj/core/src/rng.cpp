#include "adverin/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adverin {

namespace {

inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

uint64_t splitmix64(uint64_t x) {
    uint64_t z = x + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
    uint64_t s = 0x243F6A8885A308D3ull;
    for (uint64_t p : parts) {
        s = splitmix64(s ^ p);
    }
    return s;
}

Rng::Rng(uint64_t seed) {
    // splitmix64 stream fills the state, per the xoshiro authors' advice.
    uint64_t s = seed;
    for (auto& w : state_) {
        s += 0x9E3779B97F4A7C15ull;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        w = z ^ (z >> 31);
    }
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
        state_[0] = 0x9E3779B97F4A7C15ull;  // all-zero state is a fixed point
    }
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::below(uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("Rng::below: bound must be nonzero");
    }
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const uint64_t r = next_u64();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

std::vector<std::size_t> Rng::choice_k(std::size_t pool_size, std::size_t k) {
    if (k > pool_size) {
        throw std::invalid_argument("Rng::choice_k: k exceeds pool size");
    }
    std::vector<std::size_t> pool(pool_size);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(below(pool_size - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

double Rng::normal() {
    for (;;) {
        const double u = 2.0 * uniform() - 1.0;
        const double v = 2.0 * uniform() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

}  // namespace adverin
