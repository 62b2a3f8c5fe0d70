#ifndef SARCLAB_RNG_HPP
#define SARCLAB_RNG_HPP

#include <cstdint>
#include <random>

namespace sarclab {

// splitmix64 step; used to derive independent stream seeds from one root seed
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return mix_seed(root ^ mix_seed(stream));
}

using Rng = std::mt19937_64;

}  // namespace sarclab

#endif
