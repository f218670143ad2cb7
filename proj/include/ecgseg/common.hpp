#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecgseg {

// Thrown when a file cannot be read or does not conform to the interchange
// schema. The message names the offending field.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a structurally well-formed object violates a domain invariant.
// The message lists every violated check.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// splitmix64; used for seed mixing so derived streams are decorrelated.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives a named sub-seed from a master seed. Every random stream in the
// pipeline (split, init, window sampling, stagnation reseeds) gets its own
// purpose string so streams never alias.
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose);
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t a, std::uint64_t b = 0);

// Deterministic RNG wrapper. All draws are implemented here rather than with
// std distributions so sequences are pinned by this code, not the standard
// library implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform double in [0, 1).
    double uniform();

    // Uniform double in [a, b).
    double uniform(double a, double b);

    // Unbiased uniform integer in [0, n); n >= 1.
    int uniform_int(int n);

    // Standard normal via Box-Muller.
    double normal();

private:
    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ecgseg
