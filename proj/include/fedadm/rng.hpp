#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace fedadm {

std::uint64_t splitmix64(std::uint64_t x);

// Combines a list of words into one seed; order matters.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// Stable 64-bit id for a text label, usable inside derive_seed.
std::uint64_t label_id(std::string_view label);

// Seed id of a floating sweep value (its bit pattern).
std::uint64_t value_id(double v);

// std::mt19937_64 with draws derived from the raw 64-bit output, so streams
// are identical across standard libraries (std:: distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Exponential holding time with the given rate.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace fedadm
