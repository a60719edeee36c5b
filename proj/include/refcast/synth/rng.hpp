#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace refcast::synth {

// Bumped whenever the stream derivation or any draw recipe changes, so
// stored datasets can be matched to the code that produced them.
inline constexpr const char* kGeneratorName = "mt19937_64/seed_seq-v1";

/// Independent random stream identified by (seed, path). Streams for
/// different paths do not overlap in practice, so adding a country or a
/// project leaves every other stream untouched.
class Stream {
public:
    Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::vector<std::uint32_t> words;
        auto push = [&](std::uint64_t v) {
            words.push_back(static_cast<std::uint32_t>(v));
            words.push_back(static_cast<std::uint32_t>(v >> 32));
        };
        push(seed);
        push(path.size());
        for (auto p : path) push(p);
        std::seed_seq seq(words.begin(), words.end());
        engine_.seed(seq);
    }

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal(double mean = 0.0, double sd = 1.0) { return std::normal_distribution<double>(mean, sd)(engine_); }
    long uniform_int(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(engine_); }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace refcast::synth
