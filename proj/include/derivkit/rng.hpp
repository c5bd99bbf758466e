#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace derivkit {

/// splitmix64 finaliser; used to derive independent per-case streams.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
    return mix_seed(mix_seed(a) ^ (b + 0x632be59bd9b4e019ULL));
}

// Distribution helpers are written out instead of using <random> distributions:
// those are implementation-defined, and case files must be identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] (inclusive), unbiased.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next());
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return lo + static_cast<std::int64_t>(v % span);
    }

    int uniform_int(int lo, int hi) { return static_cast<int>(uniform(lo, hi)); }

    std::size_t index(std::size_t size) {
        return static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(size) - 1));
    }

    bool coin() { return (next() >> 63) != 0; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

    template <typename Container>
    const auto& pick(const Container& c) {
        return c[index(c.size())];
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace derivkit
