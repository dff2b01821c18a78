#pragma once

#include <cstdint>
#include <random>

namespace redistmc {

// Random stream consumed by the chain kernels. Virtual so tests can script
// individual draws and force specific branches.
class RandomStream {
public:
    virtual ~RandomStream() = default;

    // Uniform on [0, 1).
    virtual double uniform() = 0;
    // Uniform integer on [0, n); n > 0.
    virtual std::uint64_t below(std::uint64_t n) = 0;

    bool bernoulli(double p) { return uniform() < p; }
};

// mt19937_64 with bit-exact derived draws, so identical seeds give identical
// traces on every platform.
class SeededStream final : public RandomStream {
public:
    explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

    double uniform() override { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) override {
        // Rejection on the top of the range removes modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

// splitmix64 finalizer over (base, index): independent per-chain seeds from
// one run seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace redistmc
