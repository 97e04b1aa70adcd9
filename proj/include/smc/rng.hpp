// Counter-based random streams. Every source of randomness in the project
// is a named child of one root seed, so partial re-runs stay reproducible
// and results do not depend on evaluation order or thread count.

#ifndef SMC_RNG_HPP
#define SMC_RNG_HPP

#include <cstdint>
#include <string_view>

namespace smc {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed) {}

    // Independent child stream identified by a label (and optional index).
    RngStream derive(std::string_view name) const;
    RngStream derive(std::string_view name, std::uint64_t index) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via Box-Muller; one spare value is cached.
    double normal();

    // Uniform integer in [0, n).
    int uniform_int(int n);

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace smc

#endif  // SMC_RNG_HPP
