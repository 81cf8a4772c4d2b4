#pragma once

#include <cstdint>
#include <random>

namespace smoothkit {

// Deterministic random stream family. Distinct (seed, stream) pairs give
// statistically independent, reproducible generators; the normal transform
// is a hand-rolled Box-Muller so draws are identical across standard
// library implementations.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    // Uniform on (0, 1].
    double uniform();
    // Standard normal.
    double normal();

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace smoothkit
