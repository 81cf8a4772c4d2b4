#pragma once

#include <cstdint>

#include "smoothkit/model.hpp"
#include "smoothkit/rng.hpp"

namespace smoothkit {

struct SimulationOutput {
    TimeGrid grid;
    VecSeq states;  // n+1 state vectors
    ObservationPath observations;
    std::uint64_t seed = 0;
};

// Euler-Maruyama ground truth: X0 from the initial law, left-point
// coefficients, Gaussian increments of variance h. Observation increments
// dY_i = c(s_i) X_i h + sigma(s_i) sqrt(h) Z_i. Deterministic in (seed).
SimulationOutput simulate(const ModelSpec& spec, const TimeGrid& grid,
                          std::uint64_t seed);

// Derived stream for index `stream`; streams with distinct indices are
// statistically independent and reproducible.
RngStream rng_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace smoothkit
