#include "smoothkit/simulate.hpp"

#include <cmath>

namespace smoothkit {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
    // Mix seed and stream index through splitmix64 so neighbouring streams
    // land far apart in the mt19937_64 state space.
    std::uint64_t x = seed ^ (0xD2B74407B1CE6E93ULL * (stream + 1));
    const std::uint64_t w0 = splitmix64(x);
    const std::uint64_t w1 = splitmix64(x);
    const std::uint64_t w2 = splitmix64(x);
    const std::uint64_t w3 = splitmix64(x);
    std::seed_seq seq{static_cast<std::uint32_t>(w0),
                      static_cast<std::uint32_t>(w0 >> 32),
                      static_cast<std::uint32_t>(w1),
                      static_cast<std::uint32_t>(w1 >> 32),
                      static_cast<std::uint32_t>(w2),
                      static_cast<std::uint32_t>(w2 >> 32),
                      static_cast<std::uint32_t>(w3),
                      static_cast<std::uint32_t>(w3 >> 32)};
    eng_.seed(seq);
}

double RngStream::uniform() {
    // 53-bit mantissa, shifted into (0, 1] so log() is safe.
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

RngStream rng_stream(std::uint64_t seed, std::uint64_t stream) {
    return RngStream(seed, stream);
}

SimulationOutput simulate(const ModelSpec& spec, const TimeGrid& grid,
                          std::uint64_t seed) {
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const int d2 = spec.dims.d2;
    const int m1 = spec.dims.m1;
    const int m2 = spec.dims.m2;
    const double h = grid.h();
    const double sqrt_h = std::sqrt(h);

    RngStream rng = rng_stream(seed, 0);
    auto draw = [&rng](int k) {
        Eigen::VectorXd z(k);
        for (int i = 0; i < k; ++i) z(i) = rng.normal();
        return z;
    };

    SimulationOutput out;
    out.grid = grid;
    out.seed = seed;
    out.states = VecSeq(n + 1, d1);
    out.observations.grid = grid;
    out.observations.increments = Eigen::MatrixXd::Zero(n, d2);

    const Eigen::MatrixXd sqrt_v0 = sqrt_psd(spec.initial.effective_cov());
    Eigen::VectorXd x = spec.initial.mean + sqrt_v0 * draw(d1);
    out.states[0] = x;

    for (int i = 0; i < n; ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd& a = spec.a.at(t);
        const Eigen::MatrixXd& b = spec.b.at(t);
        const Eigen::MatrixXd& c = spec.c.at(t);
        const Eigen::MatrixXd& s = spec.sigma.at(t);
        out.observations.increments.row(i) =
            (c * x * h + s * (sqrt_h * draw(m2))).transpose();
        x += a * x * h + b * (sqrt_h * draw(m1));
        out.states[i + 1] = x;
    }
    return out;
}

}  // namespace smoothkit
