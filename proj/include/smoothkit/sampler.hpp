#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "smoothkit/smoother.hpp"

namespace smoothkit {

// Monte Carlo draws from the smoothing distribution: path m at node i is
// mu_{s_i;T} + xi^(m)_i where xi follows the conditional error dynamics
//   d xi = {a + b b^T phi(s;T)} xi ds + b dV,   xi_0 ~ N(0, V[xi_0]).
struct ConditionalPathBatch {
    TimeGrid grid;
    int d1 = 1;
    int paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> data;  // paths x (n+1) x d1, path-major

    VecSeq center;  // smoothed mean path
    VecSeq scale;   // sqrt of the marginal covariance diagonal

    Eigen::Map<const Eigen::VectorXd> value(int m, int i) const {
        return {data.data() +
                    (static_cast<std::size_t>(m) * (grid.n + 1) + i) * d1,
                d1};
    }
    Eigen::Map<Eigen::VectorXd> value(int m, int i) {
        return {data.data() +
                    (static_cast<std::size_t>(m) * (grid.n + 1) + i) * d1,
                d1};
    }
};

// Euler-Maruyama on the error process with left-node drift; path m draws
// from rng_stream(seed, path_offset + m), so batches may be generated in
// windows that reproduce one big batch bit for bit. Parallel over paths
// (capped by SMOOTHKIT_THREADS); the merge order is fixed by path index.
ConditionalPathBatch sample_conditional_paths(const ModelSpec& spec,
                                              const TimeGrid& grid,
                                              const SmoothingResult& smoothing,
                                              int paths, std::uint64_t seed,
                                              int path_offset = 0);

struct PathFunctional {
    enum class Kind { max_coordinate, path_integral, threshold_exceedance, user_table };
    Kind kind = Kind::max_coordinate;
    int coord = 0;                // 0-based state coordinate
    double threshold = 0.0;       // threshold_exceedance only
    std::vector<double> table;    // user_table: one value per path

    static PathFunctional max_coordinate(int coord);
    static PathFunctional path_integral(int coord);
    static PathFunctional threshold_exceedance(int coord, double threshold);
    static PathFunctional user_table(std::vector<double> values);

    std::string name() const;
};

struct FunctionalEstimate {
    double value = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(paths)
    int paths = 0;
    std::string functional;
};

// Monte Carlo estimate of E[f(path) | observations]. Built-ins: max of a
// coordinate over the grid, trapezoidal path integral, indicator of
// exceeding a threshold at any node, and externally tabulated values.
FunctionalEstimate estimate_functional(const ConditionalPathBatch& batch,
                                       const PathFunctional& functional);

enum class BandKind { pointwise, simultaneous };

struct ConfidenceBand {
    TimeGrid grid;
    BandKind kind = BandKind::pointwise;
    double level = 0.9;
    Eigen::MatrixXd lower;  // (n+1) x d1
    Eigen::MatrixXd upper;
    // Simultaneous bands keep their construction so containment can be
    // recounted with identical arithmetic.
    double sup_quantile = 0.0;
    VecSeq center;
    VecSeq denom;
};

// Pointwise: per-node empirical quantiles at (1 -+ level)/2 (level 0 gives
// the per-node median twice). Simultaneous: mu +- q sqrt(diag w) where q is
// the empirical level-quantile of the per-path sup of |xi| / sqrt(diag w);
// zero-variance nodes fall back to absolute deviations.
ConfidenceBand confidence_band(const ConditionalPathBatch& batch, double level,
                               BandKind kind);

// Fraction of batch paths entirely inside the band.
double band_containment(const ConfidenceBand& band,
                        const ConditionalPathBatch& batch);

}  // namespace smoothkit
