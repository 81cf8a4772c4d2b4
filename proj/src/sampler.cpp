#include "smoothkit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "smoothkit/simulate.hpp"

namespace smoothkit {

namespace {

int thread_cap() {
    int cap = static_cast<int>(std::thread::hardware_concurrency());
    if (cap < 1) cap = 1;
    if (const char* env = std::getenv("SMOOTHKIT_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) cap = std::min(cap, v);
    }
    return cap;
}

// Nearest-rank empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const int m = static_cast<int>(sorted.size());
    int k = static_cast<int>(std::ceil(p * m));
    k = std::clamp(k, 1, m);
    return sorted[static_cast<std::size_t>(k - 1)];
}

}  // namespace

ConditionalPathBatch sample_conditional_paths(const ModelSpec& spec,
                                              const TimeGrid& grid,
                                              const SmoothingResult& smoothing,
                                              int paths, std::uint64_t seed,
                                              int path_offset) {
    if (smoothing.method != SmootherMethod::bf || !smoothing.field)
        throw ConfigError(
            "conditional path sampling needs a bf smoothing result");
    if (!grid.same_as(smoothing.grid))
        throw ConfigError("smoothing result grid mismatch");
    if (paths < 1) throw ConfigError("path count must be >= 1");
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const int m1 = spec.dims.m1;
    const double h = grid.h();
    const double sqrt_h = std::sqrt(h);
    const RiccatiField& field = *smoothing.field;
    const CoeffEvaluator coeffs(spec);

    // Left-node error drift a + b b^T phi and diffusion per cell.
    MatSeq drift(n, d1, d1);
    MatSeq diffusion(n, d1, m1);
    for (int i = 0; i < n; ++i) {
        const CoeffSlice& s = coeffs.at(grid.node(i));
        drift[i] = s.a + s.bbt * field.phi[i];
        diffusion[i] = s.b;
    }
    const Eigen::MatrixXd sqrt_xi0 = sqrt_psd(field.xi0_cov);

    ConditionalPathBatch batch;
    batch.grid = grid;
    batch.d1 = d1;
    batch.paths = paths;
    batch.seed = seed;
    batch.data.assign(static_cast<std::size_t>(paths) * (n + 1) * d1, 0.0);
    batch.center = VecSeq(n + 1, d1);
    batch.scale = VecSeq(n + 1, d1);
    for (int i = 0; i <= n; ++i) {
        batch.center[i] = smoothing.means[i];
        batch.scale[i] =
            field.w[i].diagonal().cwiseMax(0.0).cwiseSqrt();
    }

    auto run_range = [&](int first, int last) {
        Eigen::VectorXd z1(d1), z2(m1), xi(d1);
        for (int m = first; m < last; ++m) {
            RngStream rng = rng_stream(
                seed, static_cast<std::uint64_t>(path_offset + m));
            for (int k = 0; k < d1; ++k) z1(k) = rng.normal();
            xi = sqrt_xi0 * z1;
            batch.value(m, 0) = smoothing.means[0] + xi;
            for (int i = 0; i < n; ++i) {
                for (int k = 0; k < m1; ++k) z2(k) = rng.normal();
                xi += h * (drift[i] * xi) + sqrt_h * (diffusion[i] * z2);
                batch.value(m, i + 1) = smoothing.means[i + 1] + xi;
            }
        }
    };

    const int workers = std::min(thread_cap(), paths);
    if (workers <= 1) {
        run_range(0, paths);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int first = w * chunk;
            const int last = std::min(paths, first + chunk);
            if (first >= last) break;
            pool.emplace_back(run_range, first, last);
        }
        for (auto& t : pool) t.join();
    }
    return batch;
}

PathFunctional PathFunctional::max_coordinate(int coord) {
    return {Kind::max_coordinate, coord, 0.0, {}};
}
PathFunctional PathFunctional::path_integral(int coord) {
    return {Kind::path_integral, coord, 0.0, {}};
}
PathFunctional PathFunctional::threshold_exceedance(int coord,
                                                    double threshold) {
    return {Kind::threshold_exceedance, coord, threshold, {}};
}
PathFunctional PathFunctional::user_table(std::vector<double> values) {
    return {Kind::user_table, 0, 0.0, std::move(values)};
}

std::string PathFunctional::name() const {
    switch (kind) {
        case Kind::max_coordinate: return "max";
        case Kind::path_integral: return "integral";
        case Kind::threshold_exceedance: return "exceedance";
        case Kind::user_table: return "user-table";
    }
    return "unknown";
}

FunctionalEstimate estimate_functional(const ConditionalPathBatch& batch,
                                       const PathFunctional& functional) {
    const int m = batch.paths;
    const int n = batch.grid.n;
    const double h = batch.grid.h();
    if (m < 1) throw ConfigError("empty path batch");
    if (functional.kind != PathFunctional::Kind::user_table &&
        (functional.coord < 0 || functional.coord >= batch.d1))
        throw ConfigError("functional coordinate outside the state dimension");
    if (functional.kind == PathFunctional::Kind::user_table &&
        static_cast<int>(functional.table.size()) != m)
        throw ConfigError("user functional table needs one value per path");

    std::vector<double> values(static_cast<std::size_t>(m));
    for (int p = 0; p < m; ++p) {
        double val = 0.0;
        switch (functional.kind) {
            case PathFunctional::Kind::max_coordinate: {
                val = batch.value(p, 0)(functional.coord);
                for (int i = 1; i <= n; ++i)
                    val = std::max(val, batch.value(p, i)(functional.coord));
                break;
            }
            case PathFunctional::Kind::path_integral: {
                double acc = 0.5 * (batch.value(p, 0)(functional.coord) +
                                    batch.value(p, n)(functional.coord));
                for (int i = 1; i < n; ++i)
                    acc += batch.value(p, i)(functional.coord);
                val = acc * h;
                break;
            }
            case PathFunctional::Kind::threshold_exceedance: {
                val = 0.0;
                for (int i = 0; i <= n; ++i)
                    if (batch.value(p, i)(functional.coord) >
                        functional.threshold) {
                        val = 1.0;
                        break;
                    }
                break;
            }
            case PathFunctional::Kind::user_table:
                val = functional.table[static_cast<std::size_t>(p)];
                break;
        }
        values[static_cast<std::size_t>(p)] = val;
    }

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= m;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = m > 1 ? std::sqrt(ss / (m - 1)) : 0.0;

    FunctionalEstimate est;
    est.value = mean;
    est.std_error = sd / std::sqrt(static_cast<double>(m));
    est.paths = m;
    est.functional = functional.name();
    return est;
}

ConfidenceBand confidence_band(const ConditionalPathBatch& batch, double level,
                               BandKind kind) {
    const int m = batch.paths;
    const int n = batch.grid.n;
    const int d1 = batch.d1;
    if (m < 1) throw ConfigError("empty path batch");
    if (level < 0.0 || level >= 1.0)
        throw ConfigError("band level must be in [0, 1)");

    ConfidenceBand band;
    band.grid = batch.grid;
    band.kind = kind;
    band.level = level;
    band.lower.resize(n + 1, d1);
    band.upper.resize(n + 1, d1);
    band.center = batch.center;

    if (kind == BandKind::pointwise) {
        std::vector<double> column(static_cast<std::size_t>(m));
        const double p_lo = 0.5 * (1.0 - level);
        const double p_hi = 0.5 * (1.0 + level);
        for (int i = 0; i <= n; ++i)
            for (int k = 0; k < d1; ++k) {
                for (int p = 0; p < m; ++p)
                    column[static_cast<std::size_t>(p)] = batch.value(p, i)(k);
                std::sort(column.begin(), column.end());
                band.lower(i, k) = quantile_sorted(column, p_lo);
                band.upper(i, k) = quantile_sorted(column, p_hi);
            }
        return band;
    }

    // Simultaneous: per-path sup of the standardized deviation, with
    // zero-variance nodes falling back to absolute deviations.
    band.denom = VecSeq(n + 1, d1);
    for (int i = 0; i <= n; ++i)
        for (int k = 0; k < d1; ++k) {
            const double s = batch.scale[i](k);
            band.denom[i](k) = s > 1e-15 ? s : 1.0;
        }
    std::vector<double> sups(static_cast<std::size_t>(m));
    for (int p = 0; p < m; ++p) {
        double sup = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int k = 0; k < d1; ++k)
                sup = std::max(sup,
                               std::abs(batch.value(p, i)(k) -
                                        batch.center[i](k)) /
                                   band.denom[i](k));
        sups[static_cast<std::size_t>(p)] = sup;
    }
    std::sort(sups.begin(), sups.end());
    band.sup_quantile = quantile_sorted(sups, level);
    for (int i = 0; i <= n; ++i)
        for (int k = 0; k < d1; ++k) {
            const double half = band.sup_quantile * batch.scale[i](k);
            band.lower(i, k) = batch.center[i](k) - half;
            band.upper(i, k) = batch.center[i](k) + half;
        }
    return band;
}

double band_containment(const ConfidenceBand& band,
                        const ConditionalPathBatch& batch) {
    const int m = batch.paths;
    const int n = batch.grid.n;
    const int d1 = batch.d1;
    if (!band.grid.same_as(batch.grid) || band.lower.cols() != d1)
        throw ConfigError("band and batch shapes do not match");
    int inside = 0;
    for (int p = 0; p < m; ++p) {
        bool contained = true;
        if (band.kind == BandKind::simultaneous) {
            // Same arithmetic as the construction, so the recount on the
            // defining batch is exact.
            for (int i = 0; i <= n && contained; ++i)
                for (int k = 0; k < d1; ++k)
                    if (std::abs(batch.value(p, i)(k) - band.center[i](k)) /
                            band.denom[i](k) >
                        band.sup_quantile) {
                        contained = false;
                        break;
                    }
        } else {
            for (int i = 0; i <= n && contained; ++i)
                for (int k = 0; k < d1; ++k) {
                    const double x = batch.value(p, i)(k);
                    if (x < band.lower(i, k) || x > band.upper(i, k)) {
                        contained = false;
                        break;
                    }
                }
        }
        if (contained) ++inside;
    }
    return static_cast<double>(inside) / m;
}

}  // namespace smoothkit
