#include "smoothkit/filter.hpp"

#include "smoothkit/riccati.hpp"

namespace smoothkit {

namespace {

void check_obs(const TimeGrid& grid, const ObservationPath& obs, int d2) {
    if (!grid.same_as(obs.grid))
        throw ConfigError("observation path grid mismatch");
    if (obs.increments.rows() != grid.n || obs.increments.cols() != d2)
        throw ConfigError("observation path shape mismatch");
    if (!obs.increments.allFinite())
        throw ConfigError("observation path has non-finite entries");
}

}  // namespace

FilterResult kalman_bucy(const ModelSpec& spec, const TimeGrid& grid,
                         const ObservationPath& obs, double epsilon) {
    check_obs(grid, obs, spec.dims.d2);
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const double h = grid.h();
    const CoeffEvaluator coeffs(spec);

    FilterResult result;
    result.grid = grid;
    result.epsilon = epsilon;
    result.covariances = solve_gamma_forward(spec, grid, epsilon);
    result.means = VecSeq(n + 1, d1);

    const VecSeq m = prior_mean_path(spec, grid);
    // Deviation from the prior mean; the innovation below still uses the
    // full mean, so this matches the left-point update
    //   mu_{i+1} = mu_i + a mu_i h + gamma_i c^T (ss^T)^-1 (dY_i - c mu_i h)
    // while c = 0 collapses to the prior mean path exactly.
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d1);
    result.means[0] = m[0];
    for (int i = 0; i < n; ++i) {
        const CoeffSlice& s = coeffs.obs_at(grid.node(i));
        const Eigen::VectorXd mu = m[i] + e;
        const Eigen::VectorXd innov =
            obs.increments.row(i).transpose() - s.c * mu * h;
        e += h * (s.a * e) + result.covariances[i] * (s.ct_sstinv * innov);
        result.means[i + 1] = m[i + 1] + e;
    }
    return result;
}

Eigen::MatrixXd innovations(const FilterResult& result, const ModelSpec& spec,
                            const ObservationPath& obs) {
    check_obs(result.grid, obs, spec.dims.d2);
    const int n = result.grid.n;
    const double h = result.grid.h();
    const CoeffEvaluator coeffs(spec);
    Eigen::MatrixXd out(n, spec.dims.d2);
    for (int i = 0; i < n; ++i) {
        const CoeffSlice& s = coeffs.at(result.grid.node(i));
        out.row(i) = obs.increments.row(i) -
                     (s.c * result.means[i] * h).transpose();
    }
    return out;
}

}  // namespace smoothkit
