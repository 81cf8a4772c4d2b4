#include "smoothkit/smoother.hpp"

#include <memory>

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

struct Prep {
    std::shared_ptr<const RiccatiField> field;
    std::shared_ptr<const Propagator> alpha;
    VecSeq m;  // prior means, n+1
    VecSeq v;  // prior-mean innovations c^T (ss^T)^-1 (dY_i - c m_i h), n
};

Prep make_prep(const ModelSpec& spec, const TimeGrid& grid,
               const ObservationPath& obs) {
    check_obs(grid, obs, spec.dims.d2);
    Prep prep;
    prep.field = std::make_shared<const RiccatiField>(
        build_riccati_field(spec, grid));
    prep.alpha = std::make_shared<const Propagator>(build_propagator(
        PropagatorKind::alpha_of_t, spec, grid, *prep.field));
    prep.m = prior_mean_path(spec, grid);
    const double h = grid.h();
    const CoeffEvaluator coeffs(spec);
    prep.v = VecSeq(grid.n, spec.dims.d1);
    for (int i = 0; i < grid.n; ++i) {
        const CoeffSlice& s = coeffs.obs_at(grid.node(i));
        prep.v[i] = s.ct_sstinv * (obs.increments.row(i).transpose() -
                                   s.c * prep.m[i] * h);
    }
    return prep;
}

void guard_finite(const Eigen::VectorXd& x, int node, const char* what) {
    if (!(x.cwiseAbs().maxCoeff() < 1e12))
        throw NumericalError(std::string(what) + " blow-up at node " +
                             std::to_string(node));
}

}  // namespace

SmoothingResult bf_smooth(const ModelSpec& spec, const TimeGrid& grid,
                          const ObservationPath& obs) {
    Prep prep = make_prep(spec, grid, obs);
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const RiccatiField& field = *prep.field;
    const MatSeq& cells = prep.alpha->cells;

    SmoothingResult result;
    result.grid = grid;
    result.method = SmootherMethod::bf;
    result.field = prep.field;
    result.alpha = prep.alpha;
    result.marginal_cov = field.w;
    result.rho = VecSeq(n + 1, d1);
    result.means = VecSeq(n + 1, d1);

    // Backward adjoint: rho_i = A_i^T rho_{i+1} + v_i with rho_n = 0.
    result.rho[n].setZero();
    for (int i = n - 1; i >= 0; --i) {
        result.rho[i] =
            cells[i].transpose() * result.rho[i + 1] + prep.v[i];
        guard_finite(result.rho[i], i, "adjoint");
    }

    // Forward mean pass. The increment (w_{i+1} - A_i w_i A_i^T), applied to
    // rho_{i+1}, is the one-cell quadrature of the b b^T rho forcing that
    // makes this recursion the exact recursive evaluation of the direct
    // cross-covariance sum.
    Eigen::VectorXd e = field.w[0] * result.rho[0];
    result.means[0] = prep.m[0] + e;
    for (int i = 0; i < n; ++i) {
        e = cells[i] * e +
            (field.w[i + 1] -
             cells[i] * field.w[i] * cells[i].transpose()) *
                result.rho[i + 1];
        guard_finite(e, i + 1, "smoothed mean");
        result.means[i + 1] = prep.m[i + 1] + e;
    }
    return result;
}

SmoothingResult direct_integral_smooth(const ModelSpec& spec,
                                       const TimeGrid& grid,
                                       const ObservationPath& obs) {
    Prep prep = make_prep(spec, grid, obs);
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const RiccatiField& field = *prep.field;
    const MatSeq& cells = prep.alpha->cells;

    SmoothingResult result;
    result.grid = grid;
    result.method = SmootherMethod::direct_integral;
    result.field = prep.field;
    result.alpha = prep.alpha;
    result.marginal_cov = field.w;
    result.means = VecSeq(n + 1, d1);

    for (int i = 0; i <= n; ++i) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(d1);
        // j <= i: gamma(s_i, s_j; T) = A_{i-1}...A_j w_j
        Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d1, d1);
        if (i <= n - 1) acc += field.w[i] * prep.v[i];
        for (int j = i - 1; j >= 0; --j) {
            p = p * cells[j];
            acc += p * (field.w[j] * prep.v[j]);
        }
        // j > i: gamma(s_i, s_j; T) = w_i A_i^T ... A_{j-1}^T
        Eigen::MatrixXd r = field.w[i];
        for (int j = i + 1; j <= n - 1; ++j) {
            r = r * cells[j - 1].transpose();
            acc += r * prep.v[j];
        }
        result.means[i] = prep.m[i] + acc;
    }
    return result;
}

SmoothingResult rts_smooth(const ModelSpec& spec, const TimeGrid& grid,
                           const ObservationPath& obs,
                           const FilterResult& filter_result) {
    if (!grid.same_as(filter_result.grid))
        throw ConfigError("filter result grid mismatch");
    Prep prep = make_prep(spec, grid, obs);
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const double h = grid.h();
    const RiccatiField& field = *prep.field;
    const MatSeq& cells = prep.alpha->cells;

    for (int i = 0; i <= n; ++i)
        if (min_eigenvalue(field.gamma[i]) <=
            10.0 * default_jitter(field.gamma[i]))
            throw NumericalError(
                "filtering covariance is singular at node " +
                std::to_string(i) + "; use the bf smoother");

    const Propagator beta =
        build_propagator(PropagatorKind::beta, spec, grid, field);

    SmoothingResult result;
    result.grid = grid;
    result.method = SmootherMethod::rts;
    result.means = VecSeq(n + 1, d1);
    result.marginal_cov = MatSeq(n + 1, d1, d1);

    // Filtered contribution in smoothing-weighted form: the running sum
    // C_i = sum_{j<i} gamma(s_i, s_j; T) v_j, i.e. w_i gamma_i^{-1} times
    // the filter deviation updated through the current cell.
    VecSeq csum(n + 1, d1);
    csum[0].setZero();
    for (int i = 0; i < n; ++i)
        csum[i + 1] = cells[i] * (csum[i] + field.w[i] * prep.v[i]);

    // Backward sweep of the mean equation
    //   d mu/ds = a mu + b b^T gamma^-1 (mu_{s;t} - mu_{s;s});
    // the gain is the inverse beta-propagator cell, and the recursion is an
    // exact rearrangement of the smoothing sum whenever the cell flows
    // satisfy beta_cell w_i alpha_cell^T = w_{i+1}.
    Eigen::VectorXd e = csum[n];
    result.means[n] = prep.m[n] + e;
    for (int i = n - 1; i >= 0; --i) {
        const Eigen::VectorXd filtered = csum[i] + field.w[i] * prep.v[i];
        e = filtered +
            beta.cells[i].partialPivLu().solve(e - csum[i + 1]);
        guard_finite(e, i, "rts mean");
        result.means[i] = prep.m[i] + e;
    }

    // Marginal covariances: the RTS covariance equation integrated backward
    // from gamma(T) (realized as w(T;T), which equals it). The coefficient
    // slice at the upper edge of each cell is the midpoint one: piecewise
    // constant coefficients keep their in-effect value up to the breakpoint.
    const CoeffEvaluator coeffs(spec);
    Eigen::MatrixXd wh = field.w[n];
    result.marginal_cov[n] = wh;
    for (int i = n - 1; i >= 0; --i) {
        const double t = grid.node(i);
        auto rhs = [&](const CoeffSlice& s, const Eigen::MatrixXd& gamma,
                       const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
            const Eigen::MatrixXd drift = s.a + s.bbt * jittered_inverse(gamma);
            return -s.bbt + m * drift.transpose() + drift * m;
        };
        const CoeffSlice& sm = coeffs.at(t + 0.5 * h);
        const CoeffSlice& s0 = coeffs.at(t);
        const Eigen::MatrixXd k1 = rhs(sm, field.gamma[i + 1], wh);
        const Eigen::MatrixXd k2 =
            rhs(sm, field.gamma_mid[i], wh - 0.5 * h * k1);
        const Eigen::MatrixXd k3 =
            rhs(sm, field.gamma_mid[i], wh - 0.5 * h * k2);
        const Eigen::MatrixXd k4 = rhs(s0, field.gamma[i], wh - h * k3);
        wh = symmetrize(wh - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        if (min_eigenvalue(wh) < -1e-8) wh = clip_eigenvalues_below(wh, 0.0);
        result.marginal_cov[i] = wh;
    }
    return result;
}

FixedPointPath fixed_point_smooth(const ModelSpec& spec, const TimeGrid& grid,
                                  const ObservationPath& obs, int s_index) {
    check_obs(grid, obs, spec.dims.d2);
    if (s_index < 0 || s_index > grid.n)
        throw ConfigError("fixed-point node outside the grid");
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const double h = grid.h();
    const CoeffEvaluator coeffs(spec);

    const FilterResult filter = kalman_bucy(spec, grid, obs);
    const MatSeq gamma_half = detail::solve_gamma_half(spec, grid, 0.0);

    FixedPointPath path;
    path.grid = grid;
    path.s_index = s_index;
    path.means = VecSeq(n - s_index + 1, d1);
    path.means[0] = filter.means[s_index];

    // Gain gamma(t, s; t), advanced by the filter-drift flow; the mean
    // update applies the transposed gain to the filter innovations.
    Eigen::MatrixXd gain = gamma_half[2 * s_index];
    Eigen::VectorXd mu = filter.means[s_index];
    for (int j = s_index; j < n; ++j) {
        const double t = grid.node(j);
        const CoeffSlice& s0 = coeffs.obs_at(t);
        const Eigen::VectorXd innov =
            obs.increments.row(j).transpose() - s0.c * filter.means[j] * h;
        mu += gain.transpose() * (s0.ct_sstinv * innov);
        guard_finite(mu, j + 1, "fixed-point mean");
        path.means[j - s_index + 1] = mu;

        const CoeffSlice& sm = coeffs.obs_at(t + 0.5 * h);
        const Eigen::MatrixXd f0 = s0.a - gamma_half[2 * j] * s0.obs_info;
        const Eigen::MatrixXd fm =
            sm.a - gamma_half[2 * j + 1] * sm.obs_info;
        const Eigen::MatrixXd f1 =
            sm.a - gamma_half[2 * j + 2] * sm.obs_info;
        gain = detail::rk4_flow_cell(f0, fm, f1, h) * gain;
    }
    return path;
}

Eigen::MatrixXd cross_cov_query(const SmoothingResult& result, int i, int j) {
    if (!result.field || !result.alpha)
        throw ConfigError(
            "cross-covariance queries need a bf or direct-integral result");
    return cross_covariance(*result.field, *result.alpha, i, j);
}

}  // namespace smoothkit
