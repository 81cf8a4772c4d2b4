#include "smoothkit/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smoothkit {

namespace {

constexpr double kBlowUp = 1e12;
constexpr double kPsdTol = 1e-8;

void guard_blow_up(const Eigen::MatrixXd& m, int half_index,
                   const char* what) {
    if (!(m.cwiseAbs().maxCoeff() < kBlowUp))
        throw NumericalError(std::string(what) + " blow-up at node " +
                             std::to_string((half_index + 1) / 2));
}

// Gershgorin lower bound on the smallest eigenvalue; exact for 1x1 and a
// cheap sufficient screen before a full eigensolve on larger matrices.
double gershgorin_lower(const Eigen::MatrixXd& m) {
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.rows(); ++i) {
        double radius = 0.0;
        for (int j = 0; j < m.cols(); ++j)
            if (j != i) radius += std::abs(m(i, j));
        lo = std::min(lo, m(i, i) - radius);
    }
    return lo;
}

bool min_eig_below(const Eigen::MatrixXd& m, double bound) {
    if (gershgorin_lower(m) >= bound) return false;
    return min_eigenvalue(m) < bound;
}

bool max_eig_above(const Eigen::MatrixXd& m, double bound) {
    if (-gershgorin_lower(-m) <= bound) return false;
    return max_eigenvalue(m) > bound;
}

// One classical fourth-order step over [t, t + q] (or backward for q < 0)
// of M' = f(slice, M). Coefficients are piecewise constant, so the stage at
// the far edge of the step reuses the midpoint slice: the value in effect
// on the cell, not the value a left-closed lookup would pick up at a
// breakpoint sitting exactly on the edge.
template <typename Rhs>
Eigen::MatrixXd rk4_step(const CoeffEvaluator& coeffs, const Rhs& f, double t,
                         double q, const Eigen::MatrixXd& m, bool obs) {
    const double tm = t + 0.5 * q;
    const CoeffSlice& near_edge =
        obs ? coeffs.obs_at(q > 0 ? t : t + q) : coeffs.at(q > 0 ? t : t + q);
    const CoeffSlice& mid = obs ? coeffs.obs_at(tm) : coeffs.at(tm);
    const CoeffSlice& start = q > 0 ? near_edge : mid;
    const CoeffSlice& end = q > 0 ? mid : near_edge;
    const Eigen::MatrixXd k1 = f(start, m);
    const Eigen::MatrixXd k2 = f(mid, m + 0.5 * q * k1);
    const Eigen::MatrixXd k3 = f(mid, m + 0.5 * q * k2);
    const Eigen::MatrixXd k4 = f(end, m + q * k3);
    return m + (q / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

namespace detail {

Eigen::MatrixXd rk4_flow_cell(const Eigen::MatrixXd& f_left,
                              const Eigen::MatrixXd& f_mid,
                              const Eigen::MatrixXd& f_right, double h) {
    const int d = static_cast<int>(f_left.rows());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd k1 = f_left;
    const Eigen::MatrixXd k2 = f_mid * (id + 0.5 * h * k1);
    const Eigen::MatrixXd k3 = f_mid * (id + 0.5 * h * k2);
    const Eigen::MatrixXd k4 = f_right * (id + h * k3);
    return id + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

namespace detail {

MatSeq solve_gamma_half(const ModelSpec& spec, const TimeGrid& grid,
                        double epsilon) {
    const int d1 = spec.dims.d1;
    const int n2 = 2 * grid.n;
    const double q = 0.5 * grid.h();
    const CoeffEvaluator coeffs(spec);

    auto rhs = [](const CoeffSlice& s,
                  const Eigen::MatrixXd& g) -> Eigen::MatrixXd {
        return s.bbt + s.a * g + g * s.a.transpose() - g * s.obs_info * g;
    };

    MatSeq out(n2 + 1, d1, d1);
    Eigen::MatrixXd g = spec.initial.effective_cov();
    if (epsilon > 0.0) g.diagonal().array() += epsilon;
    out[0] = g;
    for (int k = 0; k < n2; ++k) {
        g = symmetrize(rk4_step(coeffs, rhs, k * q, q, g, /*obs=*/true));
        guard_blow_up(g, k, "Riccati");
        if (min_eig_below(g, -kPsdTol)) g = clip_eigenvalues_below(g, 0.0);
        out[k + 1] = g;
    }
    return out;
}

MatSeq solve_phi_half(const ModelSpec& spec, const TimeGrid& grid,
                      int t_index) {
    if (t_index < 0 || t_index > grid.n)
        throw ConfigError("phi terminal index outside the grid");
    const int d1 = spec.dims.d1;
    const int n2 = 2 * t_index;
    const double q = 0.5 * grid.h();
    const CoeffEvaluator coeffs(spec);

    auto rhs = [](const CoeffSlice& s,
                  const Eigen::MatrixXd& p) -> Eigen::MatrixXd {
        return -p * s.bbt * p - s.a.transpose() * p - p * s.a + s.obs_info;
    };

    MatSeq out(n2 + 1, d1, d1);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d1, d1);
    out[n2] = p;
    for (int k = n2; k > 0; --k) {
        p = symmetrize(rk4_step(coeffs, rhs, k * q, -q, p, /*obs=*/true));
        guard_blow_up(p, k - 1, "backward Riccati");
        if (max_eig_above(p, kPsdTol)) p = clip_eigenvalues_above(p, 0.0);
        out[k - 1] = p;
    }
    return out;
}

}  // namespace detail

MatSeq solve_gamma_forward(const ModelSpec& spec, const TimeGrid& grid,
                           double epsilon) {
    MatSeq half = detail::solve_gamma_half(spec, grid, epsilon);
    MatSeq out(grid.n + 1, spec.dims.d1, spec.dims.d1);
    for (int i = 0; i <= grid.n; ++i) out[i] = half[2 * i];
    return out;
}

MatSeq solve_phi_backward(const ModelSpec& spec, const TimeGrid& grid,
                          int t_index) {
    MatSeq half = detail::solve_phi_half(spec, grid, t_index);
    MatSeq out(t_index + 1, spec.dims.d1, spec.dims.d1);
    for (int i = 0; i <= t_index; ++i) out[i] = half[2 * i];
    return out;
}

Eigen::MatrixXd xi0_covariance(const Eigen::MatrixXd& v0,
                               const Eigen::MatrixXd& phi0) {
    const int d = static_cast<int>(v0.rows());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd s = sqrt_psd(v0);
    const Eigen::MatrixXd inner = symmetrize(id - s * phi0 * s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
    if (es.eigenvalues().minCoeff() <= 1e-12)
        throw NumericalError(
            "initial smoothing covariance: inner matrix not positive "
            "definite (phi is not negative semidefinite)");
    const Eigen::MatrixXd inner_inv =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
        es.eigenvectors().transpose();
    return symmetrize(s * inner_inv * s);
}

Eigen::MatrixXd xi0_covariance(const InitialLaw& initial,
                               const Eigen::MatrixXd& phi0) {
    return xi0_covariance(initial.effective_cov(), phi0);
}

namespace {

// Marginal smoothing covariance: one fourth-order step per cell of the
// Lyapunov equation driven by phi at the cell's left/mid/right values.
MatSeq solve_w(const ModelSpec& spec, const TimeGrid& grid,
               const MatSeq& phi, const MatSeq& phi_mid,
               const Eigen::MatrixXd& w0) {
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const double h = grid.h();
    const CoeffEvaluator coeffs(spec);

    MatSeq w(n + 1, d1, d1);
    Eigen::MatrixXd cur = symmetrize(w0);
    w[0] = cur;
    for (int i = 0; i < n; ++i) {
        const double t = grid.node(i);
        auto rhs = [&](const CoeffSlice& s, const Eigen::MatrixXd& p,
                       const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
            const Eigen::MatrixXd drift = s.a + s.bbt * p;
            return s.bbt + m * drift.transpose() + drift * m;
        };
        const CoeffSlice& s0 = coeffs.at(t);
        const CoeffSlice& sm = coeffs.at(t + 0.5 * h);
        const Eigen::MatrixXd k1 = rhs(s0, phi[i], cur);
        const Eigen::MatrixXd k2 = rhs(sm, phi_mid[i], cur + 0.5 * h * k1);
        const Eigen::MatrixXd k3 = rhs(sm, phi_mid[i], cur + 0.5 * h * k2);
        const Eigen::MatrixXd k4 = rhs(sm, phi[i + 1], cur + h * k3);
        cur = symmetrize(cur + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        guard_blow_up(cur, 2 * i, "smoothing covariance");
        if (min_eig_below(cur, -kPsdTol))
            cur = clip_eigenvalues_below(cur, 0.0);
        w[i + 1] = cur;
    }
    return w;
}

}  // namespace

RiccatiField build_riccati_field(const ModelSpec& spec, const TimeGrid& grid,
                                 double epsilon) {
    const int n = grid.n;
    const int d1 = spec.dims.d1;

    RiccatiField field;
    field.grid = grid;
    field.epsilon = epsilon;

    MatSeq gamma_half = detail::solve_gamma_half(spec, grid, epsilon);
    MatSeq phi_half = detail::solve_phi_half(spec, grid, n);
    field.gamma = MatSeq(n + 1, d1, d1);
    field.gamma_mid = MatSeq(n, d1, d1);
    field.phi = MatSeq(n + 1, d1, d1);
    field.phi_mid = MatSeq(n, d1, d1);
    for (int i = 0; i <= n; ++i) {
        field.gamma[i] = gamma_half[2 * i];
        field.phi[i] = phi_half[2 * i];
    }
    for (int i = 0; i < n; ++i) {
        field.gamma_mid[i] = gamma_half[2 * i + 1];
        field.phi_mid[i] = phi_half[2 * i + 1];
    }

    Eigen::MatrixXd v0 = spec.initial.effective_cov();
    if (epsilon > 0.0) v0.diagonal().array() += epsilon;
    field.xi0_cov = xi0_covariance(v0, field.phi[0]);
    field.w = solve_w(spec, grid, field.phi, field.phi_mid, field.xi0_cov);
    return field;
}

MatSeq smoothing_w(const ModelSpec& spec, const TimeGrid& grid,
                   const RiccatiField& field) {
    return solve_w(spec, grid, field.phi, field.phi_mid, field.xi0_cov);
}

Propagator build_propagator(PropagatorKind kind, const ModelSpec& spec,
                            const TimeGrid& grid, const RiccatiField& field) {
    if (!grid.same_as(field.grid))
        throw ConfigError("propagator grid does not match the field grid");
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const double h = grid.h();
    const CoeffEvaluator coeffs(spec);

    auto drift = [&](const CoeffSlice& s,
                     const Eigen::MatrixXd& gamma_or_phi) -> Eigen::MatrixXd {
        if (kind == PropagatorKind::alpha_of_t)
            return s.a + s.bbt * gamma_or_phi;
        // beta family: feedback through the inverse filtering covariance
        if (gershgorin_lower(gamma_or_phi) + default_jitter(gamma_or_phi) <=
                0.0 &&
            min_eigenvalue(gamma_or_phi) + default_jitter(gamma_or_phi) <= 0.0)
            throw NumericalError(
                "filtering covariance singular beyond jitter in the beta "
                "propagator");
        return s.a + s.bbt * jittered_inverse(gamma_or_phi);
    };

    Propagator prop;
    prop.grid = grid;
    prop.kind = kind;
    prop.cells = MatSeq(n, d1, d1);
    const bool use_phi = (kind == PropagatorKind::alpha_of_t);
    for (int i = 0; i < n; ++i) {
        const double t = grid.node(i);
        const CoeffSlice& sm = coeffs.at(t + 0.5 * h);
        const Eigen::MatrixXd f0 =
            drift(coeffs.at(t), use_phi ? field.phi[i] : field.gamma[i]);
        const Eigen::MatrixXd fm =
            drift(sm, use_phi ? field.phi_mid[i] : field.gamma_mid[i]);
        const Eigen::MatrixXd f1 =
            drift(sm, use_phi ? field.phi[i + 1] : field.gamma[i + 1]);
        prop.cells[i] = detail::rk4_flow_cell(f0, fm, f1, h);
        if (!prop.cells[i].allFinite())
            throw NumericalError("propagator cell is not finite at node " +
                                 std::to_string(i));
    }
    return prop;
}

Eigen::MatrixXd Propagator::compose(int u_index, int s_index) const {
    if (u_index > s_index)
        throw ConfigError("propagator composition needs u <= s");
    const int d = cells.size() > 0 ? cells.rows() : 0;
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(d, d);
    for (int k = u_index; k < s_index; ++k) p = cells[k] * p;
    return p;
}

Eigen::MatrixXd cross_covariance(const RiccatiField& field,
                                 const Propagator& alpha, int i, int j) {
    if (i < 0 || j < 0 || i > field.grid.n || j > field.grid.n)
        throw ConfigError("cross-covariance node outside the grid");
    if (i < j) return cross_covariance(field, alpha, j, i).transpose();
    return alpha.compose(j, i) * field.w[j];
}

}  // namespace smoothkit
