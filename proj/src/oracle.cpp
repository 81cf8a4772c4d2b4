#include "smoothkit/oracle.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace smoothkit {

DiscreteLGSSM discretize(const ModelSpec& spec, const TimeGrid& grid,
                         TransitionKind kind) {
    const int n = grid.n;
    const int d1 = spec.dims.d1;
    const int d2 = spec.dims.d2;
    const double h = grid.h();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d1, d1);

    DiscreteLGSSM model;
    model.grid = grid;
    model.A = MatSeq(n, d1, d1);
    model.Q = MatSeq(n, d1, d1);
    model.H = MatSeq(n, d2, d1);
    model.R = MatSeq(n, d2, d2);
    model.mean0 = spec.initial.mean;
    model.cov0 = spec.initial.effective_cov();
    for (int i = 0; i < n; ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd& a = spec.a.at(t);
        const Eigen::MatrixXd& b = spec.b.at(t);
        const Eigen::MatrixXd& c = spec.c.at(t);
        const Eigen::MatrixXd& s = spec.sigma.at(t);
        model.A[i] = kind == TransitionKind::euler
                         ? Eigen::MatrixXd(id + a * h)
                         : Eigen::MatrixXd((a * h).exp());
        model.Q[i] = b * b.transpose() * h;
        model.H[i] = c * h;
        model.R[i] = symmetrize(s * s.transpose()) * h;
    }
    return model;
}

DiscreteKalmanResult discrete_kalman_rts(const DiscreteLGSSM& model,
                                         const ObservationPath& obs) {
    const int n = model.grid.n;
    const int d1 = static_cast<int>(model.mean0.size());
    if (obs.increments.rows() != n ||
        obs.increments.cols() != model.H.rows())
        throw ConfigError("observation path does not match the discrete model");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d1, d1);

    DiscreteKalmanResult r;
    r.pred_means = VecSeq(n + 1, d1);
    r.pred_covs = MatSeq(n + 1, d1, d1);
    r.filt_means = VecSeq(n + 1, d1);
    r.filt_covs = MatSeq(n + 1, d1, d1);
    r.smooth_means = VecSeq(n + 1, d1);
    r.smooth_covs = MatSeq(n + 1, d1, d1);

    Eigen::VectorXd m = model.mean0;
    Eigen::MatrixXd p = model.cov0;
    for (int i = 0; i < n; ++i) {
        r.pred_means[i] = m;
        r.pred_covs[i] = p;
        // Update with the observation at node i (Joseph form).
        const Eigen::MatrixXd s =
            symmetrize(model.H[i] * p * model.H[i].transpose() + model.R[i]);
        const Eigen::MatrixXd gain =
            p * model.H[i].transpose() * s.ldlt().solve(
                Eigen::MatrixXd::Identity(s.rows(), s.cols()));
        const Eigen::VectorXd innov =
            obs.increments.row(i).transpose() - model.H[i] * m;
        m += gain * innov;
        const Eigen::MatrixXd ikh = id - gain * model.H[i];
        p = symmetrize(ikh * p * ikh.transpose() +
                       gain * model.R[i] * gain.transpose());
        r.filt_means[i] = m;
        r.filt_covs[i] = p;
        // Predict to node i+1.
        m = model.A[i] * m;
        p = symmetrize(model.A[i] * p * model.A[i].transpose() + model.Q[i]);
    }
    r.pred_means[n] = m;
    r.pred_covs[n] = p;
    r.filt_means[n] = m;  // no observation at the terminal node
    r.filt_covs[n] = p;

    r.smooth_means[n] = r.filt_means[n];
    r.smooth_covs[n] = r.filt_covs[n];
    for (int i = n - 1; i >= 0; --i) {
        const Eigen::MatrixXd gain =
            r.filt_covs[i] * model.A[i].transpose() *
            Eigen::MatrixXd(r.pred_covs[i + 1])
                .ldlt()
                .solve(id);
        r.smooth_means[i] =
            r.filt_means[i] +
            gain * (r.smooth_means[i + 1] - r.pred_means[i + 1]);
        r.smooth_covs[i] = symmetrize(
            r.filt_covs[i] +
            gain * (r.smooth_covs[i + 1] - r.pred_covs[i + 1]) *
                gain.transpose());
    }
    return r;
}

JointGaussian build_joint(const DiscreteLGSSM& model) {
    const int n = model.grid.n;
    const int d1 = static_cast<int>(model.mean0.size());
    const int d2 = model.H.rows();
    if (static_cast<long>(n) * d2 > 2000)
        throw ConfigError("joint conditioning is desk scale: n * d2 <= 2000");
    const int nx = (n + 1) * d1;
    const int ny = n * d2;

    JointGaussian joint;
    joint.d1 = d1;
    joint.d2 = d2;
    joint.n = n;
    joint.mean = Eigen::VectorXd::Zero(nx + ny);
    joint.cov = Eigen::MatrixXd::Zero(nx + ny, nx + ny);

    // State means and marginal covariances.
    VecSeq mx(n + 1, d1);
    MatSeq px(n + 1, d1, d1);
    mx[0] = model.mean0;
    px[0] = model.cov0;
    for (int i = 0; i < n; ++i) {
        mx[i + 1] = model.A[i] * mx[i];
        px[i + 1] = symmetrize(model.A[i] * px[i] * model.A[i].transpose() +
                               model.Q[i]);
    }
    // Cov(X_i, X_j) = P_i (A_{j-1}...A_i)^T for i <= j.
    MatSeq cxx((n + 1) * (n + 1), d1, d1);
    auto xx = [&](int i, int j) { return cxx[i * (n + 1) + j]; };
    for (int i = 0; i <= n; ++i) {
        Eigen::MatrixXd block = px[i];
        xx(i, i) = block;
        for (int j = i + 1; j <= n; ++j) {
            block = block * model.A[j - 1].transpose();
            xx(i, j) = block;
            xx(j, i) = block.transpose();
        }
    }

    for (int i = 0; i <= n; ++i) {
        joint.mean.segment(i * d1, d1) = mx[i];
        for (int j = 0; j <= n; ++j)
            joint.cov.block(i * d1, j * d1, d1, d1) = xx(i, j);
    }
    for (int l = 0; l < n; ++l) {
        joint.mean.segment(nx + l * d2, d2) = model.H[l] * mx[l];
        for (int i = 0; i <= n; ++i) {
            const Eigen::MatrixXd cxy = xx(i, l) * model.H[l].transpose();
            joint.cov.block(i * d1, nx + l * d2, d1, d2) = cxy;
            joint.cov.block(nx + l * d2, i * d1, d2, d1) = cxy.transpose();
        }
        for (int k = 0; k < n; ++k) {
            Eigen::MatrixXd cyy =
                model.H[l] * xx(l, k) * model.H[k].transpose();
            if (k == l) cyy += model.R[l];
            joint.cov.block(nx + l * d2, nx + k * d2, d2, d2) = cyy;
        }
    }
    joint.cov = symmetrize(joint.cov);
    return joint;
}

JointConditioningResult joint_conditioning(const JointGaussian& joint,
                                           const ObservationPath& obs) {
    const int d1 = joint.d1;
    const int d2 = joint.d2;
    const int n = joint.n;
    if (obs.increments.rows() != n || obs.increments.cols() != d2)
        throw ConfigError("observation path does not match the joint law");
    const int nx = (n + 1) * d1;
    const int ny = n * d2;

    Eigen::VectorXd z(ny);
    for (int l = 0; l < n; ++l)
        z.segment(l * d2, d2) = obs.increments.row(l).transpose();

    const auto sxx = joint.cov.topLeftCorner(nx, nx);
    const auto sxy = joint.cov.topRightCorner(nx, ny);
    const auto syy = joint.cov.bottomRightCorner(ny, ny);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(syy);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("observation block covariance is singular");

    const Eigen::VectorXd mean_x = joint.mean.head(nx);
    const Eigen::VectorXd mean_y = joint.mean.tail(ny);
    const Eigen::VectorXd cond =
        mean_x + sxy * ldlt.solve(z - mean_y);
    const Eigen::MatrixXd cov =
        symmetrize(sxx - sxy * ldlt.solve(sxy.transpose()));

    JointConditioningResult out;
    out.means = VecSeq(n + 1, d1);
    for (int i = 0; i <= n; ++i) out.means[i] = cond.segment(i * d1, d1);
    out.cov = cov;
    return out;
}

ScalarPosterior static_scalar_posterior(double mu_x, double var_x, double c,
                                        double sigma, double y) {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (var_x < 0.0) throw ConfigError("var_x must be nonnegative");
    if (c == 0.0) return {mu_x, var_x};
    const double prec = 1.0 / (sigma * sigma);
    const double post_var = var_x > 0.0
                                ? 1.0 / (1.0 / var_x + c * c * prec)
                                : 0.0;
    const double post_mean = mu_x + post_var * c * prec * (y - c * mu_x);
    return {post_mean, post_var};
}

ScalarPosterior static_scalar_posterior_quotient(double mu_x, double var_x,
                                                 double c, double sigma,
                                                 double y) {
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (var_x < 0.0) throw ConfigError("var_x must be nonnegative");
    if (c == 0.0) return {mu_x, var_x};
    // Gaussian-weighted moments E[X^k exp(-lambda X^2)], lambda = c^2/2sigma^2,
    // in closed form; the posterior variance is the quotient-form variance
    // and the mean follows from the derivative-at-zero representation.
    const double lambda = c * c / (2.0 * sigma * sigma);
    const double denom = 1.0 + 2.0 * lambda * var_x;
    const double m0 =
        std::exp(-lambda * mu_x * mu_x / denom) / std::sqrt(denom);
    const double m1 = m0 * (mu_x / denom);
    const double m2 = m0 * (var_x / denom + (mu_x / denom) * (mu_x / denom));
    const double var_q = m2 / m0 - (m1 / m0) * (m1 / m0);
    const double a_coef = (c / (sigma * sigma)) * var_q;
    const double mean_q = mu_x + a_coef * (y - c * mu_x);
    return {mean_q, var_q};
}

}  // namespace smoothkit
