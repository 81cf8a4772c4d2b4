#pragma once

#include <Eigen/Dense>

#include "smoothkit/linalg.hpp"
#include "smoothkit/model.hpp"

namespace smoothkit {

// Independent ground truth: the Euler-discretized model is an exact
// discrete-time linear-Gaussian system, so its Kalman filter / RTS smoother
// and brute-force joint-Gaussian conditioning give two reference answers
// that must agree with each other to solver precision, and with the
// continuous solvers to O(h).

enum class TransitionKind {
    euler,  // A_i = I + a(s_i) h
    expm,   // A_i = exp(a(s_i) h); a tighter oracle for constant a
};

struct DiscreteLGSSM {
    TimeGrid grid;
    MatSeq A;  // n cell transitions
    MatSeq Q;  // n process noise covariances b b^T h
    MatSeq H;  // n observation maps c h
    MatSeq R;  // n observation noise covariances ss^T h
    Eigen::VectorXd mean0;
    Eigen::MatrixXd cov0;
};

DiscreteLGSSM discretize(const ModelSpec& spec, const TimeGrid& grid,
                         TransitionKind kind = TransitionKind::euler);

struct DiscreteKalmanResult {
    // pred_*: before the node's observation (conditioning matches the
    // continuous filter, whose sigma-field excludes the current increment).
    VecSeq pred_means;
    MatSeq pred_covs;
    VecSeq filt_means;
    MatSeq filt_covs;
    VecSeq smooth_means;
    MatSeq smooth_covs;
};

// Textbook forward Kalman pass (Joseph-form updates) and RTS backward pass
// on the discrete model; observation i measures the state at node i.
DiscreteKalmanResult discrete_kalman_rts(const DiscreteLGSSM& model,
                                         const ObservationPath& obs);

// Joint law of (X_0..X_n, dY_0..dY_{n-1}) under the discrete model.
struct JointGaussian {
    int d1 = 1;
    int d2 = 1;
    int n = 0;
    Eigen::VectorXd mean;  // (n+1) d1 + n d2
    Eigen::MatrixXd cov;
};

// Desk-scale only: requires n * d2 <= 2000.
JointGaussian build_joint(const DiscreteLGSSM& model);

struct JointConditioningResult {
    VecSeq means;         // n+1 conditional means
    Eigen::MatrixXd cov;  // (n+1) d1 square conditional covariance
};

// Conditions the state block on the observed increments by Schur complement
// with a pivoted LDL^T factorization of the observation block.
JointConditioningResult joint_conditioning(const JointGaussian& joint,
                                           const ObservationPath& obs);

struct ScalarPosterior {
    double mean = 0.0;
    double var = 0.0;
};

// Conjugate posterior for the static scalar model Y = c X + sigma Z,
// X ~ N(mu_x, var_x), Z ~ N(0, 1): the closed form, and the same quantities
// assembled from the Gaussian-weighted moment quotients
//   E[X^k exp(-c^2 X^2 / (2 sigma^2))] / E[exp(-c^2 X^2 / (2 sigma^2))].
ScalarPosterior static_scalar_posterior(double mu_x, double var_x, double c,
                                        double sigma, double y);
ScalarPosterior static_scalar_posterior_quotient(double mu_x, double var_x,
                                                 double c, double sigma,
                                                 double y);

}  // namespace smoothkit
