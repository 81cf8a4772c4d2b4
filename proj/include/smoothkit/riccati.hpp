#pragma once

#include <Eigen/Dense>

#include "smoothkit/linalg.hpp"
#include "smoothkit/model.hpp"

namespace smoothkit {

// Riccati machinery for the smoothing distribution of the linear-Gaussian
// system
//
//     dX = a X dt + b dV,      dY = c X dt + sigma dW.
//
// gamma(t) solves the forward filtering Riccati equation
//     gamma' = -gamma c^T (ss^T)^-1 c gamma + a gamma + gamma a^T + b b^T,
// phi(s; T) the backward Riccati equation
//     phi' = -phi b b^T phi - a^T phi - phi a + c^T (ss^T)^-1 c,
// with phi(T; T) = 0 (negative semidefinite on [0, T]), and w(s; T) the
// marginal smoothing covariance, which obeys the Lyapunov equation
//     w' = b b^T + w {a^T + phi b b^T} + {a + b b^T phi} w
// from w(0) = V0^{1/2} (I - V0^{1/2} phi(0;T) V0^{1/2})^{-1} V0^{1/2}.
//
// All solves use classical fourth-order one-step integration with two half
// steps per grid cell; the midpoint values are kept because every cell-flow
// integrator downstream needs them.

struct RiccatiField {
    TimeGrid grid;
    MatSeq gamma;      // n+1 node values, symmetric PSD
    MatSeq gamma_mid;  // n cell midpoint values
    MatSeq phi;        // n+1 node values, symmetric NSD, zero at node n
    MatSeq phi_mid;    // n cell midpoints
    MatSeq w;          // n+1 marginal smoothing covariances V[xi_s]
    Eigen::MatrixXd xi0_cov;  // V[xi_0]
    double epsilon = 0.0;     // gamma(0) = V[X0] + epsilon I
};

enum class PropagatorKind {
    alpha_of_t,  // drift family a(s) + b(s) b(s)^T phi(s; T)
    beta,        // drift family a(s) + b(s) b(s)^T gamma(s)^-1 (jittered)
};

// Per-cell one-step transition matrices of a linear time-varying matrix ODE.
// compose(u, s) multiplies the cells over [u, s]; compose(u, u) is I.
struct Propagator {
    TimeGrid grid;
    PropagatorKind kind = PropagatorKind::alpha_of_t;
    MatSeq cells;  // n cells

    Eigen::MatrixXd compose(int u_index, int s_index) const;
};

// Forward Riccati solution at the grid nodes, gamma(0) = V[X0] + epsilon I.
// Iterates are symmetrized each step and rebuilt PSD if an eigenvalue falls
// below -1e-8; entries above 1e12 abort with "Riccati blow-up at node i".
MatSeq solve_gamma_forward(const ModelSpec& spec, const TimeGrid& grid,
                           double epsilon = 0.0);

// Backward Riccati solution phi(s_i; s_t) for i = 0..t_index, zero at the
// terminal node, eigenvalues clipped to stay <= 1e-8.
MatSeq solve_phi_backward(const ModelSpec& spec, const TimeGrid& grid,
                          int t_index);

// V[xi_0] = V0^{1/2} (I - V0^{1/2} phi0 V0^{1/2})^{-1} V0^{1/2}; valid for
// singular V0. Faults if the inner matrix is not positive definite (phi0
// was not negative semidefinite).
Eigen::MatrixXd xi0_covariance(const Eigen::MatrixXd& v0,
                               const Eigen::MatrixXd& phi0);
Eigen::MatrixXd xi0_covariance(const InitialLaw& initial,
                               const Eigen::MatrixXd& phi0);

RiccatiField build_riccati_field(const ModelSpec& spec, const TimeGrid& grid,
                                 double epsilon = 0.0);

Propagator build_propagator(PropagatorKind kind, const ModelSpec& spec,
                            const TimeGrid& grid, const RiccatiField& field);

// Marginal smoothing covariance sequence from the field's phi and xi0_cov;
// the terminal value reproduces gamma(T).
MatSeq smoothing_w(const ModelSpec& spec, const TimeGrid& grid,
                   const RiccatiField& field);

// Smoothing cross-covariance gamma(s_i, s_j; T): alpha(s_j, s_i; T) w(s_j; T)
// for i >= j, transposed for i < j.
Eigen::MatrixXd cross_covariance(const RiccatiField& field,
                                 const Propagator& alpha, int i, int j);

namespace detail {
// Half-grid solves (2n+1 values, one per half node); used by the field
// builder and by solvers that need midpoint coefficients.
MatSeq solve_gamma_half(const ModelSpec& spec, const TimeGrid& grid,
                        double epsilon);
MatSeq solve_phi_half(const ModelSpec& spec, const TimeGrid& grid,
                      int t_index);
// Fourth-order one-cell flow of M' = F(t) M from M = I, given the drift at
// the cell's left, middle, and right.
Eigen::MatrixXd rk4_flow_cell(const Eigen::MatrixXd& f_left,
                              const Eigen::MatrixXd& f_mid,
                              const Eigen::MatrixXd& f_right, double h);
}  // namespace detail

}  // namespace smoothkit
