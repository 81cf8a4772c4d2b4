#pragma once

#include <Eigen/Dense>

#include <memory>

#include "smoothkit/filter.hpp"
#include "smoothkit/model.hpp"
#include "smoothkit/riccati.hpp"

namespace smoothkit {

// Smoothers for the full conditional path law given observations on [0, T].
//
// Every innovation integral is a left-point Riemann sum against the
// increments, with kernels built from the shared Riccati field. The
// Bryson-Frazier recursions below are exact rearrangements of the direct
// cross-covariance sum
//
//   mu_i = m_i + sum_j gamma(s_i, s_j; T) c^T (ss^T)^-1 (dY_j - c m_j h),
//
// so bf and direct agree to roundoff, and the RTS backward sweep is
// consistent with both to the order of the cell flows.

enum class SmootherMethod { bf, rts, direct_integral, fixed_point };

struct SmoothingResult {
    TimeGrid grid;
    SmootherMethod method = SmootherMethod::bf;
    VecSeq means;         // n+1 smoothed means mu_{s_i; T}
    MatSeq marginal_cov;  // n+1 marginal covariances gamma(s_i, s_i; T)
    VecSeq rho;           // backward adjoint (bf only, else empty)
    // Cross-covariance machinery; carried by bf and direct-integral results.
    std::shared_ptr<const RiccatiField> field;
    std::shared_ptr<const Propagator> alpha;
};

// Bryson-Frazier smoother: backward adjoint pass
//   rho_i = A_i^T rho_{i+1} + c^T (ss^T)^-1 (dY_i - c m_i h),  rho_n = 0,
// then a forward mean pass from mu_0 = m_0 + V[xi_0] rho_0. Inverse-free.
SmoothingResult bf_smooth(const ModelSpec& spec, const TimeGrid& grid,
                          const ObservationPath& obs);

// Rauch-Tung-Striebel smoother: backward sweep from the terminal state using
// the beta-propagator gain (requires gamma(s) nonsingular; faults advising
// bf otherwise). Marginal covariances integrate the RTS covariance equation
//   w' = -b b^T + w {a^T + gamma^-1 b b^T} + {a + b b^T gamma^-1} w
// backward from gamma(T).
SmoothingResult rts_smooth(const ModelSpec& spec, const TimeGrid& grid,
                           const ObservationPath& obs,
                           const FilterResult& filter_result);

// O(n^2) reference evaluation of the cross-covariance sum; used to pin down
// the recursive smoothers.
SmoothingResult direct_integral_smooth(const ModelSpec& spec,
                                       const TimeGrid& grid,
                                       const ObservationPath& obs);

// Online fixed-point smoother for the state at node s_index: runs the
// Kalman-Bucy filter alongside and propagates the gain gamma(t, s; t) by
//   dG = {a - gamma c^T (ss^T)^-1 c} G dt,   G(s) = gamma(s),
// updating mu_{s;t} with the filter innovations. Entry j holds
// mu_{s; s_{s_index + j}}.
struct FixedPointPath {
    TimeGrid grid;
    int s_index = 0;
    VecSeq means;  // n - s_index + 1 values, one per terminal node
};

FixedPointPath fixed_point_smooth(const ModelSpec& spec, const TimeGrid& grid,
                                  const ObservationPath& obs, int s_index);

// gamma(s_i, s_j; T) for a result that carries the Riccati field; throws
// ConfigError for methods without one.
Eigen::MatrixXd cross_cov_query(const SmoothingResult& result, int i, int j);

}  // namespace smoothkit
