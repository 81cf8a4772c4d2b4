#pragma once

#include <Eigen/Dense>

#include "smoothkit/linalg.hpp"
#include "smoothkit/model.hpp"

namespace smoothkit {

struct FilterResult {
    TimeGrid grid;
    VecSeq means;      // n+1 conditional means mu_{s_i; s_i}
    MatSeq covariances;  // n+1 filtering covariances gamma(s_i)
    double epsilon = 0.0;
};

// Kalman-Bucy filter. Covariance from the forward Riccati solve; the mean
// advances by the explicit left-point scheme
//   mu_{i+1} = mu_i + a mu_i h + gamma_i c^T (ss^T)^-1 (dY_i - c mu_i h),
// carried as a deviation from the fourth-order prior mean so that c = 0
// reproduces prior_mean_path exactly.
FilterResult kalman_bucy(const ModelSpec& spec, const TimeGrid& grid,
                         const ObservationPath& obs, double epsilon = 0.0);

// Residual increments dY_i - c(s_i) mu_i h; approximately independent
// N(0, ss^T h) under the true model.
Eigen::MatrixXd innovations(const FilterResult& result, const ModelSpec& spec,
                            const ObservationPath& obs);

}  // namespace smoothkit
