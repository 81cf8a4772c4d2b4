#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "smoothkit/errors.hpp"
#include "smoothkit/linalg.hpp"

namespace smoothkit {

struct Dims {
    int d1 = 1;  // state dimension
    int d2 = 1;  // observation dimension
    int m1 = 1;  // state noise dimension
    int m2 = 1;  // observation noise dimension
};

// Uniform grid on [0, t_end] with n cells of width h = t_end / n.
struct TimeGrid {
    double t_end = 1.0;
    int n = 1;

    double h() const { return t_end / n; }
    double node(int i) const { return i * h(); }
    int n_nodes() const { return n + 1; }
    bool same_as(const TimeGrid& other) const;
};

// Time-dependent matrix coefficient: a single constant matrix or a
// piecewise-constant table over left-closed cells [times[k], times[k+1]).
// Lookups at or beyond the last breakpoint return the last cell's value.
class CoefficientProvider {
public:
    enum class Kind { constant, table };

    CoefficientProvider() = default;
    static CoefficientProvider constant(Eigen::MatrixXd value);
    static CoefficientProvider table(std::vector<double> times,
                                     std::vector<Eigen::MatrixXd> values);

    Kind kind() const { return kind_; }
    int rows() const { return values_.empty() ? 0 : static_cast<int>(values_[0].rows()); }
    int cols() const { return values_.empty() ? 0 : static_cast<int>(values_[0].cols()); }
    int cell_count() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<Eigen::MatrixXd>& values() const { return values_; }

    // Left-closed cell lookup; throws ConfigError for t before the table start.
    const Eigen::MatrixXd& at(double t) const;
    int cell_index(double t) const;

private:
    Kind kind_ = Kind::constant;
    std::vector<double> times_;
    std::vector<Eigen::MatrixXd> values_;
};

struct InitialLaw {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    // Symmetrized covariance with negative eigenvalues (roundoff, tolerated
    // down to -1e-10) clipped to zero.
    Eigen::MatrixXd effective_cov() const;
};

struct ModelSpec {
    Dims dims;
    CoefficientProvider a;      // d1 x d1 state drift
    CoefficientProvider b;      // d1 x m1 state diffusion
    CoefficientProvider c;      // d2 x d1 observation map
    CoefficientProvider sigma;  // d2 x m2 observation diffusion
    InitialLaw initial;
    double horizon = 1.0;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Checks shapes, finiteness, table coverage of [0, horizon], symmetry and
// near-PSDness of the initial covariance, and that sigma sigma^T stays away
// from singular (smallest eigenvalue > 1e-10) at every grid node.
ValidationReport validate_model(const ModelSpec& spec, const TimeGrid& grid);

Eigen::MatrixXd eval_coeff(const CoefficientProvider& provider, double t);

// Solves dm/dt = a(t) m with one classical fourth-order step per cell,
// m(0) = initial mean.
VecSeq prior_mean_path(const ModelSpec& spec, const TimeGrid& grid);

// Observation increments dY over the cells of a grid, one d2-row per cell.
struct ObservationPath {
    TimeGrid grid;
    Eigen::MatrixXd increments;  // n x d2

    int n_cells() const { return static_cast<int>(increments.rows()); }
};

// Evaluated coefficients plus the derived products every solver needs.
// obs_ok is false when sigma sigma^T is numerically singular (the
// observation-side products are then unusable; simulation still works).
struct CoeffSlice {
    Eigen::MatrixXd a, b, c, sigma;
    Eigen::MatrixXd bbt;        // b b^T
    Eigen::MatrixXd sst;        // sigma sigma^T
    Eigen::MatrixXd sst_inv;    // (sigma sigma^T)^-1
    Eigen::MatrixXd ct_sstinv;  // c^T (sigma sigma^T)^-1
    Eigen::MatrixXd obs_info;   // c^T (sigma sigma^T)^-1 c
    bool obs_ok = false;
};

// Piecewise-constant coefficients make the slice cache finite: one entry per
// distinct combination of provider cells. Fully built at construction, so
// lookups are const and safe to share across threads.
class CoeffEvaluator {
public:
    explicit CoeffEvaluator(const ModelSpec& spec);

    const CoeffSlice& at(double t) const;
    // Slice guaranteed to carry observation-side products.
    const CoeffSlice& obs_at(double t) const;

private:
    std::vector<double> edges_;       // segment start times
    std::vector<CoeffSlice> slices_;  // one per segment
};

}  // namespace smoothkit
