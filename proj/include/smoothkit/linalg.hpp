#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace smoothkit {

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& sym);
double max_eigenvalue(const Eigen::MatrixXd& sym);

// If any eigenvalue falls below `floor`, rebuild the matrix with negative
// eigenvalues set to zero. Keeps Riccati iterates PSD against roundoff.
Eigen::MatrixXd clip_eigenvalues_below(const Eigen::MatrixXd& sym, double floor);
// Mirror image for negative-semidefinite iterates.
Eigen::MatrixXd clip_eigenvalues_above(const Eigen::MatrixXd& sym, double ceiling);

// Symmetric PSD square root via eigendecomposition; tiny negative
// eigenvalues from roundoff are treated as zero.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& sym);

// Diagonal jitter scaled to the matrix: 1e-10 * (1 + trace/d).
double default_jitter(const Eigen::MatrixXd& m);
Eigen::MatrixXd jittered_inverse(const Eigen::MatrixXd& sym);

// Contiguous sequence of equally-sized matrices. Flat storage keeps long
// grids cheap (one allocation instead of one per node).
class MatSeq {
public:
    MatSeq() = default;
    MatSeq(int count, int rows, int cols)
        : count_(count), rows_(rows), cols_(cols),
          data_(static_cast<std::size_t>(count) * rows * cols, 0.0) {}

    int size() const { return count_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Eigen::Map<Eigen::MatrixXd> operator[](int i) {
        return {data_.data() + offset(i), rows_, cols_};
    }
    Eigen::Map<const Eigen::MatrixXd> operator[](int i) const {
        return {data_.data() + offset(i), rows_, cols_};
    }

private:
    std::size_t offset(int i) const {
        return static_cast<std::size_t>(i) * rows_ * cols_;
    }
    int count_ = 0;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Contiguous sequence of equally-sized vectors.
class VecSeq {
public:
    VecSeq() = default;
    VecSeq(int count, int dim)
        : count_(count), dim_(dim),
          data_(static_cast<std::size_t>(count) * dim, 0.0) {}

    int size() const { return count_; }
    int dim() const { return dim_; }

    Eigen::Map<Eigen::VectorXd> operator[](int i) {
        return {data_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }
    Eigen::Map<const Eigen::VectorXd> operator[](int i) const {
        return {data_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }

private:
    int count_ = 0;
    int dim_ = 0;
    std::vector<double> data_;
};

}  // namespace smoothkit
