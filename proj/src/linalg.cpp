#include "smoothkit/linalg.hpp"

#include <Eigen/Eigenvalues>

namespace smoothkit {

double min_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Eigen::MatrixXd clip_eigenvalues_below(const Eigen::MatrixXd& sym,
                                       double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() >= floor) return sym;
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd clip_eigenvalues_above(const Eigen::MatrixXd& sym,
                                       double ceiling) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().maxCoeff() <= ceiling) return sym;
    Eigen::VectorXd lam = es.eigenvalues().cwiseMin(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

double default_jitter(const Eigen::MatrixXd& m) {
    const double d = static_cast<double>(m.rows());
    return 1e-10 * (1.0 + m.trace() / d);
}

Eigen::MatrixXd jittered_inverse(const Eigen::MatrixXd& sym) {
    Eigen::MatrixXd j = sym;
    j.diagonal().array() += default_jitter(sym);
    const Eigen::MatrixXd id =
        Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
    return symmetrize(j.ldlt().solve(id));
}

}  // namespace smoothkit
