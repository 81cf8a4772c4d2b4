#include "smoothkit/model.hpp"

#include <algorithm>
#include <cmath>

namespace smoothkit {

bool TimeGrid::same_as(const TimeGrid& other) const {
    return n == other.n &&
           std::abs(t_end - other.t_end) <=
               1e-12 * std::max(1.0, std::abs(t_end));
}

CoefficientProvider CoefficientProvider::constant(Eigen::MatrixXd value) {
    CoefficientProvider p;
    p.kind_ = Kind::constant;
    p.times_ = {0.0};
    p.values_.push_back(std::move(value));
    return p;
}

CoefficientProvider CoefficientProvider::table(
    std::vector<double> times, std::vector<Eigen::MatrixXd> values) {
    if (times.empty() || times.size() != values.size())
        throw ConfigError("coefficient table needs one time per value");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw ConfigError("coefficient table times must be strictly increasing");
    for (const auto& v : values)
        if (v.rows() != values[0].rows() || v.cols() != values[0].cols())
            throw ConfigError("coefficient table values must share one shape");
    CoefficientProvider p;
    p.kind_ = Kind::table;
    p.times_ = std::move(times);
    p.values_ = std::move(values);
    return p;
}

int CoefficientProvider::cell_index(double t) const {
    if (values_.empty()) throw ConfigError("empty coefficient provider");
    if (t < times_.front() - 1e-12)
        throw ConfigError("coefficient evaluated before the table start");
    if (kind_ == Kind::constant) return 0;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    int idx = static_cast<int>(it - times_.begin()) - 1;
    if (idx < 0) idx = 0;  // t within the 1e-12 slack of the start
    return idx;
}

const Eigen::MatrixXd& CoefficientProvider::at(double t) const {
    return values_[static_cast<std::size_t>(cell_index(t))];
}

Eigen::MatrixXd InitialLaw::effective_cov() const {
    return clip_eigenvalues_below(symmetrize(cov), 0.0);
}

Eigen::MatrixXd eval_coeff(const CoefficientProvider& provider, double t) {
    if (t < 0.0) throw ConfigError("coefficient evaluated at negative time");
    return provider.at(t);
}

namespace {

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

void check_shape(const CoefficientProvider& p, int rows, int cols,
                 const char* name, ValidationReport& report) {
    if (p.cell_count() == 0 || p.rows() != rows || p.cols() != cols)
        report.violations.push_back(std::string("shape mismatch: ") + name);
    for (const auto& v : p.values())
        if (!finite(v)) {
            report.violations.push_back(std::string("non-finite entries in ") +
                                        name);
            break;
        }
}

void check_coverage(const CoefficientProvider& p, const char* name,
                    ValidationReport& report) {
    if (p.kind() == CoefficientProvider::Kind::table &&
        p.times().front() > 1e-12)
        report.violations.push_back(std::string("coefficient table for ") +
                                    name + " does not cover t=0");
}

}  // namespace

ValidationReport validate_model(const ModelSpec& spec, const TimeGrid& grid) {
    ValidationReport report;
    const Dims& d = spec.dims;
    if (d.d1 < 1 || d.d2 < 1 || d.m1 < 1 || d.m2 < 1)
        report.violations.push_back("invalid dimensions: all must be >= 1");
    if (!(spec.horizon >= 0.0) || !std::isfinite(spec.horizon))
        report.violations.push_back("invalid horizon");
    if (grid.n < 1 || !(grid.t_end > 0.0))
        report.violations.push_back("invalid grid");

    check_shape(spec.a, d.d1, d.d1, "a", report);
    check_shape(spec.b, d.d1, d.m1, "b", report);
    check_shape(spec.c, d.d2, d.d1, "c", report);
    check_shape(spec.sigma, d.d2, d.m2, "sigma", report);
    check_coverage(spec.a, "a", report);
    check_coverage(spec.b, "b", report);
    check_coverage(spec.c, "c", report);
    check_coverage(spec.sigma, "sigma", report);

    if (spec.initial.mean.size() != d.d1)
        report.violations.push_back("shape mismatch: initial.mean");
    else if (!spec.initial.mean.allFinite())
        report.violations.push_back("non-finite entries in initial.mean");
    if (spec.initial.cov.rows() != d.d1 || spec.initial.cov.cols() != d.d1) {
        report.violations.push_back("shape mismatch: initial.cov");
    } else if (!finite(spec.initial.cov)) {
        report.violations.push_back("non-finite entries in initial.cov");
    } else {
        const Eigen::MatrixXd& v0 = spec.initial.cov;
        if ((v0 - v0.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            report.violations.push_back("initial covariance not symmetric");
        else if (min_eigenvalue(symmetrize(v0)) < -1e-10)
            report.violations.push_back("initial covariance indefinite");
    }

    if (!report.ok()) return report;  // shapes are off; skip node checks

    for (int i = 0; i <= grid.n; ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd s = spec.sigma.at(t);
        if (min_eigenvalue(symmetrize(s * s.transpose())) <= 1e-10)
            report.violations.push_back("observation noise singular at node " +
                                        std::to_string(i));
    }
    return report;
}

VecSeq prior_mean_path(const ModelSpec& spec, const TimeGrid& grid) {
    const int n = grid.n;
    const double h = grid.h();
    VecSeq m(n + 1, spec.dims.d1);
    m[0] = spec.initial.mean;
    Eigen::VectorXd x = spec.initial.mean;
    for (int i = 0; i < n; ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd& a0 = spec.a.at(t);
        // Piecewise-constant drift: the midpoint value is the one in effect
        // across the whole cell, including at a breakpoint on the far edge.
        const Eigen::MatrixXd& am = spec.a.at(t + 0.5 * h);
        Eigen::VectorXd k1 = a0 * x;
        Eigen::VectorXd k2 = am * (x + 0.5 * h * k1);
        Eigen::VectorXd k3 = am * (x + 0.5 * h * k2);
        Eigen::VectorXd k4 = am * (x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        m[i + 1] = x;
    }
    return m;
}

CoeffEvaluator::CoeffEvaluator(const ModelSpec& spec) {
    // Segment boundaries: union of all table breakpoints.
    std::vector<double> edges = {0.0};
    for (const CoefficientProvider* p :
         {&spec.a, &spec.b, &spec.c, &spec.sigma})
        if (p->kind() == CoefficientProvider::Kind::table)
            for (double t : p->times()) edges.push_back(t);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](double x, double y) {
                                return std::abs(x - y) <= 1e-12;
                            }),
                edges.end());

    for (double t : edges) {
        CoeffSlice s;
        s.a = spec.a.at(t);
        s.b = spec.b.at(t);
        s.c = spec.c.at(t);
        s.sigma = spec.sigma.at(t);
        s.bbt = s.b * s.b.transpose();
        s.sst = symmetrize(s.sigma * s.sigma.transpose());
        const int d2 = static_cast<int>(s.sst.rows());
        Eigen::LLT<Eigen::MatrixXd> llt(s.sst);
        if (llt.info() == Eigen::Success &&
            min_eigenvalue(s.sst) > 1e-300) {
            s.sst_inv = symmetrize(
                llt.solve(Eigen::MatrixXd::Identity(d2, d2)));
            s.ct_sstinv = s.c.transpose() * s.sst_inv;
            s.obs_info = symmetrize(s.ct_sstinv * s.c);
            s.obs_ok = s.sst_inv.allFinite();
        }
        edges_.push_back(t);
        slices_.push_back(std::move(s));
    }
}

const CoeffSlice& CoeffEvaluator::at(double t) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), t + 1e-15);
    int idx = static_cast<int>(it - edges_.begin()) - 1;
    if (idx < 0) idx = 0;
    return slices_[static_cast<std::size_t>(idx)];
}

const CoeffSlice& CoeffEvaluator::obs_at(double t) const {
    const CoeffSlice& s = at(t);
    if (!s.obs_ok)
        throw NumericalError(
            "observation noise covariance is numerically singular");
    return s;
}

}  // namespace smoothkit
