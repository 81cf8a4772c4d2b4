#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "smoothkit/model.hpp"
#include "smoothkit/model_io.hpp"
#include "smoothkit/simulate.hpp"
#include "test_models.hpp"

using namespace smoothkit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("time grid basics") {
    TimeGrid g{2.0, 8};
    CHECK(g.h() == doctest::Approx(0.25));
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(8) == doctest::Approx(2.0));
    CHECK(std::abs(g.n * g.h() - g.t_end) <= 1e-15 * g.t_end);
}

TEST_CASE("coefficient provider lookup") {
    const MatrixXd a = MatrixXd::Constant(1, 1, 3.0);
    const CoefficientProvider constant = CoefficientProvider::constant(a);
    CHECK(eval_coeff(constant, 0.3)(0, 0) == 3.0);

    const CoefficientProvider table = CoefficientProvider::table(
        {0.0, 1.0},
        {MatrixXd::Constant(1, 1, 1.0), MatrixXd::Constant(1, 1, 2.0)});
    CHECK(eval_coeff(table, 0.0)(0, 0) == 1.0);
    CHECK(eval_coeff(table, 0.999)(0, 0) == 1.0);
    // Cells are left-closed, and lookups beyond the last edge stick to it.
    CHECK(eval_coeff(table, 1.0)(0, 0) == 2.0);
    CHECK(eval_coeff(table, 2.0)(0, 0) == 2.0);

    CHECK_THROWS_AS(eval_coeff(table, -0.5), ConfigError);
    CHECK_THROWS_AS(CoefficientProvider::table(
                        {0.0, 0.0}, {MatrixXd::Constant(1, 1, 1.0),
                                     MatrixXd::Constant(1, 1, 2.0)}),
                    ConfigError);
}

TEST_CASE("validate_model accepts the plain scalar system") {
    const ModelSpec m = testkit::scalar_model(0, 1, 1, 1, 0, 1);
    const ValidationReport report = validate_model(m, TimeGrid{1.0, 4});
    CHECK(report.ok());
}

TEST_CASE("validate_model flags singular observation noise") {
    ModelSpec m = testkit::scalar_model(0, 1, 1, 0.0, 0, 1);
    const ValidationReport report = validate_model(m, TimeGrid{1.0, 2});
    REQUIRE(!report.ok());
    CHECK(std::find(report.violations.begin(), report.violations.end(),
                    "observation noise singular at node 0") !=
          report.violations.end());
}

TEST_CASE("validate_model flags shape mismatches") {
    ModelSpec m = testkit::scalar_model(0, 1, 1, 1, 0, 1);
    m.c = CoefficientProvider::constant(MatrixXd::Zero(1, 2));  // d2 x (d1+1)
    const ValidationReport report = validate_model(m, TimeGrid{1.0, 2});
    REQUIRE(!report.ok());
    CHECK(std::find(report.violations.begin(), report.violations.end(),
                    "shape mismatch: c") != report.violations.end());
}

TEST_CASE("validate_model flags a bad initial covariance") {
    ModelSpec m;
    m.dims = {2, 1, 2, 1};
    m.a = CoefficientProvider::constant(MatrixXd::Zero(2, 2));
    m.b = CoefficientProvider::constant(MatrixXd::Identity(2, 2));
    m.c = CoefficientProvider::constant(MatrixXd::Ones(1, 2));
    m.sigma = CoefficientProvider::constant(MatrixXd::Identity(1, 1));
    m.initial.mean = VectorXd::Zero(2);
    m.horizon = 1.0;

    m.initial.cov = (MatrixXd(2, 2) << 1, 0.5, -0.5, 1).finished();
    auto report = validate_model(m, TimeGrid{1.0, 2});
    CHECK(std::find(report.violations.begin(), report.violations.end(),
                    "initial covariance not symmetric") !=
          report.violations.end());

    m.initial.cov = (MatrixXd(2, 2) << 1, 2, 2, 1).finished();
    report = validate_model(m, TimeGrid{1.0, 2});
    CHECK(std::find(report.violations.begin(), report.violations.end(),
                    "initial covariance indefinite") !=
          report.violations.end());

    // Eigenvalues within the -1e-10 tolerance are clipped, not rejected.
    m.initial.cov = (MatrixXd(2, 2) << 1, 0, 0, -5e-11).finished();
    report = validate_model(m, TimeGrid{1.0, 2});
    CHECK(report.ok());
    CHECK(m.initial.effective_cov()(1, 1) == 0.0);
}

TEST_CASE("validate_model is pure") {
    const ModelSpec m = testkit::scalar_model(0, 1, 1, 0.0, 0, 1);
    const TimeGrid g{1.0, 3};
    const auto r1 = validate_model(m, g);
    const auto r2 = validate_model(m, g);
    CHECK(r1.violations == r2.violations);
}

TEST_CASE("prior mean path: zero drift is constant exactly") {
    const ModelSpec m = testkit::scalar_model(0, 1, 1, 1, 1.0, 1);
    const VecSeq path = prior_mean_path(m, TimeGrid{1.0, 16});
    for (int i = 0; i < path.size(); ++i) CHECK(path[i](0) == 1.0);
}

TEST_CASE("prior mean path: scalar exponential decay") {
    const ModelSpec m = testkit::scalar_model(-1.0, 1, 1, 1, 1.0, 1);
    const TimeGrid g{1.0, 100};
    const VecSeq path = prior_mean_path(m, g);
    CHECK(path[g.n](0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("prior mean path: zero mean stays zero") {
    const ModelSpec m = testkit::scalar_model(0.7, 1, 1, 1, 0.0, 1);
    const VecSeq path = prior_mean_path(m, TimeGrid{1.0, 32});
    for (int i = 0; i < path.size(); ++i) CHECK(path[i](0) == 0.0);
}

TEST_CASE("prior mean path: fourth-order grid refinement") {
    const ModelSpec m = testkit::scalar_model(-1.0, 1, 1, 1, 1.0, 1);
    auto err = [&](int n) {
        const TimeGrid g{1.0, n};
        const VecSeq path = prior_mean_path(m, g);
        double e = 0;
        for (int i = 0; i <= n; ++i)
            e = std::max(e, std::abs(path[i](0) - std::exp(-g.node(i))));
        return e;
    };
    const double order = std::log2(err(16) / err(32));
    CHECK(order >= 3.5);
}

TEST_CASE("model json round trip") {
    const ModelSpec m = testkit::table_scalar();
    const std::string text = model_to_json(m);
    const ModelSpec back = parse_model_json(text);
    CHECK(back.dims.d1 == m.dims.d1);
    CHECK(back.horizon == m.horizon);
    CHECK(back.a.kind() == CoefficientProvider::Kind::table);
    CHECK(eval_coeff(back.a, 0.75)(0, 0) == eval_coeff(m.a, 0.75)(0, 0));
    CHECK(back.initial.cov(0, 0) == m.initial.cov(0, 0));
}

TEST_CASE("model json rejects malformed input") {
    CHECK_THROWS_AS(parse_model_json("not json"), ConfigError);
    CHECK_THROWS_AS(parse_model_json("{\"dims\": {}}"), ConfigError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), ConfigError);
}

TEST_CASE("observation csv reader accepts the simulate format") {
    const TimeGrid g{1.0, 8};
    std::string csv = "time,x_1,dy_1\n";
    for (int i = 0; i < g.n; ++i) {
        char line[80];
        std::snprintf(line, sizeof line, "%.17g,0.0,%.17g\n", g.node(i),
                      0.1 * i);
        csv += line;
    }
    char last[80];
    std::snprintf(last, sizeof last, "%.17g,0.0,\n", g.node(g.n));
    csv += last;  // terminal state row, no increment
    const std::string path = "/tmp/smoothkit_test_obs.csv";
    write_output(path, csv);

    const ObservationPath obs = read_observations(path, g, 1);
    CHECK(obs.increments.rows() == g.n);
    CHECK(obs.increments(3, 0) == doctest::Approx(0.3));

    // Row count must match the grid.
    CHECK_THROWS_AS(read_observations(path, TimeGrid{1.0, 9}, 1), ConfigError);
}
