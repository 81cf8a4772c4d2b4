// Acceptance suite: one numbered check per release criterion, one pass/fail
// line each. Exits with the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "smoothkit/filter.hpp"
#include "smoothkit/model.hpp"
#include "smoothkit/oracle.hpp"
#include "smoothkit/riccati.hpp"
#include "smoothkit/sampler.hpp"
#include "smoothkit/simulate.hpp"
#include "smoothkit/smoother.hpp"
#include "test_models.hpp"

using namespace smoothkit;
using testkit::coupled_2d;
using testkit::mild_2d;
using testkit::no_observation;
using testkit::scalar_benchmark;
using testkit::scalar_model;
using testkit::static_scalar;
using testkit::table_scalar;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double max_mean_diff(const VecSeq& a, const VecSeq& b) {
    double m = 0;
    for (int i = 0; i < a.size(); ++i)
        m = std::max(m, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return m;
}

// ---------------------------------------------------------------------------

void criterion_1_static_exactness() {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec m = static_scalar();
    const TimeGrid g{1.0, 1};
    ObservationPath obs;
    obs.grid = g;
    obs.increments = Eigen::MatrixXd::Constant(1, 1, 1.0);

    const ScalarPosterior ref = static_scalar_posterior(0, 1, 1, 1, 1);
    const SmoothingResult bf = bf_smooth(m, g, obs);
    const SmoothingResult direct = direct_integral_smooth(m, g, obs);
    const SmoothingResult rts =
        rts_smooth(m, g, obs, kalman_bucy(m, g, obs));

    double err = 0;
    for (const SmoothingResult* r : {&bf, &direct, &rts})
        for (int i = 0; i <= g.n; ++i) {
            err = std::max(err, std::abs(r->means[i](0) - ref.mean));
            err = std::max(err, std::abs(r->marginal_cov[i](0, 0) - ref.var));
        }
    const double dt = seconds_since(t0);
    report(1, "static single-cell posterior, bf/rts/direct",
           err <= 1e-9 && dt < 0.1,
           "max err " + fmt(err) + " tol 1e-9, " + fmt(dt) + "s < 0.1s");
}

void criterion_2_closed_form_riccati() {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec m = static_scalar();
    const TimeGrid g{1.0, 1000};
    const RiccatiField field = build_riccati_field(m, g);
    double err = std::abs(field.gamma[g.n](0, 0) - 0.5);
    for (int i = 0; i <= g.n; ++i) {
        err = std::max(err, std::abs(field.phi[i](0, 0) + (1.0 - g.node(i))));
        err = std::max(err, std::abs(field.w[i](0, 0) - 0.5));
    }
    const double dt = seconds_since(t0);
    report(2, "closed-form gamma/phi/w on the degenerate scalar model",
           err <= 1e-6 && dt < 0.5,
           "max err " + fmt(err) + " tol 1e-6, " + fmt(dt) + "s < 0.5s");
}

void criterion_3_terminal_identity() {
    const ModelSpec m = coupled_2d();
    const TimeGrid g{1.0, 1000};
    const RiccatiField field = build_riccati_field(m, g);
    const double rel = (field.w[g.n] - field.gamma[g.n]).norm() /
                       field.gamma[g.n].norm();
    report(3, "w(T;T) equals gamma(T) on a 2-d model", rel <= 1e-6,
           "relative Frobenius gap " + fmt(rel) + " tol 1e-6");
}

void criterion_4_smoother_triad() {
    struct Case {
        const char* name;
        ModelSpec model;
        std::uint64_t seed;
    };
    const std::vector<Case> cases = {{"scalar", scalar_benchmark(), 777},
                                     {"planar", mild_2d(), 888},
                                     {"switching", table_scalar(), 999}};
    double worst_bd = 0, worst_br = 0, worst_fp = 0;
    for (const Case& c : cases) {
        // Recursive-vs-direct identity and rts agreement.
        const TimeGrid g{1.0, 2000};
        const ObservationPath obs = simulate(c.model, g, c.seed).observations;
        const SmoothingResult bf = bf_smooth(c.model, g, obs);
        const SmoothingResult direct = direct_integral_smooth(c.model, g, obs);
        const SmoothingResult rts =
            rts_smooth(c.model, g, obs, kalman_bucy(c.model, g, obs));
        worst_bd = std::max(worst_bd, max_mean_diff(bf.means, direct.means));
        worst_br = std::max(worst_br, max_mean_diff(bf.means, rts.means));

        // Fixed-point consistency. The fixed-point recursion is coupled to
        // the first-order filter, so its agreement with bf is O(h); run it
        // on a grid fine enough for the 1e-6 tolerance.
        const TimeGrid gf{1.0, 1 << 20};
        const ObservationPath obs_f =
            simulate(c.model, gf, c.seed + 1).observations;
        const SmoothingResult bf_f = bf_smooth(c.model, gf, obs_f);
        for (const int frac : {0, 3, 6}) {
            const int k = static_cast<int>(
                static_cast<long>(gf.n) * frac / 8);
            const FixedPointPath fp = fixed_point_smooth(c.model, gf, obs_f, k);
            worst_fp = std::max(worst_fp,
                                (fp.means[fp.means.size() - 1] - bf_f.means[k])
                                    .cwiseAbs()
                                    .maxCoeff());
        }
    }
    report(4, "smoother triad: bf = direct, bf ~ rts, fixed-point terminal",
           worst_bd <= 1e-9 && worst_br <= 1e-7 && worst_fp <= 1e-6,
           "bf-direct " + fmt(worst_bd) + " tol 1e-9; bf-rts " +
               fmt(worst_br) + " tol 1e-7; fixed-point " + fmt(worst_fp) +
               " tol 1e-6 at n=2^20");
}

void criterion_5_oracle_convergence() {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec m = coupled_2d();
    const TimeGrid fine{1.0, 1000};
    const ObservationPath obs_fine = simulate(m, fine, 2025).observations;
    const TimeGrid half{1.0, 500};
    ObservationPath obs_half;
    obs_half.grid = half;
    obs_half.increments = Eigen::MatrixXd::Zero(half.n, 2);
    for (int i = 0; i < half.n; ++i)
        obs_half.increments.row(i) = obs_fine.increments.row(2 * i) +
                                     obs_fine.increments.row(2 * i + 1);

    auto gap = [&](const TimeGrid& g, const ObservationPath& obs) {
        const SmoothingResult bf = bf_smooth(m, g, obs);
        const DiscreteKalmanResult oracle =
            discrete_kalman_rts(discretize(m, g), obs);
        std::pair<double, double> e{0, 0};
        for (int i = 0; i <= g.n; ++i) {
            e.first = std::max(e.first, (bf.means[i] - oracle.smooth_means[i])
                                            .cwiseAbs()
                                            .maxCoeff());
            e.second = std::max(e.second,
                                (bf.marginal_cov[i] - oracle.smooth_covs[i])
                                    .cwiseAbs()
                                    .maxCoeff());
        }
        return e;
    };
    const auto [em_h, ec_h] = gap(half, obs_half);
    const auto [em_f, ec_f] = gap(fine, obs_fine);
    const double rm = em_h / em_f;
    const double rc = ec_h / ec_f;
    const double dt = seconds_since(t0);
    report(5, "first-order convergence toward the discrete oracle",
           rm >= 1.7 && rm <= 2.3 && rc >= 1.7 && rc <= 2.3 && dt < 5.0,
           "mean ratio " + fmt(rm) + ", cov ratio " + fmt(rc) +
               " target [1.7,2.3], " + fmt(dt) + "s < 5s");
}

// Streaming moment accumulation shared by criteria 6 and 7.
struct BatchMoments {
    TimeGrid grid;
    int paths = 0;
    std::vector<double> s1, s2, s3, s4;  // per-node power sums
    std::vector<std::pair<int, int>> pairs;
    std::vector<double> cross;  // sum of x_i x_j per pair
};

BatchMoments sampler_moments(const ModelSpec& m, const TimeGrid& g,
                             const SmoothingResult& bf, int total,
                             std::uint64_t seed) {
    BatchMoments acc;
    acc.grid = g;
    acc.paths = total;
    acc.s1.assign(g.n + 1, 0.0);
    acc.s2.assign(g.n + 1, 0.0);
    acc.s3.assign(g.n + 1, 0.0);
    acc.s4.assign(g.n + 1, 0.0);
    // Ten deterministic node pairs.
    std::uint64_t state = 12345;
    for (int k = 0; k < 10; ++k) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        const int i = static_cast<int>((state >> 33) % (g.n + 1));
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        const int j = static_cast<int>((state >> 33) % (g.n + 1));
        acc.pairs.emplace_back(i, j);
    }
    acc.cross.assign(acc.pairs.size(), 0.0);

    const int chunk = 10000;
    for (int first = 0; first < total; first += chunk) {
        const int count = std::min(chunk, total - first);
        const ConditionalPathBatch batch =
            sample_conditional_paths(m, g, bf, count, seed, first);
        for (int p = 0; p < count; ++p) {
            for (int i = 0; i <= g.n; ++i) {
                const double x = batch.value(p, i)(0);
                const double x2 = x * x;
                acc.s1[i] += x;
                acc.s2[i] += x2;
                acc.s3[i] += x2 * x;
                acc.s4[i] += x2 * x2;
            }
            for (std::size_t k = 0; k < acc.pairs.size(); ++k)
                acc.cross[k] += batch.value(p, acc.pairs[k].first)(0) *
                                batch.value(p, acc.pairs[k].second)(0);
        }
    }
    return acc;
}

void criteria_6_7_sampler(const ModelSpec& m, const TimeGrid& g) {
    const auto t0 = std::chrono::steady_clock::now();
    const int total = 100000;
    const ObservationPath obs = simulate(m, g, 4242).observations;
    const SmoothingResult bf = bf_smooth(m, g, obs);
    const RiccatiField& field = *bf.field;
    const Propagator& alpha = *bf.alpha;
    const BatchMoments acc = sampler_moments(m, g, bf, total, 31415);
    const double inv_m = 1.0 / total;

    // 6a: node means within 4 standard errors of the smoothed mean path.
    double worst_z = 0;
    for (int i = 0; i <= g.n; ++i) {
        const double mean = acc.s1[i] * inv_m;
        const double var = acc.s2[i] * inv_m - mean * mean;
        const double se = std::sqrt(std::max(var, 1e-300) * inv_m);
        worst_z = std::max(worst_z, std::abs(mean - bf.means[i](0)) / se);
    }
    // 6b: terminal sample variance within 5% of gamma(T).
    const double term_mean = acc.s1[g.n] * inv_m;
    const double term_var =
        (acc.s2[g.n] * inv_m - term_mean * term_mean) * total / (total - 1);
    const double gamma_t = field.gamma[g.n](0, 0);
    const double var_rel = std::abs(term_var - gamma_t) / gamma_t;
    // 6c: ten cross-covariances within 3 standard errors of the kernel.
    double worst_cz = 0;
    for (std::size_t k = 0; k < acc.pairs.size(); ++k) {
        const auto [i, j] = acc.pairs[k];
        const double sample = acc.cross[k] * inv_m -
                              (acc.s1[i] * inv_m) * (acc.s1[j] * inv_m);
        const double exact = cross_covariance(field, alpha, i, j)(0, 0);
        const double se = std::sqrt((field.w[i](0, 0) * field.w[j](0, 0) +
                                     exact * exact) *
                                    inv_m);
        worst_cz = std::max(worst_cz, std::abs(sample - exact) / se);
    }
    const double dt = seconds_since(t0);
    report(6, "sampler moments at M=1e5",
           worst_z <= 4.0 && var_rel <= 0.05 && worst_cz <= 3.0 && dt < 30.0,
           "max mean z " + fmt(worst_z) + " <= 4; terminal var rel " +
               fmt(var_rel) + " <= 0.05; max cross-cov z " + fmt(worst_cz) +
               " <= 3; " + fmt(dt) + "s < 30s");

    // 7: per-node skewness and excess kurtosis of the sampled error.
    double worst_skew = 0, worst_kurt = 0;
    for (int i = 0; i <= g.n; ++i) {
        const double mu = acc.s1[i] * inv_m;
        const double m2 = acc.s2[i] * inv_m - mu * mu;
        const double m3 =
            acc.s3[i] * inv_m - 3 * mu * acc.s2[i] * inv_m + 2 * mu * mu * mu;
        const double m4 = acc.s4[i] * inv_m - 4 * mu * acc.s3[i] * inv_m +
                          6 * mu * mu * acc.s2[i] * inv_m -
                          3 * mu * mu * mu * mu;
        worst_skew = std::max(worst_skew, std::abs(m3 / std::pow(m2, 1.5)));
        worst_kurt = std::max(worst_kurt, std::abs(m4 / (m2 * m2) - 3.0));
    }
    report(7, "conditional error is Gaussian (skewness, excess kurtosis)",
           worst_skew <= 0.05 && worst_kurt <= 0.1,
           "max |skew| " + fmt(worst_skew) + " <= 0.05; max |ex kurt| " +
               fmt(worst_kurt) + " <= 0.1");
}

void criterion_8_psd_ordering() {
    double worst = 0;
    const std::vector<ModelSpec> models = {scalar_benchmark(), coupled_2d(),
                                           mild_2d(),          table_scalar(),
                                           static_scalar(),    no_observation()};
    for (const ModelSpec& m : models) {
        const TimeGrid g{1.0, 1000};
        const RiccatiField field = build_riccati_field(m, g);
        for (int i = 0; i <= g.n; ++i)
            worst = std::min(worst, min_eigenvalue(Eigen::MatrixXd(
                                        field.gamma[i] - field.w[i])));
    }
    report(8, "gamma(s) - w(s;T) stays positive semidefinite",
           worst >= -1e-7, "min eigenvalue " + fmt(worst) + " >= -1e-7");
}

void criterion_9_band_coverage() {
    const ModelSpec m = scalar_benchmark();
    const TimeGrid g{1.0, 100};
    const ObservationPath obs = simulate(m, g, 606).observations;
    const SmoothingResult bf = bf_smooth(m, g, obs);
    const int half = 100000;
    ConfidenceBand band;
    {
        const ConditionalPathBatch first_half =
            sample_conditional_paths(m, g, bf, half, 555, 0);
        band = confidence_band(first_half, 0.9, BandKind::simultaneous);
    }
    const ConditionalPathBatch second_half =
        sample_conditional_paths(m, g, bf, half, 555, half);
    const double coverage = band_containment(band, second_half);
    report(9, "split-sample simultaneous 90% band coverage",
           coverage >= 0.88 && coverage <= 0.92,
           "fresh-half coverage " + fmt(coverage) + " target 0.90 +- 0.02");
}

// --- criterion 10: byte-identical reruns of the CLI -----------------------

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int run_cmd(const std::string& cmd) { return std::system(cmd.c_str()); }

void criterion_10_determinism() {
    const char* cli = std::getenv("SMOOTHKIT_CLI");
    const char* cfg = std::getenv("SMOOTHKIT_CONFIG_DIR");
    if (!cli || !cfg) {
        report(10, "cli determinism", false,
               "SMOOTHKIT_CLI / SMOOTHKIT_CONFIG_DIR not set");
        return;
    }
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() /
        ("smoothkit_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string model =
        std::string(cfg) + "/scalar_benchmark.json";
    const std::string base = "\"" + std::string(cli) + "\"";

    bool ok = true;
    std::string detail;
    auto twice = [&](const std::string& what, const std::string& args,
                     const std::string& out1, const std::string& out2,
                     int expect_rc) {
        const int rc1 = run_cmd(base + " " + args + " --out " +
                                (dir / out1).string());
        const int rc2 = run_cmd(base + " " + args + " --out " +
                                (dir / out2).string());
        const bool rc_ok = WIFEXITED(rc1) && WIFEXITED(rc2) &&
                           WEXITSTATUS(rc1) == expect_rc &&
                           WEXITSTATUS(rc2) == expect_rc;
        const std::string b1 = read_file(dir / out1);
        const bool same = rc_ok && !b1.empty() && b1 == read_file(dir / out2);
        if (!same) {
            ok = false;
            detail += what + " differs or failed; ";
        }
    };

    twice("simulate",
          "simulate --model " + model + " --n 200 --seed 7",
          "sim1.csv", "sim2.csv", 0);
    // Reuse the simulated output as the observation input downstream.
    twice("sample",
          "sample " + (dir / "sim1.csv").string() + " --model " + model +
              " --n 200 --paths 64 --seed 3",
          "sample1.csv", "sample2.csv", 0);
    twice("verify",
          "verify --model " + model + " --n 200 --seed 5",
          "verify1.txt", "verify2.txt", 0);

    fs::remove_all(dir);
    report(10, "cli determinism: simulate/sample/verify byte-identical", ok,
           ok ? "three commands, two runs each, byte-identical" : detail);
}

}  // namespace

int main() {
    std::printf("smoothkit acceptance suite\n");
    try {
        criterion_1_static_exactness();
        criterion_2_closed_form_riccati();
        criterion_3_terminal_identity();
        criterion_4_smoother_triad();
        criterion_5_oracle_convergence();
        criteria_6_7_sampler(scalar_benchmark(), TimeGrid{1.0, 400});
        criterion_8_psd_ordering();
        criterion_9_band_coverage();
        criterion_10_determinism();
    } catch (const std::exception& e) {
        std::printf("[FAIL] suite aborted: %s\n", e.what());
        return 99;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}
