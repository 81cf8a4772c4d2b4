// Python bindings for the smoothkit core: model construction, simulation,
// filtering, smoothing, conditional path sampling, functionals, and bands.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smoothkit/filter.hpp"
#include "smoothkit/model.hpp"
#include "smoothkit/model_io.hpp"
#include "smoothkit/oracle.hpp"
#include "smoothkit/riccati.hpp"
#include "smoothkit/sampler.hpp"
#include "smoothkit/simulate.hpp"
#include "smoothkit/smoother.hpp"

namespace py = pybind11;
using namespace smoothkit;

namespace {

py::array_t<double> vecseq_to_array(const VecSeq& seq) {
    py::array_t<double> out({seq.size(), seq.dim()});
    auto view = out.mutable_unchecked<2>();
    for (int i = 0; i < seq.size(); ++i)
        for (int k = 0; k < seq.dim(); ++k) view(i, k) = seq[i](k);
    return out;
}

py::array_t<double> matseq_to_array(const MatSeq& seq) {
    py::array_t<double> out({seq.size(), seq.rows(), seq.cols()});
    auto view = out.mutable_unchecked<3>();
    for (int i = 0; i < seq.size(); ++i)
        for (int r = 0; r < seq.rows(); ++r)
            for (int c = 0; c < seq.cols(); ++c) view(i, r, c) = seq[i](r, c);
    return out;
}

py::array_t<double> batch_to_array(const ConditionalPathBatch& batch) {
    py::array_t<double> out(
        {batch.paths, batch.grid.n + 1, batch.d1});
    auto view = out.mutable_unchecked<3>();
    for (int m = 0; m < batch.paths; ++m)
        for (int i = 0; i <= batch.grid.n; ++i)
            for (int k = 0; k < batch.d1; ++k)
                view(m, i, k) = batch.value(m, i)(k);
    return out;
}

CoefficientProvider provider_from_py(const py::object& obj) {
    if (py::isinstance<CoefficientProvider>(obj))
        return obj.cast<CoefficientProvider>();
    return CoefficientProvider::constant(obj.cast<Eigen::MatrixXd>());
}

ModelSpec make_model(const py::object& a, const py::object& b,
                     const py::object& c, const py::object& sigma,
                     const Eigen::VectorXd& mean0, const Eigen::MatrixXd& cov0,
                     double horizon) {
    ModelSpec m;
    m.a = provider_from_py(a);
    m.b = provider_from_py(b);
    m.c = provider_from_py(c);
    m.sigma = provider_from_py(sigma);
    m.dims.d1 = m.a.rows();
    m.dims.m1 = m.b.cols();
    m.dims.d2 = m.c.rows();
    m.dims.m2 = m.sigma.cols();
    m.initial.mean = mean0;
    m.initial.cov = cov0;
    m.horizon = horizon;
    return m;
}

PathFunctional functional_from_args(const std::string& kind, int coord,
                                    double threshold,
                                    const std::vector<double>& table) {
    if (kind == "max") return PathFunctional::max_coordinate(coord);
    if (kind == "integral") return PathFunctional::path_integral(coord);
    if (kind == "exceedance")
        return PathFunctional::threshold_exceedance(coord, threshold);
    if (kind == "user-table") return PathFunctional::user_table(table);
    throw ConfigError("unknown functional: " + kind);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() =
        "Continuous-time linear-Gaussian filtering, smoothing, and "
        "conditional path sampling";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError",
                                           PyExc_RuntimeError);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init([](double t_end, int n) {
                 return TimeGrid{t_end, n};
             }),
             py::arg("t_end"), py::arg("n"))
        .def_readonly("t_end", &TimeGrid::t_end)
        .def_readonly("n", &TimeGrid::n)
        .def_property_readonly("h", &TimeGrid::h)
        .def("node", &TimeGrid::node)
        .def("__repr__", [](const TimeGrid& g) {
            return "TimeGrid(t_end=" + std::to_string(g.t_end) +
                   ", n=" + std::to_string(g.n) + ")";
        });

    py::class_<CoefficientProvider>(m, "CoefficientProvider")
        .def_static("constant", &CoefficientProvider::constant)
        .def_static("table",
                    [](const std::vector<double>& times,
                       const std::vector<Eigen::MatrixXd>& values) {
                        return CoefficientProvider::table(times, values);
                    })
        .def("at", [](const CoefficientProvider& p, double t) {
            return eval_coeff(p, t);
        });

    py::class_<ModelSpec>(m, "ModelSpec")
        .def_property_readonly("d1",
                               [](const ModelSpec& s) { return s.dims.d1; })
        .def_property_readonly("d2",
                               [](const ModelSpec& s) { return s.dims.d2; })
        .def_readonly("horizon", &ModelSpec::horizon)
        .def("to_json", &model_to_json);

    m.def("make_model", &make_model, py::arg("a"), py::arg("b"), py::arg("c"),
          py::arg("sigma"), py::arg("mean0"), py::arg("cov0"),
          py::arg("horizon") = 1.0,
          "Build a model from matrices (or CoefficientProvider tables)");
    m.def("load_model", &load_model, py::arg("path"));
    m.def("parse_model_json", &parse_model_json, py::arg("text"));

    m.def(
        "validate_model",
        [](const ModelSpec& spec, const TimeGrid& grid) {
            return validate_model(spec, grid).violations;
        },
        py::arg("model"), py::arg("grid"),
        "Returns the list of violations (empty when the model is valid)");

    m.def(
        "prior_mean_path",
        [](const ModelSpec& spec, const TimeGrid& grid) {
            return vecseq_to_array(prior_mean_path(spec, grid));
        },
        py::arg("model"), py::arg("grid"));

    py::class_<ObservationPath>(m, "ObservationPath")
        .def(py::init([](const TimeGrid& grid,
                         const Eigen::MatrixXd& increments) {
                 ObservationPath obs;
                 obs.grid = grid;
                 obs.increments = increments;
                 return obs;
             }),
             py::arg("grid"), py::arg("increments"))
        .def_readonly("grid", &ObservationPath::grid)
        .def_readonly("increments", &ObservationPath::increments);

    py::class_<SimulationOutput>(m, "SimulationOutput")
        .def_readonly("grid", &SimulationOutput::grid)
        .def_readonly("seed", &SimulationOutput::seed)
        .def_readonly("observations", &SimulationOutput::observations)
        .def_property_readonly("states", [](const SimulationOutput& s) {
            return vecseq_to_array(s.states);
        });

    m.def("simulate", &simulate, py::arg("model"), py::arg("grid"),
          py::arg("seed"));

    py::class_<FilterResult>(m, "FilterResult")
        .def_readonly("grid", &FilterResult::grid)
        .def_property_readonly("means",
                               [](const FilterResult& r) {
                                   return vecseq_to_array(r.means);
                               })
        .def_property_readonly("covariances", [](const FilterResult& r) {
            return matseq_to_array(r.covariances);
        });

    m.def("kalman_bucy", &kalman_bucy, py::arg("model"), py::arg("grid"),
          py::arg("obs"), py::arg("epsilon") = 0.0);
    m.def(
        "innovations",
        [](const FilterResult& r, const ModelSpec& spec,
           const ObservationPath& obs) { return innovations(r, spec, obs); },
        py::arg("filter_result"), py::arg("model"), py::arg("obs"));

    py::class_<SmoothingResult>(m, "SmoothingResult")
        .def_readonly("grid", &SmoothingResult::grid)
        .def_property_readonly("method",
                               [](const SmoothingResult& r) {
                                   switch (r.method) {
                                       case SmootherMethod::bf: return "bf";
                                       case SmootherMethod::rts: return "rts";
                                       case SmootherMethod::direct_integral:
                                           return "direct";
                                       case SmootherMethod::fixed_point:
                                           return "fixed-point";
                                   }
                                   return "unknown";
                               })
        .def_property_readonly("means",
                               [](const SmoothingResult& r) {
                                   return vecseq_to_array(r.means);
                               })
        .def_property_readonly("marginal_cov",
                               [](const SmoothingResult& r) {
                                   return matseq_to_array(r.marginal_cov);
                               })
        .def_property_readonly(
            "rho",
            [](const SmoothingResult& r) -> py::object {
                if (r.method != SmootherMethod::bf) return py::none();
                return vecseq_to_array(r.rho);
            })
        .def("cross_cov", &cross_cov_query, py::arg("i"), py::arg("j"),
             "Smoothing cross-covariance between two grid nodes");

    m.def("bf_smooth", &bf_smooth, py::arg("model"), py::arg("grid"),
          py::arg("obs"));
    m.def("rts_smooth", &rts_smooth, py::arg("model"), py::arg("grid"),
          py::arg("obs"), py::arg("filter_result"));
    m.def("direct_integral_smooth", &direct_integral_smooth, py::arg("model"),
          py::arg("grid"), py::arg("obs"));
    m.def(
        "fixed_point_smooth",
        [](const ModelSpec& spec, const TimeGrid& grid,
           const ObservationPath& obs, int s_index) {
            return vecseq_to_array(
                fixed_point_smooth(spec, grid, obs, s_index).means);
        },
        py::arg("model"), py::arg("grid"), py::arg("obs"), py::arg("s_index"),
        "Online means mu_{s; t_j} for j >= s_index, one row per terminal "
        "node");

    py::class_<ConditionalPathBatch>(m, "ConditionalPathBatch")
        .def_readonly("grid", &ConditionalPathBatch::grid)
        .def_readonly("paths", &ConditionalPathBatch::paths)
        .def_readonly("seed", &ConditionalPathBatch::seed)
        .def_property_readonly("array", &batch_to_array)
        .def_property_readonly("center",
                               [](const ConditionalPathBatch& b) {
                                   return vecseq_to_array(b.center);
                               })
        .def_property_readonly("scale", [](const ConditionalPathBatch& b) {
            return vecseq_to_array(b.scale);
        });

    m.def("sample_conditional_paths", &sample_conditional_paths,
          py::arg("model"), py::arg("grid"), py::arg("smoothing"),
          py::arg("paths"), py::arg("seed"), py::arg("path_offset") = 0);

    m.def(
        "estimate_functional",
        [](const ConditionalPathBatch& batch, const std::string& kind,
           int coord, double threshold, const std::vector<double>& table) {
            const FunctionalEstimate est = estimate_functional(
                batch, functional_from_args(kind, coord, threshold, table));
            py::dict out;
            out["value"] = est.value;
            out["stderr"] = est.std_error;
            out["M"] = est.paths;
            out["functional"] = est.functional;
            return out;
        },
        py::arg("batch"), py::arg("functional") = "max", py::arg("coord") = 0,
        py::arg("threshold") = 0.0,
        py::arg("table") = std::vector<double>{});

    py::class_<ConfidenceBand>(m, "ConfidenceBand")
        .def_readonly("grid", &ConfidenceBand::grid)
        .def_readonly("level", &ConfidenceBand::level)
        .def_readonly("lower", &ConfidenceBand::lower)
        .def_readonly("upper", &ConfidenceBand::upper)
        .def_property_readonly("kind", [](const ConfidenceBand& b) {
            return b.kind == BandKind::pointwise ? "pointwise"
                                                 : "simultaneous";
        });

    m.def(
        "confidence_band",
        [](const ConditionalPathBatch& batch, double level,
           const std::string& kind) {
            return confidence_band(batch, level,
                                   kind == "pointwise"
                                       ? BandKind::pointwise
                                       : BandKind::simultaneous);
        },
        py::arg("batch"), py::arg("level") = 0.9,
        py::arg("kind") = "simultaneous");
    m.def("band_containment", &band_containment, py::arg("band"),
          py::arg("batch"));

    m.def(
        "static_scalar_posterior",
        [](double mu_x, double var_x, double c, double sigma, double y) {
            const ScalarPosterior p =
                static_scalar_posterior(mu_x, var_x, c, sigma, y);
            return py::make_tuple(p.mean, p.var);
        },
        py::arg("mu_x"), py::arg("var_x"), py::arg("c"), py::arg("sigma"),
        py::arg("y"),
        "Conjugate posterior (mean, var) for the static scalar model");

    m.attr("__version__") = "0.1.0";
}
