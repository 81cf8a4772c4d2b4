#include "smoothkit/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#ifdef SMOOTHKIT_HAVE_ZLIB
#include <zlib.h>
#endif

namespace smoothkit {

namespace {

using nlohmann::json;

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ConfigError("expected a nested array for " + what);
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw ConfigError("ragged matrix for " + what);
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

CoefficientProvider provider_from_json(const json& j,
                                       const std::string& name) {
    if (j.contains("constant"))
        return CoefficientProvider::constant(
            matrix_from_json(j["constant"], name));
    if (j.contains("table")) {
        const json& t = j["table"];
        if (!t.contains("times") || !t.contains("values"))
            throw ConfigError("coefficient table for " + name +
                              " needs times and values");
        std::vector<double> times = t["times"].get<std::vector<double>>();
        std::vector<Eigen::MatrixXd> values;
        for (const auto& v : t["values"])
            values.push_back(matrix_from_json(v, name));
        return CoefficientProvider::table(std::move(times), std::move(values));
    }
    throw ConfigError("coefficient " + name +
                      " must be {\"constant\": ...} or {\"table\": ...}");
}

json provider_to_json(const CoefficientProvider& p) {
    if (p.kind() == CoefficientProvider::Kind::constant)
        return json{{"constant", matrix_to_json(p.values()[0])}};
    json values = json::array();
    for (const auto& v : p.values()) values.push_back(matrix_to_json(v));
    return json{{"table", {{"times", p.times()}, {"values", values}}}};
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

ModelSpec parse_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config is not valid JSON: ") +
                          e.what());
    }
    try {
        ModelSpec spec;
        const json& dims = j.at("dims");
        spec.dims.d1 = dims.at("d1").get<int>();
        spec.dims.d2 = dims.at("d2").get<int>();
        spec.dims.m1 = dims.at("m1").get<int>();
        spec.dims.m2 = dims.at("m2").get<int>();
        spec.horizon = j.at("horizon").get<double>();
        const json& init = j.at("initial");
        const std::vector<double> mean =
            init.at("mean").get<std::vector<double>>();
        spec.initial.mean =
            Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
        spec.initial.cov = matrix_from_json(init.at("cov"), "initial.cov");
        const json& coeff = j.at("coefficients");
        spec.a = provider_from_json(coeff.at("a"), "a");
        spec.b = provider_from_json(coeff.at("b"), "b");
        spec.c = provider_from_json(coeff.at("c"), "c");
        spec.sigma = provider_from_json(coeff.at("sigma"), "sigma");
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model config is incomplete: ") +
                          e.what());
    }
}

ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_json(buf.str());
}

std::string model_to_json(const ModelSpec& spec) {
    json j;
    j["dims"] = {{"d1", spec.dims.d1},
                 {"d2", spec.dims.d2},
                 {"m1", spec.dims.m1},
                 {"m2", spec.dims.m2}};
    j["horizon"] = spec.horizon;
    std::vector<double> mean(spec.initial.mean.data(),
                             spec.initial.mean.data() +
                                 spec.initial.mean.size());
    j["initial"] = {{"mean", mean}, {"cov", matrix_to_json(spec.initial.cov)}};
    j["coefficients"] = {{"a", provider_to_json(spec.a)},
                         {"b", provider_to_json(spec.b)},
                         {"c", provider_to_json(spec.c)},
                         {"sigma", provider_to_json(spec.sigma)}};
    return j.dump(2) + "\n";
}

ObservationPath read_observations(const std::string& path,
                                  const TimeGrid& grid, int d2) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open observation file: " + path);

    std::string header;
    if (!std::getline(in, header))
        throw ConfigError("observation file is empty: " + path);
    std::vector<std::string> cols;
    {
        std::stringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    int time_col = -1;
    std::vector<int> dy_cols;
    for (int k = 0; k < static_cast<int>(cols.size()); ++k) {
        if (cols[k] == "time") time_col = k;
        if (cols[k].rfind("dy_", 0) == 0) dy_cols.push_back(k);
    }
    if (time_col < 0 || static_cast<int>(dy_cols.size()) != d2)
        throw ConfigError("observation file header must carry time and " +
                          std::to_string(d2) + " dy columns: " + path);

    ObservationPath obs;
    obs.grid = grid;
    obs.increments = Eigen::MatrixXd::Zero(grid.n, d2);
    int row = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        while (static_cast<int>(fields.size()) < static_cast<int>(cols.size()))
            fields.push_back("");  // trailing empty cells
        if (fields[static_cast<std::size_t>(dy_cols[0])].empty())
            continue;  // terminal state row carries no increment
        if (row >= grid.n)
            throw ConfigError("observation file has more rows than the grid: " +
                              path);
        const double t = std::stod(fields[static_cast<std::size_t>(time_col)]);
        if (std::abs(t - grid.node(row)) >
            1e-9 * std::max(1.0, grid.t_end))
            throw ConfigError("observation times do not match the grid: " +
                              path);
        for (int k = 0; k < d2; ++k)
            obs.increments(row, k) =
                std::stod(fields[static_cast<std::size_t>(dy_cols[k])]);
        ++row;
    }
    if (row != grid.n)
        throw ConfigError("observation file has " + std::to_string(row) +
                          " rows but the grid has " + std::to_string(grid.n) +
                          " cells: " + path);
    return obs;
}

std::string simulation_to_csv(const SimulationOutput& sim) {
    const int n = sim.grid.n;
    const int d1 = sim.states.dim();
    const int d2 = static_cast<int>(sim.observations.increments.cols());
    std::string out = "time";
    for (int k = 1; k <= d1; ++k) out += ",x_" + std::to_string(k);
    for (int k = 1; k <= d2; ++k) out += ",dy_" + std::to_string(k);
    out += "\n";
    for (int i = 0; i < n; ++i) {
        out += fmt(sim.grid.node(i));
        for (int k = 0; k < d1; ++k) out += "," + fmt(sim.states[i](k));
        for (int k = 0; k < d2; ++k)
            out += "," + fmt(sim.observations.increments(i, k));
        out += "\n";
    }
    out += fmt(sim.grid.node(n));
    for (int k = 0; k < d1; ++k) out += "," + fmt(sim.states[n](k));
    for (int k = 0; k < d2; ++k) out += ",";
    out += "\n";
    return out;
}

std::string filter_to_csv(const FilterResult& result) {
    const int n = result.grid.n;
    const int d1 = result.means.dim();
    std::string out = "time";
    for (int k = 1; k <= d1; ++k) out += ",mu_" + std::to_string(k);
    for (int r = 1; r <= d1; ++r)
        for (int c = 1; c <= d1; ++c)
            out += ",gamma_" + std::to_string(r) + std::to_string(c);
    out += "\n";
    for (int i = 0; i <= n; ++i) {
        out += fmt(result.grid.node(i));
        for (int k = 0; k < d1; ++k) out += "," + fmt(result.means[i](k));
        for (int r = 0; r < d1; ++r)
            for (int c = 0; c < d1; ++c)
                out += "," + fmt(result.covariances[i](r, c));
        out += "\n";
    }
    return out;
}

std::string smoothing_to_csv(const SmoothingResult& result) {
    const int n = result.grid.n;
    const int d1 = result.means.dim();
    const bool with_rho = result.method == SmootherMethod::bf;
    std::string out = "time";
    for (int k = 1; k <= d1; ++k) out += ",mu_" + std::to_string(k);
    for (int r = 1; r <= d1; ++r)
        for (int c = 1; c <= d1; ++c)
            out += ",w_" + std::to_string(r) + std::to_string(c);
    if (with_rho)
        for (int k = 1; k <= d1; ++k) out += ",rho_" + std::to_string(k);
    out += "\n";
    for (int i = 0; i <= n; ++i) {
        out += fmt(result.grid.node(i));
        for (int k = 0; k < d1; ++k) out += "," + fmt(result.means[i](k));
        for (int r = 0; r < d1; ++r)
            for (int c = 0; c < d1; ++c)
                out += "," + fmt(result.marginal_cov[i](r, c));
        if (with_rho)
            for (int k = 0; k < d1; ++k) out += "," + fmt(result.rho[i](k));
        out += "\n";
    }
    return out;
}

std::string fixed_point_to_csv(const FixedPointPath& path) {
    const int d1 = path.means.dim();
    std::string out = "time";
    for (int k = 1; k <= d1; ++k) out += ",mu_" + std::to_string(k);
    out += "\n";
    for (int j = 0; j < path.means.size(); ++j) {
        out += fmt(path.grid.node(path.s_index + j));
        for (int k = 0; k < d1; ++k) out += "," + fmt(path.means[j](k));
        out += "\n";
    }
    return out;
}

std::string band_to_csv(const ConfidenceBand& band) {
    const int n = band.grid.n;
    const int d1 = static_cast<int>(band.lower.cols());
    std::string out = "time";
    for (int k = 1; k <= d1; ++k) out += ",lower_" + std::to_string(k);
    for (int k = 1; k <= d1; ++k) out += ",upper_" + std::to_string(k);
    out += "\n";
    for (int i = 0; i <= n; ++i) {
        out += fmt(band.grid.node(i));
        for (int k = 0; k < d1; ++k) out += "," + fmt(band.lower(i, k));
        for (int k = 0; k < d1; ++k) out += "," + fmt(band.upper(i, k));
        out += "\n";
    }
    return out;
}

std::string batch_to_csv(const ConditionalPathBatch& batch) {
    const int n = batch.grid.n;
    std::string out = "path_id,time";
    for (int k = 1; k <= batch.d1; ++k) out += ",x_" + std::to_string(k);
    out += "\n";
    for (int m = 0; m < batch.paths; ++m)
        for (int i = 0; i <= n; ++i) {
            out += std::to_string(m) + "," + fmt(batch.grid.node(i));
            for (int k = 0; k < batch.d1; ++k)
                out += "," + fmt(batch.value(m, i)(k));
            out += "\n";
        }
    return out;
}

std::string riccati_field_to_csv(const RiccatiField& field) {
    const int n = field.grid.n;
    const int d1 = field.gamma.rows();
    std::string out = "time";
    for (const char* name : {"gamma", "phi", "w"})
        for (int r = 1; r <= d1; ++r)
            for (int c = 1; c <= d1; ++c)
                out += "," + std::string(name) + "_" + std::to_string(r) +
                       std::to_string(c);
    out += "\n";
    for (int i = 0; i <= n; ++i) {
        out += fmt(field.grid.node(i));
        for (const MatSeq* seq : {&field.gamma, &field.phi, &field.w})
            for (int r = 0; r < d1; ++r)
                for (int c = 0; c < d1; ++c)
                    out += "," + fmt((*seq)[i](r, c));
        out += "\n";
    }
    return out;
}

std::string functional_to_json(const FunctionalEstimate& estimate) {
    json j;
    j["value"] = estimate.value;
    j["stderr"] = estimate.std_error;
    j["M"] = estimate.paths;
    j["functional"] = estimate.functional;
    return j.dump(2) + "\n";
}

namespace {

#ifdef SMOOTHKIT_HAVE_ZLIB
void write_gzip(const std::string& path, const std::string& text) {
    z_stream zs{};
    // windowBits 15+16 selects a gzip wrapper; the default header has
    // mtime 0, so output is reproducible.
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw NumericalError("gzip initialization failed");
    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(text.size())));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(text.data()));
    zs.avail_in = static_cast<uInt>(text.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw NumericalError("gzip compression failed");
    out.resize(out.size() - zs.avail_out);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}
#endif

}  // namespace

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
#ifdef SMOOTHKIT_HAVE_ZLIB
        write_gzip(path, text);
        return;
#else
        throw ConfigError("gzip output requested but zlib is unavailable");
#endif
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace smoothkit
