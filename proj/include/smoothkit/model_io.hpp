#pragma once

#include <string>

#include "smoothkit/filter.hpp"
#include "smoothkit/model.hpp"
#include "smoothkit/riccati.hpp"
#include "smoothkit/sampler.hpp"
#include "smoothkit/simulate.hpp"
#include "smoothkit/smoother.hpp"

namespace smoothkit {

// Model config. JSON with fields: dims {d1,d2,m1,m2}, horizon,
// initial {mean, cov}, coefficients {a,b,c,sigma} where each coefficient is
// {"constant": [[..]]} or {"table": {"times": [..], "values": [[[..]], ..]}}.
// Matrices are row-major nested arrays.
ModelSpec parse_model_json(const std::string& text);
ModelSpec load_model(const std::string& path);
std::string model_to_json(const ModelSpec& spec);

// Observation CSV: accepts either `time,dy_1..` or the simulate output
// `time,x_1..,dy_1..` (state columns are skipped; the terminal state row,
// which has empty dy fields, is ignored). Row count and times must match
// the grid.
ObservationPath read_observations(const std::string& path,
                                  const TimeGrid& grid, int d2);

// CSV writers. All floats use "%.17g" so byte-identical reruns are byte
// identical.
std::string simulation_to_csv(const SimulationOutput& sim);
std::string filter_to_csv(const FilterResult& result);
std::string smoothing_to_csv(const SmoothingResult& result);
std::string fixed_point_to_csv(const FixedPointPath& path);
std::string band_to_csv(const ConfidenceBand& band);
std::string batch_to_csv(const ConditionalPathBatch& batch);
std::string riccati_field_to_csv(const RiccatiField& field);
std::string functional_to_json(const FunctionalEstimate& estimate);

// Writes text to a file ("" or "-" means stdout); paths ending in .gz are
// gzip-compressed with a fixed header so output stays deterministic.
void write_output(const std::string& path, const std::string& text);

}  // namespace smoothkit
