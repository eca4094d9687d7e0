#pragma once

#include <iosfwd>

#include <json.hpp>

#include "kaczlab/analysis.hpp"
#include "kaczlab/config.hpp"
#include "kaczlab/problems.hpp"
#include "kaczlab/sampling.hpp"
#include "kaczlab/solver.hpp"

namespace kaczlab {

using Json = nlohmann::ordered_json;

// Block indices are 1-based in every JSON document.

Json to_json(const Paving& p);
Paving paving_from_json(const Json& j);

Json to_json(const ChebyshevSchedule& s);
Json to_json(const ConditioningReport& r, bool include_W = false);
Json to_json(const RatePrediction& p);
Json to_json(const PavingQuality& q);
Json to_json(const ProblemRecipe& r);

Json to_json(const SamplingDescriptor& s);
SamplingDescriptor sampling_from_json(const Json& j);
Json to_json(const StepsizeDescriptor& s);
StepsizeDescriptor stepsize_from_json(const Json& j);
Json to_json(const RunDescriptor& d);
/// Missing fields keep their defaults. Throws Parse on unknown names or
/// wrongly typed values.
RunDescriptor run_from_json(const Json& j);

/// Resolved configuration: the concrete sampling, weights and stepsizes.
Json to_json(const SolverConfig& c);
/// Metadata plus one object per event.
Json to_json(const SolverTrace& t);

/// Columns k, block_size, alpha, residual_norm, dist_sq. Alpha reads "nan" at
/// k = 0 and "skip" for skipped adaptive updates.
void write_trace_csv(std::ostream& out, const SolverTrace& t);

}  // namespace kaczlab
