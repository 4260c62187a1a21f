#pragma once

#include <string>

#include "cits/simulation.hpp"

namespace cits {

/// Machine-readable run report: fixed key order, two-space indent, trailing
/// newline. The layout is described in docs/report.md.
std::string report_json(const SimulationResult& run);

/// Short human-readable summary of the same run.
std::string report_text(const SimulationResult& run);

}  // namespace cits
