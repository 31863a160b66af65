// Deterministic data emission: shortest round-trip float formatting and CSV
// writers (fixed headers, no wall-clock content).
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memsim/evolution.hpp"
#include "memsim/narrow_gap.hpp"
#include "memsim/steady.hpp"

namespace memsim {

// Shortest representation that round-trips to the same double.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& content);

std::string trajectory_csv(const Trajectory& traj);
std::string state_csv(const MembranePair& state);
std::string convergence_csv(const ConvergenceTable& table);
std::string continuation_csv(const ContinuationResult& result);
std::string phi_csv(const Field2D& field);

void write_trajectory_outputs(const std::filesystem::path& dir, const Trajectory& traj);

}  // namespace memsim
