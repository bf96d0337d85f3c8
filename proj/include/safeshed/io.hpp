#pragma once

#include <span>
#include <string>
#include <vector>

#include "safeshed/envelope.hpp"
#include "safeshed/rollout.hpp"

namespace safeshed {

// Shortest round-trip decimal form, '.' separator, no locale.
std::string format_double(double value);

// Trajectory CSV: header "t,<obs labels>,<action labels>,reward,safety",
// LF line endings, empty safety field where the sample is undefined.
void write_trajectory_csv(const std::string& path, const std::vector<std::string>& obs_labels,
                          const std::vector<std::string>& action_labels,
                          std::span<const TrajectoryRow> rows);

// Appends an envelope lower-bound column aligned to t - t_pf; empty for rows
// at or before fault clearing. Throws with a line number on malformed input.
void export_plotdata(const std::string& input_csv, const std::string& output_csv, double t_pf,
                     const RecoveryEnvelope& envelope);

}  // namespace safeshed
