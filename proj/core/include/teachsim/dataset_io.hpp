#pragma once

#include <iosfwd>
#include <string>

#include "teachsim/core.hpp"

namespace teachsim {

// Line-delimited dataset format.
//
//   teachsim-preferences v1 obs_dim=<d> k=<k>
//   <teacher_id>,<step_collected>,<mu1>,<mu2>,<segment 1 floats>,<segment 2 floats>
//   ...
//
// Each segment is written row-major by step as state..., action, next_state...
// (2 * obs_dim + 1 floats per step). Floats use the shortest decimal that
// round-trips, so write followed by read reproduces the dataset bit-exactly.
void write_dataset(std::ostream& out, const PreferenceDataset& dataset);
PreferenceDataset read_dataset(std::istream& in);

void save_dataset(const std::string& path, const PreferenceDataset& dataset);
PreferenceDataset load_dataset(const std::string& path);

}  // namespace teachsim
