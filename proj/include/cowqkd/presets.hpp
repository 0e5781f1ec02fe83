#pragma once

#include <string>
#include <vector>

#include "cowqkd/security.hpp"
#include "cowqkd/system_model.hpp"

namespace cowqkd::presets {

// Shipped configurations: three ultra-low-loss link operating points
// (ull_307km, ull_200km, ull_104km) and a high-rate bench setup (desk)
// used for end-to-end post-processing runs. JSON copies live in the
// presets/ directory; the embedded values here are authoritative.
std::vector<std::string> preset_names();

model::SystemConfig make_preset(const std::string& name); // throws std::invalid_argument

security::SecurityParams preset_params(const std::string& name);

} // namespace cowqkd::presets
