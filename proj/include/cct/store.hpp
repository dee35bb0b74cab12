#pragma once

#include <string>

#include "cct/scenario.hpp"
#include "cct/trial.hpp"

namespace cct {

/// Serialize the cross-trial state (mode registry with its models, contact
/// estimates, impact models) so a later run can resume where this one
/// ended. Floats round-trip exactly.
void save_store(const std::string& path, const PersistentState& state);

/// Restore a store written by save_store; the scenario supplies the config
/// objects a reconstructed mode manager needs.
void load_store(const std::string& path, const Scenario& scenario, PersistentState& state);

}  // namespace cct
