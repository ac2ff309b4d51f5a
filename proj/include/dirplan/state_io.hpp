#pragma once

#include <string>

#include "dirplan/lifecycle.hpp"

// JSON persistence for the engine state (publication records, status store,
// CRL slots, tickets, retry queue). The directory itself is persisted as an
// LDIF snapshot, not here.
namespace dirplan::state_io {

std::string save_engine_state(const lifecycle::EngineState& state);
lifecycle::EngineState load_engine_state(const std::string& text);

}  // namespace dirplan::state_io
