#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "smforge/corpus.hpp"
#include "smforge/gateway.hpp"
#include "smforge/ir.hpp"

// Scripted stand-in for a provider: answers every pipeline prompt from a
// fixed "generated" machine, so recorded transcripts are reproducible.
namespace smforge::fixtures {

/// "baseline", "S1".."S6", "E1", "E2", "E3:<event>", "E4".."E6", or "" when
/// the prompt is not one of the built-in templates.
std::string classify_step(std::string_view prompt);

/// Deterministic edits of the ground truth: alias renames, a dropped
/// transition or guard, an extra state, a changed action, lost history.
/// Each applied edit is described in `notes`.
StateMachine perturb(const Scenario& scenario, std::uint64_t seed,
                     std::vector<std::string>* notes = nullptr);

/// Response text for one step, derived from `gen`.
std::string answer(const StateMachine& gen, std::string_view step);

/// Answers through answer(); `corrupt_step` gets a cut-off reply instead.
BackendPtr responder(StateMachine gen, std::string corrupt_step = "");

/// FNV-1a 64 of the text, for seeding.
std::uint64_t seed_of(std::string_view text);

}  // namespace smforge::fixtures
