#pragma once

#include <string>

#include "deconflict/avoidance.hpp"
#include "deconflict/instance.hpp"
#include "deconflict/recovery.hpp"
#include "deconflict/trajectory.hpp"

namespace deconflict {

// JSON writers for solver outputs. Angles cross the file boundary in degrees
// and recovery times in minutes, matching the instance file conventions.
// Serialization is deterministic; runtime_s and nodes are the only fields
// that vary between identical reruns.

std::string avoidance_to_json(const Instance& inst,
                              const AvoidanceSolution& sol);

// method is recorded verbatim ("exact" or "greedy").
std::string recovery_to_json(const Instance& inst, const RecoverySolution& sol,
                             const RecoveryGrid& grid,
                             const std::string& method);

std::string verification_to_json(const VerificationReport& report);

// Writes text to path, creating parent directories. Throws std::runtime_error
// on I/O failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace deconflict
