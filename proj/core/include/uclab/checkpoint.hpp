#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "uclab/agent.hpp"
#include "uclab/config.hpp"
#include "uclab/ensemble.hpp"

namespace uclab {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

EnsembleParams ensemble_params_from(const RunConfig& cfg);
ActorParams actor_params_from(const RunConfig& cfg);

// Versioned binary container: magic + version, a JSON manifest (embedded run
// config, layer shapes, Adam step counters, ordered blob directory), then raw
// little-endian float32 blobs for every parameter and optimizer-moment array.
// Round-trips bitwise.
void save_checkpoint(const std::string& path, const CriticEnsemble& ensemble,
                     const Actor& actor, const RunConfig& cfg, std::int64_t env_steps);

struct LoadedCheckpoint {
  RunConfig config;
  std::int64_t env_steps = 0;
  CriticEnsemble ensemble;
  Actor actor;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace uclab
