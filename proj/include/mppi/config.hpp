#pragma once

#include <string>

#include "mppi/bench.hpp"

namespace mppi {

SamplerKind sampler_kind_from_string(const std::string& name);
std::string to_string(SamplerKind kind);

TaskKind task_kind_from_string(const std::string& name);

/// Shared noise default: sigma = (1.0, 0.4) for the planar (Fx, Fz) tasks.
NoiseSpecd default_noise_spec();

/// Parses an experiment configuration from JSON text (// comments allowed).
/// Unknown keys are rejected. See configs/paper_repro.json for the schema.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Reads and parses a configuration file.
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace mppi
