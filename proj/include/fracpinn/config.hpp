#pragma once

#include "fracpinn/data.hpp"
#include "fracpinn/loss.hpp"
#include "fracpinn/solver.hpp"
#include "fracpinn/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fracpinn {

// Master run record parsed from a single JSON document. Every field has a
// default; unknown keys are rejected.
struct RunConfig {
    std::uint64_t seed = 1;
    GridSpec grid;                 // dt = 0.5 day, T = 300 days
    ParamBounds bounds;            // alpha_min 0.5, beta_max 1.0, Mpox boxes
    EpidemicParams sim_params;     // ground truth used by simulate/generate
    SimplexState sim_ic;
    SolverConfig solver;
    NoiseSpec noise;
    std::size_t every = 1;         // observation subsampling for generate
    std::string data_format = "observations"; // or "raw_cases"
    long long population = 0;      // required for raw_cases
    double e0_multiplier = 2.0;
    TrainConfig train;
    std::vector<double> alpha_grid = {0.8, 0.85, 0.9, 0.95, 1.0};
    int n_replicates = 50;
    std::vector<std::string> ablate; // subset of {phys, cons, ic, reg}
    std::string output_dir = "out";

    std::string canonical_json() const; // sorted-key dump of the full record
    std::string config_hash() const;    // FNV-1a 64 over the canonical dump
};

// Loads the JSON file, applies dotted-path overrides ("train.adam.lr0=0.01"),
// fills defaults, and rejects unknown keys. Throws ConfigError.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});

} // namespace fracpinn
