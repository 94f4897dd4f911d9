#pragma once

#include "fracpinn/loss.hpp"
#include "fracpinn/model.hpp"
#include "fracpinn/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fracpinn {

// One day of cumulative case counts. `recovered_cum` is absent when the
// source does not report recoveries.
struct RawCaseRecord {
    long day_index = 0;
    long long confirmed_cum = 0;
    std::optional<long long> recovered_cum;
    long long deaths_cum = 0;
};

struct NoiseSpec {
    double sigma_noise = 0.0; // absolute, on normalized fractions
    std::uint64_t seed = 0;
    bool clip_to_simplex = true;
};

// Subsamples the trajectory at every `every`-th node and adds i.i.d.
// Gaussian noise per compartment per time. All five compartments observed.
ObservationSet make_synthetic(const Trajectory& traj, std::size_t every, const NoiseSpec& noise);

// Normalized SEIRD observations from cumulative counts:
//   d = deaths/N, r = recovered/N, i = active/N, s = (N - confirmed)/N,
// with e latent (masked). The initial state takes e_0 = e0_multiplier * i_0
// and reduces s_0 to keep the simplex sum at 1.
struct Reconstruction {
    ObservationSet obs;
    SimplexState ic;
    std::vector<std::string> warnings;
};

Reconstruction reconstruct_observations(const std::vector<RawCaseRecord>& records,
                                        long long population, double e0_multiplier = 2.0);

// CSV schema: header `day,confirmed,recovered,deaths`; empty `recovered`
// signals absence. Errors name the offending row.
std::vector<RawCaseRecord> load_case_csv(const std::string& path);
void write_case_csv(const std::vector<RawCaseRecord>& records, const std::string& path);

// Observation CSV: `t,s,e,i,r,d,mask`; masked-out value fields are empty and
// `mask` lists the observed compartment letters.
void write_observations_csv(const ObservationSet& obs, const std::string& path);
ObservationSet read_observations_csv(const std::string& path);

// Re-index observation times onto a (possibly finer) uniform grid. Throws
// ConfigError when a time stamp is off-grid or beyond the horizon.
void align_to_grid(ObservationSet& obs, const GridSpec& grid);

} // namespace fracpinn
