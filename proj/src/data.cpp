#include "fracpinn/data.hpp"

#include "fracpinn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace fracpinn {

ObservationSet make_synthetic(const Trajectory& traj, std::size_t every, const NoiseSpec& noise) {
    if (every < 1) {
        throw std::invalid_argument("make_synthetic: every must be >= 1");
    }
    if (traj.states.empty()) {
        throw std::invalid_argument("make_synthetic: empty trajectory");
    }
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    ObservationSet obs;
    obs.dt = traj.dt;
    obs.mask = {true, true, true, true, true};
    const std::size_t n_obs = (traj.states.size() - 1) / every + 1;
    obs.values.resize(static_cast<Eigen::Index>(n_obs), 5);
    obs.node_index.reserve(n_obs);
    std::size_t row = 0;
    for (std::size_t j = 0; j < traj.states.size(); j += every, ++row) {
        obs.node_index.push_back(j);
        for (int c = 0; c < 5; ++c) {
            double v = traj.states[j][c];
            if (noise.sigma_noise > 0.0) {
                v += noise.sigma_noise * gauss(rng);
            }
            if (noise.clip_to_simplex) {
                v = std::clamp(v, 0.0, 1.0);
            }
            obs.values(static_cast<Eigen::Index>(row), c) = v;
        }
    }
    return obs;
}

Reconstruction reconstruct_observations(const std::vector<RawCaseRecord>& records,
                                        long long population, double e0_multiplier) {
    if (records.empty()) {
        throw std::invalid_argument("reconstruct_observations: no records");
    }
    long long max_confirmed = 0;
    for (const auto& rec : records) {
        max_confirmed = std::max(max_confirmed, rec.confirmed_cum);
    }
    if (population <= max_confirmed) {
        throw std::invalid_argument("reconstruct_observations: population must exceed the "
                                    "cumulative confirmed count");
    }

    const bool has_recovered = records.front().recovered_cum.has_value();
    long long prev_confirmed = -1, prev_deaths = -1, prev_recovered = -1;
    Reconstruction out;
    out.obs.dt = 1.0; // daily cadence
    out.obs.mask = {true, false, true, has_recovered, true};
    out.obs.values.resize(static_cast<Eigen::Index>(records.size()), 5);
    out.obs.values.setZero();
    const double N = static_cast<double>(population);

    for (std::size_t row = 0; row < records.size(); ++row) {
        const auto& rec = records[row];
        if (rec.recovered_cum.has_value() != has_recovered) {
            throw std::invalid_argument("reconstruct_observations: recovered column present "
                                        "for some rows only (row " + std::to_string(row) + ")");
        }
        if (rec.confirmed_cum < prev_confirmed || rec.deaths_cum < prev_deaths ||
            (has_recovered && *rec.recovered_cum < prev_recovered)) {
            throw std::invalid_argument("reconstruct_observations: cumulative series decreases "
                                        "at row " + std::to_string(row));
        }
        const long long recovered = has_recovered ? *rec.recovered_cum : 0;
        if (rec.deaths_cum + recovered > rec.confirmed_cum) {
            throw std::invalid_argument("reconstruct_observations: deaths + recovered exceed "
                                        "confirmed at row " + std::to_string(row));
        }
        long long active = rec.confirmed_cum - recovered - rec.deaths_cum;
        if (active < 0) {
            out.warnings.push_back("negative active count clamped to 0 at row " +
                                   std::to_string(row));
            active = 0;
        }
        const Eigen::Index r = static_cast<Eigen::Index>(row);
        out.obs.node_index.push_back(row);
        out.obs.values(r, 0) = static_cast<double>(population - rec.confirmed_cum) / N;
        out.obs.values(r, 2) = static_cast<double>(active) / N;
        out.obs.values(r, 3) = static_cast<double>(recovered) / N;
        out.obs.values(r, 4) = static_cast<double>(rec.deaths_cum) / N;

        prev_confirmed = rec.confirmed_cum;
        prev_deaths = rec.deaths_cum;
        if (has_recovered) {
            prev_recovered = recovered;
        }
    }

    const double i0 = out.obs.values(0, 2);
    const double r0 = out.obs.values(0, 3);
    const double d0 = out.obs.values(0, 4);
    const double e0 = e0_multiplier * i0;
    out.ic = SimplexState{1.0 - e0 - i0 - r0 - d0, e0, i0, r0, d0};
    out.ic.validate();
    return out;
}

std::vector<RawCaseRecord> load_case_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("load_case_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("load_case_csv: empty file " + path);
    }
    if (line != "day,confirmed,recovered,deaths") {
        throw IoError("load_case_csv: unexpected header in " + path);
    }
    std::vector<RawCaseRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string day, confirmed, recovered, deaths;
        if (!std::getline(ss, day, ',') || !std::getline(ss, confirmed, ',') ||
            !std::getline(ss, recovered, ',')) {
            throw IoError("load_case_csv: parse error at line " + std::to_string(line_no));
        }
        std::getline(ss, deaths, ',');
        try {
            RawCaseRecord rec;
            rec.day_index = std::stol(day);
            rec.confirmed_cum = std::stoll(confirmed);
            if (!recovered.empty()) {
                rec.recovered_cum = std::stoll(recovered);
            }
            rec.deaths_cum = std::stoll(deaths);
            records.push_back(rec);
        } catch (const std::exception&) {
            throw IoError("load_case_csv: parse error at line " + std::to_string(line_no));
        }
    }
    return records;
}

void write_case_csv(const std::vector<RawCaseRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_case_csv: cannot open " + path);
    }
    out << "day,confirmed,recovered,deaths\n";
    for (const auto& rec : records) {
        out << rec.day_index << "," << rec.confirmed_cum << ",";
        if (rec.recovered_cum) {
            out << *rec.recovered_cum;
        }
        out << "," << rec.deaths_cum << "\n";
    }
}

namespace {
constexpr char kCompartmentLetter[5] = {'s', 'e', 'i', 'r', 'd'};
}

void write_observations_csv(const ObservationSet& obs, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_observations_csv: cannot open " + path);
    }
    out << "t,s,e,i,r,d,mask\n";
    std::string mask_str;
    for (int c = 0; c < 5; ++c) {
        if (obs.mask[c]) {
            mask_str += kCompartmentLetter[c];
        }
    }
    char buf[64];
    for (std::size_t j = 0; j < obs.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", obs.time_at(j));
        out << buf;
        for (int c = 0; c < 5; ++c) {
            out << ",";
            if (obs.mask[c]) {
                std::snprintf(buf, sizeof(buf), "%.17g",
                              obs.values(static_cast<Eigen::Index>(j), c));
                out << buf;
            }
        }
        out << "," << mask_str << "\n";
    }
}

ObservationSet read_observations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("read_observations_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != "t,s,e,i,r,d,mask") {
        throw IoError("read_observations_csv: unexpected header in " + path);
    }
    std::vector<double> times;
    std::vector<std::array<double, 5>> rows;
    std::array<bool, 5> mask{};
    bool mask_known = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        std::array<std::string, 7> fields;
        for (int f = 0; f < 7; ++f) {
            if (!std::getline(ss, fields[f], ',') && f < 6) {
                throw IoError("read_observations_csv: parse error at line " +
                              std::to_string(line_no));
            }
        }
        std::array<bool, 5> row_mask{};
        for (char ch : fields[6]) {
            for (int c = 0; c < 5; ++c) {
                if (ch == kCompartmentLetter[c]) {
                    row_mask[c] = true;
                }
            }
        }
        if (!mask_known) {
            mask = row_mask;
            mask_known = true;
        } else if (mask != row_mask) {
            throw IoError("read_observations_csv: inconsistent mask at line " +
                          std::to_string(line_no));
        }
        try {
            times.push_back(std::stod(fields[0]));
            std::array<double, 5> vals{};
            for (int c = 0; c < 5; ++c) {
                vals[c] = mask[c] ? std::stod(fields[c + 1]) : 0.0;
            }
            rows.push_back(vals);
        } catch (const std::exception&) {
            throw IoError("read_observations_csv: parse error at line " + std::to_string(line_no));
        }
    }
    ObservationSet obs;
    obs.mask = mask;
    obs.values.resize(static_cast<Eigen::Index>(rows.size()), 5);
    if (rows.empty()) {
        obs.dt = 1.0;
        return obs;
    }
    // infer dt from the time stamps: the grid step divides all gaps
    double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    if (times[0] > 0.0) {
        dt = std::min(dt, times[0]);
    }
    if (!(dt > 0.0)) {
        throw IoError("read_observations_csv: non-increasing times in " + path);
    }
    obs.dt = dt;
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double idx = times[j] / dt;
        const double rounded = std::round(idx);
        if (std::abs(idx - rounded) > 1e-6) {
            throw IoError("read_observations_csv: time " + std::to_string(times[j]) +
                          " is not on a uniform grid");
        }
        obs.node_index.push_back(static_cast<std::size_t>(rounded));
        for (int c = 0; c < 5; ++c) {
            obs.values(static_cast<Eigen::Index>(j), c) = rows[j][c];
        }
    }
    return obs;
}

void align_to_grid(ObservationSet& obs, const GridSpec& grid) {
    std::vector<std::size_t> remapped;
    remapped.reserve(obs.size());
    for (std::size_t j = 0; j < obs.size(); ++j) {
        const double t = obs.time_at(j);
        const double idx = t / grid.dt;
        const double rounded = std::round(idx);
        if (std::abs(idx - rounded) > 1e-6) {
            throw ConfigError("align_to_grid: observation time " + std::to_string(t) +
                              " does not lie on the dt = " + std::to_string(grid.dt) + " grid");
        }
        const auto node = static_cast<std::size_t>(rounded);
        if (node >= grid.n_nodes) {
            throw ConfigError("align_to_grid: observation time " + std::to_string(t) +
                              " lies beyond the configured horizon");
        }
        remapped.push_back(node);
    }
    obs.node_index = std::move(remapped);
    obs.dt = grid.dt;
}

} // namespace fracpinn
