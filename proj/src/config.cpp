#include "fracpinn/config.hpp"

#include "fracpinn/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fracpinn {

using json = nlohmann::json;

namespace {

json default_config() {
    return json{
        {"seed", 1},
        {"grid", {{"dt", 0.5}, {"T", 300.0}}},
        {"model",
         {{"alpha_min", 0.5},
          {"beta_max", 1.0},
          {"rate_bounds",
           {{"beta", {0.1, 0.3}},
            {"sigma", {0.077, 0.2}},
            {"gamma", {0.036, 0.071}},
            {"mu", {0.001, 0.03}}}}}},
        {"sim",
         {{"alpha", 0.9},
          {"beta", 0.25},
          {"sigma", 0.13},
          {"gamma", 0.052},
          {"mu", 0.005},
          {"ic", {{"s", 0.9}, {"e", 0.05}, {"i", 0.04}, {"r", 0.01}, {"d", 0.0}}},
          {"scheme", "implicit"},
          {"fixed_point_tol", 1e-12},
          {"fixed_point_max_iter", 50}}},
        {"network", {{"hidden", {64, 64, 64}}, {"head", "softmax"}}},
        {"noise", {{"sigma", 0.0}, {"seed", 7}, {"clip_to_simplex", true}}},
        {"data",
         {{"every", 1},
          {"format", "observations"},
          {"population", 0},
          {"e0_multiplier", 2.0}}},
        {"train",
         {{"pretrain_iters", 2000},
          {"adam",
           {{"lr0", 1e-3},
            {"decay_rate", 0.5},
            {"decay_every", 3000},
            {"beta1", 0.9},
            {"beta2", 0.999},
            {"eps", 1e-8},
            {"max_iters", 8000}}},
          {"lbfgs",
           {{"memory", 10},
            {"max_iters", 500},
            {"c1", 1e-4},
            {"c2", 0.9},
            {"max_line_evals", 25}}},
          {"early_stop", {{"tol", 1e-8}, {"patience", 500}}},
          {"lambdas",
           {{"data", 1.0},
            {"phys", 1.0},
            {"ic", 10.0},
            {"cons", -1.0}, // -1: resolved from the head (0 softmax, 1 softplus)
            {"reg_theta", 1e-6},
            {"reg_params", 0.0}}},
          {"init", {{"alpha", 0.99}, {"beta", 0.2}, {"sigma", 0.1385}, {"gamma", 0.0535}, {"mu", 0.0155}}}}},
        {"analysis",
         {{"alpha_grid", {0.8, 0.85, 0.9, 0.95, 1.0}},
          {"n_replicates", 50},
          {"ablate", json::array()}}},
        {"output", {{"dir", "out"}}},
    };
}

// merge `user` into `base`, rejecting keys absent from the defaults
void merge_checked(json& base, const json& user, const std::string& prefix) {
    if (!user.is_object()) {
        throw ConfigError("config: expected an object at " + (prefix.empty() ? "top level" : prefix));
    }
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!base.contains(it.key())) {
            throw ConfigError("config: unknown key '" + path + "'");
        }
        if (base[it.key()].is_object() && !it.value().is_array()) {
            merge_checked(base[it.key()], it.value(), path);
        } else {
            base[it.key()] = it.value();
        }
    }
}

json parse_scalar(const std::string& text) {
    // numbers, booleans and null parse as JSON; anything else is a string
    const json parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded() && !parsed.is_object()) {
        return parsed;
    }
    return json(text);
}

void apply_override(json& cfg, const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("config: override '" + spec + "' is not key=value");
    }
    const std::string path = spec.substr(0, eq);
    const json value = parse_scalar(spec.substr(eq + 1));

    json* node = &cfg;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        parts.push_back(part);
    }
    if (parts.empty()) {
        throw ConfigError("config: empty override path");
    }
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
        if (!node->contains(parts[k]) || !(*node)[parts[k]].is_object()) {
            throw ConfigError("config: override path '" + path + "' does not exist");
        }
        node = &(*node)[parts[k]];
    }
    if (!node->contains(parts.back())) {
        throw ConfigError("config: override path '" + path + "' does not exist");
    }
    (*node)[parts.back()] = value;
}

double require_positive(const json& j, const std::string& what) {
    const double v = j.get<double>();
    if (!(v > 0.0)) {
        throw ConfigError("config: " + what + " must be > 0");
    }
    return v;
}

RunConfig extract(const json& j) {
    RunConfig cfg;
    try {
        cfg.seed = j.at("seed").get<std::uint64_t>();

        const auto& grid = j.at("grid");
        cfg.grid.dt = require_positive(grid.at("dt"), "grid.dt");
        const double T = require_positive(grid.at("T"), "grid.T");
        const double steps = T / cfg.grid.dt;
        const double rounded = std::round(steps);
        if (std::abs(steps - rounded) > 1e-9 || rounded < 1.0) {
            throw ConfigError("config: grid.T must be a positive multiple of grid.dt");
        }
        cfg.grid.n_nodes = static_cast<std::size_t>(rounded) + 1;

        const auto& model = j.at("model");
        cfg.bounds.alpha_min = model.at("alpha_min").get<double>();
        if (cfg.bounds.alpha_min < 0.0 || cfg.bounds.alpha_min >= 1.0) {
            throw ConfigError("config: model.alpha_min must lie in [0, 1)");
        }
        cfg.bounds.beta_max = require_positive(model.at("beta_max"), "model.beta_max");
        const auto& boxes = model.at("rate_bounds");
        const char* names[4] = {"beta", "sigma", "gamma", "mu"};
        for (int p = 0; p < 4; ++p) {
            if (boxes.at(names[p]).is_null()) {
                continue; // softplus mode for this rate
            }
            const auto box = boxes.at(names[p]).get<std::vector<double>>();
            if (box.size() != 2 || !(box[0] > 0.0) || !(box[1] > box[0])) {
                throw ConfigError(std::string("config: model.rate_bounds.") + names[p] +
                                  " must be [lo, hi] with 0 < lo < hi");
            }
            cfg.bounds.boxes[p] = RateBox{box[0], box[1]};
        }

        const auto& sim = j.at("sim");
        cfg.sim_params.alpha = sim.at("alpha").get<double>();
        cfg.sim_params.beta = sim.at("beta").get<double>();
        cfg.sim_params.sigma = sim.at("sigma").get<double>();
        cfg.sim_params.gamma_r = sim.at("gamma").get<double>();
        cfg.sim_params.mu = sim.at("mu").get<double>();
        const auto& ic = sim.at("ic");
        cfg.sim_ic = SimplexState{ic.at("s").get<double>(), ic.at("e").get<double>(),
                                  ic.at("i").get<double>(), ic.at("r").get<double>(),
                                  ic.at("d").get<double>()};
        const std::string scheme = sim.at("scheme").get<std::string>();
        if (scheme == "implicit") {
            cfg.solver.scheme = Scheme::implicit;
        } else if (scheme == "explicit") {
            cfg.solver.scheme = Scheme::explicit_step;
        } else {
            throw ConfigError("config: sim.scheme must be 'implicit' or 'explicit'");
        }
        cfg.solver.fixed_point_tol = require_positive(sim.at("fixed_point_tol"), "sim.fixed_point_tol");
        cfg.solver.fixed_point_max_iter = sim.at("fixed_point_max_iter").get<int>();
        if (cfg.solver.fixed_point_max_iter < 1) {
            throw ConfigError("config: sim.fixed_point_max_iter must be >= 1");
        }

        const auto& network = j.at("network");
        cfg.train.layer_dims = {1};
        for (int h : network.at("hidden").get<std::vector<int>>()) {
            cfg.train.layer_dims.push_back(h);
        }
        cfg.train.layer_dims.push_back(5);
        const std::string head = network.at("head").get<std::string>();
        if (head == "softmax") {
            cfg.train.head = OutputHead::softmax;
        } else if (head == "softplus") {
            cfg.train.head = OutputHead::softplus;
        } else {
            throw ConfigError("config: network.head must be 'softmax' or 'softplus'");
        }

        const auto& noise = j.at("noise");
        cfg.noise.sigma_noise = noise.at("sigma").get<double>();
        if (cfg.noise.sigma_noise < 0.0) {
            throw ConfigError("config: noise.sigma must be >= 0");
        }
        cfg.noise.seed = noise.at("seed").get<std::uint64_t>();
        cfg.noise.clip_to_simplex = noise.at("clip_to_simplex").get<bool>();

        const auto& data = j.at("data");
        cfg.every = data.at("every").get<std::size_t>();
        if (cfg.every < 1) {
            throw ConfigError("config: data.every must be >= 1");
        }
        cfg.data_format = data.at("format").get<std::string>();
        if (cfg.data_format != "observations" && cfg.data_format != "raw_cases") {
            throw ConfigError("config: data.format must be 'observations' or 'raw_cases'");
        }
        cfg.population = data.at("population").get<long long>();
        cfg.e0_multiplier = data.at("e0_multiplier").get<double>();

        const auto& train = j.at("train");
        cfg.train.seed = cfg.seed;
        cfg.train.grid = cfg.grid;
        cfg.train.bounds = cfg.bounds;
        cfg.train.pretrain_iters = train.at("pretrain_iters").get<int>();
        const auto& adam = train.at("adam");
        cfg.train.adam.lr0 = require_positive(adam.at("lr0"), "train.adam.lr0");
        cfg.train.adam.decay_rate = adam.at("decay_rate").get<double>();
        if (!(cfg.train.adam.decay_rate > 0.0) || cfg.train.adam.decay_rate > 1.0) {
            throw ConfigError("config: train.adam.decay_rate must lie in (0, 1]");
        }
        cfg.train.adam.decay_every = adam.at("decay_every").get<int>();
        cfg.train.adam.beta1 = adam.at("beta1").get<double>();
        cfg.train.adam.beta2 = adam.at("beta2").get<double>();
        cfg.train.adam.eps = adam.at("eps").get<double>();
        cfg.train.adam.max_iters = adam.at("max_iters").get<int>();
        const auto& lbfgs = train.at("lbfgs");
        cfg.train.lbfgs.memory = lbfgs.at("memory").get<int>();
        cfg.train.lbfgs.max_iters = lbfgs.at("max_iters").get<int>();
        cfg.train.lbfgs.c1 = lbfgs.at("c1").get<double>();
        cfg.train.lbfgs.c2 = lbfgs.at("c2").get<double>();
        cfg.train.lbfgs.max_line_evals = lbfgs.at("max_line_evals").get<int>();
        const auto& early = train.at("early_stop");
        cfg.train.early_stop.tol = require_positive(early.at("tol"), "train.early_stop.tol");
        cfg.train.early_stop.patience = early.at("patience").get<int>();
        if (cfg.train.early_stop.patience < 1) {
            throw ConfigError("config: train.early_stop.patience must be >= 1");
        }
        const auto& lambdas = train.at("lambdas");
        cfg.train.lambdas.data = lambdas.at("data").get<double>();
        cfg.train.lambdas.phys = lambdas.at("phys").get<double>();
        cfg.train.lambdas.ic = lambdas.at("ic").get<double>();
        const double cons = lambdas.at("cons").get<double>();
        cfg.train.lambdas.cons =
            cons >= 0.0 ? cons : (cfg.train.head == OutputHead::softmax ? 0.0 : 1.0);
        cfg.train.lambdas.reg_theta = lambdas.at("reg_theta").get<double>();
        cfg.train.lambdas.reg_params = lambdas.at("reg_params").get<double>();
        const auto& init = train.at("init");
        cfg.train.alpha_init = init.at("alpha").get<double>();
        cfg.train.rate_init.beta = init.at("beta").get<double>();
        cfg.train.rate_init.sigma = init.at("sigma").get<double>();
        cfg.train.rate_init.gamma_r = init.at("gamma").get<double>();
        cfg.train.rate_init.mu = init.at("mu").get<double>();

        const auto& analysis = j.at("analysis");
        cfg.alpha_grid = analysis.at("alpha_grid").get<std::vector<double>>();
        cfg.n_replicates = analysis.at("n_replicates").get<int>();
        cfg.ablate = analysis.at("ablate").get<std::vector<std::string>>();

        cfg.output_dir = j.at("output").at("dir").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

json merged_document(const std::string& text, const std::vector<std::string>& overrides) {
    json user = json::parse(text, nullptr, false);
    if (user.is_discarded()) {
        throw ConfigError("config: invalid JSON");
    }
    json merged = default_config();
    merge_checked(merged, user, "");
    for (const auto& spec : overrides) {
        apply_override(merged, spec);
    }
    return merged;
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
    const json merged = merged_document(text, overrides);
    RunConfig cfg = extract(merged);
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), overrides);
}

std::string RunConfig::canonical_json() const {
    json j = default_config();
    // write the effective values back into the schema
    j["seed"] = seed;
    j["grid"]["dt"] = grid.dt;
    j["grid"]["T"] = grid.t_end();
    j["model"]["alpha_min"] = bounds.alpha_min;
    j["model"]["beta_max"] = bounds.beta_max;
    const char* names[4] = {"beta", "sigma", "gamma", "mu"};
    for (int p = 0; p < 4; ++p) {
        if (bounds.boxes[p]) {
            j["model"]["rate_bounds"][names[p]] = {bounds.boxes[p]->lo, bounds.boxes[p]->hi};
        } else {
            j["model"]["rate_bounds"][names[p]] = nullptr;
        }
    }
    j["sim"]["alpha"] = sim_params.alpha;
    j["sim"]["beta"] = sim_params.beta;
    j["sim"]["sigma"] = sim_params.sigma;
    j["sim"]["gamma"] = sim_params.gamma_r;
    j["sim"]["mu"] = sim_params.mu;
    j["sim"]["ic"] = {{"s", sim_ic.s}, {"e", sim_ic.e}, {"i", sim_ic.i}, {"r", sim_ic.r},
                      {"d", sim_ic.d}};
    j["sim"]["scheme"] = solver.scheme == Scheme::implicit ? "implicit" : "explicit";
    j["sim"]["fixed_point_tol"] = solver.fixed_point_tol;
    j["sim"]["fixed_point_max_iter"] = solver.fixed_point_max_iter;
    std::vector<int> hidden(train.layer_dims.begin() + 1, train.layer_dims.end() - 1);
    j["network"]["hidden"] = hidden;
    j["network"]["head"] = train.head == OutputHead::softmax ? "softmax" : "softplus";
    j["noise"]["sigma"] = noise.sigma_noise;
    j["noise"]["seed"] = noise.seed;
    j["noise"]["clip_to_simplex"] = noise.clip_to_simplex;
    j["data"]["every"] = every;
    j["data"]["format"] = data_format;
    j["data"]["population"] = population;
    j["data"]["e0_multiplier"] = e0_multiplier;
    j["train"]["pretrain_iters"] = train.pretrain_iters;
    j["train"]["adam"] = {{"lr0", train.adam.lr0},
                          {"decay_rate", train.adam.decay_rate},
                          {"decay_every", train.adam.decay_every},
                          {"beta1", train.adam.beta1},
                          {"beta2", train.adam.beta2},
                          {"eps", train.adam.eps},
                          {"max_iters", train.adam.max_iters}};
    j["train"]["lbfgs"] = {{"memory", train.lbfgs.memory},
                           {"max_iters", train.lbfgs.max_iters},
                           {"c1", train.lbfgs.c1},
                           {"c2", train.lbfgs.c2},
                           {"max_line_evals", train.lbfgs.max_line_evals}};
    j["train"]["early_stop"] = {{"tol", train.early_stop.tol},
                                {"patience", train.early_stop.patience}};
    j["train"]["lambdas"] = {{"data", train.lambdas.data},
                             {"phys", train.lambdas.phys},
                             {"ic", train.lambdas.ic},
                             {"cons", train.lambdas.cons},
                             {"reg_theta", train.lambdas.reg_theta},
                             {"reg_params", train.lambdas.reg_params}};
    j["train"]["init"] = {{"alpha", train.alpha_init},
                          {"beta", train.rate_init.beta},
                          {"sigma", train.rate_init.sigma},
                          {"gamma", train.rate_init.gamma_r},
                          {"mu", train.rate_init.mu}};
    j["analysis"]["alpha_grid"] = alpha_grid;
    j["analysis"]["n_replicates"] = n_replicates;
    j["analysis"]["ablate"] = ablate;
    j["output"]["dir"] = output_dir;
    return j.dump(); // nlohmann::json keeps object keys sorted
}

std::string RunConfig::config_hash() const {
    // the hash identifies the experiment; where outputs land is not part of it
    json j = json::parse(canonical_json());
    j["output"]["dir"] = "out";
    const std::string text = j.dump();
    std::uint64_t h = 1469598103934665603ull; // FNV-1a 64
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fracpinn
