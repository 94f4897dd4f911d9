#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = FRACPINN_CLI_PATH;

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) {
        path = fs::temp_directory_path() / (std::string("fracpinn_cli_") + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

int run(const std::string& args) {
    const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_cfg(const fs::path& p, const std::string& body = "{}") {
    std::ofstream out(p);
    out << body;
}

} // namespace

TEST_CASE("missing config file exits with code 2") {
    CHECK(run("simulate /nonexistent/cfg.json") == 2);
}

TEST_CASE("unknown config key exits with code 2") {
    TempDir dir("badkey");
    write_cfg(dir.path / "cfg.json", R"({"not_a_key": 1})");
    CHECK(run("simulate " + (dir.path / "cfg.json").string()) == 2);
}

TEST_CASE("missing observation file exits with code 5") {
    TempDir dir("noobs");
    write_cfg(dir.path / "cfg.json");
    CHECK(run("fit " + (dir.path / "cfg.json").string() + " --obs /nonexistent/obs.csv --set output.dir=" + dir.str()) == 5);
}

TEST_CASE("simulate writes a conserving trajectory with a sidecar") {
    TempDir dir("sim");
    write_cfg(dir.path / "cfg.json", R"({"sim": {"alpha": 0.95}, "grid": {"dt": 0.5, "T": 50.0}})");
    CHECK(run("simulate " + (dir.path / "cfg.json").string() + " --set output.dir=" + dir.str()) ==
          0);
    std::ifstream in(dir.path / "trajectory.csv");
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,s,e,i,r,d");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ','); // t
        double sum = 0.0;
        while (std::getline(ss, cell, ',')) {
            sum += std::stod(cell);
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
    CHECK(rows == 101); // N + 1
    const std::string meta = slurp(dir.path / "trajectory.csv.meta.json");
    CHECK(meta.find("config_hash") != std::string::npos);
    CHECK(meta.find("seed") != std::string::npos);
}

TEST_CASE("generate subsampling row count") {
    TempDir dir("gen");
    write_cfg(dir.path / "cfg.json");
    CHECK(run("generate " + (dir.path / "cfg.json").string() + " --set data.every=2 --set output.dir=" +
              dir.str()) == 0);
    std::ifstream in(dir.path / "observations.csv");
    int rows = -1; // skip header
    std::string line;
    while (std::getline(in, line)) {
        ++rows;
    }
    CHECK(rows == 301); // 601-node grid, every 2nd node
}

TEST_CASE("commands are byte-identical across repeated runs") {
    TempDir a("det_a"), b("det_b");
    write_cfg(a.path / "cfg.json", R"({"noise": {"sigma": 0.01}})");
    write_cfg(b.path / "cfg.json", R"({"noise": {"sigma": 0.01}})");
    const std::string common = " --set grid.T=60.0 --set data.every=4";
    CHECK(run("generate " + (a.path / "cfg.json").string() + common + " --set output.dir=" + a.str()) == 0);
    CHECK(run("generate " + (b.path / "cfg.json").string() + common + " --set output.dir=" + b.str()) == 0);
    CHECK(slurp(a.path / "observations.csv") == slurp(b.path / "observations.csv"));
}

TEST_CASE("short fit emits result json, log, fitted trajectory and checkpoint") {
    TempDir dir("fit");
    write_cfg(dir.path / "cfg.json",
              R"({"grid": {"dt": 0.5, "T": 60.0},
                  "network": {"hidden": [16, 16], "head": "softmax"},
                  "train": {"pretrain_iters": 40,
                            "adam": {"lr0": 0.001, "decay_rate": 0.5, "decay_every": 3000,
                                     "beta1": 0.9, "beta2": 0.999, "eps": 1e-8, "max_iters": 80},
                            "lbfgs": {"memory": 10, "max_iters": 10, "c1": 1e-4, "c2": 0.9,
                                      "max_line_evals": 25}}})");
    const std::string cfg = (dir.path / "cfg.json").string();
    CHECK(run("generate " + cfg + " --set data.every=4 --set output.dir=" + dir.str()) == 0);
    CHECK(run("fit " + cfg + " --obs " + (dir.path / "observations.csv").string() +
              " --set output.dir=" + dir.str()) == 0);
    CHECK(fs::exists(dir.path / "fit_result.json"));
    CHECK(fs::exists(dir.path / "training_log.csv"));
    CHECK(fs::exists(dir.path / "fitted_trajectory.csv"));
    CHECK(fs::exists(dir.path / "checkpoint.ckpt"));

    const std::string result = slurp(dir.path / "fit_result.json");
    CHECK(result.find("\"alpha\"") != std::string::npos);
    CHECK(result.find("\"stop_reason\"") != std::string::npos);
    CHECK(result.find("\"config_hash\"") != std::string::npos);

    std::ifstream log(dir.path / "training_log.csv");
    std::string header;
    std::getline(log, header);
    CHECK(header == "iter,phase,total,data,phys,ic,cons,reg,alpha,beta,sigma,gamma,mu");

    const std::string ckpt = slurp(dir.path / "checkpoint.ckpt");
    CHECK(ckpt.rfind("FRACPINN-CKPT-1", 0) == 0);

    // rerun into a second directory: identical result bytes
    TempDir dir2("fit2");
    write_cfg(dir2.path / "cfg.json", slurp(dir.path / "cfg.json"));
    CHECK(run("fit " + (dir2.path / "cfg.json").string() + " --obs " +
              (dir.path / "observations.csv").string() + " --set output.dir=" + dir2.str()) == 0);
    CHECK(slurp(dir2.path / "training_log.csv") == slurp(dir.path / "training_log.csv"));
    const std::string r1 = slurp(dir.path / "fit_result.json");
    const std::string r2 = slurp(dir2.path / "fit_result.json");
    CHECK(r1 == r2);
}

TEST_CASE("profile and bootstrap and ablate smoke") {
    TempDir dir("analysis");
    write_cfg(dir.path / "cfg.json",
              R"({"grid": {"dt": 0.5, "T": 60.0},
                  "network": {"hidden": [16, 16], "head": "softmax"},
                  "analysis": {"alpha_grid": [0.85, 1.0], "n_replicates": 2, "ablate": []},
                  "train": {"pretrain_iters": 30,
                            "adam": {"lr0": 0.001, "decay_rate": 0.5, "decay_every": 3000,
                                     "beta1": 0.9, "beta2": 0.999, "eps": 1e-8, "max_iters": 60},
                            "lbfgs": {"memory": 10, "max_iters": 5, "c1": 1e-4, "c2": 0.9,
                                      "max_line_evals": 25}}})");
    const std::string cfg = (dir.path / "cfg.json").string();
    CHECK(run("generate " + cfg + " --set data.every=4 --set output.dir=" + dir.str()) == 0);
    const std::string obs = (dir.path / "observations.csv").string();

    CHECK(run("profile " + cfg + " --obs " + obs + " --jobs 2 --set output.dir=" + dir.str()) == 0);
    std::ifstream prof(dir.path / "profile.csv");
    std::string header;
    std::getline(prof, header);
    CHECK(header == "alpha,loss,beta,sigma,gamma,mu");
    int rows = 0;
    std::string line;
    while (std::getline(prof, line)) {
        ++rows;
    }
    CHECK(rows == 2);

    CHECK(run("bootstrap " + cfg + " --obs " + obs + " --set output.dir=" + dir.str()) == 0);
    const std::string boot = slurp(dir.path / "bootstrap.json");
    CHECK(boot.find("\"n_replicates\": 2") != std::string::npos);
    CHECK(boot.find("\"replicates\"") != std::string::npos);
    CHECK(boot.find("\"ci95\"") != std::string::npos);

    CHECK(run("ablate " + cfg + " --obs " + obs + " --disable phys --set output.dir=" +
              dir.str()) == 0);
    CHECK(fs::exists(dir.path / "ablate_fit_result.json"));
    CHECK(slurp(dir.path / "ablate_fit_result.json").find("\"ablation\": \"phys\"") !=
          std::string::npos);
}

TEST_CASE("raw case CSV ingestion path") {
    TempDir dir("raw");
    write_cfg(dir.path / "cfg.json",
              R"({"grid": {"dt": 1.0, "T": 20.0},
                  "data": {"format": "raw_cases", "population": 100000},
                  "network": {"hidden": [16, 16], "head": "softmax"},
                  "train": {"pretrain_iters": 20,
                            "adam": {"lr0": 0.001, "decay_rate": 0.5, "decay_every": 3000,
                                     "beta1": 0.9, "beta2": 0.999, "eps": 1e-8, "max_iters": 40},
                            "lbfgs": {"memory": 10, "max_iters": 5, "c1": 1e-4, "c2": 0.9,
                                      "max_line_evals": 25}}})");
    std::ofstream cases(dir.path / "cases.csv");
    cases << "day,confirmed,recovered,deaths\n";
    long long conf = 50;
    for (int day = 0; day <= 20; ++day) {
        const long long rec = conf / 4, dth = conf / 50;
        cases << day << "," << conf << "," << rec << "," << dth << "\n";
        conf += 30 + 5 * day;
    }
    cases.close();
    CHECK(run("fit " + (dir.path / "cfg.json").string() + " --obs " +
              (dir.path / "cases.csv").string() + " --set output.dir=" + dir.str()) == 0);
    CHECK(fs::exists(dir.path / "fit_result.json"));
}
