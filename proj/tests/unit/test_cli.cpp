#include <catch_amalgamated.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sgalab/cli.hpp"

using namespace sgalab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("sgalab_test_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string field_of(const std::string& sub, const std::string& doc)
{
    try {
        cli::parse_config_text(sub, doc);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST_CASE("minimal disordered config round trips through its echo")
{
    const auto cfg = cli::parse_config_text("disordered", "pi: 0.8\nm: 128\np_c: 0.1\nreplicas: 100\nseed: 42\n");
    CHECK(cfg.real("pi") == 0.8);
    CHECK(cfg.size("m") == 128);
    CHECK(cfg.params.at("seed").get<std::uint64_t>() == 42);
    const auto again = cli::parse_config_text("disordered", cfg.echo());
    CHECK(again.echo() == cfg.echo());
    CHECK(cfg.echo().find("threads") == std::string::npos);
}

TEST_CASE("config validation names the field")
{
    CHECK(field_of("disordered", "pi: 1.9\np_c: 0.1\nseed: 1\n") == "pi");
    CHECK(field_of("disordered", "pi: 0.8\n") == "seed");
    CHECK(field_of("disordered", "seed: 1\ncolour: 3\n") == "colour");
    CHECK(field_of("disordered", "seed: 1\nm: 7\n") == "m");
    CHECK(field_of("disordered", "seed: 1\nm: lots\n") == "m");
    CHECK(field_of("disordered", "seed: -1\n") == "seed");
    CHECK(field_of("quasispecies", "seed: 1\npi: 0.9\n") == "pi");
    CHECK(field_of("dominance-nstar", "seed: 1\npi: 0.8\neps: 0.1\n") == "eps");
    CHECK(field_of("tune", "seed: 1\ntarget_pi: 0.9\n") == "target_pi");
    CHECK(field_of("tune", "seed: 1\nadjust: sideways\n") == "adjust");
    CHECK(field_of("gw", "seed: 1\nlaw: cauchy\n") == "law");
    CHECK(field_of("sweep", "seed: 1\ngrid: []\n") == "grid");
    CHECK(field_of("nonsense", "seed: 1\n") == "subcommand");
    CHECK_THROWS_AS(cli::parse_config_text("disordered", "[1, 2"), ParseError);
}

TEST_CASE("output directory falls back to the environment")
{
    ::setenv("SGALAB_OUT_DIR", "/tmp/sgalab_env_out", 1);
    CHECK(cli::parse_config_text("gw", "seed: 1\n").out_dir == "/tmp/sgalab_env_out");
    CHECK(cli::parse_config_text("gw", "seed: 1\nout_dir: here\n").out_dir == "here");
    ::unsetenv("SGALAB_OUT_DIR");
    CHECK(cli::parse_config_text("gw", "seed: 1\n").out_dir == "out");
}

TEST_CASE("runs are byte-identical across repeats and thread counts")
{
    const std::vector<std::pair<std::string, std::string>> cases{
        {"disordered", "m: 64\nreplicas: 40\nseed: 5\n"},
        {"quasispecies", "m: 32\nreplicas: 40\nseed: 5\n"},
        {"sweep", "m: 32\nreplicas: 20\ngrid: [0.7, 1.3]\nseed: 5\n"},
        {"dominance-tn", "m: 16\nreplicas: 200\nseed: 5\n"},
        {"dominance-nstar", "m: 16\nreplicas: 200\neps: 0.04\nseed: 5\n"},
        {"dominance-onestep", "samples: 500\nseed: 5\n"},
        {"gw", "replicas: 500\nhorizon: 30\nseed: 5\n"},
        {"lowerchain", "replicas: 500\nseed: 5\n"},
        {"tune", "m: 16\nreplicas: 4\nhorizon: 10\nseed: 5\n"},
    };
    for (const auto& [sub, doc] : cases) {
        std::vector<fs::path> dirs;
        for (const char* threads : {"1", "1", "8"}) {
            const auto dir = scratch(sub + "_" + std::to_string(dirs.size()));
            auto cfg = cli::parse_config_text(sub, doc + "threads: " + threads + "\nout_dir: " + dir.string() + "\n");
            const auto out = cli::run(cfg);
            REQUIRE_FALSE(out.files.empty());
            dirs.push_back(dir);
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const auto name = entry.path().filename();
            const auto a = slurp(dirs[0] / name);
            INFO(sub << " " << name.string());
            REQUIRE((a.rfind("# schema: sgalab.", 0) == 0 || name == "summary.json"));
            CHECK(a == slurp(dirs[1] / name));
            CHECK(a == slurp(dirs[2] / name));
        }
    }
}

TEST_CASE("CSV schemas")
{
    const auto dir = scratch("schema");
    cli::run(cli::parse_config_text("disordered", "m: 16\nreplicas: 3\nseed: 1\nout_dir: " + dir.string() + "\n"));
    std::istringstream traj(slurp(dir / "trajectories.csv"));
    std::string line;
    std::getline(traj, line);
    CHECK(line == "# schema: sgalab.trajectories.v1");
    std::getline(traj, line);
    CHECK(line.rfind("# config: {", 0) == 0);
    std::getline(traj, line);
    CHECK(line == "replica,gen,f_star,f_bar,n_master,n_descendants,d_max");
    std::getline(traj, line);
    CHECK(line == "0,0,2,1.0625,1,1,0");
    std::istringstream events(slurp(dir / "events.csv"));
    for (int i = 0; i < 3; ++i) {
        std::getline(events, line);
    }
    CHECK(line == "replica,tau0,tau1,tau2,tau_bar,event_disordered,event_quasispecies");

    const auto sdir = scratch("schema_sweep");
    cli::run(cli::parse_config_text("sweep", "m: 16\nreplicas: 3\ngrid: [0.5]\nseed: 1\nout_dir: " + sdir.string() + "\n"));
    std::istringstream sweep(slurp(sdir / "sweep.csv"));
    for (int i = 0; i < 3; ++i) {
        std::getline(sweep, line);
    }
    CHECK(line == "pi,m,freq_disordered,ci_lo,ci_hi,freq_quasispecies,qci_lo,qci_hi");
}

TEST_CASE("disordered run at m = 64 with 100 replicas is fast")
{
    const auto dir = scratch("timing");
    const auto t0 = std::chrono::steady_clock::now();
    cli::run(cli::parse_config_text("disordered", "m: 64\nreplicas: 100\nseed: 2\nout_dir: " + dir.string() + "\n"));
    const auto s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(s < 60.0);
}

TEST_CASE("exit codes of the command-line tool")
{
    const char* exe = std::getenv("SGALAB_CLI");
    if (exe == nullptr) {
        SKIP("SGALAB_CLI not set");
    }
    const auto dir = scratch("exit");
    fs::create_directories(dir);
    const std::string out = " --out_dir " + dir.string() + " 2>/dev/null";
    const auto code = [](const std::string& cmd) {
        const int raw = std::system(cmd.c_str());
        return WEXITSTATUS(raw);
    };
    CHECK(code(std::string(exe) + " disordered --seed 1 --m 16 --replicas 5" + out) == 0);
    CHECK(fs::exists(dir / "events.csv"));
    CHECK(code(std::string(exe) + " disordered --seed 1 --pi 1.9" + out) == 1);
    CHECK(code(std::string(exe) + " disordered --m 16" + out) == 1);
    // flat table landscape: the run itself fails its precondition
    const auto flat = dir / "flat.yaml";
    std::ofstream(flat) << "kind: table\nell: 2\nentries:\n  - [\"00\", 1]\n  - [\"01\", 1]\n  - [\"10\", 1]\n  - [\"11\", 1]\n";
    CHECK(code(std::string(exe) + " quasispecies --seed 1 --m 4 --landscape " + flat.string() + out) == 2);
    const auto cfg = dir / "cfg.yaml";
    std::ofstream(cfg) << "m: 16\nreplicas: 2\nseed: 3\n";
    CHECK(code(std::string(exe) + " disordered -c " + cfg.string() + " --replicas 3" + out) == 0);
}
