#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "surropt/cli.hpp"

using namespace surropt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string log;
};

class Workspace {
public:
    explicit Workspace(const std::string& tag) : dir_(fs::temp_directory_path() / ("surropt_cli_" + tag))
    {
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Workspace() { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) const
    {
        const auto p = (dir_ / name).string();
        std::ofstream(p) << text;
        return p;
    }
    std::string config(const json& j) const { return write("config.json", j.dump(2)); }
    fs::path out() const { return dir_ / "out"; }

    Outcome invoke(const std::string& args) const
    {
        const auto log = (dir_ / "stderr.txt").string();
        const std::string cmd = std::string(SURROPT_BIN) + " " + args + " 2>" + log + " >/dev/null";
        const int status = std::system(cmd.c_str());
        std::stringstream buf;
        buf << std::ifstream(log).rdbuf();
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, buf.str()};
    }

private:
    fs::path dir_;
};

int csv_rows(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    int n = -1; // header
    while (std::getline(in, line)) ++n;
    return n;
}

json sphere_config()
{
    return {{"schema_version", 1},
            {"simulator", {{"builtin", "sphere"}, {"dim", 2}}},
            {"objective", {{"targets", {1.0, 1.0, 1.0}}, {"weights", {1.0, 1.0, 1.0}}}},
            {"initial_samples", 30},
            {"train", {{"hidden_layers", {8}}, {"max_epochs", 30}, {"learning_rate", 0.01}}},
            {"multistart", {{"num_starts", 8}, {"num_steps", 40}}},
            {"stopping", {{"max_iterations", 3}, {"use_convergence", false}}}};
}

json read_json(const fs::path& p)
{
    std::ifstream in(p);
    return json::parse(in);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing is strict")
{
    auto j = sphere_config();
    CHECK_NOTHROW(cli::parse_config(j));

    j["train"]["hidden_layer"] = {4};
    try {
        cli::parse_config(j);
        FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("train.hidden_layer") != std::string::npos);
    }

    j = sphere_config();
    j["stopping"]["max_iterations"] = "ten";
    CHECK_THROWS_WITH_AS(cli::parse_config(j), doctest::Contains("stopping.max_iterations"), ConfigError);

    j = sphere_config();
    j.erase("schema_version");
    CHECK_THROWS_AS(cli::parse_config(j), ConfigError);
    j["schema_version"] = 2;
    CHECK_THROWS_AS(cli::parse_config(j), ConfigError);

    j = sphere_config();
    j["objective"]["targets"] = {1.0, 2.0};
    CHECK_THROWS_WITH_AS(cli::parse_config(j), doctest::Contains("objective.targets"), ConfigError);

    const json toy = {{"schema_version", 1}, {"simulator", {{"builtin", "toy-flare"}}}};
    const auto cfg = cli::parse_config(toy);
    CHECK(cfg.objective.targets == (Vector(3) << 2.0, 54.0, 400.0).finished());
    CHECK(cfg.objective.weights == (Vector(3) << 2.0, 1.0, 0.1).finished());
    CHECK(cfg.initial_samples == 400);
}

TEST_CASE("malformed json reports a position")
{
    Workspace ws("badjson");
    const auto path = ws.write("config.json", "{\n  \"schema_version\": 1,\n  \"seed\": ,\n}\n");
    const auto r = ws.invoke("run --config " + path + " --out " + ws.out().string());
    CHECK(r.code == 1);
    CHECK(r.log.find(":3:") != std::string::npos);
}

TEST_CASE("unknown key exits 1 naming the key")
{
    Workspace ws("unknown");
    auto j = sphere_config();
    j["stoping"] = json::object();
    const auto r = ws.invoke("run --config " + ws.config(j) + " --out " + ws.out().string());
    CHECK(r.code == 1);
    CHECK(r.log.find("stoping") != std::string::npos);
}

TEST_CASE("run writes its artifacts and exits 2 on budget exhaustion")
{
    Workspace ws("run");
    const auto cfg = ws.config(sphere_config());
    const auto r = ws.invoke("run --config " + cfg + " --out " + ws.out().string() + " --seed 4");
    CHECK(r.code == 2);
    for (const char* f : {"dataset.csv", "runlog.jsonl", "model.json", "summary.json"}) CHECK(fs::exists(ws.out() / f));
    const auto summary = read_json(ws.out() / "summary.json");
    CHECK(summary.at("stop_reason") == "max-iterations");
    CHECK(summary.at("iterations") == 3);
    CHECK(csv_rows(ws.out() / "dataset.csv") == 33);
    const auto model = read_json(ws.out() / "model.json");
    CHECK(model.at("activation") == "tanh");

    std::stringstream first;
    first << std::ifstream(ws.out() / "summary.json").rdbuf();
    CHECK(ws.invoke("run --config " + cfg + " --out " + ws.out().string() + " --seed 4").code == 2);
    std::stringstream second;
    second << std::ifstream(ws.out() / "summary.json").rdbuf();
    CHECK(first.str() == second.str());
}

TEST_CASE("zero budget exits 2")
{
    Workspace ws("zero");
    auto j = sphere_config();
    j["stopping"]["max_iterations"] = 0;
    const auto r = ws.invoke("run --config " + ws.config(j) + " --out " + ws.out().string());
    CHECK(r.code == 2);
    CHECK(read_json(ws.out() / "summary.json").at("iterations") == 0);
}

TEST_CASE("sample and resume")
{
    Workspace ws("sample");
    const auto cfg = ws.config(sphere_config());
    CHECK(ws.invoke("sample --config " + cfg + " --count 0 --out " + ws.out().string()).code == 1);
    CHECK(ws.invoke("sample --config " + cfg + " --count 25 --out " + ws.out().string()).code == 0);
    CHECK(csv_rows(ws.out() / "dataset.csv") == 25);

    CHECK(ws.invoke("run --resume --config " + cfg + " --out " + ws.out().string()).code == 2);
    std::ifstream log(ws.out() / "runlog.jsonl");
    std::string header;
    std::getline(log, header);
    CHECK(json::parse(header).at("initial_dataset_size") == 25);
    CHECK(csv_rows(ws.out() / "dataset.csv") == 28);
    CHECK(read_json(ws.out() / "summary.json").at("total_queries") == 28);
}

TEST_CASE("toy goal run exits 0")
{
    Workspace ws("goal");
    const json j = {{"schema_version", 1},
                    {"simulator", {{"builtin", "toy-flare"}}},
                    {"stopping", {{"goal_loss", 0.05}, {"max_iterations", 15}}},
                    {"seed", 0}};
    const auto r = ws.invoke("run --config " + ws.config(j) + " --out " + ws.out().string());
    CHECK(r.code == 0);
    CHECK(read_json(ws.out() / "summary.json").at("stop_reason") == "goal");
}

TEST_CASE("studies write their tables")
{
    Workspace ws("study");
    json j = {{"schema_version", 1},
              {"simulator", {{"builtin", "toy-flare"}}},
              {"studies",
               {{"sensitivity", {{"seeds", {0}}}}, {"landscape", {{"resolution", 21}, {"source", "surrogate"}}}}}};
    const auto cfg = ws.config(j);
    const auto out = ws.out().string();
    CHECK(ws.invoke("study sensitivity --config " + cfg + " --out " + out).code == 0);
    CHECK(csv_rows(ws.out() / "sensitivity.csv") == 14);
    CHECK(ws.invoke("study landscape --resume --dims 5,2 --config " + cfg + " --out " + out).code == 0);
    CHECK(csv_rows(ws.out() / "landscape_surrogate.csv") == 441);
    CHECK(ws.invoke("study predictions --resume --config " + cfg + " --out " + out).code == 0);
    CHECK(csv_rows(ws.out() / "predictions.csv") == 80 * 3);
    CHECK(ws.invoke("study nonsense --config " + cfg + " --out " + out).code == 1);
}

TEST_CASE("baseline study on a cheap simulator")
{
    Workspace ws("baseline");
    auto j = sphere_config();
    j["studies"] = {{"baseline", {{"budget", 4}, {"trials", 2}}}};
    const auto r = ws.invoke("study baseline --config " + ws.config(j) + " --out " + ws.out().string());
    CHECK(r.code == 0);
    const auto s = read_json(ws.out() / "baseline.json");
    CHECK(s.at("mean_intelligent").size() == 4);
    CHECK(s.at("mean_random").size() == 4);
    CHECK(s.contains("speedup_factor"));
    CHECK(fs::exists(ws.out() / "baseline_trial0_intelligent.csv"));
    CHECK(fs::exists(ws.out() / "baseline_trial1_random.csv"));
}

} // TEST_SUITE
