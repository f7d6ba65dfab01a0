#pragma once

#include <array>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "surropt/analysis.hpp"
#include "surropt/driver.hpp"

namespace surropt::cli {

inline constexpr int kSchemaVersion = 1;

struct SimulatorConfig {
    std::string builtin;          // "toy-flare", "sphere", "rosenbrock-3out"; empty for external
    VehicleScales perturbation;   // toy-flare only
    std::size_t dim = 2;          // benchmarks only
    std::string command;          // external only
    std::size_t output_dim = 0;   // external only
    double timeout_seconds = 600.0;
};

struct StudyConfig {
    std::vector<std::uint64_t> sensitivity_seeds{0, 1, 2};
    std::array<std::size_t, 2> landscape_dims{5, 2};
    std::size_t landscape_resolution = 21;
    std::optional<std::vector<double>> landscape_frozen; // default: bounds midpoint
    std::string landscape_source = "both";               // surrogate | simulator | both
    std::vector<std::size_t> sweep_sizes{50, 100, 200, 400, 800};
    std::vector<std::uint64_t> sweep_seeds{0, 1, 2};
    std::size_t baseline_budget = 30;
    std::size_t baseline_trials = 5;
    std::optional<double> baseline_reference_loss;
};

struct RunConfig {
    SimulatorConfig simulator;
    std::optional<BoundsSpec> bounds;
    ObjectiveSpec objective;
    std::size_t initial_samples = 400;
    TrainConfig train;
    MultiStartConfig multistart;
    StoppingSpec stopping;
    std::uint64_t seed = 0;
    std::string output_dir = "surropt-out";
    StudyConfig studies;
    nlohmann::json raw; // the parsed document, kept for run-log snapshots
};

/// Strict parse: unknown keys and wrong types are ConfigErrors naming the key path.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads and parses a config file; JSON syntax errors report line and column.
RunConfig load_config(const std::string& path);

std::unique_ptr<Simulator> make_simulator(const RunConfig& config);
DriverConfig driver_config(const RunConfig& config);

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    bool resume = false;
    std::optional<long long> count;                   // sample
    std::optional<std::array<std::size_t, 2>> dims;   // study landscape
};

int cmd_run(const Options& opts, std::ostream& log);
int cmd_sample(const Options& opts, std::ostream& log);
int cmd_study(const std::string& study, const Options& opts, std::ostream& log);

/// Entry point behind the `surropt` executable.
int main(int argc, char** argv);

} // namespace surropt::cli
