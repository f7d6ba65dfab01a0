#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "surropt/dataset.hpp"
#include "surropt/inputopt.hpp"
#include "surropt/objective.hpp"
#include "surropt/qmc.hpp"
#include "surropt/simbench.hpp"
#include "surropt/surrogate.hpp"

namespace surropt {

enum class StopReason { None, Goal, Converged, MaxIterations };

std::string_view to_string(StopReason r);

struct StoppingSpec {
    std::optional<double> goal_loss;      // disabled when empty
    std::size_t convergence_window = 5;   // K
    double convergence_epsilon = 1e-3;
    bool use_convergence = true;
    std::size_t max_iterations = 50;

    void validate() const;
};

/// Precedence goal > converged > max-iterations over the intelligent-query
/// true losses so far. Converged: the best of the last K improves on the best
/// before them by less than epsilon.
StopReason check_stopping(std::span<const double> history, const StoppingSpec& spec);

/// Queries `sim` at `count` Sobol points in its bounds. Failed points are
/// skipped (messages appended to `failures` when given); more than 10% failed aborts.
Dataset collect_initial(Simulator& sim, std::size_t count, SobolSequence& seq,
                        std::vector<std::string>* failures = nullptr);

struct DriverConfig {
    ObjectiveSpec objective;
    StoppingSpec stopping;
    TrainConfig train;
    MultiStartConfig multistart;
    std::uint64_t seed = 0;
    std::size_t initial_samples = 400;
    std::uint64_t sobol_offset = 0; // initial design starts at Sobol index 1 + offset
    nlohmann::json snapshot;        // copied into the run log header
};

struct IterationRecord {
    std::size_t iteration = 0; // 1-based count of successful intelligent queries at this point
    std::size_t attempt = 0;   // 1-based, counts failed attempts too
    bool ok = false;
    bool queried = false; // the simulator was called this attempt
    std::string error;
    std::uint64_t train_seed = 0;
    Vector x_best;
    Vector y_best;
    double true_loss = 0.0;
    double surrogate_loss = 0.0;
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    Vector validation_mae;
    StopReason stop_reason = StopReason::None;
};

struct RunLog {
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::size_t initial_dataset_size = 0;
    std::vector<IterationRecord> records;

    /// One header line, then one line per iteration record.
    void write_jsonl(const std::string& path) const;
};

struct RunResult {
    Vector x_best;
    Vector y_best;
    double best_loss = 0.0;
    StopReason stop_reason = StopReason::None;
    std::size_t iterations = 0;
    Dataset dataset;
    RunLog log;
    Standardizer scoring; // fitted on the initial dataset; scores every true output
    std::vector<double> initial_losses;
    std::vector<double> query_losses; // true loss per successful intelligent query
    std::optional<SurrogateModel> final_model;
};

class RunAborted : public Error {
public:
    using Error::Error;
};

/// The surrogate loop: fresh surrogate per iteration, multi-start input
/// optimization, one simulator query at the surrogate optimum, stop check.
/// With `initial` supplied no initial queries are made.
RunResult run(Simulator& sim, const DriverConfig& config, std::optional<Dataset> initial = std::nullopt);

nlohmann::json summary_json(const RunResult& result);

} // namespace surropt
