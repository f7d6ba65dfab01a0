#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surropt/objective.hpp"
#include "surropt/qmc.hpp"

namespace surropt {

struct MultiStartConfig {
    std::size_t num_starts = 100;
    std::size_t num_steps = 500;
    double learning_rate = 0.01; // standardized input space
    double momentum = 0.9;
    bool record_paths = false;

    void validate() const;
};

struct PathPoint {
    std::size_t step = 0;
    double loss = 0.0;
    Vector x;
};

/// Best feasible iterate of one start.
struct StartResult {
    Vector x;
    double loss = 0.0;
    bool frozen = false; // hit a non-finite loss or gradient and stopped early
};

struct OptResult {
    Vector best_x;
    double best_loss = 0.0;
    std::size_t best_start = 0;
    std::vector<StartResult> all_finals;
    std::vector<std::vector<PathPoint>> paths; // filled when record_paths
};

/// Unit-space violation allowed for an iterate to count as feasible.
inline constexpr double kFeasibleTolerance = 1e-6;

struct BatchEntry {
    LossGradient value;
    bool ok = false;
    std::string error;
};

/// loss_and_gradient at every x; failures are flagged per element.
std::vector<BatchEntry> batched_gradients(const DifferentiableModel& model, const ObjectiveSpec& spec,
                                          const std::vector<Vector>& xs);

/// Multi-start SGD with momentum in the model's standardized input space,
/// started from `config.num_starts` Sobol points of `seq` scaled into the bounds.
OptResult optimize_inputs(const DifferentiableModel& model, const ObjectiveSpec& spec, const MultiStartConfig& config,
                          SobolSequence& seq);

/// `start_id,step,loss,x_1..x_m`
void write_paths_csv(const OptResult& result, const std::string& path);

} // namespace surropt
