#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "surropt/driver.hpp"

namespace surropt {

// ------------------------------------------------------------ sensitivity

struct SensitivityEntry {
    std::size_t index = 0;
    std::string name;
    double validation_loss_without = 0.0; // mean over seeds
    double increase = 0.0;                // vs. the all-inputs baseline
    double relative_increase = 0.0;
    bool valid = false;                   // false when any seed failed to train
};

struct SensitivityReport {
    double baseline_loss = 0.0;
    std::vector<SensitivityEntry> inputs;
    std::vector<std::size_t> ranking; // input indices, largest absolute increase first

    void write_csv(const std::string& path) const;
};

/// Leave-one-out by column removal: per seed, one model on all inputs and one
/// per dropped input, all sharing the same split.
SensitivityReport sensitivity(const Dataset& data, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                              const std::vector<std::string>& names = {});

// -------------------------------------------------------------- landscape

struct LandscapeGrid {
    std::array<std::size_t, 2> dims{};
    Vector axis1;
    Vector axis2;
    Vector frozen;
    Matrix losses; // losses(i, j) at (axis1[i], axis2[j]); NaN marks a failed query
    Dataset queried; // simulator grids only: every successful query

    /// Point at grid node (i, j).
    Vector point(std::size_t i, std::size_t j) const;
    void write_csv(const std::string& path) const;
};

LandscapeGrid landscape(const DifferentiableModel& model, const ObjectiveSpec& spec, std::array<std::size_t, 2> dims,
                        const Vector& frozen, std::size_t resolution);

/// True-simulator grid; every node is one counted query scored with `scoring`.
LandscapeGrid landscape(Simulator& sim, const ObjectiveSpec& spec, const Standardizer& scoring,
                        std::array<std::size_t, 2> dims, const Vector& frozen, std::size_t resolution);

// ------------------------------------------------------------ size sweep

struct SweepResult {
    std::vector<std::size_t> sizes;
    std::vector<double> mean_loss;
    std::vector<std::vector<double>> per_seed; // [size][seed]
    Dataset pool;
    Dataset holdout;

    void write_csv(const std::string& path) const;
};

inline constexpr std::size_t kSweepHoldout = 200;

/// Trains on prefixes of one Sobol dataset and scores each model on a fixed
/// 200-point held-out Sobol set (the points following the largest prefix).
/// Held-out MAE is in units of the held-out set's own output spread so every
/// size is measured on the same scale.
SweepResult training_size_sweep(Simulator& sim, const std::vector<std::size_t>& sizes,
                                std::span<const std::uint64_t> seeds, const TrainConfig& config);

// ------------------------------------------------------------ MC baseline

struct BaselineConfig {
    std::size_t budget = 30;
    std::size_t trials = 5;
    std::uint64_t seed = 0;
    std::size_t initial_samples = 400;
    TrainConfig train;
    MultiStartConfig multistart;
    std::optional<double> reference_loss; // default: quasi-random mean at budget exhaustion
};

struct BaselineComparison {
    std::vector<std::vector<double>> intelligent; // [trial][query] best-so-far
    std::vector<std::vector<double>> random;
    std::vector<double> mean_intelligent;
    std::vector<double> mean_random;
    std::size_t trials = 0;
    std::vector<std::string> failures;
    double initial_best_loss = 0.0;
    double reference_loss = 0.0;
    std::optional<std::size_t> queries_intelligent; // to reach reference_loss
    std::optional<std::size_t> queries_random;
    double speedup_factor = 0.0;
    std::uint64_t intelligent_queries = 0; // simulator queries per strategy, initial design excluded
    std::uint64_t random_queries = 0;
    Dataset shared_initial;
    std::vector<Dataset> intelligent_records; // per used trial, intelligent queries only
    std::vector<Dataset> random_records;

    nlohmann::json summary_json() const;
    void write_csv(const std::string& path) const;
};

/// Per trial: a full surrogate run with `budget` intelligent queries against
/// `budget` further Sobol points, both starting from one shared initial design.
BaselineComparison mc_baseline(Simulator& sim, const ObjectiveSpec& spec, const BaselineConfig& config);

/// Running minimum.
std::vector<double> best_so_far(std::span<const double> losses);

// ------------------------------------------------------------ predictions

struct PredictionRow {
    std::size_t output_index = 0;
    double actual = 0.0;
    double predicted = 0.0;
};

/// Predicted vs. actual physical outputs for every record of `holdout`.
std::vector<PredictionRow> export_predictions(const DifferentiableModel& model, const Dataset& holdout);
void write_predictions_csv(const std::vector<PredictionRow>& rows, const std::string& path);

} // namespace surropt
