#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "surropt/dataset.hpp"
#include "surropt/types.hpp"

namespace surropt {

/// Per-column affine standardization fitted on a training split.
/// Zero-variance columns get std = 1 and are listed as warnings.
struct Standardizer {
    Vector input_mean;
    Vector input_std;
    Vector output_mean;
    Vector output_std;
    std::vector<std::size_t> zero_variance_inputs;
    std::vector<std::size_t> zero_variance_outputs;

    static Standardizer fit(const Dataset& data);
    static Standardizer identity(std::size_t input_dim, std::size_t output_dim);

    bool has_warning() const { return !zero_variance_inputs.empty() || !zero_variance_outputs.empty(); }

    Vector standardize_input(const Vector& x) const;
    Vector destandardize_input(const Vector& x_std) const;
    Vector standardize_output(const Vector& y) const;
    Vector destandardize_output(const Vector& y_std) const;

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);
};

struct ForwardJacobian {
    Vector output;   // standardized outputs
    Matrix jacobian; // d output_std / d input_std, n x m
};

/// Anything the objective can differentiate through: maps standardized inputs
/// to standardized outputs and supplies the input Jacobian.
class DifferentiableModel {
public:
    virtual ~DifferentiableModel() = default;

    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual const Standardizer& standardizer() const = 0;

    virtual Vector forward_std(const Vector& x_std) const = 0;
    virtual ForwardJacobian forward_with_jacobian(const Vector& x_std) const = 0;

    /// Physical input -> physical output.
    Vector predict(const Vector& x) const;
    /// Physical input -> standardized output.
    Vector predict_std(const Vector& x) const;
    /// Jacobian of standardized outputs w.r.t. standardized inputs at physical x.
    Matrix input_gradient(const Vector& x) const;
};

/// Fully connected tanh network, identity output layer.
class SurrogateModel final : public DifferentiableModel {
public:
    SurrogateModel(std::vector<std::size_t> layer_sizes, std::vector<Matrix> weights, std::vector<Vector> biases,
                   Standardizer standardizer, std::uint64_t train_seed);

    /// Xavier-uniform weights from `seed`, zero biases.
    static SurrogateModel initialized(std::vector<std::size_t> layer_sizes, Standardizer standardizer,
                                      std::uint64_t seed);

    std::size_t input_dim() const override { return layer_sizes_.front(); }
    std::size_t output_dim() const override { return layer_sizes_.back(); }
    const Standardizer& standardizer() const override { return standardizer_; }

    Vector forward_std(const Vector& x_std) const override;
    ForwardJacobian forward_with_jacobian(const Vector& x_std) const override;

    /// Column-batched forward pass in standardized space (m x B -> n x B).
    Matrix forward_batch(const Matrix& x_std) const;

    const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
    const std::vector<Matrix>& weights() const { return weights_; }
    const std::vector<Vector>& biases() const { return biases_; }
    std::vector<Matrix>& mutable_weights() { return weights_; }
    std::vector<Vector>& mutable_biases() { return biases_; }
    std::uint64_t train_seed() const { return train_seed_; }
    std::size_t parameter_count() const;

    nlohmann::json to_json() const;
    static SurrogateModel from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static SurrogateModel load(const std::string& path);

private:
    std::vector<std::size_t> layer_sizes_;
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
    Standardizer standardizer_;
    std::uint64_t train_seed_ = 0;
};

struct TrainConfig {
    std::vector<std::size_t> hidden_layers{64, 64};
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 500;
    double validation_fraction = 0.2;
    std::size_t early_stop_patience = 25;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochStats {
    Vector train_mae;
    Vector validation_mae;
};

/// epochs[0] is the untrained network; epochs[k] follows the k-th pass.
struct TrainReport {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;
    Vector best_validation_mae;
    std::size_t train_size = 0;
    std::size_t validation_size = 0;
    std::vector<std::size_t> zero_variance_inputs;
    std::vector<std::size_t> zero_variance_outputs;

    double best_mean_validation_mae() const { return best_validation_mae.mean(); }
    double initial_mean_validation_mae() const { return epochs.front().validation_mae.mean(); }
};

struct TrainResult {
    SurrogateModel model;
    TrainReport report;
};

struct DataSplit {
    Dataset train;
    Dataset validation;
};

/// Seeded shuffle; the last `validation_fraction` of the shuffled order is held out.
DataSplit split_dataset(const Dataset& data, double validation_fraction, std::uint64_t seed);

/// Mini-batch Adam on plain MAE in standardized units, early stopping on the
/// mean validation MAE with best-weight restore.
TrainResult train(const Dataset& data, const TrainConfig& config);

/// Per-output MAE of `model` on `data`, in the model's standardized output units.
Vector mean_absolute_error(const SurrogateModel& model, const Dataset& data);

std::size_t parameter_count(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim);

struct TuneTrial {
    TrainConfig config;
    double validation_mae = 0.0;
    std::size_t parameter_count = 0;
    bool ok = false;
    std::string error;
};

struct TuneResult {
    TrainConfig best;
    std::size_t best_index = 0;
    std::vector<TuneTrial> trials;
};

/// Lowest validation MAE; ties go to fewer parameters, then lower index.
std::size_t select_best_trial(const std::vector<TuneTrial>& trials);

/// Random search over depth 1-3, widths {16,32,64,128}, log-uniform learning
/// rate in [1e-4, 1e-2] and batch {16,32,64}. Fields not searched come from `base`.
TuneResult tune_hyperparameters(const Dataset& data, std::size_t budget, std::uint64_t seed,
                                const TrainConfig& base = {});

} // namespace surropt
