#include "surropt/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>

#include "surropt/parallel.hpp"
#include "surropt/rng.hpp"

namespace surropt {

namespace {

Vector column_mean(const std::vector<Vector>& rows)
{
    Vector mean = Vector::Zero(rows.front().size());
    for (const auto& r : rows) mean += r;
    return mean / static_cast<double>(rows.size());
}

Vector column_std(const std::vector<Vector>& rows, const Vector& mean, std::vector<std::size_t>& zero_variance)
{
    Vector var = Vector::Zero(mean.size());
    for (const auto& r : rows) var += (r - mean).cwiseAbs2();
    var /= static_cast<double>(rows.size());
    Vector sd = var.cwiseSqrt();
    for (Eigen::Index i = 0; i < sd.size(); ++i) {
        // relative floor so a constant column with rounding noise still counts as constant
        if (!(sd[i] > 1e-12 * std::max(1.0, std::abs(mean[i])))) {
            sd[i] = 1.0;
            zero_variance.push_back(static_cast<std::size_t>(i));
        }
    }
    return sd;
}

nlohmann::json vec_json(const Vector& v)
{
    return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector json_vec(const nlohmann::json& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix to_columns(const std::vector<Vector>& rows)
{
    Matrix out(rows.front().size(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t c = 0; c < rows.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = rows[c];
    return out;
}

} // namespace

// ---------------------------------------------------------------- Standardizer

Standardizer Standardizer::fit(const Dataset& data)
{
    if (data.empty()) throw Error("standardizer: empty dataset");
    Standardizer s;
    s.input_mean = column_mean(data.inputs);
    s.input_std = column_std(data.inputs, s.input_mean, s.zero_variance_inputs);
    s.output_mean = column_mean(data.outputs);
    s.output_std = column_std(data.outputs, s.output_mean, s.zero_variance_outputs);
    return s;
}

Standardizer Standardizer::identity(std::size_t input_dim, std::size_t output_dim)
{
    const auto m = static_cast<Eigen::Index>(input_dim);
    const auto n = static_cast<Eigen::Index>(output_dim);
    return Standardizer{Vector::Zero(m), Vector::Ones(m), Vector::Zero(n), Vector::Ones(n), {}, {}};
}

Vector Standardizer::standardize_input(const Vector& x) const
{
    require_dim(x, input_mean.size(), "standardize_input");
    return ((x - input_mean).array() / input_std.array()).matrix();
}

Vector Standardizer::destandardize_input(const Vector& x_std) const
{
    require_dim(x_std, input_mean.size(), "destandardize_input");
    return (x_std.array() * input_std.array()).matrix() + input_mean;
}

Vector Standardizer::standardize_output(const Vector& y) const
{
    require_dim(y, output_mean.size(), "standardize_output");
    return ((y - output_mean).array() / output_std.array()).matrix();
}

Vector Standardizer::destandardize_output(const Vector& y_std) const
{
    require_dim(y_std, output_mean.size(), "destandardize_output");
    return (y_std.array() * output_std.array()).matrix() + output_mean;
}

nlohmann::json Standardizer::to_json() const
{
    return {{"input", {{"means", vec_json(input_mean)}, {"stds", vec_json(input_std)}}},
            {"output", {{"means", vec_json(output_mean)}, {"stds", vec_json(output_std)}}}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j)
{
    Standardizer s;
    s.input_mean = json_vec(j.at("input").at("means"));
    s.input_std = json_vec(j.at("input").at("stds"));
    s.output_mean = json_vec(j.at("output").at("means"));
    s.output_std = json_vec(j.at("output").at("stds"));
    if (s.input_mean.size() != s.input_std.size() || s.output_mean.size() != s.output_std.size()) {
        throw Error("standardizer: means and stds differ in length");
    }
    if ((s.input_std.array() <= 0.0).any() || (s.output_std.array() <= 0.0).any()) {
        throw Error("standardizer: stds must be positive");
    }
    return s;
}

// --------------------------------------------------------- DifferentiableModel

Vector DifferentiableModel::predict(const Vector& x) const
{
    return standardizer().destandardize_output(predict_std(x));
}

Vector DifferentiableModel::predict_std(const Vector& x) const
{
    require_dim(x, static_cast<Eigen::Index>(input_dim()), "predict");
    if (!x.allFinite()) throw NumericError("predict: non-finite input");
    return forward_std(standardizer().standardize_input(x));
}

Matrix DifferentiableModel::input_gradient(const Vector& x) const
{
    require_dim(x, static_cast<Eigen::Index>(input_dim()), "input_gradient");
    if (!x.allFinite()) throw NumericError("input_gradient: non-finite input");
    return forward_with_jacobian(standardizer().standardize_input(x)).jacobian;
}

// -------------------------------------------------------------- SurrogateModel

SurrogateModel::SurrogateModel(std::vector<std::size_t> layer_sizes, std::vector<Matrix> weights,
                               std::vector<Vector> biases, Standardizer standardizer, std::uint64_t train_seed)
    : layer_sizes_(std::move(layer_sizes)), weights_(std::move(weights)), biases_(std::move(biases)),
      standardizer_(std::move(standardizer)), train_seed_(train_seed)
{
    if (layer_sizes_.size() < 2) throw Error("surrogate: need at least input and output layer sizes");
    if (std::find(layer_sizes_.begin(), layer_sizes_.end(), 0u) != layer_sizes_.end()) {
        throw Error("surrogate: layer sizes must be positive");
    }
    const std::size_t layers = layer_sizes_.size() - 1;
    if (weights_.size() != layers || biases_.size() != layers) throw Error("surrogate: wrong number of layers");
    for (std::size_t l = 0; l < layers; ++l) {
        const auto rows = static_cast<Eigen::Index>(layer_sizes_[l + 1]);
        const auto cols = static_cast<Eigen::Index>(layer_sizes_[l]);
        if (weights_[l].rows() != rows || weights_[l].cols() != cols || biases_[l].size() != rows) {
            throw Error("surrogate: layer " + std::to_string(l) + " has mismatched shapes");
        }
    }
    if (standardizer_.input_mean.size() != static_cast<Eigen::Index>(input_dim()) ||
        standardizer_.output_mean.size() != static_cast<Eigen::Index>(output_dim())) {
        throw Error("surrogate: standardizer dimensions do not match layer sizes");
    }
}

SurrogateModel SurrogateModel::initialized(std::vector<std::size_t> layer_sizes, Standardizer standardizer,
                                           std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const auto fan_in = static_cast<Eigen::Index>(layer_sizes[l]);
        const auto fan_out = static_cast<Eigen::Index>(layer_sizes[l + 1]);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-limit, limit);
        }
        weights.push_back(std::move(w));
        biases.push_back(Vector::Zero(fan_out));
    }
    return SurrogateModel(std::move(layer_sizes), std::move(weights), std::move(biases), std::move(standardizer),
                          seed);
}

Vector SurrogateModel::forward_std(const Vector& x_std) const
{
    require_dim(x_std, static_cast<Eigen::Index>(input_dim()), "forward");
    Vector a = x_std;
    const std::size_t last = weights_.size() - 1;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Vector z = weights_[l] * a + biases_[l];
        a = l == last ? z : Vector(z.array().tanh());
    }
    return a;
}

ForwardJacobian SurrogateModel::forward_with_jacobian(const Vector& x_std) const
{
    require_dim(x_std, static_cast<Eigen::Index>(input_dim()), "forward_with_jacobian");
    const std::size_t layers = weights_.size();
    // tanh'(z) = 1 - tanh(z)^2 per hidden layer, kept for the backward sweep
    std::vector<Vector> slopes;
    slopes.reserve(layers - 1);
    Vector a = x_std;
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        Vector h = (weights_[l] * a + biases_[l]).array().tanh();
        if (!h.allFinite()) throw NumericError("non-finite activation in layer " + std::to_string(l));
        slopes.push_back((1.0 - h.array().square()).matrix());
        a = std::move(h);
    }
    ForwardJacobian out;
    out.output = weights_.back() * a + biases_.back();
    if (!out.output.allFinite()) throw NumericError("non-finite output in layer " + std::to_string(layers - 1));

    // Reverse sweep, one row per output: J = W_L D_{L-1} W_{L-1} ... D_1 W_1.
    Matrix rows = weights_.back();
    for (std::size_t l = layers - 1; l-- > 0;) {
        rows = (rows.array().rowwise() * slopes[l].transpose().array()).matrix() * weights_[l];
        if (!rows.allFinite()) throw NumericError("non-finite gradient in layer " + std::to_string(l));
    }
    out.jacobian = std::move(rows);
    return out;
}

Matrix SurrogateModel::forward_batch(const Matrix& x_std) const
{
    Matrix a = x_std;
    const std::size_t last = weights_.size() - 1;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Matrix z = weights_[l] * a;
        z.colwise() += biases_[l];
        a = l == last ? std::move(z) : Matrix(z.array().tanh());
    }
    return a;
}

std::size_t SurrogateModel::parameter_count() const
{
    std::size_t total = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        total += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    }
    return total;
}

nlohmann::json SurrogateModel::to_json() const
{
    nlohmann::json weights = nlohmann::json::array();
    nlohmann::json biases = nlohmann::json::array();
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) rows.push_back(vec_json(weights_[l].row(r)));
        weights.push_back(std::move(rows));
        biases.push_back(vec_json(biases_[l]));
    }
    return {{"layer_sizes", layer_sizes_}, {"weights", std::move(weights)}, {"biases", std::move(biases)},
            {"activation", "tanh"},         {"standardizer", standardizer_.to_json()}, {"train_seed", train_seed_}};
}

SurrogateModel SurrogateModel::from_json(const nlohmann::json& j)
{
    if (j.at("activation").get<std::string>() != "tanh") throw Error("surrogate: only tanh activation is supported");
    auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    for (const auto& layer : j.at("weights")) {
        const auto rows = static_cast<Eigen::Index>(layer.size());
        const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(layer.front().size());
        Matrix w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto row = layer[static_cast<std::size_t>(r)].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(row.size()) != cols) throw Error("surrogate: ragged weight matrix");
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = row[static_cast<std::size_t>(c)];
        }
        weights.push_back(std::move(w));
    }
    for (const auto& b : j.at("biases")) biases.push_back(json_vec(b));
    return SurrogateModel(std::move(sizes), std::move(weights), std::move(biases),
                          Standardizer::from_json(j.at("standardizer")), j.at("train_seed").get<std::uint64_t>());
}

void SurrogateModel::save(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << to_json().dump(1) << '\n';
}

SurrogateModel SurrogateModel::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return from_json(nlohmann::json::parse(in));
}

// -------------------------------------------------------------------- training

void TrainConfig::validate() const
{
    if (std::find(hidden_layers.begin(), hidden_layers.end(), 0u) != hidden_layers.end()) {
        throw Error("train config: hidden layer widths must be positive");
    }
    if (!(learning_rate > 0.0) || batch_size == 0 || max_epochs == 0 || early_stop_patience == 0) {
        throw Error("train config: learning_rate, batch_size, max_epochs and early_stop_patience must be positive");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw Error("train config: validation_fraction must lie in (0, 1)");
    }
}

DataSplit split_dataset(const Dataset& data, double validation_fraction, std::uint64_t seed)
{
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(derive_seed(seed, 0x5b117));
    rng.shuffle(order);
    auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(data.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, data.size() - 1);
    const std::size_t n_train = data.size() - n_val;
    return {data.subset({order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train)}),
            data.subset({order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end()})};
}

namespace {

struct AdamState {
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;
    long step = 0;

    explicit AdamState(const SurrogateModel& model)
    {
        for (std::size_t l = 0; l < model.weights().size(); ++l) {
            mw.push_back(Matrix::Zero(model.weights()[l].rows(), model.weights()[l].cols()));
            vw.push_back(mw.back());
            mb.push_back(Vector::Zero(model.biases()[l].size()));
            vb.push_back(mb.back());
        }
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename Param, typename Grad>
void adam_update(Param& p, Param& m, Param& v, const Grad& g, double lr, double c1, double c2)
{
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + kAdamEps);
}

/// One Adam step on the batch given as standardized column matrices.
void train_step(SurrogateModel& model, AdamState& adam, const Matrix& x, const Matrix& y, double lr)
{
    auto& weights = model.mutable_weights();
    auto& biases = model.mutable_biases();
    const std::size_t layers = weights.size();

    std::vector<Matrix> acts;
    acts.reserve(layers);
    acts.push_back(x);
    for (std::size_t l = 0; l + 1 < layers; ++l) {
        Matrix z = weights[l] * acts.back();
        z.colwise() += biases[l];
        acts.push_back(z.array().tanh());
    }
    Matrix out = weights.back() * acts.back();
    out.colwise() += biases.back();

    // d/dŷ of mean |ŷ - y| over outputs and batch, sign(0) = 0
    const double scale = 1.0 / static_cast<double>(out.size());
    Matrix delta = (out - y).unaryExpr([scale](double d) { return d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0); });

    ++adam.step;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.step));
    for (std::size_t l = layers; l-- > 0;) {
        const Matrix grad_w = delta * acts[l].transpose();
        const Vector grad_b = delta.rowwise().sum();
        if (l > 0) {
            delta = ((weights[l].transpose() * delta).array() * (1.0 - acts[l].array().square())).matrix();
        }
        adam_update(weights[l], adam.mw[l], adam.vw[l], grad_w, lr, c1, c2);
        adam_update(biases[l], adam.mb[l], adam.vb[l], grad_b, lr, c1, c2);
    }
}

Vector batch_mae(const SurrogateModel& model, const Matrix& x, const Matrix& y)
{
    return (model.forward_batch(x) - y).cwiseAbs().rowwise().mean();
}

} // namespace

TrainResult train(const Dataset& data, const TrainConfig& config)
{
    config.validate();
    if (data.size() < 10) throw Error("train: need at least 10 records, got " + std::to_string(data.size()));
    if (data.input_dim() == 0 || data.output_dim() == 0) throw Error("train: degenerate dataset dimensions");
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (data.inputs[r].size() != data.inputs.front().size() ||
            data.outputs[r].size() != data.outputs.front().size()) {
            throw Error("train: record " + std::to_string(r) + " has inconsistent dimensions");
        }
        if (!data.inputs[r].allFinite() || !data.outputs[r].allFinite()) {
            throw Error("train: record " + std::to_string(r) + " contains non-finite values");
        }
    }

    const DataSplit split = split_dataset(data, config.validation_fraction, config.seed);
    Standardizer standardizer = Standardizer::fit(split.train);

    std::vector<std::size_t> sizes;
    sizes.push_back(data.input_dim());
    sizes.insert(sizes.end(), config.hidden_layers.begin(), config.hidden_layers.end());
    sizes.push_back(data.output_dim());

    TrainReport report;
    report.train_size = split.train.size();
    report.validation_size = split.validation.size();
    report.zero_variance_inputs = standardizer.zero_variance_inputs;
    report.zero_variance_outputs = standardizer.zero_variance_outputs;

    auto standardized = [&](const std::vector<Vector>& rows, bool input) {
        Matrix m = to_columns(rows);
        const Vector& mean = input ? standardizer.input_mean : standardizer.output_mean;
        const Vector& sd = input ? standardizer.input_std : standardizer.output_std;
        m.colwise() -= mean;
        m.array().colwise() /= sd.array();
        return m;
    };
    const Matrix x_train = standardized(split.train.inputs, true);
    const Matrix y_train = standardized(split.train.outputs, false);
    const Matrix x_val = standardized(split.validation.inputs, true);
    const Matrix y_val = standardized(split.validation.outputs, false);

    SurrogateModel model = SurrogateModel::initialized(sizes, std::move(standardizer), derive_seed(config.seed, 1));
    AdamState adam(model);
    Rng batch_rng(derive_seed(config.seed, 2));

    report.epochs.push_back({batch_mae(model, x_train, y_train), batch_mae(model, x_val, y_val)});
    double best = report.epochs.back().validation_mae.mean();
    report.best_validation_mae = report.epochs.back().validation_mae;
    auto best_weights = model.weights();
    auto best_biases = model.biases();
    std::size_t since_best = 0;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(x_train.cols()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto batch = static_cast<Eigen::Index>(config.batch_size);
    Matrix xb, yb;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        batch_rng.shuffle(order);
        for (Eigen::Index start = 0; start < x_train.cols(); start += batch) {
            const Eigen::Index len = std::min(batch, x_train.cols() - start);
            xb.resize(x_train.rows(), len);
            yb.resize(y_train.rows(), len);
            for (Eigen::Index c = 0; c < len; ++c) {
                xb.col(c) = x_train.col(order[static_cast<std::size_t>(start + c)]);
                yb.col(c) = y_train.col(order[static_cast<std::size_t>(start + c)]);
            }
            train_step(model, adam, xb, yb, config.learning_rate);
        }
        report.epochs.push_back({batch_mae(model, x_train, y_train), batch_mae(model, x_val, y_val)});
        const double val = report.epochs.back().validation_mae.mean();
        if (!std::isfinite(val)) throw NumericError("train: validation loss diverged at epoch " + std::to_string(epoch));
        if (val < best) {
            best = val;
            report.best_epoch = epoch;
            report.best_validation_mae = report.epochs.back().validation_mae;
            best_weights = model.weights();
            best_biases = model.biases();
            since_best = 0;
        } else if (++since_best >= config.early_stop_patience) {
            break;
        }
    }
    model.mutable_weights() = std::move(best_weights);
    model.mutable_biases() = std::move(best_biases);
    return {std::move(model), std::move(report)};
}

Vector mean_absolute_error(const SurrogateModel& model, const Dataset& data)
{
    if (data.empty()) throw Error("mean_absolute_error: empty dataset");
    Matrix x = to_columns(data.inputs);
    Matrix y = to_columns(data.outputs);
    const auto& s = model.standardizer();
    x.colwise() -= s.input_mean;
    x.array().colwise() /= s.input_std.array();
    y.colwise() -= s.output_mean;
    y.array().colwise() /= s.output_std.array();
    return batch_mae(model, x, y);
}

std::size_t parameter_count(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim)
{
    std::size_t total = 0;
    std::size_t prev = input_dim;
    for (auto w : hidden) {
        total += (prev + 1) * w;
        prev = w;
    }
    return total + (prev + 1) * output_dim;
}

// ---------------------------------------------------------------------- tuning

std::size_t select_best_trial(const std::vector<TuneTrial>& trials)
{
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (!trials[i].ok) continue;
        if (!best) {
            best = i;
            continue;
        }
        const auto& a = trials[i];
        const auto& b = trials[*best];
        if (a.validation_mae < b.validation_mae ||
            (a.validation_mae == b.validation_mae && a.parameter_count < b.parameter_count)) {
            best = i;
        }
    }
    if (!best) throw Error("tune_hyperparameters: every trial failed");
    return *best;
}

TuneResult tune_hyperparameters(const Dataset& data, std::size_t budget, std::uint64_t seed, const TrainConfig& base)
{
    if (budget == 0) throw Error("tune_hyperparameters: budget must be at least 1");
    static constexpr std::size_t kWidths[] = {16, 32, 64, 128};
    static constexpr std::size_t kBatches[] = {16, 32, 64};

    TuneResult result;
    Rng rng(derive_seed(seed, 0x7a11e));
    for (std::size_t t = 0; t < budget; ++t) {
        TrainConfig cfg = base;
        cfg.seed = seed;
        cfg.hidden_layers.assign(1 + rng.below(3), 0);
        for (auto& w : cfg.hidden_layers) w = kWidths[rng.below(4)];
        cfg.learning_rate = std::pow(10.0, rng.uniform(-4.0, -2.0));
        cfg.batch_size = kBatches[rng.below(3)];
        TuneTrial trial;
        trial.config = cfg;
        trial.parameter_count = parameter_count(data.input_dim(), cfg.hidden_layers, data.output_dim());
        result.trials.push_back(std::move(trial));
    }
    const auto errors = parallel_for(budget, [&](std::size_t t) {
        auto& trial = result.trials[t];
        trial.validation_mae = train(data, trial.config).report.best_mean_validation_mae();
        trial.ok = true;
    });
    for (std::size_t t = 0; t < budget; ++t) {
        if (!errors[t]) continue;
        try {
            std::rethrow_exception(errors[t]);
        } catch (const std::exception& e) {
            result.trials[t].error = e.what();
        }
    }
    result.best_index = select_best_trial(result.trials);
    result.best = result.trials[result.best_index].config;
    return result;
}

} // namespace surropt
