#include "surropt/inputopt.hpp"

#include <cmath>
#include <fstream>

#include "surropt/dataset.hpp"
#include "surropt/parallel.hpp"

namespace surropt {

void MultiStartConfig::validate() const
{
    if (num_starts == 0 || num_steps == 0) throw Error("multistart: num_starts and num_steps must be positive");
    if (!(learning_rate > 0.0)) throw Error("multistart: learning_rate must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("multistart: momentum must lie in [0, 1)");
}

std::vector<BatchEntry> batched_gradients(const DifferentiableModel& model, const ObjectiveSpec& spec,
                                          const std::vector<Vector>& xs)
{
    std::vector<BatchEntry> out(xs.size());
    const auto errors = parallel_for(xs.size(), [&](std::size_t i) {
        require_dim(xs[i], static_cast<Eigen::Index>(spec.input_dim()), "batched_gradients input");
        out[i].value = loss_and_gradient(spec, model, xs[i]);
        if (!std::isfinite(out[i].value.loss) || !out[i].value.gradient.allFinite()) {
            throw NumericError("non-finite loss or gradient");
        }
        out[i].ok = true;
    });
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!errors[i]) continue;
        out[i].ok = false;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    }
    return out;
}

OptResult optimize_inputs(const DifferentiableModel& model, const ObjectiveSpec& spec, const MultiStartConfig& config,
                          SobolSequence& seq)
{
    config.validate();
    if (model.input_dim() != spec.input_dim() || model.output_dim() != spec.output_dim()) {
        throw Error("optimize_inputs: model and objective dimensions differ");
    }
    const Standardizer& s = model.standardizer();
    const std::size_t starts = config.num_starts;

    std::vector<Vector> xs = sample_batch(seq, starts, spec.bounds);
    std::vector<Vector> xs_std(starts);
    std::vector<Vector> velocity(starts, Vector::Zero(static_cast<Eigen::Index>(spec.input_dim())));
    std::vector<bool> active(starts, true);
    for (std::size_t i = 0; i < starts; ++i) xs_std[i] = s.standardize_input(xs[i]);

    OptResult result;
    result.all_finals.resize(starts);
    for (std::size_t i = 0; i < starts; ++i) {
        result.all_finals[i].x = xs[i];
        result.all_finals[i].loss = std::numeric_limits<double>::infinity();
    }
    if (config.record_paths) result.paths.resize(starts);

    for (std::size_t step = 0; step <= config.num_steps; ++step) {
        const auto evals = batched_gradients(model, spec, xs);
        for (std::size_t i = 0; i < starts; ++i) {
            if (!active[i]) continue;
            auto& fin = result.all_finals[i];
            if (!evals[i].ok) {
                // frozen at the last finite iterate, which best-tracking already holds
                active[i] = false;
                fin.frozen = true;
                continue;
            }
            const double value = evals[i].value.loss;
            if (config.record_paths) result.paths[i].push_back({step, value, xs[i]});
            if (value < fin.loss && spec.bounds.contains(xs[i], kFeasibleTolerance)) {
                fin.loss = value;
                fin.x = xs[i];
            }
            if (step == config.num_steps) continue;
            velocity[i] = config.momentum * velocity[i] - config.learning_rate * evals[i].value.gradient;
            xs_std[i] += velocity[i];
            xs[i] = s.destandardize_input(xs_std[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < starts; ++i) {
        if (result.all_finals[i].loss < result.all_finals[best].loss) best = i;
    }
    if (!std::isfinite(result.all_finals[best].loss)) {
        throw NumericError("optimize_inputs: no start produced a finite loss");
    }
    result.best_start = best;
    result.best_x = result.all_finals[best].x;
    result.best_loss = result.all_finals[best].loss;
    return result;
}

void write_paths_csv(const OptResult& result, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    const auto m = result.best_x.size();
    out << "start_id,step,loss";
    for (Eigen::Index i = 0; i < m; ++i) out << ",x_" << i + 1;
    out << '\n';
    for (std::size_t id = 0; id < result.paths.size(); ++id) {
        for (const auto& p : result.paths[id]) {
            out << id << ',' << p.step << ',' << format_double(p.loss);
            for (Eigen::Index i = 0; i < p.x.size(); ++i) out << ',' << format_double(p.x[i]);
            out << '\n';
        }
    }
}

} // namespace surropt
