#include "surropt/driver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "surropt/rng.hpp"

namespace surropt {

std::string_view to_string(StopReason r)
{
    switch (r) {
    case StopReason::None: return "none";
    case StopReason::Goal: return "goal";
    case StopReason::Converged: return "converged";
    case StopReason::MaxIterations: return "max-iterations";
    }
    return "none";
}

void StoppingSpec::validate() const
{
    if (use_convergence && convergence_window == 0) throw Error("stopping: convergence window must be positive");
    if (!(convergence_epsilon >= 0.0)) throw Error("stopping: convergence epsilon must be non-negative");
    if (goal_loss && !std::isfinite(*goal_loss)) throw Error("stopping: goal loss must be finite");
}

StopReason check_stopping(std::span<const double> history, const StoppingSpec& spec)
{
    if (spec.goal_loss && !history.empty() && history.back() <= *spec.goal_loss) return StopReason::Goal;
    const std::size_t k = spec.convergence_window;
    if (spec.use_convergence && k > 0 && history.size() > k) {
        const auto split = history.end() - static_cast<std::ptrdiff_t>(k);
        const double before = *std::min_element(history.begin(), split);
        const double recent = *std::min_element(split, history.end());
        if (before - recent < spec.convergence_epsilon) return StopReason::Converged;
    }
    if (history.size() >= spec.max_iterations) return StopReason::MaxIterations;
    return StopReason::None;
}

Dataset collect_initial(Simulator& sim, std::size_t count, SobolSequence& seq, std::vector<std::string>* failures)
{
    if (count == 0) throw Error("collect_initial: count must be positive");
    const auto xs = sample_batch(seq, count, sim.bounds());
    Dataset data;
    std::size_t failed = 0;
    for (const auto& x : xs) {
        try {
            data.add(x, sim.evaluate(x), Provenance::InitialSobol);
        } catch (const SimulatorError& e) {
            ++failed;
            if (failures) failures->emplace_back(e.what());
        }
    }
    if (10 * failed > count) {
        throw RunAborted("collect_initial: " + std::to_string(failed) + " of " + std::to_string(count) +
                         " initial queries failed");
    }
    return data;
}

namespace {

std::vector<double> to_std(const Vector& v)
{
    return {v.data(), v.data() + v.size()};
}

nlohmann::json record_json(const IterationRecord& r)
{
    nlohmann::json j = {{"iteration", r.iteration},     {"attempt", r.attempt},
                        {"status", r.ok ? "ok" : "failed"}, {"train_seed", r.train_seed}};
    if (r.x_best.size() > 0) j["x_best"] = to_std(r.x_best);
    if (r.ok) {
        j["y_best"] = to_std(r.y_best);
        j["true_loss"] = r.true_loss;
    } else {
        j["error"] = r.error;
    }
    if (r.x_best.size() > 0) j["surrogate_loss_at_x_best"] = r.surrogate_loss;
    j["train"] = {{"epochs_run", r.epochs_run},
                  {"best_epoch", r.best_epoch},
                  {"validation_mae", to_std(r.validation_mae)}};
    j["stop_reason"] = r.stop_reason == StopReason::None ? nlohmann::json(nullptr) : nlohmann::json(to_string(r.stop_reason));
    return j;
}

constexpr std::size_t kMaxConsecutiveFailures = 3;

} // namespace

void RunLog::write_jsonl(const std::string& path) const
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << nlohmann::json{{"type", "header"}, {"seed", seed}, {"initial_dataset_size", initial_dataset_size},
                          {"config", config}}
               .dump()
        << '\n';
    for (const auto& r : records) {
        auto j = record_json(r);
        j["type"] = "iteration";
        out << j.dump() << '\n';
    }
}

RunResult run(Simulator& sim, const DriverConfig& config, std::optional<Dataset> initial)
{
    config.stopping.validate();
    config.train.validate();
    config.multistart.validate();
    const ObjectiveSpec& spec = config.objective;
    if (sim.input_dim() != spec.input_dim() || sim.output_dim() != spec.output_dim()) {
        throw Error("run: simulator and objective dimensions differ");
    }

    RunResult result;
    if (initial) {
        initial->validate();
        if (initial->empty()) throw Error("run: initial dataset is empty");
        if (initial->input_dim() != sim.input_dim() || initial->output_dim() != sim.output_dim()) {
            throw Error("run: initial dataset dimensions do not match the simulator");
        }
        result.dataset = std::move(*initial);
    } else {
        SobolSequence seq(sim.input_dim(), config.sobol_offset);
        result.dataset = collect_initial(sim, config.initial_samples, seq);
    }
    result.log.seed = config.seed;
    result.log.config = config.snapshot;
    result.log.initial_dataset_size = result.dataset.size();
    result.scoring = Standardizer::fit(result.dataset);

    std::size_t best_row = 0;
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < result.dataset.size(); ++r) {
        const double l = loss_physical(spec, result.scoring, result.dataset.outputs[r], result.dataset.inputs[r]);
        result.initial_losses.push_back(l);
        if (l < best_loss) {
            best_loss = l;
            best_row = r;
        }
    }

    std::size_t attempt = 0;
    std::size_t consecutive_failures = 0;
    StopReason reason = check_stopping(result.query_losses, config.stopping);
    while (reason == StopReason::None) {
        ++attempt;
        IterationRecord rec;
        rec.attempt = attempt;
        rec.iteration = result.query_losses.size() + 1;
        TrainConfig tc = config.train;
        tc.seed = derive_seed(config.seed, 1000 + attempt);
        rec.train_seed = tc.seed;
        try {
            TrainResult trained = train(result.dataset, tc);
            rec.epochs_run = trained.report.epochs.size() - 1;
            rec.best_epoch = trained.report.best_epoch;
            rec.validation_mae = trained.report.best_validation_mae;

            SobolSequence starts(sim.input_dim(), (attempt - 1) * config.multistart.num_starts);
            const OptResult opt = optimize_inputs(trained.model, spec, config.multistart, starts);
            rec.x_best = opt.best_x;
            rec.surrogate_loss = opt.best_loss;
            result.final_model = std::move(trained.model);

            rec.queried = true;
            rec.y_best = sim.evaluate(opt.best_x);
            rec.true_loss = loss_physical(spec, result.scoring, rec.y_best, rec.x_best);
            rec.ok = true;
        } catch (const SimulatorError& e) {
            rec.error = e.what();
        } catch (const NumericError& e) {
            rec.error = e.what();
        }

        if (!rec.ok) {
            result.log.records.push_back(std::move(rec));
            if (++consecutive_failures >= kMaxConsecutiveFailures) {
                throw RunAborted("run: " + std::to_string(kMaxConsecutiveFailures) +
                                 " consecutive failed iterations; last error: " + result.log.records.back().error);
            }
            continue;
        }
        consecutive_failures = 0;
        result.dataset.add(rec.x_best, rec.y_best, Provenance::IntelligentQuery);
        result.query_losses.push_back(rec.true_loss);
        if (rec.true_loss < best_loss) {
            best_loss = rec.true_loss;
            best_row = result.dataset.size() - 1;
        }
        reason = check_stopping(result.query_losses, config.stopping);
        rec.stop_reason = reason;
        result.log.records.push_back(std::move(rec));
    }

    result.stop_reason = reason;
    result.iterations = result.query_losses.size();
    result.best_loss = best_loss;
    result.x_best = result.dataset.inputs[best_row];
    result.y_best = result.dataset.outputs[best_row];
    return result;
}

nlohmann::json summary_json(const RunResult& result)
{
    return {{"x_best", to_std(result.x_best)},
            {"y_best", to_std(result.y_best)},
            {"true_loss", result.best_loss},
            {"iterations", result.iterations},
            {"stop_reason", to_string(result.stop_reason)},
            {"initial_dataset_size", result.log.initial_dataset_size},
            {"total_queries", result.dataset.size()}};
}

} // namespace surropt
