#include "surropt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "surropt/parallel.hpp"
#include "surropt/rng.hpp"

namespace surropt {

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

std::string what(const std::exception_ptr& e)
{
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

double mean(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

// ------------------------------------------------------------ sensitivity

SensitivityReport sensitivity(const Dataset& data, const TrainConfig& config, std::span<const std::uint64_t> seeds,
                              const std::vector<std::string>& names)
{
    const std::size_t m = data.input_dim();
    if (m < 2) throw Error("sensitivity: need at least two inputs");
    if (seeds.empty()) throw Error("sensitivity: need at least one seed");
    if (!names.empty() && names.size() != m) throw Error("sensitivity: one name per input required");

    // cell (s, c): seed s, column c dropped; c == m is the all-inputs model
    const std::size_t cells = seeds.size() * (m + 1);
    std::vector<double> loss(cells, std::numeric_limits<double>::quiet_NaN());
    const auto errors = parallel_for(cells, [&](std::size_t cell) {
        const std::size_t s = cell / (m + 1);
        const std::size_t c = cell % (m + 1);
        TrainConfig cfg = config;
        cfg.seed = seeds[s];
        const Dataset reduced = c == m ? data : data.without_input(c);
        loss[cell] = train(reduced, cfg).report.best_mean_validation_mae();
    });

    SensitivityReport report;
    std::vector<double> base;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        if (errors[s * (m + 1) + m]) throw Error("sensitivity: baseline model failed: " + what(errors[s * (m + 1) + m]));
        base.push_back(loss[s * (m + 1) + m]);
    }
    report.baseline_loss = mean(base);

    for (std::size_t c = 0; c < m; ++c) {
        SensitivityEntry e;
        e.index = c;
        e.name = names.empty() ? "x_" + std::to_string(c + 1) : names[c];
        std::vector<double> vals;
        e.valid = true;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            if (errors[s * (m + 1) + c]) e.valid = false;
            else vals.push_back(loss[s * (m + 1) + c]);
        }
        if (e.valid) {
            e.validation_loss_without = mean(vals);
            e.increase = e.validation_loss_without - report.baseline_loss;
            e.relative_increase = e.increase / report.baseline_loss;
        }
        report.inputs.push_back(std::move(e));
    }
    report.ranking.resize(m);
    std::iota(report.ranking.begin(), report.ranking.end(), 0u);
    std::stable_sort(report.ranking.begin(), report.ranking.end(), [&](std::size_t a, std::size_t b) {
        const auto& ea = report.inputs[a];
        const auto& eb = report.inputs[b];
        if (ea.valid != eb.valid) return ea.valid;
        return ea.increase > eb.increase;
    });
    return report;
}

void SensitivityReport::write_csv(const std::string& path) const
{
    auto out = open_out(path);
    out << "index,name,validation_loss,increase,relative_increase,rank\n";
    out << "baseline,all_inputs," << format_double(baseline_loss) << ",0,0,\n";
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        const auto& e = inputs[ranking[r]];
        if (!e.valid) {
            out << e.index + 1 << ',' << e.name << ",,,,\n";
            continue;
        }
        out << e.index + 1 << ',' << e.name << ',' << format_double(e.validation_loss_without) << ','
            << format_double(e.increase) << ',' << format_double(e.relative_increase) << ',' << r + 1 << '\n';
    }
}

// -------------------------------------------------------------- landscape

namespace {

LandscapeGrid make_grid(const BoundsSpec& bounds, std::array<std::size_t, 2> dims, const Vector& frozen,
                        std::size_t resolution)
{
    if (resolution < 2) throw Error("landscape: resolution must be at least 2");
    if (dims[0] >= bounds.dim() || dims[1] >= bounds.dim() || dims[0] == dims[1]) {
        throw Error("landscape: need two distinct input indices within range");
    }
    require_dim(frozen, static_cast<Eigen::Index>(bounds.dim()), "landscape frozen point");
    if (!bounds.contains(frozen)) throw Error("landscape: frozen point outside bounds");
    LandscapeGrid g;
    g.dims = dims;
    g.frozen = frozen;
    const auto r = static_cast<Eigen::Index>(resolution);
    const auto a = static_cast<Eigen::Index>(dims[0]);
    const auto b = static_cast<Eigen::Index>(dims[1]);
    g.axis1 = Vector::LinSpaced(r, bounds.x_min()[a], bounds.x_max()[a]);
    g.axis2 = Vector::LinSpaced(r, bounds.x_min()[b], bounds.x_max()[b]);
    // LinSpaced end points can land one ulp inside; pin them to the bounds exactly
    g.axis1[r - 1] = bounds.x_max()[a];
    g.axis2[r - 1] = bounds.x_max()[b];
    g.losses = Matrix::Constant(r, r, std::numeric_limits<double>::quiet_NaN());
    return g;
}

} // namespace

Vector LandscapeGrid::point(std::size_t i, std::size_t j) const
{
    Vector x = frozen;
    x[static_cast<Eigen::Index>(dims[0])] = axis1[static_cast<Eigen::Index>(i)];
    x[static_cast<Eigen::Index>(dims[1])] = axis2[static_cast<Eigen::Index>(j)];
    return x;
}

LandscapeGrid landscape(const DifferentiableModel& model, const ObjectiveSpec& spec, std::array<std::size_t, 2> dims,
                        const Vector& frozen, std::size_t resolution)
{
    LandscapeGrid g = make_grid(spec.bounds, dims, frozen, resolution);
    const Vector target_std = model.standardizer().standardize_output(spec.targets);
    for (Eigen::Index i = 0; i < g.losses.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.losses.cols(); ++j) {
            const Vector x = g.point(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            g.losses(i, j) = loss(spec, target_std, model.predict_std(x), x);
        }
    }
    return g;
}

LandscapeGrid landscape(Simulator& sim, const ObjectiveSpec& spec, const Standardizer& scoring,
                        std::array<std::size_t, 2> dims, const Vector& frozen, std::size_t resolution)
{
    LandscapeGrid g = make_grid(spec.bounds, dims, frozen, resolution);
    for (Eigen::Index i = 0; i < g.losses.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.losses.cols(); ++j) {
            const Vector x = g.point(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            try {
                Vector y = sim.evaluate(x);
                g.losses(i, j) = loss_physical(spec, scoring, y, x);
                g.queried.add(x, std::move(y), Provenance::Baseline);
            } catch (const SimulatorError&) {
                // stays NaN: missing cell
            }
        }
    }
    return g;
}

void LandscapeGrid::write_csv(const std::string& path) const
{
    auto out = open_out(path);
    out << "i,j,x_" << dims[0] + 1 << ",x_" << dims[1] + 1 << ",loss\n";
    for (Eigen::Index i = 0; i < losses.rows(); ++i) {
        for (Eigen::Index j = 0; j < losses.cols(); ++j) {
            out << i << ',' << j << ',' << format_double(axis1[i]) << ',' << format_double(axis2[j]) << ',';
            if (std::isfinite(losses(i, j))) out << format_double(losses(i, j));
            out << '\n';
        }
    }
}

// ------------------------------------------------------------ size sweep

SweepResult training_size_sweep(Simulator& sim, const std::vector<std::size_t>& sizes,
                                std::span<const std::uint64_t> seeds, const TrainConfig& config)
{
    if (sizes.empty() || seeds.empty()) throw Error("training_size_sweep: need sizes and seeds");
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw Error("training_size_sweep: sizes must be ascending");
    const std::size_t largest = sizes.back();

    SobolSequence seq(sim.input_dim());
    const Dataset pool = collect_initial(sim, largest, seq);
    const Dataset holdout = collect_initial(sim, kSweepHoldout, seq);
    if (pool.size() != largest) throw Error("training_size_sweep: simulator failures in the training pool");
    const Standardizer scale = Standardizer::fit(holdout);

    SweepResult result;
    result.sizes = sizes;
    result.per_seed.assign(sizes.size(), std::vector<double>(seeds.size(), 0.0));
    parallel_for_all(sizes.size() * seeds.size(), [&](std::size_t cell) {
        const std::size_t si = cell / seeds.size();
        const std::size_t s = cell % seeds.size();
        TrainConfig cfg = config;
        cfg.seed = seeds[s];
        const auto model = train(pool.prefix(sizes[si]), cfg).model;
        double total = 0.0;
        for (std::size_t r = 0; r < holdout.size(); ++r) {
            const Vector err = scale.standardize_output(model.predict(holdout.inputs[r])) -
                               scale.standardize_output(holdout.outputs[r]);
            total += err.cwiseAbs().mean();
        }
        result.per_seed[si][s] = total / static_cast<double>(holdout.size());
    });
    for (const auto& row : result.per_seed) result.mean_loss.push_back(mean(row));
    result.pool = pool;
    result.holdout = holdout;
    return result;
}

void SweepResult::write_csv(const std::string& path) const
{
    auto out = open_out(path);
    out << "size,mean_validation_loss";
    for (std::size_t s = 0; s < (per_seed.empty() ? 0 : per_seed.front().size()); ++s) out << ",seed_" << s;
    out << '\n';
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        out << sizes[i] << ',' << format_double(mean_loss[i]);
        for (double v : per_seed[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

// ------------------------------------------------------------ MC baseline

std::vector<double> best_so_far(std::span<const double> losses)
{
    std::vector<double> out;
    out.reserve(losses.size());
    double best = std::numeric_limits<double>::infinity();
    for (double l : losses) {
        best = std::min(best, l);
        out.push_back(best);
    }
    return out;
}

BaselineComparison mc_baseline(Simulator& sim, const ObjectiveSpec& spec, const BaselineConfig& config)
{
    if (config.budget == 0) throw Error("mc_baseline: budget must be at least 1");
    if (config.trials == 0) throw Error("mc_baseline: need at least one trial");

    SobolSequence initial_seq(sim.input_dim());
    const Dataset shared = collect_initial(sim, config.initial_samples, initial_seq);
    const Standardizer scoring = Standardizer::fit(shared);

    BaselineComparison out;
    out.trials = config.trials;
    out.shared_initial = shared;
    out.initial_best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < shared.size(); ++r) {
        out.initial_best_loss =
            std::min(out.initial_best_loss, loss_physical(spec, scoring, shared.outputs[r], shared.inputs[r]));
    }

    std::vector<std::vector<double>> intelligent(config.trials), random(config.trials);
    std::vector<Dataset> intel_data(config.trials), random_data(config.trials);
    std::vector<std::uint64_t> intel_queries(config.trials, 0), random_queries(config.trials, 0);
    const auto errors = parallel_for(2 * config.trials, [&](std::size_t job) {
        const std::size_t t = job / 2;
        if (job % 2 == 0) {
            DriverConfig dc;
            dc.objective = spec;
            dc.train = config.train;
            dc.multistart = config.multistart;
            dc.seed = derive_seed(config.seed, t);
            dc.stopping.goal_loss.reset();
            dc.stopping.use_convergence = false;
            dc.stopping.max_iterations = config.budget;
            const RunResult r = run(sim, dc, shared);
            std::uint64_t queries = 0;
            for (const auto& rec : r.log.records) queries += rec.queried ? 1 : 0;
            intel_queries[t] = queries;
            intelligent[t] = best_so_far(r.query_losses);
            for (std::size_t row = shared.size(); row < r.dataset.size(); ++row) {
                intel_data[t].add(r.dataset.inputs[row], r.dataset.outputs[row], r.dataset.provenance[row]);
            }
        } else {
            // quasi-random search continues the Sobol stream past the shared design
            SobolSequence seq(sim.input_dim(), config.initial_samples + t * config.budget);
            std::vector<double> losses;
            for (const auto& x : sample_batch(seq, config.budget, spec.bounds)) {
                ++random_queries[t];
                Vector y = sim.evaluate(x);
                losses.push_back(loss_physical(spec, scoring, y, x));
                random_data[t].add(x, std::move(y), Provenance::Baseline);
            }
            random[t] = best_so_far(losses);
        }
    });

    std::vector<bool> usable(config.trials, true);
    for (std::size_t job = 0; job < errors.size(); ++job) {
        if (!errors[job]) continue;
        usable[job / 2] = false;
        out.failures.push_back("trial " + std::to_string(job / 2) + (job % 2 == 0 ? " intelligent: " : " random: ") +
                               what(errors[job]));
    }
    out.mean_intelligent.assign(config.budget, 0.0);
    out.mean_random.assign(config.budget, 0.0);
    std::size_t used = 0;
    for (std::size_t t = 0; t < config.trials; ++t) {
        if (!usable[t]) continue;
        ++used;
        out.intelligent.push_back(intelligent[t]);
        out.random.push_back(random[t]);
        out.intelligent_queries += intel_queries[t];
        out.random_queries += random_queries[t];
        out.intelligent_records.push_back(std::move(intel_data[t]));
        out.random_records.push_back(std::move(random_data[t]));
        for (std::size_t q = 0; q < config.budget; ++q) {
            out.mean_intelligent[q] += intelligent[t][q];
            out.mean_random[q] += random[t][q];
        }
    }
    if (used == 0) throw Error("mc_baseline: every trial failed");
    for (std::size_t q = 0; q < config.budget; ++q) {
        out.mean_intelligent[q] /= static_cast<double>(used);
        out.mean_random[q] /= static_cast<double>(used);
    }

    out.reference_loss = config.reference_loss.value_or(out.mean_random.back());
    auto first_reaching = [&](const std::vector<double>& curve) -> std::optional<std::size_t> {
        for (std::size_t q = 0; q < curve.size(); ++q) {
            if (curve[q] <= out.reference_loss) return q + 1;
        }
        return std::nullopt;
    };
    out.queries_intelligent = first_reaching(out.mean_intelligent);
    out.queries_random = first_reaching(out.mean_random);
    if (out.queries_intelligent && out.queries_random) {
        out.speedup_factor = static_cast<double>(*out.queries_random) / static_cast<double>(*out.queries_intelligent);
    }
    return out;
}

nlohmann::json BaselineComparison::summary_json() const
{
    auto opt = [](const std::optional<std::size_t>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"trials", trials},
            {"trials_used", intelligent.size()},
            {"failures", failures},
            {"initial_best_loss", initial_best_loss},
            {"mean_intelligent", mean_intelligent},
            {"mean_random", mean_random},
            {"reference_loss", reference_loss},
            {"queries_intelligent", opt(queries_intelligent)},
            {"queries_random", opt(queries_random)},
            {"speedup_factor", speedup_factor},
            {"intelligent_queries", intelligent_queries},
            {"random_queries", random_queries}};
}

void BaselineComparison::write_csv(const std::string& path) const
{
    auto out = open_out(path);
    out << "strategy,trial";
    for (std::size_t q = 0; q < mean_intelligent.size(); ++q) out << ",q" << q + 1;
    out << '\n';
    auto row = [&](const std::string& name, const std::string& trial, const std::vector<double>& curve) {
        out << name << ',' << trial;
        for (double v : curve) out << ',' << format_double(v);
        out << '\n';
    };
    for (std::size_t t = 0; t < intelligent.size(); ++t) row("intelligent", std::to_string(t), intelligent[t]);
    for (std::size_t t = 0; t < random.size(); ++t) row("quasi-random", std::to_string(t), random[t]);
    row("intelligent", "mean", mean_intelligent);
    row("quasi-random", "mean", mean_random);
}

// ------------------------------------------------------------ predictions

std::vector<PredictionRow> export_predictions(const DifferentiableModel& model, const Dataset& holdout)
{
    if (holdout.empty()) throw Error("export_predictions: held-out split is empty");
    std::vector<PredictionRow> rows;
    for (std::size_t r = 0; r < holdout.size(); ++r) {
        const Vector pred = model.predict(holdout.inputs[r]);
        for (Eigen::Index k = 0; k < pred.size(); ++k) {
            rows.push_back({static_cast<std::size_t>(k), holdout.outputs[r][k], pred[k]});
        }
    }
    return rows;
}

void write_predictions_csv(const std::vector<PredictionRow>& rows, const std::string& path)
{
    auto out = open_out(path);
    out << "output_index,actual,predicted\n";
    for (const auto& r : rows) {
        out << r.output_index + 1 << ',' << format_double(r.actual) << ',' << format_double(r.predicted) << '\n';
    }
}

} // namespace surropt
