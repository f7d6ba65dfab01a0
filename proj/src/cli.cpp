#include "surropt/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

namespace surropt::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Walks one JSON object, tracking which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError("'" + label() + "' must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const json& raw(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    Section child(const std::string& key)
    {
        used_.insert(key);
        return Section(j_.at(key), qualify(key));
    }

    template <typename T>
    std::optional<T> get(const std::string& key)
    {
        used_.insert(key);
        if (!has(key)) return std::nullopt;
        const json& v = j_.at(key);
        check_type<T>(v, key);
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw ConfigError("key '" + qualify(key) + "': wrong type");
        }
    }

    template <typename T>
    T get_or(const std::string& key, T fallback)
    {
        return get<T>(key).value_or(std::move(fallback));
    }

    template <typename T>
    T require(const std::string& key)
    {
        auto v = get<T>(key);
        if (!v) throw ConfigError("missing required key '" + qualify(key) + "'");
        return *v;
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw ConfigError("unknown key '" + qualify(key) + "'");
        }
    }

    std::string qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    std::string label() const { return path_.empty() ? "<root>" : path_; }

    static bool non_negative_integer(const json& v)
    {
        return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    }

    template <typename T>
    void check_type(const json& v, const std::string& key) const
    {
        bool ok = true;
        if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
        else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
        else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
        else if constexpr (std::is_unsigned_v<T>) ok = non_negative_integer(v);
        else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
        else if constexpr (std::is_same_v<T, std::vector<double>>) {
            ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
        } else if constexpr (std::is_same_v<T, std::vector<std::size_t>> || std::is_same_v<T, std::vector<std::uint64_t>>) {
            ok = v.is_array() && std::all_of(v.begin(), v.end(), non_negative_integer);
        }
        if (!ok) throw ConfigError("key '" + qualify(key) + "': wrong type");
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

Vector to_vector(const std::vector<double>& v)
{
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::size_t sim_input_dim(const SimulatorConfig& s, const std::optional<BoundsSpec>& bounds)
{
    if (s.builtin == "toy-flare") return ToyFlareSim::kInputs;
    if (!s.builtin.empty()) return s.dim;
    return bounds ? bounds->dim() : 0;
}

std::size_t sim_output_dim(const SimulatorConfig& s)
{
    if (s.builtin == "toy-flare") return ToyFlareSim::kOutputs;
    if (!s.builtin.empty()) return 3;
    return s.output_dim;
}

void parse_simulator(Section sec, RunConfig& cfg)
{
    auto& s = cfg.simulator;
    if (sec.has("builtin")) {
        s.builtin = sec.require<std::string>("builtin");
        if (s.builtin != "toy-flare" && s.builtin != "sphere" && s.builtin != "rosenbrock-3out") {
            throw ConfigError("key 'simulator.builtin': unknown simulator '" + s.builtin + "'");
        }
        if (sec.has("perturbation")) {
            if (s.builtin != "toy-flare") throw ConfigError("key 'simulator.perturbation': only valid for toy-flare");
            auto p = sec.child("perturbation");
            s.perturbation.drag = p.get_or<double>("drag", 1.0);
            s.perturbation.lift = p.get_or<double>("lift", 1.0);
            s.perturbation.pitch = p.get_or<double>("pitch", 1.0);
            p.finish();
        }
        if (sec.has("dim")) {
            if (s.builtin == "toy-flare") throw ConfigError("key 'simulator.dim': toy-flare has a fixed dimension");
            s.dim = sec.require<std::size_t>("dim");
        }
    } else if (sec.has("external")) {
        auto e = sec.child("external");
        s.command = e.require<std::string>("command");
        s.output_dim = e.require<std::size_t>("output_dim");
        s.timeout_seconds = e.get_or<double>("timeout_s", 600.0);
        e.finish();
    } else {
        throw ConfigError("key 'simulator': needs 'builtin' or 'external'");
    }
    sec.finish();
}

void parse_train(Section sec, TrainConfig& t)
{
    t.hidden_layers = sec.get_or<std::vector<std::size_t>>("hidden_layers", t.hidden_layers);
    t.learning_rate = sec.get_or<double>("learning_rate", t.learning_rate);
    t.batch_size = sec.get_or<std::size_t>("batch_size", t.batch_size);
    t.max_epochs = sec.get_or<std::size_t>("max_epochs", t.max_epochs);
    t.validation_fraction = sec.get_or<double>("validation_fraction", t.validation_fraction);
    t.early_stop_patience = sec.get_or<std::size_t>("early_stop_patience", t.early_stop_patience);
    sec.finish();
}

void parse_multistart(Section sec, MultiStartConfig& m)
{
    m.num_starts = sec.get_or<std::size_t>("num_starts", m.num_starts);
    m.num_steps = sec.get_or<std::size_t>("num_steps", m.num_steps);
    m.learning_rate = sec.get_or<double>("learning_rate", m.learning_rate);
    m.momentum = sec.get_or<double>("momentum", m.momentum);
    m.record_paths = sec.get_or<bool>("record_paths", m.record_paths);
    sec.finish();
}

void parse_stopping(Section sec, StoppingSpec& s)
{
    s.goal_loss = sec.get<double>("goal_loss");
    s.convergence_window = sec.get_or<std::size_t>("convergence_window", s.convergence_window);
    s.convergence_epsilon = sec.get_or<double>("convergence_epsilon", s.convergence_epsilon);
    s.max_iterations = sec.get_or<std::size_t>("max_iterations", s.max_iterations);
    s.use_convergence = sec.get_or<bool>("use_convergence", s.use_convergence);
    sec.finish();
}

void parse_studies(Section sec, StudyConfig& st)
{
    if (sec.has("sensitivity")) {
        auto s = sec.child("sensitivity");
        st.sensitivity_seeds = s.get_or<std::vector<std::uint64_t>>("seeds", st.sensitivity_seeds);
        s.finish();
    }
    if (sec.has("landscape")) {
        auto s = sec.child("landscape");
        if (s.has("dims")) {
            const auto dims = s.require<std::vector<std::size_t>>("dims");
            if (dims.size() != 2) throw ConfigError("key 'studies.landscape.dims': need exactly two indices");
            st.landscape_dims = {dims[0], dims[1]};
        }
        st.landscape_resolution = s.get_or<std::size_t>("resolution", st.landscape_resolution);
        st.landscape_frozen = s.get<std::vector<double>>("frozen");
        st.landscape_source = s.get_or<std::string>("source", st.landscape_source);
        if (st.landscape_source != "surrogate" && st.landscape_source != "simulator" && st.landscape_source != "both") {
            throw ConfigError("key 'studies.landscape.source': expected surrogate, simulator or both");
        }
        s.finish();
    }
    if (sec.has("sweep")) {
        auto s = sec.child("sweep");
        st.sweep_sizes = s.get_or<std::vector<std::size_t>>("sizes", st.sweep_sizes);
        st.sweep_seeds = s.get_or<std::vector<std::uint64_t>>("seeds", st.sweep_seeds);
        s.finish();
    }
    if (sec.has("baseline")) {
        auto s = sec.child("baseline");
        st.baseline_budget = s.get_or<std::size_t>("budget", st.baseline_budget);
        st.baseline_trials = s.get_or<std::size_t>("trials", st.baseline_trials);
        st.baseline_reference_loss = s.get<double>("reference_loss");
        s.finish();
    }
    if (sec.has("predictions")) sec.child("predictions").finish();
    sec.finish();
}

} // namespace

RunConfig parse_config(const json& doc)
{
    RunConfig cfg;
    cfg.raw = doc;
    Section root(doc, "");
    const auto version = root.get<long long>("schema_version");
    if (!version) throw ConfigError("missing required key 'schema_version'");
    if (*version != kSchemaVersion) {
        throw ConfigError("key 'schema_version': unsupported version " + std::to_string(*version));
    }
    if (!root.has("simulator")) throw ConfigError("missing required key 'simulator'");
    parse_simulator(root.child("simulator"), cfg);

    if (root.has("bounds")) {
        auto b = root.child("bounds");
        try {
            cfg.bounds = BoundsSpec(to_vector(b.require<std::vector<double>>("x_min")),
                                    to_vector(b.require<std::vector<double>>("x_max")));
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string("key 'bounds': ") + e.what());
        }
        b.finish();
    } else if (cfg.simulator.builtin.empty()) {
        throw ConfigError("missing required key 'bounds' (needed for external simulators)");
    }

    const std::size_t m = sim_input_dim(cfg.simulator, cfg.bounds);
    const std::size_t n = sim_output_dim(cfg.simulator);
    if (cfg.bounds && cfg.bounds->dim() != m) {
        throw ConfigError("key 'bounds': expected " + std::to_string(m) + " dimensions");
    }

    // builtin simulators define their own physical box; config bounds may only narrow it
    BoundsSpec sim_box;
    if (!cfg.simulator.builtin.empty()) {
        auto sim = make_simulator(cfg);
        sim_box = sim->bounds();
        if (cfg.bounds && ((cfg.bounds->x_min().array() < sim_box.x_min().array()).any() ||
                           (cfg.bounds->x_max().array() > sim_box.x_max().array()).any())) {
            throw ConfigError("key 'bounds': must lie inside the simulator's own bounds");
        }
    }
    const BoundsSpec bounds = cfg.bounds ? *cfg.bounds : sim_box;

    if (root.has("objective")) {
        auto o = root.child("objective");
        const auto targets = o.require<std::vector<double>>("targets");
        const auto weights = o.get_or<std::vector<double>>("weights", std::vector<double>(targets.size(), 1.0));
        const double alpha = o.get_or<double>("alpha", 1.0);
        o.finish();
        if (targets.size() != n) {
            throw ConfigError("key 'objective.targets': expected " + std::to_string(n) + " values");
        }
        try {
            cfg.objective = ObjectiveSpec(to_vector(targets), to_vector(weights), alpha, bounds);
        } catch (const Error& e) {
            throw ConfigError(std::string("key 'objective': ") + e.what());
        }
    } else if (cfg.simulator.builtin == "toy-flare") {
        cfg.objective = ObjectiveSpec::flare_defaults(bounds);
    } else {
        throw ConfigError("missing required key 'objective'");
    }

    cfg.initial_samples = root.get_or<std::size_t>("initial_samples", cfg.initial_samples);
    if (root.has("train")) parse_train(root.child("train"), cfg.train);
    if (root.has("multistart")) parse_multistart(root.child("multistart"), cfg.multistart);
    if (root.has("stopping")) parse_stopping(root.child("stopping"), cfg.stopping);
    else root.get<json>("stopping");
    cfg.seed = root.get_or<std::uint64_t>("seed", cfg.seed);
    cfg.output_dir = root.get_or<std::string>("output_dir", cfg.output_dir);
    if (root.has("studies")) parse_studies(root.child("studies"), cfg.studies);
    for (const char* k : {"train", "multistart", "studies", "bounds", "objective"}) {
        if (!root.has(k)) root.get<json>(k);
    }
    root.finish();

    try {
        cfg.train.validate();
        cfg.multistart.validate();
        cfg.stopping.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line:column
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" +
                          e.what() + ")");
    }
    return parse_config(doc);
}

std::unique_ptr<Simulator> make_simulator(const RunConfig& config)
{
    const auto& s = config.simulator;
    if (s.builtin == "toy-flare") return std::make_unique<ToyFlareSim>(s.perturbation);
    if (!s.builtin.empty()) return benchmark_sim(s.builtin, s.dim);
    if (!config.bounds) throw ConfigError("external simulator needs bounds");
    return std::make_unique<ExternalSimulator>(s.command, *config.bounds, s.output_dim, s.timeout_seconds);
}

DriverConfig driver_config(const RunConfig& config)
{
    DriverConfig dc;
    dc.objective = config.objective;
    dc.stopping = config.stopping;
    dc.train = config.train;
    dc.multistart = config.multistart;
    dc.seed = config.seed;
    dc.initial_samples = config.initial_samples;
    dc.snapshot = config.raw;
    dc.snapshot["seed"] = config.seed;
    dc.snapshot.erase("output_dir");
    return dc;
}

// ------------------------------------------------------------------ commands

namespace {

struct Prepared {
    RunConfig config;
    fs::path out;
};

Prepared prepare(const Options& opts)
{
    Prepared p{load_config(opts.config_path), {}};
    if (opts.seed) p.config.seed = *opts.seed;
    p.out = opts.out_dir ? fs::path(*opts.out_dir) : fs::path(p.config.output_dir);
    fs::create_directories(p.out);
    return p;
}

void write_json(const fs::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

/// Initial design for studies: the resumable dataset.csv when asked, else fresh queries.
Dataset initial_dataset(const Prepared& p, Simulator& sim, bool resume)
{
    const auto path = p.out / "dataset.csv";
    if (resume) return read_dataset_csv(path.string());
    SobolSequence seq(sim.input_dim());
    Dataset d = collect_initial(sim, p.config.initial_samples, seq);
    write_dataset_csv(d, path.string());
    return d;
}

template <typename F>
int guarded(std::ostream& log, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
    }
    return 1;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

} // namespace

int cmd_run(const Options& opts, std::ostream& log)
{
    return guarded(log, [&] {
        Prepared p = prepare(opts);
        auto sim = make_simulator(p.config);
        std::optional<Dataset> initial;
        if (opts.resume) {
            initial = read_dataset_csv((p.out / "dataset.csv").string());
            log << "resumed " << initial->size() << " records from " << (p.out / "dataset.csv").string() << '\n';
        }
        const RunResult result = run(*sim, driver_config(p.config), std::move(initial));
        write_dataset_csv(result.dataset, (p.out / "dataset.csv").string());
        result.log.write_jsonl((p.out / "runlog.jsonl").string());
        if (result.final_model) result.final_model->save((p.out / "model.json").string());
        write_json(p.out / "summary.json", summary_json(result));
        log << "stop_reason=" << to_string(result.stop_reason) << " iterations=" << result.iterations
            << " true_loss=" << result.best_loss << '\n';
        return result.stop_reason == StopReason::MaxIterations ? 2 : 0;
    });
}

int cmd_sample(const Options& opts, std::ostream& log)
{
    return guarded(log, [&] {
        Prepared p = prepare(opts);
        const long long count = opts.count.value_or(static_cast<long long>(p.config.initial_samples));
        if (count <= 0) throw Error("sample: count must be positive");
        auto sim = make_simulator(p.config);
        SobolSequence seq(sim->input_dim());
        std::vector<std::string> failures;
        const Dataset data = collect_initial(*sim, static_cast<std::size_t>(count), seq, &failures);
        for (const auto& f : failures) log << "query failed: " << f << '\n';
        write_dataset_csv(data, (p.out / "dataset.csv").string());
        log << "wrote " << data.size() << " records\n";
        return 0;
    });
}

int cmd_study(const std::string& study, const Options& opts, std::ostream& log)
{
    return guarded(log, [&] {
        Prepared p = prepare(opts);
        const auto& cfg = p.config;
        const auto& st = cfg.studies;
        auto sim = make_simulator(cfg);
        TrainConfig tc = cfg.train;
        tc.seed = cfg.seed;

        if (study == "sensitivity") {
            const Dataset data = initial_dataset(p, *sim, opts.resume);
            std::vector<std::string> names;
            if (cfg.simulator.builtin == "toy-flare") names = ToyFlareSim::input_names();
            const auto report = sensitivity(data, cfg.train, st.sensitivity_seeds, names);
            report.write_csv((p.out / "sensitivity.csv").string());
            json ranking = json::array();
            for (auto i : report.ranking) ranking.push_back(report.inputs[i].name);
            write_json(p.out / "sensitivity.json", {{"baseline_loss", report.baseline_loss}, {"ranking", ranking}});
            return 0;
        }
        if (study == "landscape") {
            const auto dims = opts.dims.value_or(st.landscape_dims);
            const BoundsSpec& b = cfg.objective.bounds;
            const Vector frozen = st.landscape_frozen ? to_vector(*st.landscape_frozen)
                                                      : Vector((b.x_min() + b.x_max()) / 2.0);
            const Dataset data = initial_dataset(p, *sim, opts.resume);
            json summary = {{"dims", dims}, {"resolution", st.landscape_resolution}};
            if (st.landscape_source != "simulator") {
                const auto model = train(data, tc).model;
                const auto grid = landscape(model, cfg.objective, dims, frozen, st.landscape_resolution);
                grid.write_csv((p.out / "landscape_surrogate.csv").string());
                summary["surrogate_min"] = grid.losses.minCoeff();
            }
            if (st.landscape_source != "surrogate") {
                const auto grid = landscape(*sim, cfg.objective, Standardizer::fit(data), dims, frozen,
                                            st.landscape_resolution);
                grid.write_csv((p.out / "landscape_simulator.csv").string());
                if (!grid.queried.empty()) write_dataset_csv(grid.queried, (p.out / "landscape_queries.csv").string());
                summary["simulator_queries"] = grid.queried.size();
            }
            write_json(p.out / "landscape.json", summary);
            return 0;
        }
        if (study == "sweep") {
            const auto result = training_size_sweep(*sim, st.sweep_sizes, st.sweep_seeds, cfg.train);
            result.write_csv((p.out / "sweep.csv").string());
            write_dataset_csv(result.pool, (p.out / "sweep_pool.csv").string());
            write_dataset_csv(result.holdout, (p.out / "sweep_holdout.csv").string());
            write_json(p.out / "sweep.json", {{"sizes", result.sizes}, {"mean_loss", result.mean_loss}});
            return 0;
        }
        if (study == "baseline") {
            BaselineConfig bc;
            bc.budget = st.baseline_budget;
            bc.trials = st.baseline_trials;
            bc.seed = cfg.seed;
            bc.initial_samples = cfg.initial_samples;
            bc.train = cfg.train;
            bc.multistart = cfg.multistart;
            bc.reference_loss = st.baseline_reference_loss;
            const auto cmp = mc_baseline(*sim, cfg.objective, bc);
            cmp.write_csv((p.out / "baseline.csv").string());
            write_dataset_csv(cmp.shared_initial, (p.out / "baseline_initial.csv").string());
            for (std::size_t t = 0; t < cmp.intelligent_records.size(); ++t) {
                const auto tag = std::to_string(t);
                write_dataset_csv(cmp.intelligent_records[t], (p.out / ("baseline_trial" + tag + "_intelligent.csv")).string());
                write_dataset_csv(cmp.random_records[t], (p.out / ("baseline_trial" + tag + "_random.csv")).string());
            }
            write_json(p.out / "baseline.json", cmp.summary_json());
            for (const auto& f : cmp.failures) log << "trial failed: " << f << '\n';
            log << "speedup_factor=" << cmp.speedup_factor << '\n';
            return 0;
        }
        if (study == "predictions") {
            const Dataset data = initial_dataset(p, *sim, opts.resume);
            const auto model = train(data, tc).model;
            const auto split = split_dataset(data, tc.validation_fraction, tc.seed);
            const auto rows = export_predictions(model, split.validation);
            write_predictions_csv(rows, (p.out / "predictions.csv").string());
            std::vector<double> corr;
            for (std::size_t k = 0; k < data.output_dim(); ++k) {
                std::vector<double> a, b;
                for (const auto& r : rows) {
                    if (r.output_index != k) continue;
                    a.push_back(r.actual);
                    b.push_back(r.predicted);
                }
                corr.push_back(pearson(a, b));
            }
            write_json(p.out / "predictions.json", {{"rows", rows.size()}, {"pearson", corr}});
            return 0;
        }
        throw Error("unknown study '" + study + "'");
    });
}

int main(int argc, char** argv)
{
    CLI::App app{"Surrogate-guided black-box simulation optimizer"};
    app.require_subcommand(1);
    Options opts;
    std::uint64_t seed = 0;
    std::string out;
    long long count = 0;
    std::vector<std::size_t> dims;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "Run configuration (JSON)")->required();
        cmd->add_option("--seed", seed, "Override the configured seed");
        cmd->add_option("--out", out, "Output directory");
    };
    auto* run_cmd = app.add_subcommand("run", "Run the surrogate optimization loop");
    add_common(run_cmd);
    run_cmd->add_flag("--resume", opts.resume, "Start from OUT/dataset.csv instead of new initial queries");

    auto* sample_cmd = app.add_subcommand("sample", "Query and store the initial design only");
    add_common(sample_cmd);
    sample_cmd->add_option("--count", count, "Number of points (default: initial_samples)");

    auto* study_cmd = app.add_subcommand("study", "Run an analysis study");
    study_cmd->require_subcommand(1);
    for (const char* name : {"sensitivity", "landscape", "sweep", "baseline", "predictions"}) {
        auto* s = study_cmd->add_subcommand(name, std::string("Run the ") + name + " study");
        add_common(s);
        s->add_flag("--resume", opts.resume, "Use OUT/dataset.csv as the initial design");
        if (std::string(name) == "landscape") {
            s->add_option("--dims", dims, "Two 0-based input indices")->expected(2)->delimiter(',');
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    auto finalize = [&](CLI::App* cmd) {
        if (cmd->count("--seed")) opts.seed = seed;
        if (cmd->count("--out")) opts.out_dir = out;
        if (cmd->get_option_no_throw("--count") && cmd->count("--count")) opts.count = count;
        if (cmd->get_option_no_throw("--dims") && cmd->count("--dims")) opts.dims = std::array{dims[0], dims[1]};
    };
    if (run_cmd->parsed()) {
        finalize(run_cmd);
        return cmd_run(opts, std::cerr);
    }
    if (sample_cmd->parsed()) {
        finalize(sample_cmd);
        return cmd_sample(opts, std::cerr);
    }
    for (auto* s : study_cmd->get_subcommands()) {
        finalize(s);
        return cmd_study(s->get_name(), opts, std::cerr);
    }
    return 1;
}

} // namespace surropt::cli
