#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "surropt/driver.hpp"

using namespace surropt;
namespace fs = std::filesystem;

namespace {

StoppingSpec stopping(std::optional<double> goal, std::size_t k = 5, double eps = 1e-3, std::size_t max = 50)
{
    StoppingSpec s;
    s.goal_loss = goal;
    s.convergence_window = k;
    s.convergence_epsilon = eps;
    s.max_iterations = max;
    return s;
}

StopReason check(std::vector<double> h, const StoppingSpec& s)
{
    return check_stopping(h, s);
}

/// Returns the same output everywhere.
class FlatSim final : public Simulator {
public:
    FlatSim() : bounds_(BoundsSpec::unit(2)) {}
    std::size_t input_dim() const override { return 2; }
    std::size_t output_dim() const override { return 1; }
    const BoundsSpec& bounds() const override { return bounds_; }
    std::string name() const override { return "flat"; }

protected:
    Vector run(const Vector&) override { return Vector::Constant(1, 3.0); }

private:
    BoundsSpec bounds_;
};

/// Sphere benchmark whose queries fail on chosen call numbers (1-based).
class FlakySim final : public Simulator {
public:
    explicit FlakySim(std::set<std::uint64_t> fail_on) : inner_("sphere", 2), fail_on_(std::move(fail_on)) {}
    std::size_t input_dim() const override { return 2; }
    std::size_t output_dim() const override { return 3; }
    const BoundsSpec& bounds() const override { return inner_.bounds(); }
    std::string name() const override { return "flaky"; }

protected:
    Vector run(const Vector& x) override
    {
        if (fail_on_.count(++calls_)) throw SimulatorError("scheduled failure");
        return inner_.evaluate(x);
    }

private:
    BenchmarkSim inner_;
    std::set<std::uint64_t> fail_on_;
    std::uint64_t calls_ = 0;
};

DriverConfig small_config(const Simulator& sim)
{
    DriverConfig c;
    c.objective = ObjectiveSpec(Vector::Constant(static_cast<Eigen::Index>(sim.output_dim()), 0.5),
                                Vector::Ones(static_cast<Eigen::Index>(sim.output_dim())), 1.0, sim.bounds());
    c.train.hidden_layers = {8};
    c.train.max_epochs = 30;
    c.train.learning_rate = 1e-2;
    c.multistart.num_starts = 8;
    c.multistart.num_steps = 40;
    c.initial_samples = 40;
    c.stopping.max_iterations = 4;
    c.stopping.use_convergence = false;
    return c;
}

} // namespace

TEST_SUITE("driver") {

TEST_CASE("stopping rule examples")
{
    CHECK(check({0.3, 0.04}, stopping(0.05)) == StopReason::Goal);
    CHECK(check(std::vector<double>(6, 0.2), stopping(std::nullopt)) == StopReason::Converged);
    std::vector<double> falling;
    for (int i = 0; i < 49; ++i) falling.push_back(1.0 - 0.01 * i);
    CHECK(check(falling, stopping(std::nullopt)) == StopReason::None);
    falling.push_back(0.5);
    CHECK(check(falling, stopping(std::nullopt)) == StopReason::MaxIterations);
    CHECK(check({}, stopping(std::nullopt, 5, 1e-3, 0)) == StopReason::MaxIterations);
    CHECK(check({}, stopping(0.1)) == StopReason::None);
}

TEST_CASE("stopping precedence")
{
    // all three fire: goal wins
    CHECK(check(std::vector<double>(6, 0.01), stopping(0.05, 5, 1e-3, 6)) == StopReason::Goal);
    // converged and max fire: converged wins
    CHECK(check(std::vector<double>(6, 0.2), stopping(0.05, 5, 1e-3, 6)) == StopReason::Converged);
    auto no_conv = stopping(0.05, 5, 1e-3, 6);
    no_conv.use_convergence = false;
    CHECK(check(std::vector<double>(6, 0.2), no_conv) == StopReason::MaxIterations);
    // a window that still improves by more than epsilon is not converged
    CHECK(check({0.5, 0.4, 0.4, 0.4, 0.4, 0.3}, stopping(std::nullopt)) == StopReason::None);
    // the window must be preceded by at least one value
    CHECK(check(std::vector<double>(5, 0.2), stopping(std::nullopt)) == StopReason::None);
}

TEST_CASE("stopping spec validation")
{
    auto s = stopping(std::nullopt, 0);
    CHECK_THROWS_AS(s.validate(), Error);
    s.use_convergence = false;
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("initial collection")
{
    ToyFlareSim sim;
    SobolSequence seq(13);
    const Dataset d = collect_initial(sim, 400, seq);
    CHECK(d.size() == 400);
    CHECK(sim.query_count() == 400);
    for (auto p : d.provenance) CHECK(p == Provenance::InitialSobol);

    ToyFlareSim fresh;
    SobolSequence s1(13), ref(13);
    const Dataset one = collect_initial(fresh, 1, s1);
    const Vector u = ref.next_point();
    CHECK(one.inputs[0] == u);
    CHECK(one.outputs[0] == fresh.evaluate(u));

    SobolSequence a(13, 50), b(13, 50);
    const Dataset da = collect_initial(sim, 50, a), db = collect_initial(sim, 50, b);
    for (std::size_t i = 0; i < 50; ++i) CHECK(da.outputs[i] == db.outputs[i]);

    CHECK_THROWS_AS(collect_initial(sim, 0, a), Error);
}

TEST_CASE("initial failures are skipped up to ten percent")
{
    FlakySim some({3, 7});
    SobolSequence seq(2);
    std::vector<std::string> failures;
    const Dataset d = collect_initial(some, 20, seq, &failures);
    CHECK(d.size() == 18);
    CHECK(failures.size() == 2);

    FlakySim many({1, 2, 3});
    SobolSequence seq2(2);
    CHECK_THROWS_AS(collect_initial(many, 20, seq2), RunAborted);
}

TEST_CASE("zero budget returns the best initial record")
{
    BenchmarkSim sim("sphere", 2);
    auto cfg = small_config(sim);
    cfg.stopping.max_iterations = 0;
    const auto r = run(sim, cfg);
    CHECK(r.stop_reason == StopReason::MaxIterations);
    CHECK(r.iterations == 0);
    CHECK(sim.query_count() == 40);
    CHECK(r.best_loss == *std::min_element(r.initial_losses.begin(), r.initial_losses.end()));
    CHECK_FALSE(r.final_model.has_value());
}

TEST_CASE("loop invariants")
{
    BenchmarkSim sim("sphere", 2);
    const auto cfg = small_config(sim);
    const auto r = run(sim, cfg);
    CHECK(r.iterations == 4);
    CHECK(sim.query_count() == 40 + r.iterations);
    CHECK(r.dataset.size() == 40 + r.iterations);
    for (std::size_t i = 40; i < r.dataset.size(); ++i) CHECK(r.dataset.provenance[i] == Provenance::IntelligentQuery);

    std::set<std::uint64_t> seeds;
    for (const auto& rec : r.log.records) seeds.insert(rec.train_seed);
    CHECK(seeds.size() == r.log.records.size());

    // envelope: the answer is the best record queried so far
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.dataset.size(); ++i) {
        best = std::min(best, loss_physical(cfg.objective, r.scoring, r.dataset.outputs[i], r.dataset.inputs[i]));
    }
    CHECK(r.best_loss == best);
    CHECK(loss_physical(cfg.objective, r.scoring, r.y_best, r.x_best) == best);
    for (const auto& rec : r.log.records) {
        CHECK(rec.true_loss == loss_physical(cfg.objective, r.scoring, rec.y_best, rec.x_best));
    }

    // identical configuration, identical summary
    BenchmarkSim again("sphere", 2);
    CHECK(summary_json(run(again, cfg)).dump() == summary_json(r).dump());
}

TEST_CASE("flat simulator converges one step after the window fills")
{
    FlatSim sim;
    DriverConfig cfg;
    cfg.objective = ObjectiveSpec(Vector::Constant(1, 1.0), Vector::Ones(1), 1.0, sim.bounds());
    cfg.train.hidden_layers = {4};
    cfg.train.max_epochs = 5;
    cfg.multistart.num_starts = 4;
    cfg.multistart.num_steps = 10;
    cfg.initial_samples = 20;
    const auto r = run(sim, cfg);
    CHECK(r.stop_reason == StopReason::Converged);
    CHECK(r.iterations == cfg.stopping.convergence_window + 1);
}

TEST_CASE("failed queries are retried with a new seed, three in a row abort")
{
    // calls 1..40 are the initial design, 41 is the first intelligent query
    FlakySim once({41});
    const auto cfg = small_config(once);
    const auto r = run(once, cfg);
    REQUIRE(r.log.records.size() == 5);
    CHECK_FALSE(r.log.records[0].ok);
    CHECK(r.log.records[1].ok);
    CHECK(r.log.records[0].train_seed != r.log.records[1].train_seed);
    CHECK(r.iterations == 4);
    CHECK(r.dataset.size() == 44);

    FlakySim thrice({41, 42, 43});
    CHECK_THROWS_AS(run(thrice, small_config(thrice)), RunAborted);
}

TEST_CASE("resumed runs make no initial queries")
{
    BenchmarkSim sim("sphere", 2);
    SobolSequence seq(2);
    Dataset init = collect_initial(sim, 40, seq);
    BenchmarkSim fresh("sphere", 2);
    auto cfg = small_config(fresh);
    cfg.stopping.max_iterations = 2;
    const auto r = run(fresh, cfg, init);
    CHECK(fresh.query_count() == 2);
    CHECK(r.log.initial_dataset_size == 40);
}

TEST_CASE("run log format")
{
    BenchmarkSim sim("sphere", 2);
    auto cfg = small_config(sim);
    cfg.stopping.max_iterations = 2;
    cfg.snapshot = {{"note", "x"}};
    const auto r = run(sim, cfg);
    const auto path = (fs::temp_directory_path() / "surropt_runlog.jsonl").string();
    r.log.write_jsonl(path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    const auto header = nlohmann::json::parse(line);
    CHECK(header.at("type") == "header");
    CHECK(header.at("initial_dataset_size") == 40);
    CHECK(header.at("config").at("note") == "x");
    int rows = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.at("type") == "iteration");
        CHECK(j.contains("surrogate_loss_at_x_best"));
        CHECK(j.contains("true_loss"));
        ++rows;
    }
    CHECK(rows == 2);
    fs::remove(path);

    const auto s = summary_json(r);
    for (const char* key : {"x_best", "y_best", "true_loss", "iterations", "stop_reason"}) CHECK(s.contains(key));
}

} // TEST_SUITE
