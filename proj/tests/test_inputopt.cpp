#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "stub_models.hpp"
#include "surropt/inputopt.hpp"
#include "surropt/simbench.hpp"

using namespace surropt;
namespace fs = std::filesystem;

TEST_SUITE("inputopt") {

TEST_CASE("quadratic stub: optimum found")
{
    const Vector c = (Vector(2) << 0.3, -0.7).finished();
    testing::QuadraticModel model(c);
    ObjectiveSpec spec(Vector::Zero(2), Vector::Ones(2), 1.0,
                       BoundsSpec(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0)));
    SobolSequence seq(2);
    const auto r = optimize_inputs(model, spec, MultiStartConfig{}, seq);
    CHECK((r.best_x - c).norm() < 1e-3);
    CHECK(r.all_finals.size() == 100);
    double lowest = r.all_finals.front().loss;
    for (const auto& f : r.all_finals) lowest = std::min(lowest, f.loss);
    CHECK(r.best_loss == lowest);
}

TEST_CASE("flat surrogate keeps the single start")
{
    testing::ConstantModel model(3, Vector::Constant(1, 0.4));
    ObjectiveSpec spec(Vector::Zero(1), Vector::Ones(1), 1.0, BoundsSpec::unit(3));
    MultiStartConfig cfg;
    cfg.num_starts = 1;
    SobolSequence seq(3), ref(3);
    const auto r = optimize_inputs(model, spec, cfg, seq);
    CHECK(r.best_x == ref.next_point());
    CHECK(r.best_start == 0);
}

TEST_CASE("ties go to the lowest start index")
{
    testing::ConstantModel model(2, Vector::Constant(1, 0.0));
    ObjectiveSpec spec(Vector::Zero(1), Vector::Ones(1), 1.0, BoundsSpec::unit(2));
    MultiStartConfig cfg;
    cfg.num_starts = 8;
    cfg.num_steps = 3;
    SobolSequence seq(2);
    CHECK(optimize_inputs(model, spec, cfg, seq).best_start == 0);
}

TEST_CASE("bound adherence, envelopes, dominance and determinism")
{
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto model = testing::random_model(4, {12, 12}, 2, 300 + s);
        Vector lo = Vector::Constant(4, -1.0), hi = Vector::Constant(4, 1.0);
        // targets far outside the model's reach push iterates against the box
        ObjectiveSpec spec(Vector::Constant(2, 25.0), Vector::Ones(2), 1.0, BoundsSpec(lo, hi));
        MultiStartConfig cfg;
        cfg.record_paths = true;
        cfg.num_steps = 200;
        SobolSequence a(4), b(4);
        const auto r = optimize_inputs(model, spec, cfg, a);
        const auto again = optimize_inputs(model, spec, cfg, b);
        CHECK(r.best_x == again.best_x);
        CHECK(r.best_loss == again.best_loss);

        CHECK(spec.bounds.max_violation(r.best_x) <= kFeasibleTolerance);
        CHECK(spec.bounds.max_violation(r.best_x) <= 1e-2);

        REQUIRE(r.paths.size() == cfg.num_starts);
        for (std::size_t k = 0; k < r.paths.size(); ++k) {
            double envelope = std::numeric_limits<double>::infinity();
            for (const auto& p : r.paths[k]) {
                if (spec.bounds.max_violation(p.x) <= kFeasibleTolerance) envelope = std::min(envelope, p.loss);
            }
            CHECK(r.all_finals[k].loss == envelope);
        }

        MultiStartConfig single = cfg;
        single.num_starts = 1;
        single.record_paths = false;
        SobolSequence c(4);
        CHECK(r.best_loss <= optimize_inputs(model, spec, single, c).best_loss);
    }
}

TEST_CASE("batched gradients match sequential calls bit for bit")
{
    const auto model = testing::random_model(3, {10}, 2, 77);
    ObjectiveSpec spec(Vector::Constant(2, 0.1), Vector::Ones(2), 1.0, BoundsSpec::unit(3));
    Rng rng(1);
    std::vector<Vector> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(Vector::NullaryExpr(3, [&](Eigen::Index) { return rng.uniform(-0.2, 1.2); }));
    const auto batch = batched_gradients(model, spec, xs);
    REQUIRE(batch.size() == xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto single = loss_and_gradient(spec, model, xs[i]);
        CHECK(batch[i].ok);
        CHECK(batch[i].value.loss == single.loss);
        CHECK(batch[i].value.gradient == single.gradient);
    }
    std::vector<Vector> reversed(xs.rbegin(), xs.rend());
    const auto rb = batched_gradients(model, spec, reversed);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(rb[xs.size() - 1 - i].value.loss == batch[i].value.loss);

    const auto one = batched_gradients(model, spec, {xs[0]});
    CHECK(one[0].value.gradient == batch[0].value.gradient);

    std::vector<Vector> with_bad = {xs[0], Vector::Zero(2)};
    const auto flagged = batched_gradients(model, spec, with_bad);
    CHECK(flagged[0].ok);
    CHECK_FALSE(flagged[1].ok);
    CHECK_FALSE(flagged[1].error.empty());
}

namespace {

// finite only for x_0 < 0.5
class HalfBroken final : public DifferentiableModel {
public:
    HalfBroken() : st_(Standardizer::identity(2, 1)) {}
    std::size_t input_dim() const override { return 2; }
    std::size_t output_dim() const override { return 1; }
    const Standardizer& standardizer() const override { return st_; }
    Vector forward_std(const Vector& x) const override
    {
        return Vector::Constant(1, x[0] < 0.5 ? x[0] : std::nan(""));
    }
    ForwardJacobian forward_with_jacobian(const Vector& x) const override
    {
        return {forward_std(x), (Matrix(1, 2) << 1.0, 0.0).finished()};
    }

private:
    Standardizer st_;
};

} // namespace

TEST_CASE("non-finite starts are frozen, not fatal")
{
    HalfBroken model;
    ObjectiveSpec spec(Vector::Zero(1), Vector::Ones(1), 1.0, BoundsSpec::unit(2));
    MultiStartConfig cfg;
    cfg.num_starts = 8;
    cfg.num_steps = 20;
    SobolSequence seq(2), ref(2);
    const auto r = optimize_inputs(model, spec, cfg, seq);
    for (std::size_t i = 0; i < 8; ++i) {
        const Vector start = ref.next_point();
        CHECK(r.all_finals[i].frozen == (start[0] >= 0.5));
    }
    CHECK(std::isfinite(r.best_loss));
    CHECK(r.best_x[0] < 0.5);

    auto poisoned = testing::random_model(2, {4}, 1, 5);
    poisoned.mutable_weights()[1](0, 0) = std::nan("");
    SobolSequence again(2);
    CHECK_THROWS_AS(optimize_inputs(poisoned, spec, cfg, again), NumericError);
}

TEST_CASE("path csv")
{
    testing::QuadraticModel model(Vector::Constant(2, 0.5));
    ObjectiveSpec spec(Vector::Zero(2), Vector::Ones(2), 1.0, BoundsSpec::unit(2));
    MultiStartConfig cfg;
    cfg.num_starts = 2;
    cfg.num_steps = 3;
    cfg.record_paths = true;
    SobolSequence seq(2);
    const auto r = optimize_inputs(model, spec, cfg, seq);
    const auto path = (fs::temp_directory_path() / "surropt_paths.csv").string();
    write_paths_csv(r, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "start_id,step,loss,x_1,x_2");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 4); // the start point plus three steps, per start
    fs::remove(path);
}

TEST_CASE("config validation")
{
    MultiStartConfig c;
    c.momentum = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.num_starts = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

} // TEST_SUITE
