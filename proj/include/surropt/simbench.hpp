#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "surropt/types.hpp"

namespace surropt {

/// Black-box simulator f(x). evaluate() is deterministic; the only side effect
/// is the query counter.
class Simulator {
public:
    Simulator() = default;
    Simulator(const Simulator&) : queries_(0) {}
    Simulator& operator=(const Simulator&) { return *this; }
    virtual ~Simulator() = default;

    virtual std::size_t input_dim() const = 0;
    virtual std::size_t output_dim() const = 0;
    virtual const BoundsSpec& bounds() const = 0;
    virtual std::string name() const = 0;

    /// Counts the query, then runs the model. Failures throw SimulatorError.
    Vector evaluate(const Vector& x);

    std::uint64_t query_count() const { return queries_.load(); }

protected:
    virtual Vector run(const Vector& x) = 0;

private:
    std::atomic<std::uint64_t> queries_{0};
};

/// Multiplicative aerodynamic perturbation of the toy vehicle.
struct VehicleScales {
    double drag = 1.0;
    double lift = 1.0;
    double pitch = 1.0;
};

/// Touchdown outputs of the toy flare model without any bounds check:
/// (sink rate ft/s, horizontal velocity kn, downrange ft).
Vector toy_flare_outputs(const Vector& u, const VehicleScales& scales = {});

/// 13-input, 3-output closed-form stand-in for a landing trajectory simulator.
/// Inputs 1-6 drive the outputs; inputs 7-13 only add a 2% ripple.
class ToyFlareSim final : public Simulator {
public:
    static constexpr std::size_t kInputs = 13;
    static constexpr std::size_t kOutputs = 3;

    explicit ToyFlareSim(VehicleScales scales = {});

    std::size_t input_dim() const override { return kInputs; }
    std::size_t output_dim() const override { return kOutputs; }
    const BoundsSpec& bounds() const override { return bounds_; }
    std::string name() const override { return "toy-flare"; }

    const VehicleScales& scales() const { return scales_; }

    static const std::vector<std::string>& input_names();
    static const std::vector<std::string>& output_names();

protected:
    Vector run(const Vector& u) override;

private:
    VehicleScales scales_;
    BoundsSpec bounds_;
};

/// Copy of `sim` with its scales multiplied by the given factors.
ToyFlareSim perturb_vehicle(const ToyFlareSim& sim, double drag, double lift, double pitch);

/// Closed-form test functions with three outputs:
///   "sphere":          y_k = |x - c_k|^2 for three fixed centres
///   "rosenbrock-3out": (Rosenbrock value, its curvature sum, its (1 - x)^2 sum)
class BenchmarkSim final : public Simulator {
public:
    BenchmarkSim(std::string kind, std::size_t dim);

    std::size_t input_dim() const override { return dim_; }
    std::size_t output_dim() const override { return 3; }
    const BoundsSpec& bounds() const override { return bounds_; }
    std::string name() const override { return kind_; }

    const std::vector<Vector>& centers() const { return centers_; }

protected:
    Vector run(const Vector& x) override;

private:
    std::string kind_;
    std::size_t dim_;
    BoundsSpec bounds_;
    std::vector<Vector> centers_;
};

std::unique_ptr<Simulator> benchmark_sim(const std::string& name, std::size_t dim = 2);

/// Runs `command` through /bin/sh once per query: x goes to stdin as one CSV
/// line, y is read back from the first stdout line. A nonzero exit, a timeout
/// or a malformed reply fails the query.
class ExternalSimulator final : public Simulator {
public:
    ExternalSimulator(std::string command, BoundsSpec bounds, std::size_t output_dim, double timeout_seconds = 600.0);

    std::size_t input_dim() const override { return bounds_.dim(); }
    std::size_t output_dim() const override { return output_dim_; }
    const BoundsSpec& bounds() const override { return bounds_; }
    std::string name() const override { return "external"; }

protected:
    Vector run(const Vector& x) override;

private:
    std::string command_;
    BoundsSpec bounds_;
    std::size_t output_dim_;
    double timeout_seconds_;
};

} // namespace surropt
