#pragma once

#include <json.hpp>

#include "surropt/surrogate.hpp"
#include "surropt/types.hpp"

namespace surropt {

/// Weighted target-matching objective with soft box-constraint penalties.
struct ObjectiveSpec {
    Vector targets; // physical units
    Vector weights; // positive, one per output
    double alpha = 1.0;
    BoundsSpec bounds;

    ObjectiveSpec() = default;
    ObjectiveSpec(Vector targets, Vector weights, double alpha, BoundsSpec bounds);

    /// Sink rate 2.0 ft/s, horizontal velocity 54.0 kn, downrange 400 ft;
    /// weights (2, 1, 0.1); alpha 1.
    static ObjectiveSpec flare_defaults(BoundsSpec bounds);

    std::size_t output_dim() const { return static_cast<std::size_t>(targets.size()); }
    std::size_t input_dim() const { return bounds.dim(); }

    nlohmann::json to_json() const;
};

/// alpha * sum of bound violations, measured in unit-scaled input coordinates.
double penalty(const ObjectiveSpec& spec, const Vector& x);

/// (1/n) sum_k w_k |target_std_k - y_std_k| + penalty(x). `target_std` must
/// already be standardized with the same standardizer as `y_std`.
double loss(const ObjectiveSpec& spec, const Vector& target_std, const Vector& y_std, const Vector& x);

/// Standardizes spec.targets with `standardizer` and delegates to loss().
double loss(const ObjectiveSpec& spec, const Standardizer& standardizer, const Vector& y_std, const Vector& x);

/// Scores a physical simulator output exactly as the surrogate's prediction would be scored.
double loss_physical(const ObjectiveSpec& spec, const Standardizer& standardizer, const Vector& y, const Vector& x);

struct LossGradient {
    double loss = 0.0;
    Vector gradient; // d loss / d x_std (model's standardized input space)
    Vector y_std;
};

/// Surrogate loss at physical x and its gradient with respect to the model's
/// standardized inputs. sign(0) := 0 at MAE kinks.
LossGradient loss_and_gradient(const ObjectiveSpec& spec, const DifferentiableModel& model, const Vector& x);

} // namespace surropt
