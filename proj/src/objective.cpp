#include "surropt/objective.hpp"

#include <cmath>

namespace surropt {

namespace {

double sign(double v)
{
    return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
}

std::vector<double> to_std_vector(const Vector& v)
{
    return {v.data(), v.data() + v.size()};
}

} // namespace

ObjectiveSpec::ObjectiveSpec(Vector targets_, Vector weights_, double alpha_, BoundsSpec bounds_)
    : targets(std::move(targets_)), weights(std::move(weights_)), alpha(alpha_), bounds(std::move(bounds_))
{
    if (targets.size() == 0) throw Error("objective: no targets");
    if (weights.size() != targets.size()) throw Error("objective: weights and targets differ in length");
    if (!targets.allFinite() || !weights.allFinite()) throw Error("objective: non-finite targets or weights");
    if ((weights.array() <= 0.0).any()) throw Error("objective: weights must be positive");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("objective: alpha must be a non-negative real");
}

ObjectiveSpec ObjectiveSpec::flare_defaults(BoundsSpec bounds)
{
    return ObjectiveSpec(Vector{{2.0, 54.0, 400.0}}, Vector{{2.0, 1.0, 0.1}}, 1.0, std::move(bounds));
}

nlohmann::json ObjectiveSpec::to_json() const
{
    return {{"targets", to_std_vector(targets)}, {"weights", to_std_vector(weights)}, {"alpha", alpha}};
}

double penalty(const ObjectiveSpec& spec, const Vector& x)
{
    const Vector u = spec.bounds.to_unit(x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        total += std::max(0.0, -u[i]) + std::max(0.0, u[i] - 1.0);
    }
    return spec.alpha * total;
}

double loss(const ObjectiveSpec& spec, const Vector& target_std, const Vector& y_std, const Vector& x)
{
    const auto n = static_cast<Eigen::Index>(spec.output_dim());
    require_dim(target_std, n, "loss target");
    require_dim(y_std, n, "loss prediction");
    require_dim(x, static_cast<Eigen::Index>(spec.input_dim()), "loss input");
    if (!target_std.allFinite() || !y_std.allFinite() || !x.allFinite()) throw NumericError("loss: non-finite input");
    const double mae = (spec.weights.array() * (target_std - y_std).array().abs()).sum() / static_cast<double>(n);
    return mae + penalty(spec, x);
}

double loss(const ObjectiveSpec& spec, const Standardizer& standardizer, const Vector& y_std, const Vector& x)
{
    return loss(spec, standardizer.standardize_output(spec.targets), y_std, x);
}

double loss_physical(const ObjectiveSpec& spec, const Standardizer& standardizer, const Vector& y, const Vector& x)
{
    require_dim(y, static_cast<Eigen::Index>(spec.output_dim()), "loss_physical output");
    if (!y.allFinite()) throw NumericError("loss_physical: non-finite simulator output");
    return loss(spec, standardizer, standardizer.standardize_output(y), x);
}

LossGradient loss_and_gradient(const ObjectiveSpec& spec, const DifferentiableModel& model, const Vector& x)
{
    if (model.input_dim() != spec.input_dim() || model.output_dim() != spec.output_dim()) {
        throw Error("loss_and_gradient: model and objective dimensions differ");
    }
    require_dim(x, static_cast<Eigen::Index>(spec.input_dim()), "loss_and_gradient input");
    if (!x.allFinite()) throw NumericError("loss_and_gradient: non-finite input");

    const Standardizer& s = model.standardizer();
    const Vector target_std = s.standardize_output(spec.targets);
    ForwardJacobian fj = model.forward_with_jacobian(s.standardize_input(x));

    const auto n = static_cast<double>(spec.output_dim());
    Vector outer(fj.output.size());
    for (Eigen::Index k = 0; k < outer.size(); ++k) {
        outer[k] = spec.weights[k] / n * sign(fj.output[k] - target_std[k]);
    }

    LossGradient out;
    out.loss = loss(spec, target_std, fj.output, x);
    out.gradient = fj.jacobian.transpose() * outer;

    // penalty acts on u = (x - x_min) / range, and x = x_std * std + mean
    const Vector u = spec.bounds.to_unit(x);
    const Vector du_dxstd = (s.input_std.array() / spec.bounds.range().array()).matrix();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (u[i] < 0.0) out.gradient[i] -= spec.alpha * du_dxstd[i];
        else if (u[i] > 1.0) out.gradient[i] += spec.alpha * du_dxstd[i];
    }
    out.y_std = std::move(fj.output);
    return out;
}

} // namespace surropt
