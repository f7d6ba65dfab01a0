#include "surropt/types.hpp"

#include <algorithm>
#include <cmath>

namespace surropt {

void require_dim(const Vector& v, Eigen::Index expected, const char* what)
{
    if (v.size() != expected) {
        throw Error(std::string(what) + ": expected length " + std::to_string(expected) + ", got " +
                    std::to_string(v.size()));
    }
}

bool all_finite(const Vector& v)
{
    return v.allFinite();
}

BoundsSpec::BoundsSpec(Vector x_min, Vector x_max) : x_min_(std::move(x_min)), x_max_(std::move(x_max))
{
    if (x_min_.size() != x_max_.size()) {
        throw Error("bounds: x_min and x_max differ in length");
    }
    if (x_min_.size() == 0) {
        throw Error("bounds: empty");
    }
    for (Eigen::Index i = 0; i < x_min_.size(); ++i) {
        if (!std::isfinite(x_min_[i]) || !std::isfinite(x_max_[i]) || !(x_min_[i] < x_max_[i])) {
            throw Error("bounds: need finite x_min < x_max in dimension " + std::to_string(i));
        }
    }
}

BoundsSpec BoundsSpec::unit(std::size_t dim)
{
    return BoundsSpec(Vector::Zero(static_cast<Eigen::Index>(dim)), Vector::Ones(static_cast<Eigen::Index>(dim)));
}

Vector BoundsSpec::to_unit(const Vector& x) const
{
    require_dim(x, x_min_.size(), "bounds.to_unit");
    return ((x - x_min_).array() / (x_max_ - x_min_).array()).matrix();
}

Vector BoundsSpec::from_unit(const Vector& u) const
{
    require_dim(u, x_min_.size(), "bounds.from_unit");
    return x_min_ + (u.array() * (x_max_ - x_min_).array()).matrix();
}

bool BoundsSpec::contains(const Vector& x, double unit_tolerance) const
{
    return max_violation(x) <= unit_tolerance;
}

double BoundsSpec::max_violation(const Vector& x) const
{
    const Vector u = to_unit(x);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        worst = std::max({worst, -u[i], u[i] - 1.0});
    }
    return worst;
}

BoundsSpec BoundsSpec::without(std::size_t dim_index) const
{
    const auto m = static_cast<Eigen::Index>(dim());
    const auto k = static_cast<Eigen::Index>(dim_index);
    Vector lo(m - 1), hi(m - 1);
    for (Eigen::Index i = 0, j = 0; i < m; ++i) {
        if (i == k) continue;
        lo[j] = x_min_[i];
        hi[j] = x_max_[i];
        ++j;
    }
    return BoundsSpec(std::move(lo), std::move(hi));
}

} // namespace surropt
