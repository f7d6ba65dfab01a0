// One-off brute-force check that the toy flare targets are reachable.
// Writes the best of 2^20 Sobol points, scored against the 400-point initial
// design's standardizer, as a JSON fixture.
#include <iostream>
#include <limits>

#include <json.hpp>

#include "surropt/driver.hpp"

using namespace surropt;

int main()
{
    ToyFlareSim sim;
    SobolSequence init_seq(13);
    const Dataset init = collect_initial(sim, 400, init_seq);
    const Standardizer scoring = Standardizer::fit(init);
    const auto spec = ObjectiveSpec::flare_defaults(sim.bounds());

    constexpr std::size_t kPoints = std::size_t{1} << 20;
    SobolSequence seq(13);
    double best = std::numeric_limits<double>::infinity();
    Vector best_u, best_y;
    for (std::size_t i = 0; i < kPoints; ++i) {
        const Vector u = seq.next_point();
        const Vector y = toy_flare_outputs(u);
        const double l = loss_physical(spec, scoring, y, u);
        if (l < best) {
            best = l;
            best_u = u;
            best_y = y;
        }
    }
    const nlohmann::json out = {{"points", kPoints},
                                {"u", std::vector<double>(best_u.data(), best_u.data() + 13)},
                                {"y", std::vector<double>(best_y.data(), best_y.data() + 3)},
                                {"loss", best}};
    std::cout << out.dump(2) << '\n';
}
