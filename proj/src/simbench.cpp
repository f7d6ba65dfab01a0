#include "surropt/simbench.hpp"

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <numbers>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "surropt/dataset.hpp"

namespace surropt {

Vector Simulator::evaluate(const Vector& x)
{
    ++queries_;
    require_dim(x, static_cast<Eigen::Index>(input_dim()), name().c_str());
    return run(x);
}

// ------------------------------------------------------------------- toy flare

Vector toy_flare_outputs(const Vector& u, const VehicleScales& scales)
{
    require_dim(u, ToyFlareSim::kInputs, "toy flare input");
    using std::numbers::pi;
    constexpr double deg = pi / 180.0;

    const double v0 = 150.0 + 100.0 * u[0];
    const double gamma1 = (10.0 + 10.0 * u[1]) * deg;
    const double flare_radius = 1000.0 + 4000.0 * u[2];
    const double gamma2 = (0.5 + 2.5 * u[3]) * deg;
    const double flare_height = 50.0 + 150.0 * u[4];
    const double brake = (0.1 + 0.8 * u[5]) * scales.drag;

    double ripple_phase = 0.0;
    double ripple_plain = 0.0;
    for (int j = 7; j <= 13; ++j) {
        ripple_phase += std::sin(2.0 * pi * u[j - 1] + j);
        ripple_plain += std::sin(2.0 * pi * u[j - 1]);
    }
    const double ripple = 1.0 + 0.02 * ripple_phase;

    const double decel = std::exp(-brake * (flare_height / 100.0 + flare_radius / 2000.0) / 3.0);
    const double v_td = v0 * decel * ripple;
    const double gamma_eff = (gamma2 + (gamma1 - gamma2) * std::exp(-flare_radius / 1500.0)) / scales.lift;

    Vector y(3);
    y[0] = v_td * std::sin(gamma_eff);
    y[1] = 0.592484 * v_td * std::cos(gamma_eff);
    y[2] = scales.pitch *
           (0.03 * flare_height / std::tan(gamma2) + 0.02 * flare_radius * (1.0 + 0.01 * ripple_plain));
    return y;
}

ToyFlareSim::ToyFlareSim(VehicleScales scales) : scales_(scales), bounds_(BoundsSpec::unit(kInputs))
{
    if (!(scales.drag > 0.0 && scales.lift > 0.0 && scales.pitch > 0.0)) {
        throw Error("toy flare: vehicle scales must be positive");
    }
}

Vector ToyFlareSim::run(const Vector& u)
{
    if (!u.allFinite() || !bounds_.contains(u)) {
        throw SimulatorError("toy flare: input outside the unit box");
    }
    return toy_flare_outputs(u, scales_);
}

const std::vector<std::string>& ToyFlareSim::input_names()
{
    static const std::vector<std::string> names = {
        "landing_velocity", "outer_glideslope", "flare_radius", "inner_glideslope", "flare_height",
        "brake_setting",    "ripple_7",         "ripple_8",     "ripple_9",         "ripple_10",
        "ripple_11",        "ripple_12",        "ripple_13"};
    return names;
}

const std::vector<std::string>& ToyFlareSim::output_names()
{
    static const std::vector<std::string> names = {"sink_rate_ftps", "horizontal_velocity_kn", "downrange_ft"};
    return names;
}

ToyFlareSim perturb_vehicle(const ToyFlareSim& sim, double drag, double lift, double pitch)
{
    if (!(drag > 0.0 && lift > 0.0 && pitch > 0.0)) throw Error("perturb_vehicle: factors must be positive");
    const auto& s = sim.scales();
    return ToyFlareSim(VehicleScales{s.drag * drag, s.lift * lift, s.pitch * pitch});
}

// ------------------------------------------------------------------ benchmarks

BenchmarkSim::BenchmarkSim(std::string kind, std::size_t dim)
    : kind_(std::move(kind)), dim_(dim),
      bounds_(Vector::Constant(static_cast<Eigen::Index>(std::max<std::size_t>(dim, 1)), -2.0),
              Vector::Constant(static_cast<Eigen::Index>(std::max<std::size_t>(dim, 1)), 2.0))
{
    if (kind_ != "sphere" && kind_ != "rosenbrock-3out") throw Error("unknown benchmark simulator '" + kind_ + "'");
    if (dim_ == 0 || (kind_ == "rosenbrock-3out" && dim_ < 2)) throw Error("benchmark: dimension too small");
    const auto m = static_cast<Eigen::Index>(dim_);
    centers_ = {Vector::Constant(m, 0.5), Vector::Constant(m, -0.5), Vector::LinSpaced(m, -1.0, 1.0)};
    if (m == 1) centers_[2][0] = 1.0;
}

Vector BenchmarkSim::run(const Vector& x)
{
    if (!x.allFinite()) throw SimulatorError(kind_ + ": non-finite input");
    Vector y(3);
    if (kind_ == "sphere") {
        for (Eigen::Index k = 0; k < 3; ++k) y[k] = (x - centers_[static_cast<std::size_t>(k)]).squaredNorm();
        return y;
    }
    double curvature = 0.0;
    double valley = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        curvature += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2);
        valley += std::pow(1.0 - x[i], 2);
    }
    y << curvature + valley, curvature, valley;
    return y;
}

std::unique_ptr<Simulator> benchmark_sim(const std::string& name, std::size_t dim)
{
    return std::make_unique<BenchmarkSim>(name, dim);
}

// -------------------------------------------------------------------- external

ExternalSimulator::ExternalSimulator(std::string command, BoundsSpec bounds, std::size_t output_dim,
                                     double timeout_seconds)
    : command_(std::move(command)), bounds_(std::move(bounds)), output_dim_(output_dim),
      timeout_seconds_(timeout_seconds)
{
    if (command_.empty()) throw Error("external simulator: empty command");
    if (output_dim_ == 0) throw Error("external simulator: output_dim must be positive");
    if (!(timeout_seconds_ > 0.0)) throw Error("external simulator: timeout must be positive");
}

namespace {

std::string echo(const Vector& x)
{
    std::string s;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (i) s += ',';
        s += format_double(x[i]);
    }
    return s;
}

} // namespace

Vector ExternalSimulator::run(const Vector& x)
{
    const std::string line = echo(x) + "\n";
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0) throw SimulatorError("external simulator: pipe failed");
    if (pipe(from_child) != 0) {
        close(to_child[0]);
        close(to_child[1]);
        throw SimulatorError("external simulator: pipe failed");
    }
    const pid_t pid = fork();
    if (pid < 0) throw SimulatorError("external simulator: fork failed");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);

    // ignore SIGPIPE while writing in case the child exits without reading
    auto* previous = std::signal(SIGPIPE, SIG_IGN);
    const ssize_t written = write(to_child[1], line.data(), line.size());
    std::signal(SIGPIPE, previous);
    close(to_child[1]);

    std::string reply;
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds_);
    bool timed_out = false;
    char buf[4096];
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            timed_out = true;
            break;
        }
        pollfd pfd{from_child[0], POLLIN, 0};
        const int ready = poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (ready < 0 && errno != EINTR) break;
        if (ready <= 0) continue;
        const ssize_t got = read(from_child[0], buf, sizeof buf);
        if (got <= 0) break;
        reply.append(buf, static_cast<std::size_t>(got));
    }
    close(from_child[0]);
    if (timed_out) kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);

    const std::string input_echo = " (input: " + echo(x) + ")";
    if (timed_out) throw SimulatorError("external simulator: timed out" + input_echo);
    if (written != static_cast<ssize_t>(line.size())) throw SimulatorError("external simulator: could not send input" + input_echo);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw SimulatorError("external simulator: command failed with status " + std::to_string(status) + input_echo);
    }
    std::istringstream lines(reply);
    std::string first;
    std::getline(lines, first);
    std::vector<double> values;
    std::istringstream cells(first);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(cell, &used));
        } catch (const std::exception&) {
            throw SimulatorError("external simulator: malformed output '" + first + "'" + input_echo);
        }
    }
    if (values.size() != output_dim_) {
        throw SimulatorError("external simulator: expected " + std::to_string(output_dim_) + " outputs, got " +
                             std::to_string(values.size()) + input_echo);
    }
    Vector y = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    if (!y.allFinite()) throw SimulatorError("external simulator: non-finite output" + input_echo);
    return y;
}

} // namespace surropt
