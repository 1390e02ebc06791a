#include "dyncal/simulators.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dyncal/errors.hpp"
#include "dyncal/rng.hpp"

namespace dyncal {

using std::numbers::pi;

SimulatorKind parse_simulator_kind(const std::string& name) {
    if (name == "example1") return SimulatorKind::example1;
    if (name == "gfun_separable") return SimulatorKind::gfun_separable;
    if (name == "harari") return SimulatorKind::harari;
    if (name == "environmental") return SimulatorKind::environmental;
    throw std::invalid_argument("unknown simulator '" + name + "'");
}

std::string to_string(SimulatorKind kind) {
    switch (kind) {
        case SimulatorKind::example1: return "example1";
        case SimulatorKind::gfun_separable: return "gfun_separable";
        case SimulatorKind::harari: return "harari";
        case SimulatorKind::environmental: return "environmental";
    }
    return "?";
}

double example1(double x, double t) {
    return std::sin((8.0 * x + 6.0) * pi * t) / (2.0 * t) + std::pow(t - 1.0, 4);
}

double gfun(double u) {
    return std::sin(10.0 * pi * u) / (2.0 * u) + std::pow(u - 1.0, 4);
}

double gfun_separable(double x, double t) {
    return gfun(t) * gfun(2.0 * x + 0.5);
}

double harari(const Eigen::Vector3d& x, double t) {
    return std::exp(3.0 * x[0] * t + t) * std::cos(6.0 * x[1] * t + 2.0 * t - 8.0 * x[2] - 6.0);
}

double environmental(const Eigen::Ref<const Eigen::VectorXd>& x, double t) {
    const double M = x[0], D = x[1], Lpos = x[2], tau = x[3], s = x[4];
    double c = M / std::sqrt(D * t) * std::exp(-s * s / (4.0 * D * t));
    if (tau < t) c += M / std::sqrt(D * (t - tau)) * std::exp(-(s - Lpos) * (s - Lpos) / (4.0 * D * (t - tau)));
    return c;
}

SimulatorSpec SimulatorSpec::make(SimulatorKind kind, int L) {
    if (L < 1) throw std::invalid_argument("SimulatorSpec: L must be positive");
    SimulatorSpec s;
    s.kind = kind;
    s.L = L;
    switch (kind) {
        case SimulatorKind::example1:
        case SimulatorKind::gfun_separable:
            s.box = UnitBox::unit(1);
            s.t_start = 0.5;
            s.t_end = 2.5;
            break;
        case SimulatorKind::harari:
            s.box = UnitBox::unit(3);
            s.t_start = 0.0;
            s.t_end = 1.0;
            break;
        case SimulatorKind::environmental: {
            Eigen::VectorXd lo(5), hi(5);
            lo << 7.0, 0.02, 0.01, 30.01, 0.0;
            hi << 13.0, 0.12, 3.0, 30.295, 3.0;
            s.box = UnitBox(lo, hi);
            s.t_start = 0.3;
            s.t_end = 60.0;
            break;
        }
    }
    return s;
}

Eigen::VectorXd SimulatorSpec::times() const {
    if (L == 1) return Eigen::VectorXd::Constant(1, t_start);
    return Eigen::VectorXd::LinSpaced(L, t_start, t_end);
}

Eigen::VectorXd SimulatorSpec::evaluate_native(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) throw std::invalid_argument("simulator input has wrong dimension");
    const Eigen::VectorXd t = times();
    Eigen::VectorXd y(L);
    for (int k = 0; k < L; ++k) {
        switch (kind) {
            case SimulatorKind::example1: y[k] = example1(x[0], t[k]); break;
            case SimulatorKind::gfun_separable: y[k] = gfun_separable(x[0], t[k]); break;
            case SimulatorKind::harari: y[k] = harari(x.head<3>(), t[k]); break;
            case SimulatorKind::environmental: y[k] = environmental(x, t[k]); break;
        }
    }
    return y;
}

SimulatorFn SimulatorSpec::handle() const {
    return [spec = *this](const Eigen::VectorXd& u) { return spec.evaluate_native(spec.box.to_native(u)); };
}

double sample_variance(const Eigen::VectorXd& y) {
    if (y.size() < 2) return 0.0;
    const double m = y.mean();
    return (y.array() - m).square().sum() / static_cast<double>(y.size() - 1);
}

TargetSpec make_target(const Eigen::VectorXd& signal, const Eigen::VectorXd& x_star, double rho, std::uint64_t seed) {
    if (rho < 0.0) throw std::invalid_argument("make_target: rho must be non-negative");
    TargetSpec t;
    t.x_star = x_star;
    t.signal = signal;
    t.rho = rho;
    t.noise_variance = rho * sample_variance(signal);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(signal.size());
    if (t.noise_variance > 0.0) {
        Rng rng = make_stream(seed, "target-noise");
        std::normal_distribution<double> normal(0.0, std::sqrt(t.noise_variance));
        for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = normal(rng);
    }
    t.realized_variance = sample_variance(e);
    t.xi = signal + e;
    return t;
}

TargetSpec make_target(const SimulatorSpec& spec, const Eigen::VectorXd& x_star, double rho, std::uint64_t seed) {
    for (int j = 0; j < spec.dim(); ++j)
        if (x_star[j] < spec.box.lower[j] || x_star[j] > spec.box.upper[j])
            throw std::invalid_argument("make_target: x_star outside the native bounds");
    return make_target(spec.evaluate_native(x_star), x_star, rho, seed);
}

SimulatorFn external_simulator(std::string command, UnitBox box, int L) {
    return [command = std::move(command), box = std::move(box), L](const Eigen::VectorXd& u) {
        const Eigen::VectorXd x = box.to_native(u);
        std::ostringstream line;
        line.precision(17);
        for (Eigen::Index j = 0; j < x.size(); ++j) line << (j ? " " : "") << x[j];
        const std::string cmd = "printf '%s\\n' '" + line.str() + "' | " + command;
        std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(cmd.c_str(), "r"), pclose);
        if (!pipe) throw SimulatorError("cannot start external simulator: " + command);
        std::string out;
        char buf[4096];
        while (std::fgets(buf, sizeof buf, pipe.get())) {
            out += buf;
            if (!out.empty() && out.back() == '\n') break;
        }
        const int status = pclose(pipe.release());
        if (status != 0) throw SimulatorError("external simulator failed at x = (" + line.str() + ")");
        std::istringstream in(out);
        Eigen::VectorXd y(L);
        for (int k = 0; k < L; ++k) {
            std::string tok;
            if (!(in >> tok)) throw SimulatorError("external simulator returned fewer than L values at x = (" + line.str() + ")");
            try {
                y[k] = std::stod(tok);
            } catch (const std::exception&) {
                throw SimulatorError("external simulator returned a non-numeric value at x = (" + line.str() + ")");
            }
        }
        return y;
    };
}

}  // namespace dyncal
