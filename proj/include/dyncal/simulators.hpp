#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "dyncal/design.hpp"

namespace dyncal {

/// Maps a point of the unit cube to a response series of length L.
using SimulatorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& unit_x)>;

enum class SimulatorKind { example1, gfun_separable, harari, environmental };

SimulatorKind parse_simulator_kind(const std::string& name);
std::string to_string(SimulatorKind kind);

/// Closed-form test simulator on an equidistant grid (endpoints included).
struct SimulatorSpec {
    SimulatorKind kind = SimulatorKind::example1;
    UnitBox box;
    double t_start = 0.0;
    double t_end = 1.0;
    int L = 200;

    static SimulatorSpec make(SimulatorKind kind, int L = 200);

    [[nodiscard]] int dim() const { return box.dim(); }
    [[nodiscard]] Eigen::VectorXd times() const;
    /// Response series at a native-scale input.
    [[nodiscard]] Eigen::VectorXd evaluate_native(const Eigen::VectorXd& x) const;
    /// Handle on the unit cube (affine rescaling applied inside).
    [[nodiscard]] SimulatorFn handle() const;
};

// Pointwise forms.
double example1(double x, double t);
double gfun(double u);
double gfun_separable(double x, double t);
double harari(const Eigen::Vector3d& x, double t);
/// x = (M, D, L, tau, s)
double environmental(const Eigen::Ref<const Eigen::VectorXd>& x, double t);

/// Sample variance with the (n-1) denominator.
double sample_variance(const Eigen::VectorXd& y);

struct TargetSpec {
    Eigen::VectorXd x_star;      // native scale
    Eigen::VectorXd signal;      // y(x_star)
    Eigen::VectorXd xi;          // signal + noise
    double rho = 1.0 / 50.0;
    double noise_variance = 0.0;   // rho * Var(signal)
    double realized_variance = 0.0;  // sample variance of the drawn noise
};

/// xi = y(x*) + e, e ~ N(0, rho Var(y(x*)) I_L).
TargetSpec make_target(const SimulatorSpec& spec, const Eigen::VectorXd& x_star, double rho, std::uint64_t seed);
TargetSpec make_target(const Eigen::VectorXd& signal, const Eigen::VectorXd& x_star, double rho, std::uint64_t seed);

/// External simulator run as a child process: q native values are written on
/// one stdin line; exactly L values are expected back on one stdout line.
SimulatorFn external_simulator(std::string command, UnitBox box, int L);

}  // namespace dyncal
