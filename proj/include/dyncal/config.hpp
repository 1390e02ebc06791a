#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyncal/design.hpp"
#include "dyncal/gp_core.hpp"

namespace dyncal {

/// Parse or validation failure; the message carries "source:line: key: reason".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class TargetMode { fixed_x_star, redraw_x_star };
enum class Extraction { esl2d, naive, both };
enum class InitialDesign { maximin, random };

struct SimulatorConfig {
    std::string name = "example1";  // a built-in name or "external"
    int L = 200;
    // external only
    std::string command;
    std::vector<double> lower, upper;
    double t_start = 0.0;
    double t_end = 1.0;
};

struct StudyConfig {
    SimulatorConfig simulator;

    std::uint64_t seed = 1;
    int replications = 10;
    int workers = 1;

    TargetMode target_mode = TargetMode::fixed_x_star;
    std::optional<Eigen::VectorXd> x_star;  // native scale; drawn from the seed when absent
    double rho = 1.0 / 50.0;
    Extraction extraction = Extraction::both;

    // Unset sizes fall back to 6q, 12q, 2000q, 2000q, 10q.
    std::optional<int> n0, n_new, m1, m2, design_size;
    InitialDesign initial_design = InitialDesign::maximin;
    double gamma = 0.95;
    PriorConfig priors;
    int gp_starts = 5;
    MaximinOptions lhd;
    bool record_wall_time = false;

    // ei-map
    int grid_size = 200;
    int mc_samples = 50000;

    [[nodiscard]] int n0_for(int q) const { return n0.value_or(6 * q); }
    [[nodiscard]] int n_new_for(int q) const { return n_new.value_or(12 * q); }
    [[nodiscard]] int m1_for(int q) const { return m1.value_or(2000 * q); }
    [[nodiscard]] int m2_for(int q) const { return m2.value_or(2000 * q); }
    [[nodiscard]] int design_size_for(int q) const { return design_size.value_or(10 * q); }
};

/// Lines are "key = value"; "#" starts a comment; "[simulator]" opens the
/// simulator section and "[study]" returns to top-level keys.
StudyConfig parse_config(const std::string& text, const std::string& source = "<config>");
StudyConfig load_config(const std::string& path);

std::string to_string(TargetMode m);
std::string to_string(Extraction e);

}  // namespace dyncal
