// dyncal: calibration studies, EI maps and surrogate fits from a config file.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dyncal/config.hpp"
#include "dyncal/errors.hpp"
#include "dyncal/io.hpp"
#include "dyncal/study.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kSimulator = 3, kNumerical = 4 };

struct CommonFlags {
    std::string config;
    std::string out = "out";
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "Study config file")->required();
    cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
    cmd->add_option("--workers", f.workers, "Parallel replications")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Override the config seed");
}

dyncal::StudyConfig load(const CommonFlags& f) {
    dyncal::StudyConfig cfg = dyncal::load_config(f.config);
    if (f.workers) cfg.workers = *f.workers;
    if (f.seed) cfg.seed = *f.seed;
    return cfg;
}

int cmd_calibrate(const CommonFlags& f) {
    auto cfg = load(f);
    auto results = dyncal::calibrate_study(cfg, f.out);
    std::vector<double> logs;
    for (const auto& r : results) logs.push_back(std::log(r.trace.final_d_xi));
    std::printf("replications=%d median_log_d_xi_esl2d=%.6g\n", cfg.replications, dyncal::quantile(logs, 0.5));
    return kOk;
}

int cmd_ei_map(const CommonFlags& f, std::optional<int> grid) {
    auto cfg = load(f);
    if (grid) cfg.grid_size = *grid;
    auto res = dyncal::ei_map_study(cfg, f.out);
    std::printf("p=%d delta_min=%.6g saei_seconds=%.6g mc_seconds=%.6g\n", res.p, res.delta_min, res.saei_seconds,
                res.mc_seconds);
    return kOk;
}

int cmd_extract_compare(const CommonFlags& f) {
    auto cfg = load(f);
    auto pairs = dyncal::extract_compare_study(cfg, f.out);
    std::vector<double> e, n;
    for (const auto& p : pairs) {
        e.push_back(p.log_d_esl2d);
        n.push_back(p.log_d_naive);
    }
    std::printf("median_log_d_xi_esl2d=%.6g median_log_d_xi_naive=%.6g\n", dyncal::quantile(e, 0.5),
                dyncal::quantile(n, 0.5));
    return kOk;
}

int cmd_fit(const CommonFlags& f) {
    auto cfg = load(f);
    const auto sim = dyncal::resolve_simulator(cfg.simulator);
    const auto data = dyncal::initial_design_set(cfg, sim);
    const auto seed = dyncal::replication_seed(cfg.seed, 0);
    const auto model = dyncal::fit_svd_gp(data, dyncal::make_fit_options(cfg, dyncal::derive_seed(seed, "fit", 0)));
    std::filesystem::create_directories(f.out);
    auto m = dyncal::open_output((std::filesystem::path(f.out) / "model.txt").string());
    dyncal::write_model(m, model);
    auto d = dyncal::open_output((std::filesystem::path(f.out) / "design.csv").string());
    dyncal::write_design_set(d, data);
    std::printf("N=%d p=%d sigma2_hat=%.6g\n", data.n(), model.p(), model.sigma2_hat);
    return kOk;
}

int cmd_predict(const CommonFlags& f, const std::string& model_path, const std::string& points_path) {
    auto cfg = load(f);
    const auto sim = dyncal::resolve_simulator(cfg.simulator);
    std::ifstream mf(model_path);
    if (!mf) throw dyncal::ConfigError(model_path + ": cannot open model file");
    const auto model = dyncal::read_model(mf);
    if (model.q() != sim.dim()) throw dyncal::ConfigError(model_path + ": model dimension does not match simulator");
    std::ifstream pf(points_path);
    if (!pf) throw dyncal::ConfigError(points_path + ": cannot open points file");
    const auto pts = dyncal::read_csv(pf);
    if (static_cast<int>(pts.header.size()) != model.q())
        throw dyncal::ConfigError(points_path + ": expected " + std::to_string(model.q()) + " columns");

    std::filesystem::create_directories(f.out);
    auto out = dyncal::open_output((std::filesystem::path(f.out) / "predictions.csv").string());
    auto header = dyncal::indexed_names("x_", model.q());
    const auto ys = dyncal::indexed_names("y_", model.length());
    header.insert(header.end(), ys.begin(), ys.end());
    dyncal::CsvWriter w(out, "predictions-v1", header);
    for (const auto& row : pts.rows) {
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(row.data(), model.q());
        const auto pred = dyncal::predict(model, sim.box.to_unit(x));
        w << x << pred.mean;
        w.end_row();
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential calibration of dynamic simulators with SVD-based GP surrogates"};
    app.require_subcommand(1);

    CommonFlags calib, eimap, extract, fit, pred;
    std::optional<int> grid;
    std::string model_path, points_path;

    auto* c1 = app.add_subcommand("calibrate", "Replicated sequential calibration");
    add_common(c1, calib);
    auto* c2 = app.add_subcommand("ei-map", "saEI, exact EI and Monte-Carlo EI on a grid");
    add_common(c2, eimap);
    c2->add_option("--grid", grid, "Grid size (overrides grid_size)")->check(CLI::PositiveNumber);
    auto* c3 = app.add_subcommand("extract-compare", "ESL2D vs naive extraction on space-filling fits");
    add_common(c3, extract);
    auto* c4 = app.add_subcommand("fit", "Fit the surrogate on the initial design and save it");
    add_common(c4, fit);
    auto* c5 = app.add_subcommand("predict", "Predicted series at points from a CSV");
    add_common(c5, pred);
    c5->add_option("--model", model_path, "Model file written by fit")->required();
    c5->add_option("--points", points_path, "CSV with columns x_1..x_q (native scale)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*c1) return cmd_calibrate(calib);
        if (*c2) return cmd_ei_map(eimap, grid);
        if (*c3) return cmd_extract_compare(extract);
        if (*c4) return cmd_fit(fit);
        if (*c5) return cmd_predict(pred, model_path, points_path);
    } catch (const dyncal::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const dyncal::FormatError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kConfig;
    } catch (const dyncal::SimulatorError& e) {
        std::cerr << "simulator error: " << e.what() << '\n';
        return kSimulator;
    } catch (const dyncal::FactorizationFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const dyncal::NoBracket& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const dyncal::DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kOk;
}
