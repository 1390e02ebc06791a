#include "dyncal/inverse_solver.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>
#include <sstream>

#include "dyncal/errors.hpp"
#include "dyncal/saei.hpp"

namespace dyncal {

double improvement(double delta_min, double delta_x) {
    return std::max(0.0, delta_min - delta_x);
}

double normalized_discrepancy(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) {
    if (xi.size() != y.size()) throw std::invalid_argument("normalized_discrepancy: length mismatch");
    const double denom = (xi.array() - xi.mean()).square().sum();
    if (!(denom > 0.0)) throw DomainError("normalized_discrepancy: target series is constant");
    return (xi - y).squaredNorm() / denom;
}

Eigen::VectorXd target_coefficients(const SvdGpModel& model, const Eigen::VectorXd& xi) {
    return (model.U_star.transpose() * xi).cwiseQuotient(model.d);
}

double naive_objective(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& c_xi) {
    return (model.d.array().square() * (pred.c_hat - c_xi).array().square()).sum();
}

double esl2d_objective(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& c_xi) {
    return naive_objective(model, pred, c_xi) + (model.d.array().square() * pred.s2.array()).sum();
}

namespace {

template <class Objective>
Eigen::VectorXd extract_by(const SvdGpModel& model, const Eigen::VectorXd& xi, const Design& candidates,
                           Objective objective) {
    if (candidates.rows() < 1) throw std::invalid_argument("extraction needs a non-empty candidate set");
    const Eigen::VectorXd c_xi = target_coefficients(model, xi);
    Eigen::Index best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < candidates.rows(); ++r) {
        const double val = objective(model, predict(model, candidates.row(r).transpose()), c_xi);
        if (val < best_val) {
            best_val = val;
            best = r;
        }
    }
    return candidates.row(best).transpose();
}

std::string format_point(const Eigen::VectorXd& x) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
    return "(" + os.str() + ")";
}

Eigen::VectorXd run_simulator(const SimulatorFn& sim, const Eigen::VectorXd& x) {
    try {
        return sim(x);
    } catch (const SimulatorError&) {
        throw;
    } catch (const std::exception& e) {
        throw SimulatorError(std::string("simulator failed at unit x = ") + format_point(x) + ": " + e.what());
    }
}

bool near_existing(const Design& X, int rows, const Eigen::VectorXd& x) {
    for (int r = 0; r < rows; ++r)
        if ((X.row(r).transpose() - x).cwiseAbs().maxCoeff() < 1e-9) return true;
    return false;
}

}  // namespace

Eigen::VectorXd extract_naive(const SvdGpModel& model, const Eigen::VectorXd& xi, const Design& candidates) {
    return extract_by(model, xi, candidates, naive_objective);
}

Eigen::VectorXd extract_esl2d(const SvdGpModel& model, const Eigen::VectorXd& xi, const Design& candidates) {
    return extract_by(model, xi, candidates, esl2d_objective);
}

CalibrationProblem CalibrationProblem::with_defaults(SimulatorFn sim, UnitBox box, Eigen::VectorXd xi,
                                                     std::uint64_t seed) {
    CalibrationProblem p;
    const int q = box.dim();
    p.simulator = std::move(sim);
    p.box = std::move(box);
    p.xi = std::move(xi);
    p.n0 = 6 * q;
    p.n_new = 12 * q;
    p.m1 = 2000 * q;
    p.m2 = 2000 * q;
    p.seed = seed;
    return p;
}

void CalibrationProblem::validate() const {
    if (!simulator) throw std::invalid_argument("CalibrationProblem: simulator handle is empty");
    if (box.dim() < 1) throw std::invalid_argument("CalibrationProblem: box is empty");
    if (n0 < 2) throw std::invalid_argument("CalibrationProblem: n0 must be >= 2");
    if (n_new < 0) throw std::invalid_argument("CalibrationProblem: n_new must be >= 0");
    if (m1 < 1 || m2 < 1) throw std::invalid_argument("CalibrationProblem: candidate sizes must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("CalibrationProblem: gamma must be in (0,1)");
    priors.validate();
}

DesignSet evaluate_design(const SimulatorFn& simulator, const Design& X) {
    DesignSet data;
    data.X = X;
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        Eigen::VectorXd y = run_simulator(simulator, X.row(r).transpose());
        if (r == 0) data.Y.resize(y.size(), X.rows());
        if (y.size() != data.Y.rows()) throw SimulatorError("simulator returned series of inconsistent length");
        data.Y.col(r) = y;
    }
    return data;
}

CalibrationResult run_calibration(const CalibrationProblem& problem) {
    problem.validate();
    using clock = std::chrono::steady_clock;
    const int q = problem.box.dim();
    const int N_total = problem.n0 + problem.n_new;

    CalibrationResult out;
    DesignSet& data = out.data;
    {
        DesignSet init = evaluate_design(problem.simulator,
                                         maximin_lhd(problem.n0, q, derive_seed(problem.seed, "initial-design"),
                                                     problem.lhd));
        if (init.Y.rows() != problem.xi.size())
            throw SimulatorError("simulator series length does not match the target length");
        data.X.resize(N_total, q);
        data.Y.resize(init.Y.rows(), N_total);
        data.X.topRows(problem.n0) = init.X;
        data.Y.leftCols(problem.n0) = init.Y;
    }
    int rows = problem.n0;
    auto current = [&]() {
        DesignSet d;
        d.X = data.X.topRows(rows);
        d.Y = data.Y.leftCols(rows);
        return d;
    };

    double delta_min = std::numeric_limits<double>::infinity();
    for (int r = 0; r < rows; ++r) delta_min = std::min(delta_min, discrepancy(problem.xi, data.Y.col(r)));

    SvdFitOptions fit_opts;
    fit_opts.gamma = problem.gamma;
    fit_opts.priors = problem.priors;
    fit_opts.gp = problem.gp;
    fit_opts.seed = derive_seed(problem.seed, "fit", 0);
    SvdGpModel model = fit_svd_gp(current(), fit_opts);

    const Design extraction_set = random_candidates(problem.m2, q, derive_seed(problem.seed, "extract"));
    auto score_solution = [&](const SvdGpModel& m, double& d_esl2d, double& d_naive, Eigen::VectorXd* x_esl2d,
                              Eigen::VectorXd* x_naive) {
        const Eigen::VectorXd xe = extract_esl2d(m, problem.xi, extraction_set);
        const Eigen::VectorXd xn = extract_naive(m, problem.xi, extraction_set);
        d_esl2d = normalized_discrepancy(problem.xi, run_simulator(problem.simulator, xe));
        d_naive = (xn - xe).cwiseAbs().maxCoeff() == 0.0
                      ? d_esl2d
                      : normalized_discrepancy(problem.xi, run_simulator(problem.simulator, xn));
        if (x_esl2d) *x_esl2d = xe;
        if (x_naive) *x_naive = xn;
    };

    RunTrace& trace = out.trace;
    trace.initial_delta_min = delta_min;
    if (problem.track_solution || problem.n_new == 0)
        score_solution(model, trace.initial_d_xi, trace.initial_d_xi_naive, nullptr, nullptr);

    for (int it = 1; it <= problem.n_new; ++it) {
        const auto t0 = clock::now();
        const Design cand = random_candidates(problem.m1, q, derive_seed(problem.seed, "acquire", it));
        std::vector<double> score(cand.rows(), 0.0);
        bool any_positive = false;
        for (Eigen::Index c = 0; c < cand.rows(); ++c) {
            try {
                score[c] = saei(model, cand.row(c).transpose(), problem.xi, delta_min);
            } catch (const NoBracket&) {
                score[c] = 0.0;
            }
            any_positive = any_positive || score[c] > 0.0;
        }
        std::vector<Eigen::Index> order(cand.rows());
        std::iota(order.begin(), order.end(), 0);
        if (any_positive) {
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
        } else {
            // nothing promises improvement: fall back to the smallest expected discrepancy
            std::vector<double> mu(cand.rows());
            for (Eigen::Index c = 0; c < cand.rows(); ++c)
                mu[c] = expected_discrepancy(model, predict(model, cand.row(c).transpose()), problem.xi);
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mu[a] < mu[b]; });
        }
        Eigen::Index pick = -1;
        for (auto c : order)
            if (!near_existing(data.X, rows, cand.row(c).transpose())) {
                pick = c;
                break;
            }
        if (pick < 0) throw std::runtime_error("every candidate duplicates an existing design point");

        IterationRecord rec;
        rec.iter = it;
        rec.x = cand.row(pick).transpose();
        rec.saei = score[pick];
        const Eigen::VectorXd y = run_simulator(problem.simulator, rec.x);
        if (y.size() != problem.xi.size()) throw SimulatorError("simulator returned series of inconsistent length");
        data.X.row(rows) = rec.x.transpose();
        data.Y.col(rows) = y;
        ++rows;
        rec.delta = discrepancy(problem.xi, y);
        delta_min = std::min(delta_min, rec.delta);
        rec.delta_min = delta_min;

        fit_opts.seed = derive_seed(problem.seed, "fit", it);
        model = fit_svd_gp(current(), fit_opts, &model);
        ++trace.refits;
        if (problem.track_solution) score_solution(model, rec.d_xi, rec.d_xi_naive, nullptr, nullptr);
        rec.wall_ms = problem.record_wall_time
                          ? std::chrono::duration<double, std::milli>(clock::now() - t0).count()
                          : std::numeric_limits<double>::quiet_NaN();
        trace.rows.push_back(std::move(rec));
    }

    score_solution(model, trace.final_d_xi, trace.final_d_xi_naive, &trace.x_hat, &trace.x_hat_naive);
    out.model = std::move(model);
    return out;
}

}  // namespace dyncal
