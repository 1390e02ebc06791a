#include "dyncal/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace dyncal {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Field {
    std::string source;
    int line;
    std::string key;
    std::string value;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError(source + ":" + std::to_string(line) + ": " + key + ": " + why);
    }

    double real() const {
        double v = 0.0;
        const char* b = value.data();
        const char* e = b + value.size();
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e || !std::isfinite(v)) fail("expected a number, got '" + value + "'");
        return v;
    }
    double fraction() const {
        // accepts "1/50" as well as plain numbers
        const auto slash = value.find('/');
        if (slash == std::string::npos) return real();
        Field a = *this, b = *this;
        a.value = trim(value.substr(0, slash));
        b.value = trim(value.substr(slash + 1));
        const double den = b.real();
        if (den == 0.0) fail("zero denominator");
        return a.real() / den;
    }
    long long integer() const {
        long long v = 0;
        const char* b = value.data();
        const char* e = b + value.size();
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e) fail("expected an integer, got '" + value + "'");
        return v;
    }
    int count(int min) const {
        const long long v = integer();
        if (v < min || v > 100000000) fail("must be an integer >= " + std::to_string(min));
        return static_cast<int>(v);
    }
    std::uint64_t seed() const {
        std::uint64_t v = 0;
        const char* b = value.data();
        const char* e = b + value.size();
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e) fail("expected a non-negative integer, got '" + value + "'");
        return v;
    }
    bool boolean() const {
        if (value == "true" || value == "1" || value == "yes") return true;
        if (value == "false" || value == "0" || value == "no") return false;
        fail("expected true or false, got '" + value + "'");
    }
    std::vector<double> list() const {
        std::vector<double> out;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            Field f = *this;
            f.value = trim(item);
            out.push_back(f.real());
        }
        if (out.empty()) fail("expected a comma-separated list of numbers");
        return out;
    }
    double positive() const {
        const double v = real();
        if (!(v > 0.0)) fail("must be positive");
        return v;
    }
};

using Setter = std::function<void(StudyConfig&, const Field&)>;

const std::map<std::string, Setter>& study_keys() {
    static const std::map<std::string, Setter> keys{
        {"seed", [](StudyConfig& c, const Field& f) { c.seed = f.seed(); }},
        {"replications", [](StudyConfig& c, const Field& f) { c.replications = f.count(1); }},
        {"workers", [](StudyConfig& c, const Field& f) { c.workers = f.count(1); }},
        {"target_mode",
         [](StudyConfig& c, const Field& f) {
             if (f.value == "fixed_x_star") c.target_mode = TargetMode::fixed_x_star;
             else if (f.value == "redraw_x_star") c.target_mode = TargetMode::redraw_x_star;
             else f.fail("expected fixed_x_star or redraw_x_star");
         }},
        {"x_star",
         [](StudyConfig& c, const Field& f) {
             auto v = f.list();
             c.x_star = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
         }},
        {"rho",
         [](StudyConfig& c, const Field& f) {
             c.rho = f.fraction();
             if (c.rho < 0.0) f.fail("must be >= 0");
         }},
        {"extraction",
         [](StudyConfig& c, const Field& f) {
             if (f.value == "esl2d") c.extraction = Extraction::esl2d;
             else if (f.value == "naive") c.extraction = Extraction::naive;
             else if (f.value == "both") c.extraction = Extraction::both;
             else f.fail("expected esl2d, naive or both");
         }},
        {"n0", [](StudyConfig& c, const Field& f) { c.n0 = f.count(2); }},
        {"n_new", [](StudyConfig& c, const Field& f) { c.n_new = f.count(0); }},
        {"m1", [](StudyConfig& c, const Field& f) { c.m1 = f.count(1); }},
        {"m2", [](StudyConfig& c, const Field& f) { c.m2 = f.count(1); }},
        {"design_size", [](StudyConfig& c, const Field& f) { c.design_size = f.count(2); }},
        {"initial_design",
         [](StudyConfig& c, const Field& f) {
             if (f.value == "maximin") c.initial_design = InitialDesign::maximin;
             else if (f.value == "random") c.initial_design = InitialDesign::random;
             else f.fail("expected maximin or random");
         }},
        {"gamma",
         [](StudyConfig& c, const Field& f) {
             c.gamma = f.real();
             if (!(c.gamma > 0.0 && c.gamma < 1.0)) f.fail("must lie in (0,1)");
         }},
        {"alpha_i", [](StudyConfig& c, const Field& f) { c.priors.alpha_i = f.positive(); }},
        {"beta_i", [](StudyConfig& c, const Field& f) { c.priors.beta_i = f.positive(); }},
        {"alpha", [](StudyConfig& c, const Field& f) { c.priors.alpha = f.positive(); }},
        {"beta", [](StudyConfig& c, const Field& f) { c.priors.beta = f.positive(); }},
        {"theta_prior_shape", [](StudyConfig& c, const Field& f) { c.priors.gamma_shape = f.positive(); }},
        {"theta_prior_rate", [](StudyConfig& c, const Field& f) { c.priors.gamma_rate = f.positive(); }},
        {"gp_starts", [](StudyConfig& c, const Field& f) { c.gp_starts = f.count(1); }},
        {"lhd_restarts", [](StudyConfig& c, const Field& f) { c.lhd.restarts = f.count(1); }},
        {"lhd_swaps", [](StudyConfig& c, const Field& f) { c.lhd.swaps = f.count(0); }},
        {"record_wall_time", [](StudyConfig& c, const Field& f) { c.record_wall_time = f.boolean(); }},
        {"grid_size", [](StudyConfig& c, const Field& f) { c.grid_size = f.count(1); }},
        {"mc_samples", [](StudyConfig& c, const Field& f) { c.mc_samples = f.count(2); }},
    };
    return keys;
}

const std::map<std::string, Setter>& simulator_keys() {
    static const std::map<std::string, Setter> keys{
        {"name", [](StudyConfig& c, const Field& f) { c.simulator.name = f.value; }},
        {"L", [](StudyConfig& c, const Field& f) { c.simulator.L = f.count(1); }},
        {"command", [](StudyConfig& c, const Field& f) { c.simulator.command = f.value; }},
        {"lower", [](StudyConfig& c, const Field& f) { c.simulator.lower = f.list(); }},
        {"upper", [](StudyConfig& c, const Field& f) { c.simulator.upper = f.list(); }},
        {"t_start", [](StudyConfig& c, const Field& f) { c.simulator.t_start = f.real(); }},
        {"t_end", [](StudyConfig& c, const Field& f) { c.simulator.t_end = f.real(); }},
    };
    return keys;
}

}  // namespace

StudyConfig parse_config(const std::string& text, const std::string& source) {
    StudyConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool in_sim = false;
    std::set<std::string> seen;
    std::map<std::string, Field> sim_fields;

    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line == "[simulator]") in_sim = true;
            else if (line == "[study]") in_sim = false;
            else throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown section " + line);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key = value");
        Field f{source, line_no, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
        if (f.key.empty()) f.fail("empty key");
        if (f.value.empty()) f.fail("empty value");
        const auto& table = in_sim ? simulator_keys() : study_keys();
        const auto it = table.find(f.key);
        if (it == table.end()) f.fail(in_sim ? "unknown simulator key" : "unknown key");
        const std::string qualified = (in_sim ? "simulator." : "") + f.key;
        if (!seen.insert(qualified).second) f.fail("duplicate key");
        it->second(cfg, f);
        if (in_sim) sim_fields.emplace(f.key, f);
    }

    auto& sim = cfg.simulator;
    auto where = [&](const std::string& key) -> Field {
        auto it = sim_fields.find(key);
        if (it != sim_fields.end()) return it->second;
        return Field{source, line_no, "simulator." + key, ""};
    };
    static const std::set<std::string> builtin{"example1", "gfun_separable", "harari", "environmental"};
    if (sim.name == "external") {
        if (sim.command.empty()) where("command").fail("required for an external simulator");
        if (sim.lower.empty() || sim.upper.empty()) where("lower").fail("lower and upper are required");
        if (sim.lower.size() != sim.upper.size()) where("upper").fail("lower and upper differ in length");
        for (std::size_t j = 0; j < sim.lower.size(); ++j)
            if (!(sim.lower[j] < sim.upper[j])) where("upper").fail("upper must exceed lower in every coordinate");
    } else {
        if (!builtin.count(sim.name)) where("name").fail("unknown simulator '" + sim.name + "'");
        for (const char* k : {"command", "lower", "upper", "t_start", "t_end"})
            if (sim_fields.count(k)) where(k).fail("only valid for an external simulator");
    }
    return cfg;
}

StudyConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

std::string to_string(TargetMode m) { return m == TargetMode::fixed_x_star ? "fixed_x_star" : "redraw_x_star"; }

std::string to_string(Extraction e) {
    switch (e) {
        case Extraction::esl2d: return "esl2d";
        case Extraction::naive: return "naive";
        case Extraction::both: return "both";
    }
    return "";
}

}  // namespace dyncal
