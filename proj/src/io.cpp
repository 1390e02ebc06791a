#include "dyncal/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace dyncal {

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::ostream& out, const std::string& schema, const std::vector<std::string>& header)
    : out_(out), columns_(header.size()) {
    out_ << "# " << schema << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

void CsvWriter::sep() {
    if (filled_ >= columns_) throw std::logic_error("CsvWriter: too many fields in row");
    if (filled_++) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
    sep();
    out_ << format_number(v);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
    sep();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) *this << v[i];
    return *this;
}

void CsvWriter::end_row() {
    if (filled_ != columns_) throw std::logic_error("CsvWriter: short row");
    out_ << '\n';
    filled_ = 0;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
    if (s == "NA") return std::nan("");
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
    return v;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line);
        if (!have_header) {
            t.header = fields;
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                              " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_number(f, line_no));
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw FormatError("csv: missing header row");
    return t;
}

std::vector<std::string> indexed_names(const std::string& prefix, int count) {
    std::vector<std::string> out;
    for (int i = 1; i <= count; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void write_design_set(std::ostream& out, const DesignSet& data) {
    data.validate();
    auto header = indexed_names("x_", data.q());
    auto ys = indexed_names("y_", data.length());
    header.insert(header.end(), ys.begin(), ys.end());
    CsvWriter w(out, "design-v1", header);
    for (int j = 0; j < data.n(); ++j) {
        w << Eigen::VectorXd(data.X.row(j).transpose()) << Eigen::VectorXd(data.Y.col(j));
        w.end_row();
    }
}

DesignSet read_design_set(std::istream& in) {
    CsvTable t = read_csv(in);
    int q = 0;
    while (q < static_cast<int>(t.header.size()) && t.header[q].rfind("x_", 0) == 0) ++q;
    const int L = static_cast<int>(t.header.size()) - q;
    if (q == 0 || L == 0) throw FormatError("design csv: need x_ columns followed by y_ columns");
    DesignSet d;
    d.X.resize(static_cast<Eigen::Index>(t.rows.size()), q);
    d.Y.resize(L, static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t j = 0; j < t.rows.size(); ++j) {
        for (int k = 0; k < q; ++k) d.X(j, k) = t.rows[j][k];
        for (int l = 0; l < L; ++l) d.Y(l, j) = t.rows[j][q + l];
    }
    return d;
}

// Model file: whitespace-separated tokens. Each field is introduced by its
// name; matrices carry "rows cols" and are stored row-major.

namespace {

void put_matrix(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_number(m(i, j));
        out << '\n';
    }
}

void put_vector(std::ostream& out, const char* name, const Eigen::VectorXd& v) {
    out << name << ' ' << v.size() << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_number(v[i]);
    out << '\n';
}

void put_scalar(std::ostream& out, const char* name, double v) { out << name << ' ' << format_number(v) << '\n'; }

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void expect(const std::string& name) {
        std::string tok;
        if (!(in_ >> tok) || tok != name) throw FormatError("model file: expected '" + name + "', got '" + tok + "'");
    }
    double number() {
        std::string tok;
        if (!(in_ >> tok)) throw FormatError("model file: unexpected end of input");
        return parse_number(tok, 0);
    }
    Eigen::Index count() {
        const double v = number();
        if (v < 0 || v != std::floor(v)) throw FormatError("model file: bad dimension");
        return static_cast<Eigen::Index>(v);
    }
    double scalar(const std::string& name) {
        expect(name);
        return number();
    }
    Eigen::MatrixXd matrix(const std::string& name) {
        expect(name);
        const auto r = count(), c = count();
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = number();
        return m;
    }
    Eigen::VectorXd vector(const std::string& name) {
        expect(name);
        const auto n = count();
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = number();
        return v;
    }

private:
    std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const SvdGpModel& m) {
    out << "svdgp-v1\n";
    put_scalar(out, "gamma", m.gamma);
    put_scalar(out, "sigma2_hat", m.sigma2_hat);
    const auto& pr = m.priors;
    out << "priors " << format_number(pr.alpha_i) << ' ' << format_number(pr.beta_i) << ' '
        << format_number(pr.alpha) << ' ' << format_number(pr.beta) << ' ' << format_number(pr.gamma_shape) << ' '
        << format_number(pr.gamma_rate) << '\n';
    put_matrix(out, "X", m.X);
    put_matrix(out, "B", m.B);
    put_matrix(out, "U_star", m.U_star);
    put_vector(out, "d", m.d);
    put_matrix(out, "V_star", m.V_star);
    out << "gps " << m.gps.size() << '\n';
    for (const auto& g : m.gps) {
        put_vector(out, "theta", g.theta_hat.theta);
        put_scalar(out, "sigma2_scale", g.sigma2_scale);
        put_scalar(out, "psi", g.psi);
        put_scalar(out, "objective", g.objective);
        put_scalar(out, "jitter", g.chol.jitter);
        put_matrix(out, "chol", g.chol.lower);
        put_vector(out, "kinv_v", g.kinv_v);
    }
    out << "end\n";
}

SvdGpModel read_model(std::istream& in) {
    Reader r(in);
    r.expect("svdgp-v1");
    SvdGpModel m;
    m.gamma = r.scalar("gamma");
    m.sigma2_hat = r.scalar("sigma2_hat");
    r.expect("priors");
    m.priors.alpha_i = r.number();
    m.priors.beta_i = r.number();
    m.priors.alpha = r.number();
    m.priors.beta = r.number();
    m.priors.gamma_shape = r.number();
    m.priors.gamma_rate = r.number();
    m.X = r.matrix("X");
    m.B = r.matrix("B");
    m.U_star = r.matrix("U_star");
    m.d = r.vector("d");
    m.V_star = r.matrix("V_star");
    r.expect("gps");
    const auto p = r.count();
    for (Eigen::Index i = 0; i < p; ++i) {
        FittedCoefficientGp g;
        g.theta_hat.theta = r.vector("theta");
        g.sigma2_scale = r.scalar("sigma2_scale");
        g.psi = r.scalar("psi");
        g.objective = r.scalar("objective");
        g.chol.jitter = r.scalar("jitter");
        g.chol.lower = r.matrix("chol");
        g.kinv_v = r.vector("kinv_v");
        m.gps.push_back(std::move(g));
    }
    r.expect("end");

    const auto n = m.X.rows();
    const auto L = m.B.rows();
    bool ok = m.B.cols() == p && m.U_star.rows() == L && m.U_star.cols() == p && m.d.size() == p &&
              m.V_star.rows() == p && m.V_star.cols() == n;
    for (const auto& g : m.gps)
        ok = ok && g.theta_hat.theta.size() == m.X.cols() && g.chol.lower.rows() == n && g.chol.lower.cols() == n &&
             g.kinv_v.size() == n;
    if (!ok) throw FormatError("model file: inconsistent dimensions");
    return m;
}

void write_trace(std::ostream& out, const RunTrace& trace, const UnitBox& box) {
    const int q = box.dim();
    std::vector<std::string> header{"iter"};
    auto xs = indexed_names("x_", q);
    header.insert(header.end(), xs.begin(), xs.end());
    for (const char* c : {"delta", "delta_min", "saei", "wall_ms", "d_xi", "d_xi_naive"}) header.emplace_back(c);
    CsvWriter w(out, "trace-v1", header);
    for (const auto& row : trace.rows) {
        w << row.iter << box.to_native(row.x) << row.delta << row.delta_min << row.saei << row.wall_ms << row.d_xi << row.d_xi_naive;
        w.end_row();
    }
}

void write_solution(std::ostream& out, const Eigen::VectorXd& x, double d_xi) {
    auto header = indexed_names("x_", static_cast<int>(x.size()));
    header.emplace_back("D_xi");
    CsvWriter w(out, "solution-v1", header);
    w << x << d_xi;
    w.end_row();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

}  // namespace dyncal
