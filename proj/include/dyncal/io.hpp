#pragma once

#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyncal/inverse_solver.hpp"
#include "dyncal/svd_emulator.hpp"

namespace dyncal {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits; NaN is written as NA.
std::string format_number(double v);

/// Minimal CSV writer: a "# <schema>" comment line, then the header row.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::string& schema, const std::vector<std::string>& header);
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
    CsvWriter& operator<<(const std::string& v);
    CsvWriter& operator<<(const Eigen::VectorXd& v);
    void end_row();

private:
    void sep();
    std::ostream& out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Header row plus numeric rows; skips "#" comment lines.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(std::istream& in);

std::vector<std::string> indexed_names(const std::string& prefix, int count);

void write_design_set(std::ostream& out, const DesignSet& data);
DesignSet read_design_set(std::istream& in);

void write_model(std::ostream& out, const SvdGpModel& model);
SvdGpModel read_model(std::istream& in);

/// Trace rows with x mapped back to the native box.
void write_trace(std::ostream& out, const RunTrace& trace, const UnitBox& box);
/// One row: x_1..x_q, D_xi.
void write_solution(std::ostream& out, const Eigen::VectorXd& x, double d_xi);

/// Opens for writing or throws std::runtime_error naming the path.
std::ofstream open_output(const std::string& path);

}  // namespace dyncal
