#include "occuhmm/occupancy/curve.hpp"

#include "occuhmm/error.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace occuhmm {

const char* method_tag(OccupancyMethod method) {
  switch (method) {
    case OccupancyMethod::stationary: return "stationary";
    case OccupancyMethod::binned: return "binned";
    case OccupancyMethod::ar_resample: return "ar-resample";
    case OccupancyMethod::block_bootstrap: return "block-bootstrap";
    case OccupancyMethod::dirichlet: return "dirichlet";
    case OccupancyMethod::monte_carlo: return "monte-carlo";
  }
  return "unknown";
}

OccupancyMethod parse_method_tag(const std::string& tag) {
  for (auto m : {OccupancyMethod::stationary, OccupancyMethod::binned, OccupancyMethod::ar_resample,
                 OccupancyMethod::block_bootstrap, OccupancyMethod::dirichlet, OccupancyMethod::monte_carlo})
    if (tag == method_tag(m)) return m;
  throw InputError("unknown occupancy method tag '" + tag + "'");
}

bool OccupancyCurve::has_value(std::size_t k) const {
  return !std::isnan(probs(static_cast<Eigen::Index>(k), 0));
}

void OccupancyCurve::validate() const {
  if (static_cast<std::size_t>(probs.rows()) != grid.size() || counts.size() != grid.size())
    throw InputError("occupancy curve columns differ in length");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw InputError("occupancy grid must be strictly increasing");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!has_value(k)) continue;
    const auto row = probs.row(static_cast<Eigen::Index>(k));
    if (row.minCoeff() < 0 || std::abs(row.sum() - 1) > 1e-10)
      throw InputError("occupancy row " + std::to_string(k) + " is not on the simplex");
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_curve_csv(std::ostream& out, const OccupancyCurve& curve) {
  out << "z,count";
  for (int i = 0; i < curve.n_states(); ++i) out << ",p_" << (i + 1);
  out << ",method\n";
  for (std::size_t k = 0; k < curve.size(); ++k) {
    out << format_double(curve.grid[k]) << ',' << curve.counts[k];
    const bool present = curve.has_value(k);
    for (int i = 0; i < curve.n_states(); ++i) {
      out << ',';
      if (present) out << format_double(curve.probs(static_cast<Eigen::Index>(k), i));
    }
    out << ',' << method_tag(curve.method) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError("line " + std::to_string(line) + ": cannot parse number '" + s + "'");
  return v;
}

}  // namespace

OccupancyCurve read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty occupancy CSV");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "z" || header[1] != "count" || header.back() != "method")
    throw InputError("line 1: unexpected occupancy CSV header");
  const int n = static_cast<int>(header.size()) - 3;
  OccupancyCurve curve;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
    curve.grid.push_back(parse_number(f[0], line_no));
    curve.counts.push_back(static_cast<std::size_t>(parse_number(f[1], line_no)));
    std::vector<double> row(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < n; ++i) {
      const auto& s = f[static_cast<std::size_t>(i) + 2];
      if (!s.empty()) row[static_cast<std::size_t>(i)] = parse_number(s, line_no);
    }
    rows.push_back(std::move(row));
    curve.method = parse_method_tag(f.back());
  }
  curve.probs.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (int i = 0; i < n; ++i) curve.probs(static_cast<Eigen::Index>(k), i) = rows[k][static_cast<std::size_t>(i)];
  return curve;
}

}  // namespace occuhmm
