#include "pkf/design.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "pkf/error.hpp"
#include "pkf/kernels.hpp"

namespace pkf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(line) +
                                           ": not a number: '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (has_header && lineno == 1) continue;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    for (;;) {
      auto comma = rest.find(',');
      row.push_back(parse_field(rest.substr(0, comma), path, lineno));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::ParseError, path.string() + ":" + std::to_string(lineno) +
                                             ": ragged row (" + std::to_string(row.size()) +
                                             " fields, expected " +
                                             std::to_string(rows.front().size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Dataset::Dataset(Matrix x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
  if (y_.size() != x_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "y has " + std::to_string(y_.size()) +
                                                  " entries but X has " +
                                                  std::to_string(x_.rows()) + " rows");
  }
  if (x_.cols() == 0) throw Error(ErrorKind::InvalidDesign, "design has no columns");
  if (x_.rows() < 2 * x_.cols()) {
    throw Error(ErrorKind::InvalidDesign, "knockoffs need n >= 2p, got n=" +
                                              std::to_string(x_.rows()) +
                                              ", p=" + std::to_string(x_.cols()));
  }
  if (!x_.allFinite() || !y_.allFinite()) {
    throw Error(ErrorKind::InvalidDesign, "non-finite entries in X or y");
  }
  const Vector norms = kernels::column_norms(x_);
  for (Index j = 0; j < norms.size(); ++j) {
    if (norms(j) < kMinColumnNorm) {
      throw Error(ErrorKind::InvalidDesign, "column " + std::to_string(j) + " has zero norm");
    }
  }
}

ModelOracle ModelOracle::from_truth(const Vector& beta, double sigma2) {
  ModelOracle o;
  o.beta_norm_bound = beta.norm();
  o.sigma2_bound = sigma2;
  o.true_beta = beta;
  std::vector<Index> support;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) support.push_back(j);
  }
  o.true_support = std::move(support);
  return o;
}

Dataset load_dataset(const std::filesystem::path& x_path, const std::filesystem::path& y_path,
                     bool has_header) {
  const auto xrows = read_rows(x_path, has_header);
  const auto yrows = read_rows(y_path, has_header);
  if (xrows.empty()) throw Error(ErrorKind::ParseError, x_path.string() + ": no data rows");

  const Index n = static_cast<Index>(xrows.size());
  const Index p = static_cast<Index>(xrows.front().size());
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = xrows[i][j];
  }
  Vector y(static_cast<Index>(yrows.size()));
  for (std::size_t i = 0; i < yrows.size(); ++i) {
    if (yrows[i].size() != 1) {
      throw Error(ErrorKind::ParseError,
                  y_path.string() + ": expected one value per line, row " + std::to_string(i + 1));
    }
    y(static_cast<Index>(i)) = yrows[i][0];
  }
  return Dataset(std::move(x), std::move(y));
}

NormalizedDesign normalize_columns(const Dataset& d) {
  const Vector norms = kernels::column_norms(d.x());
  if (norms.minCoeff() < kMinColumnNorm) {
    throw Error(ErrorKind::InvalidDesign, "zero-norm column");
  }
  Vector dvec = norms.cwiseInverse();
  Matrix xp = d.x() * dvec.asDiagonal();
  return NormalizedDesign{std::move(xp), std::move(dvec), d};
}

NormBounds compute_bounds(const Dataset& d, std::optional<double> row_bound_override) {
  const double c_min = kernels::column_norms(d.x()).minCoeff();
  const double b = row_bound_override ? *row_bound_override : kernels::max_row_norm(d.x());
  if (!(b > 0.0)) throw Error(ErrorKind::BoundViolation, "row bound B must be positive");
  if (b >= c_min) {
    std::ostringstream os;
    os << "row bound B=" << b << " is not below the minimum column norm C_min=" << c_min
       << " (the bounded-row assumption needs B < C_min so that eta^2 = B^2/(C_min^2 - B^2) is finite)";
    throw Error(ErrorKind::BoundViolation, os.str());
  }
  return NormBounds{b, c_min};
}

}  // namespace pkf
