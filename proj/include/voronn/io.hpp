#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "voronn/berkson.hpp"
#include "voronn/errors.hpp"
#include "voronn/estimators.hpp"

namespace voronn::io {

namespace detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_number(const std::string& cell, std::size_t row,
                           const std::string& column) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    while (pos < cell.size() &&
           (cell[pos] == ' ' || cell[pos] == '\r' || cell[pos] == '\t'))
      ++pos;
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    std::ostringstream os;
    os << "non-numeric cell in row " << row << ", column '" << column << "'";
    throw input_error(os.str());
  }
}

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\r' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\r' || s[e - 1] == '\t'))
    --e;
  return s.substr(b, e - b);
}

// 17 significant digits: enough to round-trip any double bit-exactly.
inline std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV table with header: covariates are every column not named as response
// or treatment, in header order.
struct CsvDataset {
  Eigen::MatrixXd Z;
  Eigen::VectorXd Y;
  std::vector<int> D;  // empty when no treatment column was requested
  std::vector<std::string> covariate_names;
};

inline CsvDataset load_csv_dataset(const std::string& path,
                                   const std::string& response_col,
                                   const std::string& treatment_col = "") {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw input_error("empty file: " + path);
  const auto header = detail::split_line(line);

  int y_col = -1, t_col = -1;
  std::vector<int> z_cols;
  CsvDataset ds;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = detail::trim(header[c]);
    if (name == response_col) {
      y_col = static_cast<int>(c);
    } else if (!treatment_col.empty() && name == treatment_col) {
      t_col = static_cast<int>(c);
    } else {
      z_cols.push_back(static_cast<int>(c));
      ds.covariate_names.push_back(name);
    }
  }
  if (y_col < 0)
    throw input_error("response column '" + response_col + "' not found");
  if (!treatment_col.empty() && t_col < 0)
    throw input_error("treatment column '" + treatment_col + "' not found");
  if (z_cols.empty()) throw input_error("no covariate columns in " + path);

  std::vector<std::vector<double>> zrows;
  std::vector<double> yvals;
  std::vector<int> dvals;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cells = detail::split_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "row " << row << " has " << cells.size() << " cells, expected "
         << header.size();
      throw input_error(os.str());
    }
    std::vector<double> z(z_cols.size());
    for (std::size_t k = 0; k < z_cols.size(); ++k)
      z[k] = detail::parse_number(cells[z_cols[k]], row, ds.covariate_names[k]);
    zrows.push_back(std::move(z));
    yvals.push_back(detail::parse_number(cells[y_col], row, response_col));
    if (t_col >= 0) {
      const double t = detail::parse_number(cells[t_col], row, treatment_col);
      if (t != 0.0 && t != 1.0) {
        std::ostringstream os;
        os << "treatment value outside {0,1} in row " << row;
        throw input_error(os.str());
      }
      dvals.push_back(t == 1.0 ? 1 : 0);
    }
  }
  if (zrows.empty()) throw input_error("no data rows in " + path);

  ds.Z.resize(static_cast<Eigen::Index>(zrows.size()),
              static_cast<Eigen::Index>(z_cols.size()));
  ds.Y.resize(static_cast<Eigen::Index>(yvals.size()));
  for (std::size_t i = 0; i < zrows.size(); ++i) {
    for (std::size_t k = 0; k < z_cols.size(); ++k)
      ds.Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          zrows[i][k];
    ds.Y[static_cast<Eigen::Index>(i)] = yvals[i];
  }
  ds.D = std::move(dvals);
  return ds;
}

inline Sample to_sample(const CsvDataset& ds) { return Sample{ds.Z, ds.Y}; }

// Covariate-only CSV: every column is a coordinate, in header order.
inline PointSet load_csv_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw input_error("empty file: " + path);
  const auto header = detail::split_line(line);
  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cells = detail::split_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << "row " << row << " has " << cells.size() << " cells, expected "
         << header.size();
      throw input_error(os.str());
    }
    std::vector<double> z(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k)
      z[k] = detail::parse_number(cells[k], row, detail::trim(header[k]));
    rows.push_back(std::move(z));
  }
  if (rows.empty()) throw input_error("no data rows in " + path);
  PointSet ps;
  ps.points.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      ps.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          rows[i][k];
  return ps;
}

inline TreatmentDataset to_treatment(const CsvDataset& ds) {
  if (ds.D.empty())
    throw input_error("dataset has no treatment column");
  return TreatmentDataset{ds.Y, ds.Z, ds.D};
}

// "a1:b1,a2:b2,...,ad:bd" -> box with lower=(a_i), upper=(b_i).
inline BoxSupport parse_support(const std::string& spec) {
  std::vector<double> lo, hi;
  std::istringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto colon = token.find(':');
    if (colon == std::string::npos)
      throw input_error("malformed support token '" + token +
                        "' (expected a:b)");
    std::size_t pos = 0;
    double a, b;
    try {
      a = std::stod(token.substr(0, colon), &pos);
      b = std::stod(token.substr(colon + 1), &pos);
    } catch (const std::exception&) {
      throw input_error("malformed support token '" + token + "'");
    }
    if (!(a < b))
      throw input_error("support interval must have a < b in '" + token + "'");
    lo.push_back(a);
    hi.push_back(b);
  }
  if (lo.empty()) throw input_error("empty support specification");
  Eigen::VectorXd lower(static_cast<Eigen::Index>(lo.size()));
  Eigen::VectorXd upper(static_cast<Eigen::Index>(hi.size()));
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lower[static_cast<Eigen::Index>(i)] = lo[i];
    upper[static_cast<Eigen::Index>(i)] = hi[i];
  }
  return BoxSupport(lower, upper);
}

inline std::string support_to_string(const BoxSupport& box) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < box.d(); ++i) {
    if (i) os << ',';
    os << detail::num17(box.lower[i]) << ':' << detail::num17(box.upper[i]);
  }
  return os.str();
}

inline void write_sample_csv(const std::string& path, const Sample& sample,
                             const std::string& response_col = "y") {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file: " + path);
  for (Eigen::Index k = 0; k < sample.d(); ++k) out << 'z' << (k + 1) << ',';
  out << response_col << '\n';
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    for (Eigen::Index k = 0; k < sample.d(); ++k)
      out << detail::num17(sample.Z(i, k)) << ',';
    out << detail::num17(sample.Y[i]) << '\n';
  }
}

// Coefficient table: columns j_1..j_d, re, im.
inline void write_fourier_csv(const std::string& path,
                              const FourierTable& table) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file: " + path);
  for (int k = 0; k < table.grid.d; ++k) out << 'j' << '_' << (k + 1) << ',';
  out << "re,im\n";
  for (std::size_t g = 0; g < table.grid.size(); ++g) {
    for (int k = 0; k < table.grid.d; ++k) out << table.grid.indices[g][k] << ',';
    out << detail::num17(table.values[g].real()) << ','
        << detail::num17(table.values[g].imag()) << '\n';
  }
}

// h grid evaluations: columns x_1..x_d, h.
inline void write_h_grid_csv(const std::string& path,
                             const FourierEstimate& est,
                             int points_per_dim) {
  if (points_per_dim < 2)
    throw input_error("grid must have at least 2 points per dimension");
  std::ofstream out(path);
  if (!out) throw input_error("cannot write file: " + path);
  const int d = est.grid.d;
  for (int k = 0; k < d; ++k) out << 'x' << '_' << (k + 1) << ',';
  out << "h\n";
  const double pi = 3.14159265358979323846;
  std::vector<int> idx(d, 0);
  Eigen::VectorXd x(d);
  for (;;) {
    for (int k = 0; k < d; ++k)
      x[k] = -pi + 2.0 * pi * idx[k] / (points_per_dim - 1);
    for (int k = 0; k < d; ++k) out << detail::num17(x[k]) << ',';
    out << detail::num17(evaluate_h(est, x)) << '\n';
    int pos = d - 1;
    while (pos >= 0 && idx[pos] == points_per_dim - 1) idx[pos--] = 0;
    if (pos < 0) break;
    ++idx[pos];
  }
}

// Minimal ordered JSON object writer; numbers carry 17 significant digits.
class JsonObject {
public:
  void set(const std::string& key, double v) {
    entries_.emplace_back(key, detail::num17(v));
  }
  void set(const std::string& key, std::int64_t v) {
    entries_.emplace_back(key, std::to_string(v));
  }
  void set(const std::string& key, std::uint64_t v) {
    entries_.emplace_back(key, std::to_string(v));
  }
  void set(const std::string& key, int v) {
    entries_.emplace_back(key, std::to_string(v));
  }
  void set(const std::string& key, bool v) {
    entries_.emplace_back(key, v ? "true" : "false");
  }
  void set_string(const std::string& key, const std::string& v) {
    std::string escaped;
    for (char c : v) {
      if (c == '"' || c == '\\') escaped += '\\';
      escaped += c;
    }
    entries_.emplace_back(key, "\"" + escaped + "\"");
  }
  void set_raw(const std::string& key, const std::string& raw) {
    entries_.emplace_back(key, raw);
  }

  std::string dump() const {
    std::ostringstream os;
    os << "{\n";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      os << "  \"" << entries_[i].first << "\": " << entries_[i].second;
      if (i + 1 < entries_.size()) os << ',';
      os << '\n';
    }
    os << "}\n";
    return os.str();
  }

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::string number_array(const std::vector<double>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << detail::num17(v[i]);
  }
  os << ']';
  return os.str();
}

}  // namespace voronn::io
