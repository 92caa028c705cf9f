#include "rlctfa/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace rlctfa::io {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

Matrix read_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw FormatError("covariance CSV line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("covariance CSV: no rows");
  const auto p = rows.size();
  Matrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    if (rows[i].size() != p) {
      throw FormatError("covariance CSV row " + std::to_string(i + 1) + ": expected " + std::to_string(p) +
                        " entries, got " + std::to_string(rows[i].size()));
    }
    for (std::size_t j = 0; j < p; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

std::string write_matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

namespace {

Matrix json_matrix(const nlohmann::json& node, const std::string& what) {
  if (!node.is_array()) throw FormatError(what + ": expected an array of rows");
  const auto rows = node.size();
  Eigen::Index cols = -1;
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = node[i];
    if (!row.is_array()) throw FormatError(what + "[" + std::to_string(i) + "]: expected an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(static_cast<Eigen::Index>(rows), cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) throw FormatError(what + ": ragged rows");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!row[j].is_number()) throw FormatError(what + ": non-numeric entry");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }
  return m;
}

nlohmann::json matrix_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

FactorModelPoint read_point_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("covariance JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("sigma")) throw FormatError("covariance JSON: missing 'sigma'");
  Matrix sigma = json_matrix(doc["sigma"], "sigma");
  if (sigma.rows() != sigma.cols()) throw FormatError("sigma: matrix is not square");
  if (doc.contains("p") && doc["p"].get<long>() != sigma.rows()) throw FormatError("p: does not match sigma");
  std::optional<FactorParams> prov;
  std::optional<int> min_rank;
  if (doc.contains("provenance") && !doc["provenance"].is_null()) {
    const auto& pv = doc["provenance"];
    if (!pv.contains("psi") || !pv.contains("lambda")) throw FormatError("provenance: needs psi and lambda");
    const auto psi_v = pv["psi"].get<std::vector<double>>();
    Vector psi = Eigen::Map<const Vector>(psi_v.data(), static_cast<Eigen::Index>(psi_v.size()));
    Matrix lambda = pv["lambda"].empty() ? Matrix(psi.size(), 0) : json_matrix(pv["lambda"], "provenance.lambda");
    try {
      prov.emplace(std::move(psi), std::move(lambda));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("provenance: ") + e.what());
    }
    if (pv.contains("min_rank")) min_rank = pv["min_rank"].get<int>();
  }
  try {
    return FactorModelPoint(std::move(sigma), std::move(prov), min_rank);
  } catch (const std::exception& e) {
    throw FormatError(std::string("covariance JSON: ") + e.what());
  }
}

nlohmann::json point_to_json(const FactorModelPoint& point) {
  nlohmann::json doc;
  doc["p"] = point.p();
  doc["sigma"] = matrix_json(point.sigma0());
  if (point.provenance()) {
    nlohmann::json pv;
    const auto& psi = point.provenance()->psi();
    pv["psi"] = std::vector<double>(psi.data(), psi.data() + psi.size());
    pv["lambda"] = matrix_json(point.provenance()->lambda());
    if (point.min_rank()) pv["min_rank"] = *point.min_rank();
    doc["provenance"] = std::move(pv);
  }
  return doc;
}

FactorModelPoint read_point(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return read_point_json(text);
  try {
    return FactorModelPoint(read_matrix_csv(text));
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("covariance CSV: ") + e.what());
  }
}

std::string penalty_table_csv(const PenaltyTable& table) {
  std::string out = "p,k,r,value_num,value_den,mult,exactness\n";
  for (int s = 0; s <= table.k_max(); ++s) {
    for (int r = 0; r <= s; ++r) {
      const auto& c = table.at(s, r);
      out += std::to_string(table.p()) + "," + std::to_string(s) + "," + std::to_string(r) + "," +
             c.value().numerator_str() + "," + c.value().denominator_str() + "," +
             (c.mult() ? std::to_string(*c.mult()) : std::string()) + "," + to_string(c.exactness()) + "\n";
    }
  }
  return out;
}

nlohmann::json penalty_table_json(const PenaltyTable& table) {
  auto rows = nlohmann::json::array();
  for (int s = 0; s <= table.k_max(); ++s) {
    for (int r = 0; r <= s; ++r) {
      const auto& c = table.at(s, r);
      nlohmann::json row;
      row["p"] = table.p();
      row["k"] = s;
      row["r"] = r;
      row["value"] = c.value().str();
      row["mult"] = c.mult() ? nlohmann::json(*c.mult()) : nlohmann::json(nullptr);
      row["exactness"] = to_string(c.exactness());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string volume_csv(const VolumeEstimate& est) {
  std::string out = "epsilon,count,samples,fraction,stderr\n";
  for (std::size_t e = 0; e < est.eps.size(); ++e) {
    out += format_double(est.eps[e]) + "," + std::to_string(est.counts[e]) + "," + std::to_string(est.samples) +
           "," + format_double(est.fraction[e]) + "," + format_double(est.std_error[e]) + "\n";
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string svg_scatter_with_fit(const std::vector<PlotSeries>& series, const std::string& title,
                                 const std::string& x_label, const std::string& y_label) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 < x1)) { x0 -= 1; x1 += 1; }
  if (!(y0 < y1)) { y0 -= 1; y1 += 1; }
  const double pad_x = 0.05 * (x1 - x0), pad_y = 0.05 * (y1 - y0);
  x0 -= pad_x; x1 += pad_x; y0 -= pad_y; y1 += pad_y;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << std::round(xv * 100) / 100 << "</text>\n";
    svg << "<text x=\"" << L - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << std::round(yv * 100) / 100 << "</text>\n";
  }
  svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 5];
    for (const auto& [x, y] : s.points) {
      svg << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3\" fill=\"" << col << "\" fill-opacity=\"0.6\"/>\n";
    }
    const double xa = x0 + pad_x, xb = x1 - pad_x;
    svg << "<line x1=\"" << sx(xa) << "\" y1=\"" << sy(s.intercept + s.slope * xa) << "\" x2=\"" << sx(xb)
        << "\" y2=\"" << sy(s.intercept + s.slope * xb) << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << col << "\">"
        << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace rlctfa::io
