#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rlctfa/factor_model.hpp"
#include "rlctfa/learning_table.hpp"
#include "rlctfa/volume.hpp"

namespace rlctfa::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major, header-free CSV of a square matrix.
Matrix read_matrix_csv(const std::string& text);
std::string write_matrix_csv(const Matrix& m);

/// {"p": p, "sigma": [[...]], "provenance": {"psi": [...], "lambda": [[...]], "min_rank": r}}
/// provenance and min_rank are optional.
FactorModelPoint read_point_json(const std::string& text);
nlohmann::json point_to_json(const FactorModelPoint& point);

/// Picks the reader by content: a leading '{' means JSON, otherwise CSV.
FactorModelPoint read_point(const std::string& text);

/// "%.16e"
std::string format_double(double v);

/// Columns p,k,r,value_num,value_den,mult,exactness; mult is empty for bounds.
std::string penalty_table_csv(const PenaltyTable& table);
nlohmann::json penalty_table_json(const PenaltyTable& table);

/// Columns epsilon,count,samples,fraction,stderr.
std::string volume_csv(const VolumeEstimate& est);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

struct PlotSeries {
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
  std::string label;
};

/// Minimal scatter plot with one fitted line per series.
std::string svg_scatter_with_fit(const std::vector<PlotSeries>& series, const std::string& title,
                                 const std::string& x_label, const std::string& y_label);

}  // namespace rlctfa::io
