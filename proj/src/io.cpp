#include "tgbs/io.hpp"

#include <fstream>
#include <iostream>

namespace tgbs::io {

namespace {

Json real_matrix(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix parse_real_matrix(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw FormatError(std::string(what) + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw FormatError(std::string(what) + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw FormatError(std::string(what) + ": entries must be numbers");
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return M;
}

}  // namespace

Json to_json(const QuadratureState& state) {
  Json j;
  j["hbar"] = 2;
  j["ordering"] = "xxpp";
  j["modes"] = state.modes();
  j["V"] = real_matrix(state.covariance());
  j["r"] = std::vector<double>(state.means().data(), state.means().data() + state.means().size());
  return j;
}

QuadratureState state_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("state: expected a JSON object");
  for (const char* key : {"hbar", "ordering", "modes", "V", "r"})
    if (!j.contains(key)) throw FormatError(std::string("state: missing \"") + key + "\"");
  if (!j["hbar"].is_number() || j["hbar"].get<double>() != 2.0) throw FormatError("state: only hbar = 2 is supported");
  if (j["ordering"] != "xxpp") throw FormatError("state: only xxpp ordering is supported");
  if (!j["modes"].is_number_integer() || j["modes"].get<int>() < 1) throw FormatError("state: bad mode count");
  const int l = j["modes"].get<int>();
  const Matrix V = parse_real_matrix(j["V"], "state V");
  if (V.rows() != 2 * l || V.cols() != 2 * l) throw FormatError("state: V must be 2l x 2l");
  if (!j["r"].is_array() || j["r"].size() != static_cast<std::size_t>(2 * l))
    throw FormatError("state: r must have length 2l");
  Vector r(2 * l);
  for (int i = 0; i < 2 * l; ++i) {
    if (!j["r"][i].is_number()) throw FormatError("state: r entries must be numbers");
    r(i) = j["r"][i].get<double>();
  }
  try {
    return QuadratureState(V, r);
  } catch (const std::invalid_argument& e) {
    // Shapes are checked above, so this is a symmetry failure.
    throw NumericalError(std::string("state: ") + e.what());
  }
}

Json to_json(const ComplexMatrix& M) {
  Json j;
  j["re"] = real_matrix(M.real());
  j["im"] = real_matrix(M.imag());
  return j;
}

ComplexMatrix complex_matrix_from_json(const Json& j) {
  if (j.is_array()) return parse_real_matrix(j, "matrix").cast<Complex>();
  if (!j.is_object() || !j.contains("re")) throw FormatError("matrix: expected {\"re\": ..., \"im\": ...}");
  const Matrix re = parse_real_matrix(j["re"], "matrix re");
  Matrix im = Matrix::Zero(re.rows(), re.cols());
  if (j.contains("im")) im = parse_real_matrix(j["im"], "matrix im");
  if (im.rows() != re.rows() || im.cols() != re.cols()) throw FormatError("matrix: re and im shapes differ");
  ComplexMatrix M(re.rows(), re.cols());
  M.real() = re;
  M.imag() = im;
  return M;
}

Json to_json(const ClickPattern& pattern) { return Json(pattern.clicked()); }

Json to_json(const ValidationReport& report) {
  Json j;
  j["physical"] = report.physical;
  j["symmetry_defect"] = report.symmetry_defect;
  j["min_uncertainty_eigenvalue"] = report.min_uncertainty_eigenvalue;
  j["sigma_condition"] = report.sigma_condition;
  j["covariance_condition"] = report.covariance_condition;
  j["warnings"] = report.warnings;
  return j;
}

Json to_json(const ThresholdDistribution& dist) {
  Json j = Json::array();
  for (const auto& [pattern, p] : dist.table) j.push_back({{"pattern", to_json(pattern)}, {"p", p}});
  return j;
}

Json to_json(const CollisionReport& report) {
  Json j;
  j["epsilon"] = report.epsilon;
  j["bound"] = report.bound;
  j["mean_photons"] = report.moments.mean;
  j["second_moment"] = report.moments.second_moment;
  Json gaps = Json::array();
  for (const auto& [pattern, g] : report.gaps) gaps.push_back({{"pattern", to_json(pattern)}, {"gap", g}});
  j["gaps"] = std::move(gaps);
  if (report.cutoff_check) {
    j["cutoff_check"] = {{"cutoff", report.cutoff_check->cutoff},
                         {"total_variation", report.cutoff_check->total_variation},
                         {"tail", report.cutoff_check->tail}};
  }
  return j;
}

Json to_json(const HaarCollisionResult& result) {
  Json j;
  j["epsilons"] = result.epsilons;
  j["mean"] = result.mean;
  j["standard_error"] = result.standard_error;
  j["bound"] = result.bound;
  j["below_bound"] = result.below_bound;
  return j;
}

Json to_json(const SampleRecord& record, bool trace) {
  Json j;
  j["pattern"] = to_json(record.pattern);
  j["seed"] = record.seed;
  j["substream"] = record.substream;
  if (record.approximate) j["approximate"] = true;
  if (trace) {
    j["order"] = record.order;
    j["no_click_probabilities"] = record.no_click_probabilities;
    j["branch_counts"] = record.branch_counts;
  }
  return j;
}

Json to_json(const PipelineRecord& record) {
  Json j;
  j["pattern"] = to_json(record.pattern);
  j["seed"] = record.seed;
  j["substream"] = record.substream;
  if (!record.cv.empty()) {
    Json cv = Json::array();
    for (const auto& o : record.cv)
      cv.push_back({{"mode", o.mode}, {"povm", o.povm}, {"outcome", {o.outcome(0), o.outcome(1)}}});
    j["cv"] = std::move(cv);
  }
  return j;
}

Json to_json(const GaussianMixture& mixture) {
  Json j;
  j["hbar"] = 2;
  j["ordering"] = "xxpp";
  j["labels"] = mixture.labels();
  Json history = Json::array();
  for (const auto& [mode, click] : mixture.history()) history.push_back({{"mode", mode}, {"click", click}});
  j["history"] = std::move(history);
  Json branches = Json::array();
  for (const auto& b : mixture.branches()) {
    Json state = to_json(b.state);
    branches.push_back({{"weight", b.weight}, {"V", state["V"]}, {"r", state["r"]}});
  }
  j["branches"] = std::move(branches);
  return j;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

QuadratureState read_state(const std::filesystem::path& path) { return state_from_json(read_json(path)); }

ComplexMatrix read_complex_matrix(const std::filesystem::path& path) {
  return complex_matrix_from_json(read_json(path));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed: " + path.string());
}

std::string line(const Json& j) { return j.dump() + "\n"; }

std::string array_lines(const Json& array) {
  std::string text = "[";
  for (std::size_t i = 0; i < array.size(); ++i) text += (i ? ",\n " : "\n ") + array[i].dump();
  return text + "\n]\n";
}

}  // namespace tgbs::io
