#include "iqccert/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iqccert/util.hpp"

namespace iqccert {

using nlohmann::json;

std::string certificate_to_json(const Certificate& cert) {
  json j;
  j["n"] = cert.n;
  j["eta"] = cert.eta;
  j["beta"] = cert.beta;
  j["w_digest"] = cert.w_digest;
  std::vector<double> p;
  p.reserve(static_cast<size_t>(cert.p.order()) * cert.p.order());
  for (int i = 0; i < cert.p.order(); ++i)
    for (int k = 0; k < cert.p.order(); ++k) p.push_back(cert.p.at(i, k));
  j["P"] = p;
  j["lambda"] = cert.lambda;
  j["margins"] = {{"min_eig_P", cert.margins.min_eig_p},
                  {"max_eig_lhs", cert.margins.max_eig_lhs},
                  {"tol", cert.margins.tol}};
  return j.dump(2) + "\n";
}

Certificate certificate_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("certificate JSON parse error: ") + e.what());
  }
  try {
    Certificate cert;
    cert.n = j.at("n").get<int>();
    cert.eta = j.at("eta").get<double>();
    cert.beta = j.at("beta").get<double>();
    cert.w_digest = j.at("w_digest").get<std::string>();
    const std::vector<double> p = j.at("P").get<std::vector<double>>();
    int order = 0;
    while (static_cast<size_t>(order) * order < p.size()) ++order;
    if (static_cast<size_t>(order) * order != p.size() || order == 0) {
      throw IoError("certificate JSON: P length is not a perfect square");
    }
    Matrix pm(order, order);
    for (int i = 0; i < order; ++i)
      for (int k = 0; k < order; ++k) pm(i, k) = p[static_cast<size_t>(i) * order + k];
    cert.p = SymMatrix::symmetrize(pm);
    cert.lambda = j.at("lambda").get<std::vector<double>>();
    const json& m = j.at("margins");
    cert.margins.min_eig_p = m.at("min_eig_P").get<double>();
    cert.margins.max_eig_lhs = m.at("max_eig_lhs").get<double>();
    cert.margins.tol = m.at("tol").get<double>();
    return cert;
  } catch (const json::exception& e) {
    throw IoError(std::string("certificate JSON schema error: ") + e.what());
  }
}

void save_certificate(const std::string& path, const Certificate& cert) {
  write_text_file(path, certificate_to_json(cert));
}

Certificate load_certificate(const std::string& path) {
  return certificate_from_json(read_text_file(path));
}

namespace {

std::vector<std::vector<double>> parse_centers(const json& c, int n, int dim) {
  std::vector<std::vector<double>> centers;
  centers.reserve(n);
  if (!c.is_array() || static_cast<int>(c.size()) != n) {
    throw IoError("objective JSON: \"c\" must be an array with one entry per agent");
  }
  for (const json& ci : c) {
    if (ci.is_number()) {
      if (dim != 1) throw IoError("objective JSON: scalar centers require d = 1");
      centers.push_back({ci.get<double>()});
    } else if (ci.is_array()) {
      if (static_cast<int>(ci.size()) != dim) {
        throw IoError("objective JSON: center length does not match d");
      }
      centers.push_back(ci.get<std::vector<double>>());
    } else {
      throw IoError("objective JSON: centers must be numbers or arrays");
    }
  }
  return centers;
}

}  // namespace

ObjectiveFamily objective_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw IoError(std::string("objective JSON parse error: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    const int n = j.at("n").get<int>();
    const int dim = j.value("d", 1);
    if (n < 1 || dim < 1) throw IoError("objective JSON: n and d must be positive");
    const json& params = j.at("params");
    const auto centers = parse_centers(params.at("c"), n, dim);

    auto coeffs = [&](const char* name) {
      const std::vector<double> v = params.at(name).get<std::vector<double>>();
      if (static_cast<int>(v.size()) != n) {
        throw IoError(std::string("objective JSON: \"") + name + "\" must have one entry per agent");
      }
      return v;
    };

    if (kind == "quadratic") return quadratic_family(coeffs("a"), centers);
    if (kind == "huber") return huber_family(coeffs("delta"), centers);
    if (kind == "logistic") return logistic_family(coeffs("w"), centers);
    throw IoError("objective JSON: unknown kind \"" + kind + "\"");
  } catch (const json::exception& e) {
    throw IoError(std::string("objective JSON schema error: ") + e.what());
  }
}

ObjectiveFamily load_objective(const std::string& path) {
  return objective_from_json(read_text_file(path));
}

Matrix load_matrix_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    int col = 0;
    while (std::getline(cells, cell, ',')) {
      ++col;
      try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() &&
               (cell[used] == ' ' || cell[used] == '\t' || cell[used] == '\r')) {
          ++used;
        }
        if (used != cell.size()) throw std::invalid_argument("trailing characters");
        row.push_back(v);
      } catch (const std::exception&) {
        throw IoError(path + ": cannot parse number at row " + std::to_string(lineno) +
                      ", column " + std::to_string(col));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path + ": row " + std::to_string(lineno) + " has " +
                    std::to_string(row.size()) + " columns, expected " +
                    std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": no data rows");
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::string trajectory_csv(const Trajectory& traj, const DiagnosticsReport* diag,
                           const std::vector<double>& gap_running_avg) {
  std::string csv = "k";
  auto block_header = [&](const char* name) {
    for (int i = 1; i <= traj.n; ++i) {
      for (int c = 1; c <= traj.dim; ++c) {
        csv += ',';
        csv += name;
        csv += '_';
        csv += std::to_string(i);
        if (traj.dim > 1) {
          csv += '_';
          csv += std::to_string(c);
        }
      }
    }
  };
  block_header("x");
  block_header("s");
  block_header("u");
  csv += ",gap_running_avg,dissipation_residual,iqc_value,bound_ratio\n";

  const std::string nan = "nan";
  for (int k = 0; k <= traj.steps; ++k) {
    csv += std::to_string(k);
    for (double v : traj.x[k]) {
      csv += ',';
      csv += format_g12(v);
    }
    for (double v : traj.s[k]) {
      csv += ',';
      csv += format_g12(v);
    }
    for (double v : traj.u[k]) {
      csv += ',';
      csv += format_g12(v);
    }
    csv += ',';
    csv += format_g12(gap_running_avg[k]);
    csv += ',';
    csv += diag != nullptr ? format_g12(diag->dissipation_residual[k]) : nan;
    csv += ',';
    csv += diag != nullptr ? format_g12(diag->iqc_value[k]) : nan;
    csv += ',';
    csv += diag != nullptr ? format_g12(diag->bound_ratio[k]) : nan;
    csv += '\n';
  }
  return csv;
}

}  // namespace iqccert
