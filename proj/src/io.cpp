#include "ratiosparse/io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace ratiosparse::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

double parse_double(std::string_view field, const fs::path& path, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  std::string tmp(field);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) {
    throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line) +
                                       ": malformed number '" + tmp + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line) + ": non-finite value");
  }
  return v;
}

std::vector<std::vector<double>> read_rows(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), path, lineno));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_csv(std::ostream& os, const MatrixRef& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      if (j) os << ',';
      os << format_double(A(i, j));
    }
    os << '\n';
  }
}

void write_vector_csv(std::ostream& os, const VectorRef& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) os << format_double(v[i]) << '\n';
}

Matrix read_matrix_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  if (rows.empty()) throw Error(ErrorCode::kParse, path.string() + ": empty matrix");
  const auto cols = rows.front().size();
  Matrix A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) {
      throw Error(ErrorCode::kParse, path.string() + ": ragged row " + std::to_string(i + 1));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return A;
}

Vector read_vector_csv(const fs::path& path) {
  const auto rows = read_rows(path);
  Vector v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) {
      throw Error(ErrorCode::kParse, path.string() + ": expected one value per line");
    }
    v[static_cast<Eigen::Index>(i)] = rows[i][0];
  }
  return v;
}

void save_instance(const ProblemInstance& instance, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  json header;
  header["format"] = kInstanceFormat;
  header["id"] = instance.id();
  header["m"] = instance.rows();
  header["n"] = instance.cols();
  header["noise_radius"] = instance.noise_radius();
  header["files"] = {{"A", "A.csv"}, {"b", "b.csv"}};
  if (const auto& gt = instance.ground_truth()) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < gt->size(); ++i) {
      if ((*gt)[i] != 0.0) support.push_back(i);
    }
    header["ground_truth_support"] = support;
    header["files"]["ground_truth"] = "x_star.csv";
    auto out = open_out(dir / "x_star.csv");
    write_vector_csv(out, *gt);
  } else {
    header["ground_truth_support"] = nullptr;
  }
  {
    auto out = open_out(dir / "A.csv");
    write_matrix_csv(out, instance.A());
  }
  {
    auto out = open_out(dir / "b.csv");
    write_vector_csv(out, instance.b());
  }
  auto out = open_out(dir / "instance.json");
  out << header.dump(2) << '\n';
}

ProblemInstance load_instance(const fs::path& dir) {
  json header;
  try {
    auto in = open_in(dir / "instance.json");
    header = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, (dir / "instance.json").string() + ": " + e.what());
  }

  try {
    if (header.value("format", std::string{}) != kInstanceFormat) {
      throw Error(ErrorCode::kParse, "instance.json: unknown or missing format tag");
    }
    const auto m = header.at("m").get<Eigen::Index>();
    const auto n = header.at("n").get<Eigen::Index>();
    const auto& files = header.at("files");
    Matrix A = read_matrix_csv(dir / files.at("A").get<std::string>());
    Vector b = read_vector_csv(dir / files.at("b").get<std::string>());
    if (A.rows() != m || A.cols() != n || b.size() != m) {
      throw Error(ErrorCode::kParse, "instance: CSV dimensions disagree with header");
    }
    std::optional<Vector> gt;
    if (files.contains("ground_truth")) {
      gt = read_vector_csv(dir / files.at("ground_truth").get<std::string>());
      if (gt->size() != n) throw Error(ErrorCode::kParse, "instance: ground truth length mismatch");
      const auto& support = header.at("ground_truth_support");
      if (!support.is_null()) {
        std::vector<Eigen::Index> expected;
        for (Eigen::Index i = 0; i < n; ++i) {
          if ((*gt)[i] != 0.0) expected.push_back(i);
        }
        if (support.get<std::vector<Eigen::Index>>() != expected) {
          throw Error(ErrorCode::kParse, "instance: ground_truth_support disagrees with x_star.csv");
        }
      }
    }
    return ProblemInstance(std::move(A), std::move(b), std::move(gt),
                           header.value("noise_radius", 0.0), header.value("id", std::string{}));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "instance.json: " + std::string(e.what()));
  }
}

}  // namespace ratiosparse::io
