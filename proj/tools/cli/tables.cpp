#include "tables.hpp"

#include <fstream>
#include <sstream>

#include "hyperpc/cloud_io.hpp"
#include "hyperpc/errors.hpp"

namespace hyperpc::cli {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

DistanceMatrix read_distance_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string file = path.string();
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = strip_comment(line);
    if (blank(body)) continue;
    std::istringstream ss(body);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) {
      double v = 0.0;
      if (!parse_double(tok, v)) throw ParseError(file, lineno, "not a finite number: '" + tok + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(file, lineno, "expected " + std::to_string(rows.front().size()) + " entries, got " +
                                         std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(file, lineno, "empty distance matrix");
  if (rows.size() != rows.front().size()) {
    throw ParseError(file, lineno, "matrix is " + std::to_string(rows.size()) + "x" +
                                       std::to_string(rows.front().size()) + ", not square");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  try {
    return DistanceMatrix(std::move(d));
  } catch (const InvalidInput& e) {
    throw ParseError(file, 0, e.what());
  }
}

std::vector<Vec> read_embedding_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  const std::string file = path.string();
  std::string line;
  std::size_t lineno = 0;
  std::size_t first_coord = 0;
  std::size_t dim = 0;
  bool header = false;
  std::vector<Vec> points;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line) || line.front() == '#') continue;
    const auto cells = split(line, ',');
    if (!header) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] == "c0") first_coord = k;
      }
      if (cells.empty() || cells.front() != "id" || first_coord == 0) {
        throw ParseError(file, lineno, "expected an embedding header 'id,...,c0,...'");
      }
      dim = cells.size() - first_coord;
      header = true;
      continue;
    }
    if (cells.size() != first_coord + dim) {
      throw ParseError(file, lineno, "expected " + std::to_string(first_coord + dim) + " columns, got " +
                                         std::to_string(cells.size()));
    }
    Vec v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_double(cells[first_coord + k], v[static_cast<Eigen::Index>(k)])) {
        throw ParseError(file, lineno, "not a finite number: '" + cells[first_coord + k] + "'");
      }
    }
    points.push_back(std::move(v));
  }
  if (!header) throw ParseError(file, lineno, "missing header line");
  return points;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<LossReport>& curve,
                    const std::string& config_json) {
  auto out = open_out(path);
  out << "# " << config_json << '\n' << "epoch,l_z,l_t,total\n";
  for (std::size_t e = 0; e < curve.size(); ++e) {
    out << e + 1 << ',' << format_double(curve[e].l_z) << ',' << format_double(curve[e].l_t) << ','
        << format_double(curve[e].total) << '\n';
  }
  finish(out, path);
}

void write_embedding_csv(const std::filesystem::path& path, const EmbeddingState& state,
                         const HierarchyManifest& manifest, const std::string& config_json) {
  auto out = open_out(path);
  out << "# " << config_json << '\n' << "id,category,role,n_points,hnorm";
  for (Eigen::Index k = 0; k < state.dim(); ++k) out << ",c" << k;
  out << '\n';
  for (std::size_t i = 0; i < state.size(); ++i) {
    const auto& s = manifest.samples[i];
    const BallPoint p = state.ball_point(i);
    out << s.id << ',' << s.category << ',' << to_string(s.role) << ',' << s.n_points << ','
        << format_double(hyperbolic_norm(p));
    for (Eigen::Index k = 0; k < p.dim(); ++k) out << ',' << format_double(p.coords()[k]);
    out << '\n';
  }
  finish(out, path);
}

void write_disk_csv(const std::filesystem::path& path, const std::vector<DiskPoint>& disk,
                    const std::string& config_json) {
  auto out = open_out(path);
  out << "# " << config_json << '\n' << "id,category,role,n_points,hnorm,x,y\n";
  for (const auto& p : disk) {
    out << p.id << ',' << p.category << ',' << to_string(p.role) << ',' << p.n_points << ','
        << format_double(p.hnorm) << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
  }
  finish(out, path);
}

}  // namespace hyperpc::cli
