#include "hyperpc/cloud_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hyperpc/errors.hpp"

namespace hyperpc {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc{} && res.ptr == token.data() + token.size() && std::isfinite(out);
}

PointCloud read_xyz(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Point3> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;
    if (tokens.size() != 3) {
      throw ParseError(path.string(), line_no, "expected 3 coordinates, found " + std::to_string(tokens.size()));
    }
    Point3 p;
    for (int k = 0; k < 3; ++k) {
      if (!parse_double(tokens[k], p[k])) {
        throw ParseError(path.string(), line_no, "invalid coordinate '" + std::string(tokens[k]) + "'");
      }
    }
    points.push_back(p);
  }
  if (points.empty()) throw ParseError(path.string(), line_no, "file contains no points");
  return PointCloud(std::move(points));
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud, const std::string& header_comment) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  for (const auto& p : cloud) {
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z()) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  auto in = open_input(path);
  const std::string file = path.string();
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError(file, line_no, "missing 'ply' magic");

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (true) {
    if (!next_line()) throw ParseError(file, line_no, "unterminated header");
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii") throw ParseError(file, line_no, "only ascii PLY is supported");
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(file, line_no, "malformed element line");
      Element e;
      e.name = std::string(tok[1]);
      double count = 0.0;
      if (!parse_double(tok[2], count) || count < 0 || count != std::floor(count)) {
        throw ParseError(file, line_no, "invalid element count");
      }
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(file, line_no, "property before any element");
      if (tok.size() >= 2 && tok[1] == "list") {
        elements.back().has_list = true;
        elements.back().properties.push_back(tok.size() >= 5 ? std::string(tok[4]) : std::string());
      } else if (tok.size() == 3) {
        elements.back().properties.push_back(std::string(tok[2]));
      } else {
        throw ParseError(file, line_no, "malformed property line");
      }
    }
    // comment / obj_info lines are ignored
  }
  if (!ascii) throw ParseError(file, line_no, "missing 'format ascii' line");

  std::vector<Point3> points;
  bool saw_vertex = false;
  for (const auto& e : elements) {
    const bool is_vertex = e.name == "vertex";
    int ix = -1, iy = -1, iz = -1;
    if (is_vertex) {
      saw_vertex = true;
      if (e.has_list) throw ParseError(file, line_no, "list properties on vertex are not supported");
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        if (e.properties[i] == "x") ix = static_cast<int>(i);
        if (e.properties[i] == "y") iy = static_cast<int>(i);
        if (e.properties[i] == "z") iz = static_cast<int>(i);
      }
      if (ix < 0 || iy < 0 || iz < 0) throw ParseError(file, line_no, "vertex element lacks x, y, z");
    } else if (warnings != nullptr) {
      warnings->push_back(file + ": skipped element '" + e.name + "' (" + std::to_string(e.count) + " rows)");
    }
    for (std::size_t r = 0; r < e.count; ++r) {
      if (!next_line()) throw ParseError(file, line_no, "unexpected end of data in element '" + e.name + "'");
      if (!is_vertex) continue;
      const auto tok = split_ws(line);
      if (tok.size() != e.properties.size()) {
        throw ParseError(file, line_no,
                         "expected " + std::to_string(e.properties.size()) + " values, found " +
                             std::to_string(tok.size()));
      }
      Point3 p;
      const int idx[3] = {ix, iy, iz};
      for (int k = 0; k < 3; ++k) {
        if (!parse_double(tok[static_cast<std::size_t>(idx[k])], p[k])) {
          throw ParseError(file, line_no, "invalid coordinate '" + std::string(tok[static_cast<std::size_t>(idx[k])]) + "'");
        }
      }
      points.push_back(p);
    }
  }
  if (!saw_vertex || points.empty()) throw ParseError(file, line_no, "no vertices");
  return PointCloud(std::move(points));
}

PointCloud read_cloud(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  if (path.extension() == ".ply") return read_ply(path, warnings);
  return read_xyz(path);
}

}  // namespace hyperpc
