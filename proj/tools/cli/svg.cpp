#include "svg.hpp"

#include <array>
#include <cstdio>
#include <map>
#include <sstream>

namespace hyperpc::cli {
namespace {

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

void marker(std::ostringstream& os, Role role, double cx, double cy, const char* color, double half,
            const std::string& id = {}) {
  const std::string tag = id.empty() ? std::string() : " data-id=\"" + xml_escape(id) + "\"";
  if (role == Role::Whole) {
    os << "<circle" << tag << " cx=\"" << fixed(cx) << "\" cy=\"" << fixed(cy) << "\" r=\"" << fixed(half) << "\" fill=\""
       << color << "\" fill-opacity=\"0.85\"/>\n";
  } else {
    os << "<rect" << tag << " x=\"" << fixed(cx - half) << "\" y=\"" << fixed(cy - half) << "\" width=\"" << fixed(2 * half)
       << "\" height=\"" << fixed(2 * half) << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
  }
}

}  // namespace

std::string render_disk_svg(const std::vector<DiskPoint>& points, const std::vector<std::string>& categories,
                            const std::string& description) {
  std::map<std::string, const char*> color;
  for (std::size_t i = 0; i < categories.size(); ++i) color[categories[i]] = kPalette[i % kPalette.size()];
  const double c = kSvgSize / 2.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgSize << "\" height=\"" << kSvgSize
     << "\" viewBox=\"0 0 " << kSvgSize << ' ' << kSvgSize << "\">\n";
  os << "<desc>" << xml_escape(description) << "</desc>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<circle id=\"boundary\" cx=\"" << fixed(c) << "\" cy=\"" << fixed(c) << "\" r=\"" << fixed(kDiskRadiusPx)
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  os << "<g id=\"samples\">\n";
  for (const auto& p : points) {
    const auto it = color.find(p.category);
    const char* col = it == color.end() ? "#000000" : it->second;
    // SVG y grows downwards.
    marker(os, p.role, c + kDiskRadiusPx * p.x, c - kDiskRadiusPx * p.y, col, 4.0, p.id);
  }
  os << "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"14\">\n";
  double y = 24.0;
  for (const auto& name : categories) {
    os << "<rect x=\"12\" y=\"" << fixed(y - 10) << "\" width=\"12\" height=\"12\" fill=\"" << color[name] << "\"/>\n";
    os << "<text x=\"30\" y=\"" << fixed(y) << "\">" << xml_escape(name) << "</text>\n";
    y += 20.0;
  }
  marker(os, Role::Whole, 18.0, y - 4, "#000000", 5.0);
  os << "<text x=\"30\" y=\"" << fixed(y) << "\">whole</text>\n";
  y += 20.0;
  marker(os, Role::Part, 18.0, y - 4, "#000000", 5.0);
  os << "<text x=\"30\" y=\"" << fixed(y) << "\">part</text>\n";
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace hyperpc::cli
