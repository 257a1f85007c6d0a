#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pdna/error.hpp"
#include "pdna/map.hpp"

namespace pdna {

namespace {

constexpr double kCanvas = 640;
constexpr double kCenter = 320;
constexpr double kRadius = 240;

std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double sx(double x) { return kCenter + kRadius * x; }
double sy(double y) { return kCenter - kRadius * y; }

// Marker shape cycles with the group index; colour comes from the palette.
std::string marker_svg(std::size_t group, double x, double y) {
  const std::string color = map_palette()[group % map_palette().size()];
  const double r = 4.5;
  std::ostringstream o;
  switch (group % 5) {
    case 0:
      o << "<circle cx=\"" << fmt("%.3f", x) << "\" cy=\"" << fmt("%.3f", y) << "\" r=\"" << r << "\"";
      break;
    case 1:
      o << "<rect x=\"" << fmt("%.3f", x - r) << "\" y=\"" << fmt("%.3f", y - r) << "\" width=\"" << 2 * r
        << "\" height=\"" << 2 * r << "\"";
      break;
    case 2:
      o << "<polygon points=\"" << fmt("%.3f", x) << ',' << fmt("%.3f", y - r) << ' ' << fmt("%.3f", x - r) << ','
        << fmt("%.3f", y + r) << ' ' << fmt("%.3f", x + r) << ',' << fmt("%.3f", y + r) << "\"";
      break;
    case 3:
      o << "<polygon points=\"" << fmt("%.3f", x) << ',' << fmt("%.3f", y - r) << ' ' << fmt("%.3f", x + r) << ','
        << fmt("%.3f", y) << ' ' << fmt("%.3f", x) << ',' << fmt("%.3f", y + r) << ' ' << fmt("%.3f", x - r) << ','
        << fmt("%.3f", y) << "\"";
      break;
    default:
      o << "<path d=\"M" << fmt("%.3f", x - r) << ',' << fmt("%.3f", y - r) << " L" << fmt("%.3f", x + r) << ','
        << fmt("%.3f", y + r) << " M" << fmt("%.3f", x - r) << ',' << fmt("%.3f", y + r) << " L" << fmt("%.3f", x + r)
        << ',' << fmt("%.3f", y - r) << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
      break;
  }
  o << " fill=\"" << color << "\" fill-opacity=\"0.75\"/>";
  return o.str();
}

}  // namespace

const std::vector<std::string>& map_palette() {
  static const std::vector<std::string> palette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return palette;
}

PolytopeLayout layout_groups(const std::vector<std::string>& groups, const std::optional<std::vector<std::string>>& order) {
  PolytopeLayout layout;
  layout.groups = groups;
  const std::size_t n = groups.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "layout needs at least one group");
  if (order) {
    if (order->size() != n)
      throw Error(ErrorCode::InvalidPermutation,
                  "order lists " + std::to_string(order->size()) + " groups, dataset has " + std::to_string(n));
    std::vector<bool> used(n, false);
    for (const auto& id : *order) {
      std::size_t g = 0;
      while (g < n && groups[g] != id) ++g;
      if (g == n) throw Error(ErrorCode::InvalidPermutation, "unknown group '" + id + "' in order");
      if (used[g]) throw Error(ErrorCode::InvalidPermutation, "group '" + id + "' repeated in order");
      used[g] = true;
      layout.order.push_back(g);
    }
  } else {
    for (std::size_t g = 0; g < n; ++g) layout.order.push_back(g);
  }
  layout.vertices.resize(static_cast<Eigen::Index>(n), 2);
  for (std::size_t s = 0; s < n; ++s) {
    const double angle = std::numbers::pi / 2 + 2 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(n);
    const auto g = static_cast<Eigen::Index>(layout.order[s]);
    layout.vertices(g, 0) = std::cos(angle);
    layout.vertices(g, 1) = std::sin(angle);
  }
  return layout;
}

PoliticalMapPoint map_point(const PolytopeLayout& layout, const DnaVector<double>& dna, const std::string& nominal_group) {
  if (static_cast<std::size_t>(dna.pi.size()) != layout.size())
    throw Error(ErrorCode::OrderMismatch, "DNA of '" + dna.voter_id + "' has " + std::to_string(dna.pi.size()) +
                                              " entries, layout has " + std::to_string(layout.size()) + " groups");
  PoliticalMapPoint pt;
  pt.voter_id = dna.voter_id;
  pt.gamma = layout.vertices.transpose() * dna.pi;
  pt.nominal_group = nominal_group;
  pt.dna = dna.pi;
  for (std::size_t g = 0; g < layout.size(); ++g)
    if (layout.groups[g] == nominal_group) pt.marker = g;
  return pt;
}

PoliticalMapPoint map_point(const PolytopeLayout& layout, const DnaVector<double>& dna,
                            const std::vector<std::string>& dna_groups, const std::string& nominal_group) {
  if (dna_groups != layout.groups) throw Error(ErrorCode::OrderMismatch, "DNA group order differs from the layout");
  return map_point(layout, dna, nominal_group);
}

std::string map_svg(const std::vector<PoliticalMapPoint>& points, const PolytopeLayout& layout, const MapCaption& caption) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\"" << kCanvas + 60
    << "\" viewBox=\"0 0 " << kCanvas << ' ' << kCanvas + 60 << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  o << "<polygon class=\"polytope\" points=\"";
  for (std::size_t s = 0; s < layout.size(); ++s) {
    const auto g = static_cast<Eigen::Index>(layout.order[s]);
    o << (s ? " " : "") << fmt("%.3f", sx(layout.vertices(g, 0))) << ',' << fmt("%.3f", sy(layout.vertices(g, 1)));
  }
  o << "\" fill=\"none\" stroke=\"#999\" stroke-width=\"1\"/>\n";

  for (std::size_t g = 0; g < layout.size(); ++g) {
    const double vx = layout.vertices(static_cast<Eigen::Index>(g), 0);
    const double vy = layout.vertices(static_cast<Eigen::Index>(g), 1);
    o << "<text class=\"vertex\" x=\"" << fmt("%.3f", sx(1.12 * vx)) << "\" y=\"" << fmt("%.3f", sy(1.12 * vy) + 5)
      << "\" text-anchor=\"middle\" font-size=\"15\" fill=\"" << map_palette()[g % map_palette().size()] << "\">"
      << xml_escape(layout.groups[g]) << "</text>\n";
  }

  o << "<g class=\"points\">\n";
  for (const auto& p : points) {
    o << "<g data-voter=\"" << xml_escape(p.voter_id) << "\" data-group=\"" << xml_escape(p.nominal_group) << "\">"
      << marker_svg(p.marker, sx(p.gamma.x()), sy(p.gamma.y())) << "<title>" << xml_escape(p.voter_id) << " ("
      << xml_escape(p.nominal_group) << ")</title></g>\n";
  }
  o << "</g>\n";

  std::ostringstream cap;
  cap << (caption.method.empty() ? std::string("Political map") : caption.method);
  if (caption.k > 0) cap << ", k=" << caption.k;
  if (caption.p) cap << ", p=" << *caption.p;
  cap << ", E-Var=" << fmt("%.2f", 100 * caption.expressed_variance) << "%";
  o << "<text class=\"caption\" x=\"" << kCenter << "\" y=\"" << kCanvas + 35
    << "\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(cap.str()) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string map_csv(const std::vector<PoliticalMapPoint>& points, const PolytopeLayout& layout) {
  std::ostringstream o;
  o << "voter_id,gamma_x,gamma_y,nominal_group";
  for (const auto& g : layout.groups) o << ",pi_" << csv_field(g);
  o << '\n';
  for (const auto& p : points) {
    o << csv_field(p.voter_id) << ',' << fmt("%.17g", p.gamma.x()) << ',' << fmt("%.17g", p.gamma.y()) << ','
      << csv_field(p.nominal_group);
    for (Eigen::Index g = 0; g < p.dna.size(); ++g) o << ',' << fmt("%.17g", p.dna(g));
    o << '\n';
  }
  return o.str();
}

std::vector<PoliticalMapPoint> parse_map_csv(const std::string& text, const PolytopeLayout& layout) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedRecord, "map CSV: missing header");
  const auto header = split_line(line);
  if (header.size() < 4 || header[0] != "voter_id" || header[1] != "gamma_x" || header[2] != "gamma_y" ||
      header[3] != "nominal_group")
    throw Error(ErrorCode::MalformedRecord, "map CSV: unexpected header");
  const std::size_t n_dna = header.size() - 4;
  std::vector<PoliticalMapPoint> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != header.size())
      throw Error(ErrorCode::MalformedRecord, "map CSV line " + std::to_string(lineno) + ": wrong field count");
    PoliticalMapPoint p;
    p.voter_id = f[0];
    try {
      p.gamma = Eigen::Vector2d(std::stod(f[1]), std::stod(f[2]));
      p.dna.resize(static_cast<Eigen::Index>(n_dna));
      for (std::size_t g = 0; g < n_dna; ++g) p.dna(static_cast<Eigen::Index>(g)) = std::stod(f[4 + g]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::MalformedRecord, "map CSV line " + std::to_string(lineno) + ": bad number");
    }
    p.nominal_group = f[3];
    for (std::size_t g = 0; g < layout.size(); ++g)
      if (layout.groups[g] == p.nominal_group) p.marker = g;
    points.push_back(std::move(p));
  }
  return points;
}

void render_map(const std::vector<PoliticalMapPoint>& points, const PolytopeLayout& layout,
                const std::filesystem::path& out, MapFormat format, const MapCaption& caption) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no points to render");
  const std::string body = format == MapFormat::Svg ? map_svg(points, layout, caption) : map_csv(points, layout);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + out.string());
  f << body;
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + out.string());
}

}  // namespace pdna
