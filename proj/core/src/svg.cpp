#include "neurotopo/svg.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "neurotopo/error.hpp"

namespace neurotopo::svg {

namespace {

constexpr double kWidth = 480.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 48.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

// Fixed 2-decimal coordinates keep the files stable and readable.
std::string num(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::fixed, 2);
  if (ec != std::errc{}) return "0";
  std::string s(buf.data(), ptr);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
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

struct Axis {
  double lo;
  double hi;
  double pixel_lo;
  double pixel_hi;
  double map(double v) const {
    const double span = hi > lo ? hi - lo : 1.0;
    return pixel_lo + (v - lo) / span * (pixel_hi - pixel_lo);
  }
};

std::string open(double width, double height) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
    << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return s.str();
}

void frame(std::ostringstream& s, std::string_view xlabel, std::string_view ylabel) {
  s << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\""
    << num(kWidth - 2 * kMargin) << "\" height=\"" << num(kHeight - 2 * kMargin)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 12)
    << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel) << "</text>\n";
  s << "<text x=\"14\" y=\"" << num(kHeight / 2) << "\" text-anchor=\"middle\" font-size=\"12\""
    << " transform=\"rotate(-90 14 " << num(kHeight / 2) << ")\">" << escape(ylabel)
    << "</text>\n";
}

void legend(std::ostringstream& s, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kMargin + 14.0 * double(i) + 10.0;
    s << "<circle cx=\"" << num(kMargin + 10) << "\" cy=\"" << num(y) << "\" r=\"4\" fill=\""
      << kPalette[i % kPalette.size()] << "\"/>\n";
    s << "<text x=\"" << num(kMargin + 18) << "\" y=\"" << num(y + 4)
      << "\" font-size=\"11\">" << escape(names[i]) << "</text>\n";
  }
}

}  // namespace

std::string render_diagram(const PersistenceDiagram& diagram) {
  double hi = 0.0;
  bool has_inf = false;
  for (const auto& p : diagram.pairs) {
    hi = std::max(hi, p.birth);
    if (p.essential())
      has_inf = true;
    else
      hi = std::max(hi, p.death);
  }
  if (hi <= 0.0) hi = 1.0;
  const double inf_level = hi * 1.1;
  const double top = has_inf ? inf_level * 1.05 : hi * 1.05;
  const Axis x{0.0, top, kMargin, kWidth - kMargin};
  const Axis y{0.0, top, kHeight - kMargin, kMargin};

  std::ostringstream s;
  s << open(kWidth, kHeight);
  frame(s, "birth", "death");
  s << "<line x1=\"" << num(x.map(0)) << "\" y1=\"" << num(y.map(0)) << "\" x2=\""
    << num(x.map(top)) << "\" y2=\"" << num(y.map(top)) << "\" stroke=\"#999\"/>\n";
  if (has_inf) {
    s << "<line x1=\"" << num(x.map(0)) << "\" y1=\"" << num(y.map(inf_level)) << "\" x2=\""
      << num(x.map(top)) << "\" y2=\"" << num(y.map(inf_level))
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    s << "<text x=\"" << num(kMargin - 4) << "\" y=\"" << num(y.map(inf_level) + 4)
      << "\" text-anchor=\"end\" font-size=\"11\">inf</text>\n";
  }
  int top_dim = std::max(0, diagram.top_dim());
  for (const auto& p : diagram.pairs) {
    const double death = p.essential() ? inf_level : p.death;
    s << "<circle cx=\"" << num(x.map(p.birth)) << "\" cy=\"" << num(y.map(death))
      << "\" r=\"3\" fill=\"" << kPalette[std::size_t(p.dim) % kPalette.size()]
      << "\" fill-opacity=\"0.7\"/>\n";
  }
  std::vector<std::string> names;
  for (int k = 0; k <= top_dim; ++k) names.push_back("H" + std::to_string(k));
  legend(s, names);
  s << "</svg>\n";
  return s.str();
}

std::string render_embedding(const Embedding2D& embedding, char group_separator) {
  if (embedding.coords.empty()) throw DataError("embedding has no points");
  double xlo = embedding.coords[0][0], xhi = xlo, ylo = embedding.coords[0][1], yhi = ylo;
  for (const auto& c : embedding.coords) {
    xlo = std::min(xlo, c[0]);
    xhi = std::max(xhi, c[0]);
    ylo = std::min(ylo, c[1]);
    yhi = std::max(yhi, c[1]);
  }
  const double pad_x = (xhi - xlo) * 0.05 + 1e-9, pad_y = (yhi - ylo) * 0.05 + 1e-9;
  const Axis x{xlo - pad_x, xhi + pad_x, kMargin, kWidth - kMargin};
  const Axis y{ylo - pad_y, yhi + pad_y, kHeight - kMargin, kMargin};

  std::map<std::string, std::size_t> groups;
  std::vector<std::string> names;
  std::vector<std::size_t> group_of;
  for (const auto& label : embedding.labels) {
    const auto g = label.substr(0, label.find(group_separator));
    auto [it, inserted] = groups.emplace(g, names.size());
    if (inserted) names.push_back(g);
    group_of.push_back(it->second);
  }

  std::ostringstream s;
  s << open(kWidth, kHeight);
  frame(s, "x", "y");
  for (std::size_t i = 0; i < embedding.coords.size(); ++i) {
    s << "<circle cx=\"" << num(x.map(embedding.coords[i][0])) << "\" cy=\""
      << num(y.map(embedding.coords[i][1])) << "\" r=\"4\" fill=\""
      << kPalette[group_of[i] % kPalette.size()] << "\"><title>"
      << escape(embedding.labels[i]) << "</title></circle>\n";
  }
  legend(s, names);
  s << "</svg>\n";
  return s.str();
}

std::string render_boxplot(std::span<const QuantileRow> rows, std::string_view stat) {
  std::vector<const QuantileRow*> chosen;
  for (const auto& r : rows)
    if (r.stat == stat) chosen.push_back(&r);
  if (chosen.empty()) throw DataError("no quantile rows for statistic '" + std::string(stat) + "'");
  double lo = chosen[0]->min, hi = chosen[0]->max;
  for (const auto* r : chosen) {
    lo = std::min(lo, r->min);
    hi = std::max(hi, r->max);
    for (const double o : r->outliers) {
      lo = std::min(lo, o);
      hi = std::max(hi, o);
    }
  }
  const double pad = (hi - lo) * 0.05 + 1e-9;
  const Axis y{lo - pad, hi + pad, kHeight - kMargin, kMargin};
  const double slot = (kWidth - 2 * kMargin) / double(chosen.size());

  std::ostringstream s;
  s << open(kWidth, kHeight);
  frame(s, "layer / dim", stat);
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    const auto& r = *chosen[i];
    const double cx = kMargin + slot * (double(i) + 0.5);
    const double half = std::min(18.0, slot * 0.3);
    const char* color = kPalette[std::size_t(r.dim) % kPalette.size()];
    s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y.map(r.min)) << "\" x2=\"" << num(cx)
      << "\" y2=\"" << num(y.map(r.max)) << "\" stroke=\"black\"/>\n";
    s << "<rect x=\"" << num(cx - half) << "\" y=\"" << num(y.map(r.q3)) << "\" width=\""
      << num(2 * half) << "\" height=\"" << num(y.map(r.q1) - y.map(r.q3)) << "\" fill=\""
      << color << "\" fill-opacity=\"0.5\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(cx - half) << "\" y1=\"" << num(y.map(r.median)) << "\" x2=\""
      << num(cx + half) << "\" y2=\"" << num(y.map(r.median)) << "\" stroke=\"black\" "
      << "stroke-width=\"2\"/>\n";
    for (const double o : r.outliers)
      s << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(y.map(o))
        << "\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << num(cx) << "\" y=\"" << num(kHeight - kMargin + 14)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(r.layer) << " H" << r.dim
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string render_heatmap(const LayerHeatmap& h) {
  const std::size_t L = h.layers.size();
  if (L == 0) throw DataError("heatmap has no layers");
  double hi = 0.0;
  for (const double v : h.values)
    if (std::isfinite(v)) hi = std::max(hi, v);
  const double cell = (kWidth - 2 * kMargin) / double(L);

  std::ostringstream s;
  s << open(kWidth, kHeight);
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      const double v = h.values[i * L + j];
      if (std::isnan(v)) continue;
      const double t = hi > 0.0 && std::isfinite(v) ? v / hi : (std::isinf(v) ? 1.0 : 0.0);
      const int shade = 255 - static_cast<int>(std::lround(t * 200.0));
      s << "<rect x=\"" << num(kMargin + cell * double(j)) << "\" y=\""
        << num(kMargin + cell * double(i)) << "\" width=\"" << num(cell) << "\" height=\""
        << num(cell) << "\" fill=\"rgb(" << shade << ',' << shade << ",255)\" stroke=\"white\">"
        << "<title>" << escape(h.layers[i]) << " vs " << escape(h.layers[j]) << ": " << num(v)
        << "</title></rect>\n";
    }
    s << "<text x=\"" << num(kMargin - 4) << "\" y=\"" << num(kMargin + cell * (double(i) + 0.5))
      << "\" text-anchor=\"end\" font-size=\"10\">" << escape(h.layers[i]) << "</text>\n";
    s << "<text x=\"" << num(kMargin + cell * (double(i) + 0.5)) << "\" y=\""
      << num(kMargin - 6) << "\" text-anchor=\"middle\" font-size=\"10\">"
      << escape(h.layers[i]) << "</text>\n";
  }
  s << "<text x=\"" << num(kWidth / 2) << "\" y=\"" << num(kHeight - 12)
    << "\" text-anchor=\"middle\" font-size=\"12\">H" << h.dim << " mean bottleneck distance"
    << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace neurotopo::svg
