#include "neurotopo/diagram.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"

namespace neurotopo {

void PersistenceDiagram::validate() const {
  for (const auto& p : pairs) {
    if (p.dim < 0) throw DataError("persistence pair with negative dimension");
    if (!std::isfinite(p.birth)) throw DataError("persistence pair with non-finite birth");
    if (std::isnan(p.death) || p.death < p.birth)
      throw DataError("persistence pair with death " + io::format_double(p.death) +
                      " before birth " + io::format_double(p.birth));
  }
}

std::vector<PersistencePair> PersistenceDiagram::in_dim(int dim) const {
  std::vector<PersistencePair> out;
  for (const auto& p : pairs)
    if (p.dim == dim) out.push_back(p);
  return out;
}

int PersistenceDiagram::top_dim() const {
  int top = -1;
  for (const auto& p : pairs) top = std::max(top, p.dim);
  return top;
}

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (const double x : xs) m.mean += x;
  m.mean /= double(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / double(xs.size() - 1));
  }
  return m;
}

}  // namespace

DiagramStatistics diagram_stats(const PersistenceDiagram& diagram, int max_dim) {
  diagram.validate();
  if (max_dim < 0) max_dim = std::max(0, diagram.top_dim());
  DiagramStatistics stats;
  stats.meta = diagram.meta;
  for (int k = 0; k <= max_dim; ++k) {
    DimensionStats s;
    s.dim = k;
    std::vector<double> births, deaths, lives;
    for (const auto& p : diagram.pairs) {
      if (p.dim != k) continue;
      if (p.essential()) {
        ++s.inf_count;
        continue;
      }
      births.push_back(p.birth);
      deaths.push_back(p.death);
      lives.push_back(p.death - p.birth);
    }
    s.count = births.size();
    const auto b = moments(births), d = moments(deaths), l = moments(lives);
    s.birth_mean = b.mean;
    s.birth_std = b.std;
    s.death_mean = d.mean;
    s.death_std = d.std;
    s.life_mean = l.mean;
    s.life_std = l.std;
    stats.dims.push_back(s);
  }
  return stats;
}

void write_diagram(const PersistenceDiagram& diagram, std::ostream& out) {
  io::require_plain_label(diagram.meta.model);
  io::require_plain_label(diagram.meta.layer);
  io::require_plain_label(diagram.meta.cls);
  out << "# scale=" << to_string(diagram.scale) << '\n';
  if (!diagram.meta.model.empty()) out << "# model=" << diagram.meta.model << '\n';
  if (!diagram.meta.layer.empty()) out << "# layer=" << diagram.meta.layer << '\n';
  if (!diagram.meta.cls.empty()) out << "# class=" << diagram.meta.cls << '\n';
  out << "dim,birth,death\n";
  for (const auto& p : diagram.pairs)
    out << p.dim << ',' << io::format_double(p.birth) << ',' << io::format_double(p.death)
        << '\n';
}

PersistenceDiagram read_diagram(std::istream& in) {
  PersistenceDiagram diagram;
  bool header_seen = false;
  const auto lines = io::read_lines(in);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string where = "line " + std::to_string(li + 1) + ": ";
    const auto line = io::trim(lines[li]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (header_seen) throw DataError(where + "metadata after the header");
      const auto body = io::trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // plain comment
      const auto key = io::trim(body.substr(0, eq));
      const std::string value(io::trim(body.substr(eq + 1)));
      if (key == "scale") {
        try {
          diagram.scale = parse_scale(value);
        } catch (const DataError& e) {
          throw DataError(where + e.what());
        }
      } else if (key == "model") {
        diagram.meta.model = value;
      } else if (key == "layer") {
        diagram.meta.layer = value;
      } else if (key == "class") {
        diagram.meta.cls = value;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "dim,birth,death")
        throw DataError(where + "expected header 'dim,birth,death'");
      header_seen = true;
      continue;
    }
    const auto fields = io::split(line);
    if (fields.size() != 3)
      throw DataError(where + "expected 3 fields, found " + std::to_string(fields.size()));
    const auto dim = io::parse_int(fields[0]);
    const auto birth = io::parse_double(fields[1]);
    const auto death = io::parse_double(fields[2]);
    if (!dim || *dim < 0) throw DataError(where + "invalid dimension");
    if (!birth || !std::isfinite(*birth)) throw DataError(where + "invalid birth");
    if (!death || std::isnan(*death) || *death == -std::numeric_limits<double>::infinity())
      throw DataError(where + "invalid death");
    if (*death < *birth) throw DataError(where + "death is smaller than birth");
    diagram.pairs.push_back({static_cast<int>(*dim), *birth, *death});
  }
  if (!header_seen) throw DataError("diagram file has no 'dim,birth,death' header");
  return diagram;
}

void save_diagram(const PersistenceDiagram& diagram, const std::filesystem::path& path) {
  io::write_file_atomic(path, [&](std::ostream& out) { write_diagram(diagram, out); });
}

PersistenceDiagram load_diagram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_diagram(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_statistics_csv(std::span<const DiagramStatistics> records, std::ostream& out) {
  out << "layer,class,dim,count,inf_count,birth_mean,birth_std,death_mean,death_std,"
         "life_mean,life_std\n";
  for (const auto& r : records) {
    io::require_plain_label(r.meta.layer);
    io::require_plain_label(r.meta.cls);
    for (const auto& s : r.dims) {
      out << r.meta.layer << ',' << r.meta.cls << ',' << s.dim << ',' << s.count << ','
          << s.inf_count << ',' << io::format_double(s.birth_mean) << ','
          << io::format_double(s.birth_std) << ',' << io::format_double(s.death_mean) << ','
          << io::format_double(s.death_std) << ',' << io::format_double(s.life_mean) << ','
          << io::format_double(s.life_std) << '\n';
    }
  }
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  const double h = (double(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

constexpr std::array<std::string_view, 4> kStatNames = {"count", "birth_mean", "death_mean",
                                                         "life_mean"};

double stat_value(const DimensionStats& s, std::size_t which) {
  switch (which) {
    case 0: return double(s.count);
    case 1: return s.birth_mean;
    case 2: return s.death_mean;
    default: return s.life_mean;
  }
}

QuantileRow summarize(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  QuantileRow row;
  row.q1 = quantile_sorted(values, 0.25);
  row.median = quantile_sorted(values, 0.5);
  row.q3 = quantile_sorted(values, 0.75);
  const double iqr = row.q3 - row.q1;
  const double lo_fence = row.q1 - 1.5 * iqr;
  const double hi_fence = row.q3 + 1.5 * iqr;
  bool any_inside = false;
  for (const double v : values) {
    if (v < lo_fence || v > hi_fence) {
      row.outliers.push_back(v);
      continue;
    }
    if (!any_inside) row.min = v;
    row.max = v;
    any_inside = true;
  }
  return row;
}

}  // namespace

std::vector<QuantileRow> quantile_summary(std::span<const DiagramStatistics> records) {
  if (records.empty()) throw DataError("quantile summary needs at least one statistics record");
  // (layer, dim) -> per-statistic samples
  std::map<std::pair<std::string, int>, std::array<std::vector<double>, kStatNames.size()>>
      groups;
  for (const auto& r : records) {
    for (const auto& s : r.dims) {
      auto& samples = groups[{r.meta.layer, s.dim}];
      for (std::size_t k = 0; k < kStatNames.size(); ++k) samples[k].push_back(stat_value(s, k));
    }
  }
  std::vector<QuantileRow> rows;
  for (auto& [key, samples] : groups) {
    for (std::size_t k = 0; k < kStatNames.size(); ++k) {
      auto row = summarize(std::move(samples[k]));
      row.layer = key.first;
      row.dim = key.second;
      row.stat = std::string(kStatNames[k]);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_quantile_csv(std::span<const QuantileRow> rows, std::ostream& out) {
  out << "layer,dim,stat,min,q1,median,q3,max,outliers\n";
  for (const auto& r : rows) {
    io::require_plain_label(r.layer);
    out << r.layer << ',' << r.dim << ',' << r.stat << ',' << io::format_double(r.min) << ','
        << io::format_double(r.q1) << ',' << io::format_double(r.median) << ','
        << io::format_double(r.q3) << ',' << io::format_double(r.max) << ',';
    for (std::size_t i = 0; i < r.outliers.size(); ++i)
      out << (i ? ";" : "") << io::format_double(r.outliers[i]);
    out << '\n';
  }
}

std::vector<QuantileRow> read_quantile_csv(std::istream& in) {
  const auto lines = io::read_lines(in);
  if (lines.empty() || io::trim(lines[0]) != "layer,dim,stat,min,q1,median,q3,max,outliers")
    throw DataError("quantile CSV: missing header");
  std::vector<QuantileRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto line = io::trim(lines[li]);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(li + 1) + ": ";
    const auto f = io::split(line);
    if (f.size() != 9) throw DataError(where + "expected 9 fields");
    QuantileRow r;
    r.layer = std::string(f[0]);
    const auto dim = io::parse_int(f[1]);
    if (!dim) throw DataError(where + "invalid dim");
    r.dim = static_cast<int>(*dim);
    r.stat = std::string(f[2]);
    double* slots[] = {&r.min, &r.q1, &r.median, &r.q3, &r.max};
    for (std::size_t k = 0; k < 5; ++k) {
      const auto v = io::parse_double(f[3 + k]);
      if (!v) throw DataError(where + "invalid number");
      *slots[k] = *v;
    }
    if (!io::trim(f[8]).empty()) {
      for (const auto part : io::split(f[8], ';')) {
        const auto v = io::parse_double(part);
        if (!v) throw DataError(where + "invalid outlier value");
        r.outliers.push_back(*v);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace neurotopo
