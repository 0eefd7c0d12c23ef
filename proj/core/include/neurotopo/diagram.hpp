#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "neurotopo/pointcloud.hpp"
#include "neurotopo/scale.hpp"

namespace neurotopo {

struct PersistencePair {
  int dim = 0;
  double birth = 0.0;
  double death = 0.0;  // +inf for essential classes

  bool essential() const { return std::isinf(death); }
  double lifetime() const { return death - birth; }

  auto operator<=>(const PersistencePair&) const = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePair> pairs;
  Scale scale = Scale::diameter;
  SourceMeta meta;

  /// Throws DataError if some pair has death < birth, a negative dimension,
  /// or a non-finite birth.
  void validate() const;

  /// Pairs of one dimension, in stored order.
  std::vector<PersistencePair> in_dim(int dim) const;

  int top_dim() const;  // highest dimension present, -1 if empty

  bool operator==(const PersistenceDiagram&) const = default;
};

/// Moments over the finite features of one homology degree. Standard
/// deviations use the n-1 denominator and are 0 when count <= 1.
struct DimensionStats {
  int dim = 0;
  std::size_t count = 0;
  std::size_t inf_count = 0;
  double birth_mean = 0.0, birth_std = 0.0;
  double death_mean = 0.0, death_std = 0.0;
  double life_mean = 0.0, life_std = 0.0;
};

struct DiagramStatistics {
  SourceMeta meta;
  std::vector<DimensionStats> dims;  // dims 0..max_dim
};

/// Statistics for dims 0..max_dim; max_dim < 0 means "highest dimension in
/// the diagram" (0 for an empty diagram). Essential features only feed
/// inf_count.
DiagramStatistics diagram_stats(const PersistenceDiagram& diagram, int max_dim = -1);

/// CSV: "# key=value" metadata lines (scale, model, layer, class), then the
/// header "dim,birth,death" and one row per pair.
void write_diagram(const PersistenceDiagram& diagram, std::ostream& out);
PersistenceDiagram read_diagram(std::istream& in);
void save_diagram(const PersistenceDiagram& diagram, const std::filesystem::path& path);
PersistenceDiagram load_diagram(const std::filesystem::path& path);

void write_statistics_csv(std::span<const DiagramStatistics> records, std::ostream& out);

/// Boxplot summary of one statistic across records sharing a layer.
struct QuantileRow {
  std::string layer;
  int dim = 0;
  std::string stat;
  double min = 0.0;  // lowest value inside the lower fence
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;  // highest value inside the upper fence
  std::vector<double> outliers;  // ascending, outside Q1 - 1.5 IQR .. Q3 + 1.5 IQR
};

/// Quantile by linear interpolation between closest ranks on sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

/// Per (layer, dim, statistic) boxplot rows for statistics count,
/// birth_mean, death_mean and life_mean. Output is sorted by layer, dim and
/// a fixed statistic order, so it does not depend on input order.
std::vector<QuantileRow> quantile_summary(std::span<const DiagramStatistics> records);

void write_quantile_csv(std::span<const QuantileRow> rows, std::ostream& out);
std::vector<QuantileRow> read_quantile_csv(std::istream& in);

}  // namespace neurotopo
