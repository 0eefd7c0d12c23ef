#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neurotopo/bottleneck.hpp"
#include "neurotopo/diagram.hpp"
#include "neurotopo/embed.hpp"
#include "neurotopo/outlier.hpp"
#include "neurotopo/pointcloud.hpp"
#include "neurotopo/rips.hpp"

namespace neurotopo {

struct LofSettings {
  std::size_t k = kDefaultLofNeighbors;
  double threshold = kDefaultLofThreshold;
};

/// cloud -> normalize -> LOF filter -> Rips -> persistence.
struct PipelineOptions {
  bool normalize = true;
  std::optional<LofSettings> lof;
  RipsOptions rips;
  bool include_zero_lifetime = false;
};

struct PipelineResult {
  PersistenceDiagram diagram;
  std::size_t kept = 0;
  std::size_t removed = 0;
  std::vector<std::string> warnings;
};

/// When the cloud is too small for the configured LOF neighbor count, k is
/// lowered to n - 1 and a warning is recorded; clouds of one point skip LOF.
PipelineResult run_pipeline(const PointCloud& cloud, const PipelineOptions& options);

/// "start:stop:step" (inclusive stop) or a comma-separated list.
std::vector<std::size_t> parse_size_range(std::string_view text);

struct CloudKey {
  std::string model;
  std::string layer;
  std::string cls;

  auto operator<=>(const CloudKey&) const = default;
};

/// Point clouds keyed by (model, layer, class), loaded from a manifest CSV
/// with header "model,layer,class,path". Relative paths resolve against the
/// manifest's directory; ".csv" files are headerless CSV clouds, anything
/// else tdac-binary.
class CloudSet {
 public:
  static CloudSet load(const std::filesystem::path& manifest);

  void add(CloudKey key, PointCloud cloud);
  const std::map<CloudKey, PointCloud>& clouds() const { return clouds_; }
  std::vector<std::string> models() const;

 private:
  std::map<CloudKey, PointCloud> clouds_;
};

// ---------------------------------------------------------------------------
// Subsample study

struct SubsampleRow {
  std::size_t size = 0;
  std::size_t kept = 0;  // after LOF
  std::size_t removed = 0;
  std::vector<std::size_t> counts;  // finite features per dimension
  std::vector<double> distances;    // bottleneck distance to the baseline
};

struct SubsampleTable {
  int max_dim = 0;
  std::vector<SubsampleRow> rows;
  std::vector<std::string> warnings;
};

/// For each size: random subset, pipeline, then per-dimension finite feature
/// count and bottleneck distance to the full-cloud diagram. `sizes` must be
/// strictly ascending and at most the cloud size.
SubsampleTable subsample_study(const PointCloud& cloud, std::span<const std::size_t> sizes,
                               std::uint64_t seed, const PipelineOptions& options,
                               unsigned jobs = 1);

/// Header "size,kept,removed,count_h0,distance_h0,...".
void write_subsample_csv(const SubsampleTable& table, std::ostream& out);

// ---------------------------------------------------------------------------
// LOF comparison

struct LofComparisonRow {
  std::string model;
  std::string layer;
  int dim = 0;
  std::size_t all_pairs = 0;
  double all_mean = 0.0;
  double all_std = 0.0;
  std::size_t class_pairs = 0;
  double class_mean = 0.0;
  double class_std = 0.0;
};

struct LofComparison {
  std::vector<LofComparisonRow> without_lof;
  std::vector<LofComparisonRow> with_lof;
  std::vector<std::string> warnings;
};

/// Each class cloud is shuffled (seeded per key) and split into two
/// disjoint halves; both halves get a diagram with and without LOF. "All"
/// averages over every pair of half-diagrams in a layer, "class" over the
/// two halves of each class. pair_budget > 0 caps the number of "all" pairs
/// by seeded sampling. Classes under 4 points are skipped with a warning.
LofComparison lof_comparison(const CloudSet& set, LofSettings lof, const PipelineOptions& base,
                             std::size_t pair_budget, std::uint64_t seed, unsigned jobs = 1);

/// Header "model,layer,dim,all_pairs,all_mean,all_std,class_pairs,class_mean,class_std".
void write_lof_table(std::span<const LofComparisonRow> rows, std::ostream& out);

/// Both tables in one file with a leading "lof" column (off rows first).
void write_lof_comparison_csv(const LofComparison& result, std::ostream& out);

// ---------------------------------------------------------------------------
// Layer heatmap

struct LayerHeatmap {
  int dim = 0;
  std::vector<std::string> layers;
  std::vector<double> values;  // row-major; entries below the diagonal are NaN
  std::size_t classes = 0;
};

/// Entry (i, j), i <= j: mean over classes of the bottleneck distance
/// between the diagrams at layer_order[i] and layer_order[j]. One matrix per
/// dimension 0..max_dim. An empty model selects the only model in the set.
std::vector<LayerHeatmap> layer_heatmap(const CloudSet& set, const std::string& model,
                                        std::span<const std::string> layer_order,
                                        const PipelineOptions& options, unsigned jobs = 1);

/// First row and column hold layer names; cells below the diagonal are empty.
void write_heatmap_csv(const LayerHeatmap& heatmap, std::ostream& out);
LayerHeatmap read_heatmap_csv(std::istream& in);

// ---------------------------------------------------------------------------
// Class matrix

struct ClassMatrixResult {
  DiagramDistanceMatrix matrix;
  Embedding2D embedding;
};

/// Distances between all diagrams at `layer` (every model and class),
/// labeled "model/class", plus their planar embedding.
ClassMatrixResult class_matrix_and_embedding(const CloudSet& set, const std::string& layer,
                                             int dim, const PipelineOptions& options,
                                             unsigned jobs = 1);

}  // namespace neurotopo
