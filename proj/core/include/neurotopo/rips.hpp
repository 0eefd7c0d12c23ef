#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "neurotopo/pointcloud.hpp"
#include "neurotopo/scale.hpp"

namespace neurotopo {

inline constexpr int kMaxHomologyDim = 2;
inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;

struct FiltrationSimplex {
  std::array<std::uint32_t, 4> vertices{};  // first dimension+1 entries used
  int dimension = 0;
  double value = 0.0;

  std::span<const std::uint32_t> vertex_span() const {
    return {vertices.data(), static_cast<std::size_t>(dimension) + 1};
  }
  bool operator==(const FiltrationSimplex&) const = default;
};

struct RipsOptions {
  int max_dim = 1;  // highest homology degree of interest, at most 2
  Scale scale = Scale::diameter;
  std::optional<double> threshold;  // in `scale` units; default enclosing radius
  std::size_t memory_budget = kDefaultMemoryBudget;
};

/// min over points of the largest distance to any other point; 0 for n = 1.
/// Beyond this value the Rips complex is a cone.
double enclosing_radius(const DistanceMatrix& dm);

/// A finite simplicial filtration holding every simplex of dimension up to
/// max_dim + 1 (the extra dimension kills max_dim-cycles). Simplices are
/// totally ordered by (value, dimension, lexicographic vertices).
///
/// Storage is one array per dimension of (value, key) records, where the key
/// packs the sorted vertex tuple in base n so that key order equals
/// lexicographic order. The global order is the merge of those arrays.
class Filtration {
 public:
  /// A simplex of known dimension: its value and its vertex tuple packed in
  /// base point_count(). Within a dimension, (value, key) order is filtration
  /// order.
  struct Cell {
    double value;
    std::uint64_t key;
    auto operator<=>(const Cell&) const = default;
  };

  /// Builds a filtration from an explicit list, validating vertex ranges,
  /// strict filtration order and face closure. Errors name the offending
  /// simplex.
  static Filtration from_simplices(std::size_t point_count, int max_dim,
                                   Scale scale, double threshold,
                                   std::span<const FiltrationSimplex> simplices);

  std::size_t point_count() const { return n_; }
  int max_dim() const { return max_dim_; }
  Scale scale() const { return scale_; }
  /// Truncation value in scale units, +inf when untruncated.
  double threshold() const { return threshold_; }
  /// True when the complex at the threshold is known to be a cone, so no
  /// homology survives above degree 0 and H0 has one class.
  bool coned() const { return coned_; }

  std::size_t size() const;
  std::size_t count(int dim) const { return entries_.at(dim).size(); }

  double value(int dim, std::size_t index) const { return entries_[dim][index].value; }
  const Cell& cell(int dim, std::size_t index) const { return entries_[dim][index]; }
  FiltrationSimplex simplex(int dim, std::size_t index) const;
  FiltrationSimplex decode(int dim, const Cell& cell) const;

  /// Position of the simplex within its dimension, or nullopt if absent.
  /// Answers for dimensions up to max_dim().
  std::optional<std::size_t> index_of(int dim, std::span<const std::uint32_t> vertices) const;
  std::optional<std::size_t> index_of_key(int dim, std::uint64_t key) const;

  /// Appends the cofacets of a dim-simplex (dim < max_dim() + 1) to `out`,
  /// in no particular order.
  void cofacets(int dim, const Cell& cell, std::vector<Cell>& out) const;

  /// All simplices in filtration order.
  std::vector<FiltrationSimplex> ordered() const;

  /// "value,dimension,vertices" rows, vertices separated by spaces.
  void write_csv(std::ostream& out) const;

 private:
  struct KeyIndex {
    std::uint64_t key;
    std::uint32_t index;
  };

  Filtration(std::size_t n, int max_dim, Scale scale, double threshold, bool coned);
  void build_lookup(int top);
  std::uint64_t encode(std::span<const std::uint32_t> vertices) const;

  friend Filtration build_filtration(const DistanceMatrix&, const RipsOptions&);

  std::size_t n_;
  int max_dim_;
  Scale scale_;
  double threshold_;
  bool coned_;
  // Built filtrations are clique complexes: a simplex is present exactly when
  // all its edges are, and its value is the largest edge value.
  bool clique_ = false;
  std::vector<double> edge_;  // n x n edge values, +inf when absent
  std::array<std::vector<Cell>, kMaxHomologyDim + 2> entries_;
  std::array<std::vector<KeyIndex>, kMaxHomologyDim + 2> lookup_;
};

/// Vietoris-Rips filtration of a distance matrix. Enumerates every simplex
/// of dimension <= max_dim + 1 whose diameter is within the threshold.
/// Throws BudgetError before allocating if the estimated footprint exceeds
/// options.memory_budget.
Filtration build_filtration(const DistanceMatrix& dm, const RipsOptions& options);

/// Bytes build_filtration would allocate for these options.
std::size_t estimate_filtration_bytes(const DistanceMatrix& dm, const RipsOptions& options);

}  // namespace neurotopo
