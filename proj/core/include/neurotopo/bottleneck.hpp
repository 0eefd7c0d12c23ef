#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "neurotopo/diagram.hpp"

namespace neurotopo {

/// A partial matching between the finite features of one dimension of two
/// diagrams. Indices count finite pairs of that dimension in stored order.
struct Matching {
  std::vector<std::pair<std::size_t, std::size_t>> matched;
  std::vector<std::size_t> unmatched_a;
  std::vector<std::size_t> unmatched_b;
};

/// Birth/death point of a finite feature.
struct DiagramPoint {
  double birth;
  double death;
};

/// L-infinity distance between two diagram points.
inline double linf(const DiagramPoint& p, const DiagramPoint& q) {
  const double db = p.birth > q.birth ? p.birth - q.birth : q.birth - p.birth;
  const double dd = p.death > q.death ? p.death - q.death : q.death - p.death;
  return db > dd ? db : dd;
}

/// L-infinity distance to the diagonal.
inline double diagonal_gap(const DiagramPoint& p) { return (p.death - p.birth) / 2.0; }

/// Cost of a matching: the largest matched L-infinity distance or diagonal
/// gap of an unmatched point. Throws DataError if the matching reuses an
/// index or does not partition the finite features of `dim`.
double matching_cost(const PersistenceDiagram& a, const PersistenceDiagram& b,
                     const Matching& m, int dim);

/// Exact bottleneck distance between the finite point sets.
///
/// The optimum is one of the pairwise L-infinity distances or diagonal gaps,
/// so we binary search that candidate set. A radius r is feasible when some
/// matching of edges no longer than r covers every point whose diagonal gap
/// exceeds r; by the Mendelsohn-Dulmage theorem that reduces to two
/// one-sided maximum matchings (Hopcroft-Karp).
double bottleneck_finite(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b);

/// Bottleneck distance restricted to homology degree `dim`. Essential
/// features match only essential features, at cost |birth_a - birth_b|;
/// unequal essential counts give +inf. Diagrams must share a scale.
double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);

/// Labeled square matrix of diagram distances; +inf entries are allowed.
struct DiagramDistanceMatrix {
  std::vector<std::string> labels;
  std::vector<double> values;  // row-major, labels.size() squared

  std::size_t size() const { return labels.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
  bool has_infinite() const;
};

DiagramDistanceMatrix pairwise_distances(std::span<const PersistenceDiagram> diagrams,
                                         std::span<const std::string> labels, int dim,
                                         unsigned jobs = 1);

/// First row and first column hold labels; "inf" marks infinite distances.
void write_distance_matrix(const DiagramDistanceMatrix& m, std::ostream& out);
DiagramDistanceMatrix read_distance_matrix(std::istream& in);

}  // namespace neurotopo
