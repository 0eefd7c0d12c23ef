#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

#include "neurotopo/pointcloud.hpp"

namespace neurotopo {

inline constexpr std::size_t kDefaultLofNeighbors = 20;
inline constexpr double kDefaultLofThreshold = 1.5;

/// Reachability distances below this are raised to it so duplicate points
/// keep a finite local reachability density.
inline constexpr double kReachabilityFloor = 1e-12;

struct LofReport {
  std::vector<double> scores;
  std::vector<std::size_t> flagged;  // ascending; score > threshold
  std::size_t k = kDefaultLofNeighbors;
  double threshold = std::numeric_limits<double>::infinity();
};

/// Local Outlier Factor of every point. Neighborhoods are k-distance
/// neighborhoods: every point within the k-th nearest distance counts, so
/// ties enlarge the neighborhood. The returned report has no flagged points
/// and an infinite threshold.
LofReport lof_scores(const DistanceMatrix& dm, std::size_t k, unsigned jobs = 1);

/// Flags indices whose score exceeds `threshold`.
LofReport flag_outliers(LofReport report, double threshold);

/// Drops flagged points, keeping the original order of the rest.
std::pair<PointCloud, LofReport> filter_outliers(const PointCloud& cloud,
                                                 std::size_t k, double threshold,
                                                 unsigned jobs = 1);

/// CSV with header "index,score,flagged".
void write_lof_csv(const LofReport& report, std::ostream& out);

}  // namespace neurotopo
