#include "neurotopo/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"
#include "neurotopo/parallel.hpp"

namespace neurotopo {

LofReport lof_scores(const DistanceMatrix& dm, std::size_t k, unsigned jobs) {
  const std::size_t n = dm.size();
  if (k < 1) throw DataError("LOF neighbor count k must be at least 1");
  if (n <= k)
    throw DataError("need at least k+1 points for LOF (k=" + std::to_string(k) +
                    ", n=" + std::to_string(n) + ")");

  std::vector<double> kdist(n);
  std::vector<std::vector<std::size_t>> neighbors(n);
  parallel_for(n, jobs, [&](std::size_t p) {
    std::vector<double> others;
    others.reserve(n - 1);
    for (std::size_t q = 0; q < n; ++q)
      if (q != p) others.push_back(dm(p, q));
    std::nth_element(others.begin(), others.begin() + static_cast<long>(k - 1),
                     others.end());
    kdist[p] = others[k - 1];
    for (std::size_t q = 0; q < n; ++q)
      if (q != p && dm(p, q) <= kdist[p]) neighbors[p].push_back(q);
  });

  std::vector<double> lrd(n);
  parallel_for(n, jobs, [&](std::size_t p) {
    double reach_sum = 0.0;
    for (const std::size_t o : neighbors[p])
      reach_sum += std::max({kdist[o], dm(p, o), kReachabilityFloor});
    lrd[p] = double(neighbors[p].size()) / reach_sum;
  });

  LofReport report;
  report.k = k;
  report.scores.resize(n);
  parallel_for(n, jobs, [&](std::size_t p) {
    double sum = 0.0;
    for (const std::size_t o : neighbors[p]) sum += lrd[o];
    report.scores[p] = sum / (double(neighbors[p].size()) * lrd[p]);
  });
  return report;
}

LofReport flag_outliers(LofReport report, double threshold) {
  if (std::isnan(threshold)) throw DataError("LOF threshold must not be NaN");
  report.threshold = threshold;
  report.flagged.clear();
  for (std::size_t i = 0; i < report.scores.size(); ++i)
    if (report.scores[i] > threshold) report.flagged.push_back(i);
  return report;
}

std::pair<PointCloud, LofReport> filter_outliers(const PointCloud& cloud,
                                                 std::size_t k, double threshold,
                                                 unsigned jobs) {
  auto report = flag_outliers(lof_scores(distance_matrix(cloud, jobs), k, jobs),
                              threshold);
  if (report.flagged.size() == cloud.size())
    throw DataError("LOF flagged every point; the filtered cloud would be empty");
  std::vector<std::size_t> kept;
  kept.reserve(cloud.size() - report.flagged.size());
  auto flagged = report.flagged.begin();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (flagged != report.flagged.end() && *flagged == i) {
      ++flagged;
      continue;
    }
    kept.push_back(i);
  }
  return {cloud.select(kept), std::move(report)};
}

void write_lof_csv(const LofReport& report, std::ostream& out) {
  out << "index,score,flagged\n";
  auto flagged = report.flagged.begin();
  for (std::size_t i = 0; i < report.scores.size(); ++i) {
    const bool is_flagged = flagged != report.flagged.end() && *flagged == i;
    if (is_flagged) ++flagged;
    out << i << ',' << io::format_double(report.scores[i]) << ','
        << (is_flagged ? 1 : 0) << '\n';
  }
}

}  // namespace neurotopo
