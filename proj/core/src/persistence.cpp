#include "neurotopo/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"

namespace neurotopo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Cell = Filtration::Cell;

// Persistent cohomology with clearing. Degree 0 is handled by union-find;
// each higher degree k reduces the coboundary columns of the k-simplices in
// reverse filtration order, taking the earliest cofacet as pivot. Only the
// reduction coefficients are stored; coboundaries are regenerated on demand.
class Reducer {
 public:
  explicit Reducer(const Filtration& f) : f_(f) {}

  std::vector<PersistencePair> run() {
    std::vector<std::uint8_t> cleared = union_find();
    for (int k = 1; k <= f_.max_dim(); ++k) cleared = reduce(k, cleared);
    std::sort(pairs_.begin(), pairs_.end());
    return std::move(pairs_);
  }

 private:
  // Returns the degree-1 columns known to be zero: the edges that merged two
  // components.
  std::vector<std::uint8_t> union_find() {
    const std::size_t n = f_.count(0);
    std::vector<std::uint32_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
      }
      return x;
    };
    const bool has_edges = f_.max_dim() + 1 >= 1;
    std::vector<std::uint8_t> merged(has_edges ? f_.count(1) : 0, 0);
    std::size_t components = n;
    for (std::size_t e = 0; e < merged.size() && components > 1; ++e) {
      const auto s = f_.simplex(1, e);
      const auto u = static_cast<std::uint32_t>(*f_.index_of(0, s.vertex_span().first(1)));
      const auto v = static_cast<std::uint32_t>(*f_.index_of(0, s.vertex_span().last(1)));
      const std::uint32_t ru = find(u), rv = find(v);
      if (ru == rv) continue;
      // the component born later dies; vertex order is birth order
      const std::uint32_t younger = std::max(ru, rv);
      parent[younger] = std::min(ru, rv);
      --components;
      merged[e] = 1;
      pairs_.push_back({0, f_.value(0, younger), f_.value(1, e)});
    }
    for (std::uint32_t i = 0; i < n; ++i)
      if (find(i) == i) pairs_.push_back({0, f_.value(0, i), kInf});
    return merged;
  }

  void coboundary(int k, std::size_t index, std::vector<Cell>& out) const {
    out.clear();
    f_.cofacets(k, f_.cell(k, index), out);
  }

  // Returns the degree-(k+1) columns cleared by the pivots found here.
  std::vector<std::uint8_t> reduce(int k, const std::vector<std::uint8_t>& cleared) {
    const bool next = k + 1 <= f_.max_dim();
    std::vector<std::uint8_t> pivots(next ? f_.count(k + 1) : 0, 0);
    std::unordered_map<std::uint64_t, std::uint32_t> owner;
    std::vector<std::vector<std::uint32_t>> coefficients;
    std::vector<Cell> column, extra, merged;
    std::vector<std::uint32_t> combo, scratch;

    auto record = [&](std::size_t i, const Cell& pivot, std::vector<std::uint32_t> v) {
      owner.emplace(pivot.key, static_cast<std::uint32_t>(coefficients.size()));
      coefficients.push_back(std::move(v));
      pairs_.push_back({k, f_.value(k, i), pivot.value});
      if (next) pivots[*f_.index_of_key(k + 1, pivot.key)] = 1;
    };

    for (std::size_t i = f_.count(k); i-- > 0;) {
      if (!cleared.empty() && cleared[i]) continue;
      coboundary(k, i, column);
      if (column.empty()) {
        pairs_.push_back({k, f_.value(k, i), kInf});
        continue;
      }
      const Cell first = *std::min_element(column.begin(), column.end());
      auto hit = owner.find(first.key);
      if (hit == owner.end()) {
        record(i, first, {static_cast<std::uint32_t>(i)});
        continue;
      }
      std::sort(column.begin(), column.end());
      combo.assign(1, static_cast<std::uint32_t>(i));
      while (hit != owner.end()) {
        const auto& v = coefficients[hit->second];
        for (const std::uint32_t s : v) {
          coboundary(k, s, extra);
          std::sort(extra.begin(), extra.end());
          merged.clear();
          std::set_symmetric_difference(column.begin(), column.end(), extra.begin(), extra.end(),
                                        std::back_inserter(merged));
          column.swap(merged);
        }
        scratch.clear();
        std::set_symmetric_difference(combo.begin(), combo.end(), v.begin(), v.end(),
                                      std::back_inserter(scratch));
        combo.swap(scratch);
        if (column.empty()) break;
        hit = owner.find(column.front().key);
      }
      if (column.empty()) {
        pairs_.push_back({k, f_.value(k, i), kInf});
      } else {
        record(i, column.front(), combo);
      }
    }
    return pivots;
  }

  const Filtration& f_;
  std::vector<PersistencePair> pairs_;
};

}  // namespace

std::vector<PersistencePair> persistence_pairs(const Filtration& f) {
  return Reducer(f).run();
}

PersistenceDiagram compute_persistence(const Filtration& f, PersistenceOptions options) {
  PersistenceDiagram diagram;
  diagram.scale = f.scale();
  for (const auto& p : persistence_pairs(f)) {
    if (!options.include_zero_lifetime && p.death == p.birth) continue;
    diagram.pairs.push_back(p);
  }
  return diagram;
}

std::vector<std::size_t> betti_numbers(const Filtration& f, double epsilon) {
  if (std::isnan(epsilon) || epsilon < 0.0)
    throw DataError("betti scale must be nonnegative");
  if (epsilon > f.threshold())
    throw DataError("betti scale " + io::format_double(epsilon) +
                    " lies above the filtration threshold " +
                    io::format_double(f.threshold()) + "; the complex is unknown there");
  std::vector<std::size_t> betti(f.max_dim() + 1, 0);
  for (const auto& p : persistence_pairs(f))
    if (p.birth <= epsilon && epsilon < p.death) ++betti[p.dim];
  return betti;
}

}  // namespace neurotopo
