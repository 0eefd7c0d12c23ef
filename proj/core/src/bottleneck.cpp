#include "neurotopo/bottleneck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"
#include "neurotopo/parallel.hpp"

namespace neurotopo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<DiagramPoint> finite_points(const PersistenceDiagram& d, int dim) {
  std::vector<DiagramPoint> out;
  for (const auto& p : d.pairs)
    if (p.dim == dim && !p.essential()) out.push_back({p.birth, p.death});
  return out;
}

std::vector<double> essential_births(const PersistenceDiagram& d, int dim) {
  std::vector<double> out;
  for (const auto& p : d.pairs)
    if (p.dim == dim && p.essential()) out.push_back(p.birth);
  std::sort(out.begin(), out.end());
  return out;
}

// Hopcroft-Karp over an implicit bipartite graph. Returns the size of a
// maximum matching of the `left` vertices into [0, right_count).
template <typename Adjacent>
std::size_t max_matching(std::size_t left, std::size_t right_count, Adjacent&& adjacent) {
  constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> match_l(left, kFree), match_r(right_count, kFree);
  std::vector<std::size_t> layer(left);
  std::size_t size = 0;

  // greedy start
  for (std::size_t u = 0; u < left; ++u) {
    for (std::size_t v = 0; v < right_count; ++v) {
      if (match_r[v] == kFree && adjacent(u, v)) {
        match_l[u] = v;
        match_r[v] = u;
        ++size;
        break;
      }
    }
  }

  std::vector<std::size_t> next_edge(left);
  while (true) {
    std::queue<std::size_t> q;
    constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
    std::fill(layer.begin(), layer.end(), kUnseen);
    for (std::size_t u = 0; u < left; ++u) {
      if (match_l[u] == kFree) {
        layer[u] = 0;
        q.push(u);
      }
    }
    bool reachable_free = false;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < right_count; ++v) {
        if (!adjacent(u, v)) continue;
        const std::size_t w = match_r[v];
        if (w == kFree) {
          reachable_free = true;
        } else if (layer[w] == kUnseen) {
          layer[w] = layer[u] + 1;
          q.push(w);
        }
      }
    }
    if (!reachable_free) break;

    std::fill(next_edge.begin(), next_edge.end(), 0);
    // iterative DFS along the layered graph
    std::vector<std::size_t> stack;
    for (std::size_t root = 0; root < left; ++root) {
      if (match_l[root] != kFree) continue;
      stack.assign(1, root);
      while (!stack.empty()) {
        const std::size_t u = stack.back();
        bool advanced = false;
        for (std::size_t& v = next_edge[u]; v < right_count; ++v) {
          if (!adjacent(u, v)) continue;
          const std::size_t w = match_r[v];
          if (w == kFree) {
            // augment along the stack
            std::size_t right = v;
            for (std::size_t s = stack.size(); s-- > 0;) {
              const std::size_t l = stack[s];
              const std::size_t prev = match_l[l];
              match_l[l] = right;
              match_r[right] = l;
              right = prev;
            }
            ++size;
            stack.clear();
            advanced = true;
            break;
          }
          if (layer[w] == layer[u] + 1) {
            ++v;
            stack.push_back(w);
            advanced = true;
            break;
          }
        }
        if (!advanced) {
          layer[u] = kUnseen;  // dead end
          stack.pop_back();
        }
      }
    }
  }
  return size;
}

// Can every point of `heavy_side` whose diagonal gap exceeds r be matched
// into `other` with edges of length <= r?
bool covers_heavy(std::span<const DiagramPoint> heavy_side, std::span<const DiagramPoint> other,
                  double r) {
  std::vector<std::size_t> heavy;
  for (std::size_t i = 0; i < heavy_side.size(); ++i)
    if (diagonal_gap(heavy_side[i]) > r) heavy.push_back(i);
  if (heavy.empty()) return true;
  if (heavy.size() > other.size()) return false;
  const auto matched = max_matching(heavy.size(), other.size(), [&](std::size_t u, std::size_t v) {
    return linf(heavy_side[heavy[u]], other[v]) <= r;
  });
  return matched == heavy.size();
}

bool feasible(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b, double r) {
  return covers_heavy(a, b, r) && covers_heavy(b, a, r);
}

}  // namespace

double bottleneck_finite(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b) {
  if (a.empty() && b.empty()) return 0.0;

  // Every point must pay at least min(own diagonal gap, nearest partner).
  double lower = 0.0;
  auto raise_lower = [&](std::span<const DiagramPoint> xs, std::span<const DiagramPoint> ys) {
    for (const auto& p : xs) {
      double best = diagonal_gap(p);
      for (const auto& q : ys) best = std::min(best, linf(p, q));
      lower = std::max(lower, best);
    }
  };
  raise_lower(a, b);
  raise_lower(b, a);

  std::vector<double> candidates;
  candidates.reserve(a.size() * b.size() + a.size() + b.size());
  for (const auto& p : a) {
    if (diagonal_gap(p) >= lower) candidates.push_back(diagonal_gap(p));
    for (const auto& q : b) {
      const double d = linf(p, q);
      if (d >= lower) candidates.push_back(d);
    }
  }
  for (const auto& q : b)
    if (diagonal_gap(q) >= lower) candidates.push_back(diagonal_gap(q));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // lower itself is a candidate value, and the largest candidate is always
  // feasible (send everything to the diagonal).
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(a, b, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

double bottleneck_distance(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
  if (a.scale != b.scale)
    throw DataError("scale mismatch: cannot compare a " + std::string(to_string(a.scale)) +
                    " diagram with a " + std::string(to_string(b.scale)) + " diagram");
  if (dim < 0) throw DataError("homology dimension must be nonnegative");
  const auto ea = essential_births(a, dim);
  const auto eb = essential_births(b, dim);
  if (ea.size() != eb.size()) return kInf;
  double essential = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i)
    essential = std::max(essential, std::abs(ea[i] - eb[i]));
  const auto fa = finite_points(a, dim);
  const auto fb = finite_points(b, dim);
  return std::max(essential, bottleneck_finite(fa, fb));
}

double matching_cost(const PersistenceDiagram& a, const PersistenceDiagram& b,
                     const Matching& m, int dim) {
  const auto fa = finite_points(a, dim);
  const auto fb = finite_points(b, dim);
  std::vector<std::uint8_t> used_a(fa.size(), 0), used_b(fb.size(), 0);
  auto claim = [](std::vector<std::uint8_t>& used, std::size_t i, const char* side) {
    if (i >= used.size())
      throw DataError(std::string("matching index ") + std::to_string(i) + " out of range in " +
                      side);
    if (used[i])
      throw DataError(std::string("matching uses index ") + std::to_string(i) + " of " + side +
                      " more than once");
    used[i] = 1;
  };
  double cost = 0.0;
  for (const auto& [i, j] : m.matched) {
    claim(used_a, i, "diagram A");
    claim(used_b, j, "diagram B");
    cost = std::max(cost, linf(fa[i], fb[j]));
  }
  for (const std::size_t i : m.unmatched_a) {
    claim(used_a, i, "diagram A");
    cost = std::max(cost, diagonal_gap(fa[i]));
  }
  for (const std::size_t j : m.unmatched_b) {
    claim(used_b, j, "diagram B");
    cost = std::max(cost, diagonal_gap(fb[j]));
  }
  if (std::find(used_a.begin(), used_a.end(), 0) != used_a.end() ||
      std::find(used_b.begin(), used_b.end(), 0) != used_b.end())
    throw DataError("matching does not cover every finite feature");
  return cost;
}

bool DiagramDistanceMatrix::has_infinite() const {
  return std::any_of(values.begin(), values.end(), [](double v) { return std::isinf(v); });
}

DiagramDistanceMatrix pairwise_distances(std::span<const PersistenceDiagram> diagrams,
                                         std::span<const std::string> labels, int dim,
                                         unsigned jobs) {
  const std::size_t n = diagrams.size();
  if (n < 2) throw DataError("pairwise distances need at least two diagrams");
  if (labels.size() != n) throw DataError("one label per diagram is required");
  for (const auto& d : diagrams) {
    if (d.scale != diagrams[0].scale)
      throw DataError("diagrams mix diameter and radius scale conventions");
  }
  DiagramDistanceMatrix m;
  m.labels.assign(labels.begin(), labels.end());
  m.values.assign(n * n, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> work;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) work.emplace_back(i, j);
  parallel_for(work.size(), jobs, [&](std::size_t w) {
    const auto [i, j] = work[w];
    const double d = bottleneck_distance(diagrams[i], diagrams[j], dim);
    m.values[i * n + j] = d;
    m.values[j * n + i] = d;
  });
  return m;
}

void write_distance_matrix(const DiagramDistanceMatrix& m, std::ostream& out) {
  for (const auto& l : m.labels) io::require_plain_label(l);
  for (const auto& l : m.labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.labels[i];
    for (std::size_t j = 0; j < m.size(); ++j) out << ',' << io::format_double(m(i, j));
    out << '\n';
  }
}

DiagramDistanceMatrix read_distance_matrix(std::istream& in) {
  std::vector<std::string> lines;
  for (auto& l : io::read_lines(in))
    if (!io::trim(l).empty()) lines.push_back(std::move(l));
  if (lines.empty()) throw DataError("distance matrix CSV is empty");
  const auto header = io::split(lines[0]);
  DiagramDistanceMatrix m;
  for (std::size_t i = 1; i < header.size(); ++i) m.labels.emplace_back(io::trim(header[i]));
  const std::size_t n = m.labels.size();
  if (lines.size() != n + 1)
    throw DataError("distance matrix CSV has " + std::to_string(lines.size() - 1) +
                    " rows for " + std::to_string(n) + " labels");
  m.values.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "line " + std::to_string(i + 2) + ": ";
    const auto f = io::split(lines[i + 1]);
    if (f.size() != n + 1) throw DataError(where + "wrong number of fields");
    if (io::trim(f[0]) != m.labels[i]) throw DataError(where + "row label does not match header");
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = io::parse_double(f[j + 1]);
      if (!v || std::isnan(*v) || *v < 0.0) throw DataError(where + "invalid distance");
      m.values[i * n + j] = *v;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (m(i, i) != 0.0) throw DataError("distance matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j)
      if (m(i, j) != m(j, i)) throw DataError("distance matrix is not symmetric");
  }
  return m;
}

}  // namespace neurotopo
