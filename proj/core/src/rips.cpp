#include "neurotopo/rips.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"

namespace neurotopo {

std::string_view to_string(Scale scale) {
  return scale == Scale::diameter ? "diameter" : "radius";
}

Scale parse_scale(std::string_view text) {
  if (text == "diameter") return Scale::diameter;
  if (text == "radius") return Scale::radius;
  throw DataError("unknown scale convention '" + std::string(text) +
                  "' (expected diameter or radius)");
}

double enclosing_radius(const DistanceMatrix& dm) {
  const std::size_t n = dm.size();
  if (n <= 1) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double far = 0.0;
    for (std::size_t j = 0; j < n; ++j) far = std::max(far, dm(i, j));
    best = std::min(best, far);
  }
  return best;
}

namespace {

constexpr std::size_t kMaxPoints = 65535;  // base-n keys of 4 vertices fit in 64 bits

std::string describe(std::span<const std::uint32_t> vertices) {
  std::string s = "[";
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(vertices[i]);
  }
  return s + "]";
}

struct Cutoff {
  double diameter;  // comparisons happen in distance units
  double scale;     // same value in the requested convention
  bool coned;
};

Cutoff resolve_cutoff(const DistanceMatrix& dm, const RipsOptions& options) {
  if (options.max_dim < 0 || options.max_dim > kMaxHomologyDim)
    throw DataError("max_dim " + std::to_string(options.max_dim) +
                    " unsupported (allowed 0.." + std::to_string(kMaxHomologyDim) + ")");
  if (dm.size() > kMaxPoints)
    throw DataError("Rips filtrations support at most " + std::to_string(kMaxPoints) +
                    " points");
  const double factor = options.scale == Scale::radius ? 0.5 : 1.0;
  const double enclosing = enclosing_radius(dm);
  if (!options.threshold) return {enclosing, enclosing * factor, true};
  const double t = *options.threshold;
  if (std::isnan(t) || t < 0.0) throw DataError("threshold must be nonnegative");
  const double diameter = options.scale == Scale::radius ? 2.0 * t : t;
  return {diameter, t, diameter >= enclosing};
}

// Calls emit(dim, vertices, diameter) for every clique of dimension <= top
// whose diameter is within the cutoff.
template <typename Emit>
void enumerate_cliques(const DistanceMatrix& dm, double cutoff, int top, Emit&& emit) {
  const std::size_t n = dm.size();
  std::vector<std::uint8_t> adj(n * n, 0);
  std::vector<std::vector<std::uint32_t>> up(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dm(i, j) <= cutoff) {
        adj[i * n + j] = adj[j * n + i] = 1;
        up[i].push_back(static_cast<std::uint32_t>(j));
      }
    }
  }
  std::array<std::uint32_t, 4> v{};
  for (std::uint32_t i = 0; i < n; ++i) {
    v[0] = i;
    emit(0, v, 0.0);
  }
  if (top < 1) return;
  for (std::uint32_t i = 0; i < n; ++i) {
    v[0] = i;
    for (const std::uint32_t j : up[i]) {
      v[1] = j;
      const double d1 = dm(i, j);
      emit(1, v, d1);
      if (top < 2) continue;
      for (const std::uint32_t k : up[j]) {
        if (!adj[std::size_t{i} * n + k]) continue;
        v[2] = k;
        const double d2 = std::max({d1, dm(i, k), dm(j, k)});
        emit(2, v, d2);
        if (top < 3) continue;
        for (const std::uint32_t l : up[k]) {
          if (!adj[std::size_t{i} * n + l] || !adj[std::size_t{j} * n + l]) continue;
          v[3] = l;
          emit(3, v, std::max({d2, dm(i, l), dm(j, l), dm(k, l)}));
        }
      }
    }
  }
}

std::array<std::size_t, 4> count_cliques(const DistanceMatrix& dm, double cutoff, int top) {
  std::array<std::size_t, 4> counts{};
  enumerate_cliques(dm, cutoff, top,
                    [&](int dim, const std::array<std::uint32_t, 4>&, double) { ++counts[dim]; });
  return counts;
}

std::size_t bytes_for(const std::array<std::size_t, 4>& counts, std::size_t n, int max_dim) {
  constexpr std::size_t kEntry = 16;  // value + key
  constexpr std::size_t kLookup = 16;
  std::size_t bytes = n * n * (1 + sizeof(double));  // adjacency and edge values
  for (int d = 0; d <= max_dim + 1; ++d) bytes += counts[d] * kEntry;
  for (int d = 0; d <= max_dim; ++d) bytes += counts[d] * kLookup;
  return bytes;
}

}  // namespace

Filtration::Filtration(std::size_t n, int max_dim, Scale scale, double threshold, bool coned)
    : n_(n), max_dim_(max_dim), scale_(scale), threshold_(threshold), coned_(coned) {}

std::size_t Filtration::size() const {
  std::size_t total = 0;
  for (const auto& e : entries_) total += e.size();
  return total;
}

std::uint64_t Filtration::encode(std::span<const std::uint32_t> vertices) const {
  std::uint64_t key = 0;
  for (const std::uint32_t v : vertices) key = key * n_ + v;
  return key;
}

FiltrationSimplex Filtration::simplex(int dim, std::size_t index) const {
  return decode(dim, entries_.at(dim).at(index));
}

FiltrationSimplex Filtration::decode(int dim, const Cell& cell) const {
  FiltrationSimplex s;
  s.dimension = dim;
  s.value = cell.value;
  std::uint64_t key = cell.key;
  for (int i = dim; i >= 0; --i) {
    s.vertices[i] = static_cast<std::uint32_t>(key % n_);
    key /= n_;
  }
  return s;
}

std::optional<std::size_t> Filtration::index_of(int dim,
                                                std::span<const std::uint32_t> vertices) const {
  if (dim < 0 || dim > max_dim_ || vertices.size() != static_cast<std::size_t>(dim) + 1)
    return std::nullopt;
  return index_of_key(dim, encode(vertices));
}

std::optional<std::size_t> Filtration::index_of_key(int dim, std::uint64_t key) const {
  if (dim < 0 || dim > kMaxHomologyDim + 1) return std::nullopt;
  const auto& table = lookup_[dim];
  const auto it = std::lower_bound(table.begin(), table.end(), key,
                                   [](const KeyIndex& a, std::uint64_t k) { return a.key < k; });
  if (it == table.end() || it->key != key) return std::nullopt;
  return it->index;
}

void Filtration::build_lookup(int top) {
  for (int d = 0; d <= top; ++d) {
    auto& table = lookup_[d];
    table.resize(entries_[d].size());
    for (std::size_t i = 0; i < table.size(); ++i)
      table[i] = {entries_[d][i].key, static_cast<std::uint32_t>(i)};
    std::sort(table.begin(), table.end(),
              [](const KeyIndex& a, const KeyIndex& b) { return a.key < b.key; });
  }
}

void Filtration::cofacets(int dim, const Cell& cell, std::vector<Cell>& out) const {
  if (dim < 0 || dim > max_dim_) return;
  std::array<std::uint32_t, 4> v{};
  {
    std::uint64_t key = cell.key;
    for (int i = dim; i >= 0; --i) {
      v[i] = static_cast<std::uint32_t>(key % n_);
      key /= n_;
    }
  }
  const int size = dim + 1;
  std::array<std::uint32_t, 4> joined{};
  int pos = 0;  // number of simplex vertices below the candidate
  for (std::uint32_t w = 0; w < n_; ++w) {
    if (pos < size && v[pos] == w) {
      ++pos;
      continue;
    }
    double value = cell.value;
    bool present = true;
    for (int i = 0; i < size; ++i) {
      const double e = edge_[std::size_t{w} * n_ + v[i]];
      if (std::isinf(e)) {
        present = false;
        break;
      }
      value = std::max(value, e);
    }
    if (!present) continue;
    for (int i = 0; i <= size; ++i) joined[i] = i < pos ? v[i] : (i == pos ? w : v[i - 1]);
    const std::uint64_t key = encode(std::span<const std::uint32_t>(joined.data(), size + 1));
    if (clique_) {
      out.push_back({value, key});
    } else if (const auto idx = index_of_key(dim + 1, key)) {
      out.push_back(entries_[dim + 1][*idx]);
    }
  }
}

std::vector<FiltrationSimplex> Filtration::ordered() const {
  std::vector<FiltrationSimplex> out;
  out.reserve(size());
  std::array<std::size_t, 4> pos{};
  const int top = max_dim_ + 1;
  while (true) {
    int best = -1;
    for (int d = 0; d <= top; ++d) {
      if (pos[d] >= entries_[d].size()) continue;
      if (best < 0) {
        best = d;
        continue;
      }
      const Cell& a = entries_[d][pos[d]];
      const Cell& b = entries_[best][pos[best]];
      if (a.value < b.value) best = d;  // equal values keep the lower dimension
    }
    if (best < 0) break;
    out.push_back(simplex(best, pos[best]++));
  }
  return out;
}

void Filtration::write_csv(std::ostream& out) const {
  out << "value,dimension,vertices\n";
  for (const auto& s : ordered()) {
    out << io::format_double(s.value) << ',' << s.dimension << ',';
    for (int i = 0; i <= s.dimension; ++i) out << (i ? " " : "") << s.vertices[i];
    out << '\n';
  }
}

Filtration Filtration::from_simplices(std::size_t point_count, int max_dim, Scale scale,
                                      double threshold,
                                      std::span<const FiltrationSimplex> simplices) {
  if (max_dim < 0 || max_dim > kMaxHomologyDim)
    throw DataError("max_dim " + std::to_string(max_dim) + " unsupported");
  if (point_count == 0 || point_count > kMaxPoints)
    throw DataError("filtration point count out of range");
  Filtration f(point_count, max_dim, scale, threshold, false);

  std::unordered_map<std::uint64_t, double> seen[4];
  const FiltrationSimplex* prev = nullptr;
  for (const auto& s : simplices) {
    const auto verts = s.vertex_span();
    const std::string name = describe(verts);
    if (s.dimension < 0 || s.dimension > max_dim + 1)
      throw DataError("simplex " + name + " has dimension outside 0.." +
                      std::to_string(max_dim + 1));
    if (!std::isfinite(s.value)) throw DataError("simplex " + name + " has a non-finite value");
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (verts[i] >= point_count)
        throw DataError("simplex " + name + " references a vertex out of range");
      if (i > 0 && verts[i] <= verts[i - 1])
        throw DataError("simplex " + name + " vertices are not strictly increasing");
    }
    if (prev) {
      const auto a = std::make_tuple(prev->value, prev->dimension);
      const auto b = std::make_tuple(s.value, s.dimension);
      const bool ordered =
          a < b || (a == b && std::lexicographical_compare(
                                  prev->vertex_span().begin(), prev->vertex_span().end(),
                                  verts.begin(), verts.end()));
      if (!ordered) throw DataError("simplex " + name + " is out of filtration order");
    }
    if (s.dimension > 0) {
      std::array<std::uint32_t, 3> facet{};
      for (int drop = 0; drop <= s.dimension; ++drop) {
        std::size_t m = 0;
        for (int i = 0; i <= s.dimension; ++i)
          if (i != drop) facet[m++] = verts[i];
        const std::span<const std::uint32_t> fs(facet.data(), m);
        const auto it = seen[s.dimension - 1].find(f.encode(fs));
        if (it == seen[s.dimension - 1].end())
          throw DataError("simplex " + name + " appears before its face " + describe(fs));
        if (it->second > s.value)
          throw DataError("simplex " + name + " has a smaller value than its face " +
                          describe(fs));
      }
    }
    seen[s.dimension].emplace(f.encode(verts), s.value);
    f.entries_[s.dimension].push_back({s.value, f.encode(verts)});
    prev = &s;
  }
  f.edge_.assign(point_count * point_count, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < point_count; ++i) f.edge_[i * point_count + i] = 0.0;
  for (const auto& e : f.entries_[1]) {
    const std::size_t a = e.key / point_count, b = e.key % point_count;
    f.edge_[a * point_count + b] = f.edge_[b * point_count + a] = e.value;
  }
  f.build_lookup(max_dim + 1);
  return f;
}

std::size_t estimate_filtration_bytes(const DistanceMatrix& dm, const RipsOptions& options) {
  const Cutoff cutoff = resolve_cutoff(dm, options);
  return bytes_for(count_cliques(dm, cutoff.diameter, options.max_dim + 1), dm.size(),
                   options.max_dim);
}

Filtration build_filtration(const DistanceMatrix& dm, const RipsOptions& options) {
  const Cutoff cutoff = resolve_cutoff(dm, options);
  const int top = options.max_dim + 1;
  const auto counts = count_cliques(dm, cutoff.diameter, top);
  const std::size_t bytes = bytes_for(counts, dm.size(), options.max_dim);
  if (bytes > options.memory_budget)
    throw BudgetError("Rips filtration needs about " + std::to_string(bytes >> 20) +
                      " MiB, over the budget of " +
                      std::to_string(options.memory_budget >> 20) +
                      " MiB; lower max_dim, set a threshold, or raise the budget");

  Filtration f(dm.size(), options.max_dim, options.scale, cutoff.scale, cutoff.coned);
  for (int d = 0; d <= top; ++d) f.entries_[d].reserve(counts[d]);
  const double factor = options.scale == Scale::radius ? 0.5 : 1.0;
  enumerate_cliques(dm, cutoff.diameter, top,
                    [&](int dim, const std::array<std::uint32_t, 4>& v, double diameter) {
                      const std::span<const std::uint32_t> verts(v.data(), dim + 1);
                      f.entries_[dim].push_back({diameter * factor, f.encode(verts)});
                    });
  for (int d = 0; d <= top; ++d) {
    std::sort(f.entries_[d].begin(), f.entries_[d].end(), [](const Filtration::Cell& a, const Filtration::Cell& b) {
      return a.value < b.value || (a.value == b.value && a.key < b.key);
    });
  }
  const std::size_t n = dm.size();
  f.clique_ = true;
  f.edge_.assign(n * n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dm(i, j) <= cutoff.diameter) f.edge_[i * n + j] = dm(i, j) * factor;
  f.build_lookup(options.max_dim);
  return f;
}

}  // namespace neurotopo
