#include "neurotopo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>
#include <set>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"
#include "neurotopo/parallel.hpp"
#include "neurotopo/persistence.hpp"

namespace neurotopo {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t key_seed(std::uint64_t seed, const CloudKey& key) {
  return splitmix64(seed ^ fnv1a(key.model + '\x1f' + key.layer + '\x1f' + key.cls));
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  if (xs.empty()) return m;
  for (const double x : xs) m.mean += x;
  m.mean /= double(xs.size());
  if (xs.size() > 1 && std::isfinite(m.mean)) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / double(xs.size() - 1));
  } else if (!std::isfinite(m.mean)) {
    m.std = m.mean;
  }
  return m;
}

std::string describe(const CloudKey& key) {
  return key.model + "/" + key.layer + "/" + key.cls;
}

}  // namespace

PipelineResult run_pipeline(const PointCloud& input, const PipelineOptions& options) {
  PipelineResult result;
  PointCloud cloud = options.normalize ? normalize_cloud(input) : input;
  result.kept = cloud.size();
  if (options.lof) {
    if (cloud.size() < 2) {
      result.warnings.push_back("LOF skipped: cloud has a single point");
    } else {
      std::size_t k = options.lof->k;
      if (cloud.size() <= k) {
        k = cloud.size() - 1;
        result.warnings.push_back("LOF k lowered from " + std::to_string(options.lof->k) +
                                  " to " + std::to_string(k) + " for a cloud of " +
                                  std::to_string(cloud.size()) + " points");
      }
      auto [filtered, report] = filter_outliers(cloud, k, options.lof->threshold);
      result.removed = report.flagged.size();
      cloud = std::move(filtered);
      result.kept = cloud.size();
    }
  }
  const auto filtration = build_filtration(distance_matrix(cloud), options.rips);
  result.diagram = compute_persistence(filtration, {options.include_zero_lifetime});
  result.diagram.meta = input.meta();
  return result;
}

std::vector<std::size_t> parse_size_range(std::string_view text) {
  auto number = [&](std::string_view part) {
    const auto v = io::parse_int(part);
    if (!v || *v < 1) throw DataError("invalid size '" + std::string(part) + "' in '" +
                                      std::string(text) + "'");
    return static_cast<std::size_t>(*v);
  };
  std::vector<std::size_t> sizes;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = io::split(text, ':');
    if (parts.size() != 3) throw DataError("size range must be start:stop:step");
    const auto start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (stop < start) throw DataError("size range stop is below start");
    for (std::size_t s = start; s <= stop; s += step) sizes.push_back(s);
  } else {
    for (const auto part : io::split(text, ',')) sizes.push_back(number(part));
  }
  return sizes;
}

// ---------------------------------------------------------------------------

CloudSet CloudSet::load(const std::filesystem::path& manifest) {
  const auto lines = io::read_lines(manifest);
  if (lines.empty() || io::trim(lines[0]) != "model,layer,class,path")
    throw DataError(manifest.string() + ": expected header 'model,layer,class,path'");
  const auto base = manifest.parent_path();
  CloudSet set;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto line = io::trim(lines[li]);
    if (line.empty()) continue;
    const std::string where = manifest.string() + " line " + std::to_string(li + 1) + ": ";
    const auto f = io::split(line);
    if (f.size() != 4) throw DataError(where + "expected 4 fields");
    CloudKey key{std::string(io::trim(f[0])), std::string(io::trim(f[1])),
                 std::string(io::trim(f[2]))};
    std::filesystem::path path(std::string(io::trim(f[3])));
    if (path.is_relative()) path = base / path;
    if (!std::filesystem::exists(path))
      throw DataError(where + "cloud file " + path.string() + " does not exist");
    if (set.clouds_.count(key)) throw DataError(where + "duplicate key " + describe(key));
    auto cloud = load_cloud(path, format_from_path(path));
    set.add(key, cloud.with_meta({key.model, key.layer, key.cls}));
  }
  if (set.clouds_.empty()) throw DataError(manifest.string() + ": manifest lists no clouds");
  return set;
}

void CloudSet::add(CloudKey key, PointCloud cloud) {
  if (clouds_.count(key)) throw DataError("duplicate cloud key " + describe(key));
  SourceMeta meta{key.model, key.layer, key.cls};
  clouds_.emplace(std::move(key), cloud.with_meta(std::move(meta)));
}

std::vector<std::string> CloudSet::models() const {
  std::set<std::string> names;
  for (const auto& [key, cloud] : clouds_) names.insert(key.model);
  return {names.begin(), names.end()};
}

// ---------------------------------------------------------------------------

SubsampleTable subsample_study(const PointCloud& cloud, std::span<const std::size_t> sizes,
                               std::uint64_t seed, const PipelineOptions& options,
                               unsigned jobs) {
  if (sizes.empty()) throw DataError("subsample study needs at least one size");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1 || sizes[i] > cloud.size())
      throw DataError("subsample size " + std::to_string(sizes[i]) + " exceeds the cloud size " +
                      std::to_string(cloud.size()));
    if (i > 0 && sizes[i] <= sizes[i - 1])
      throw DataError("subsample sizes must be strictly ascending");
  }

  // item 0 is the baseline, item i the subsample of sizes[i - 1]
  std::vector<PipelineResult> results(sizes.size() + 1);
  parallel_for(results.size(), jobs, [&](std::size_t item) {
    results[item] = item == 0 ? run_pipeline(cloud, options)
                              : run_pipeline(subsample(cloud, sizes[item - 1], seed), options);
  });

  SubsampleTable table;
  table.max_dim = options.rips.max_dim;
  const auto& baseline = results[0].diagram;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto& r = results[i + 1];
    SubsampleRow row;
    row.size = sizes[i];
    row.kept = r.kept;
    row.removed = r.removed;
    for (int k = 0; k <= table.max_dim; ++k) {
      std::size_t count = 0;
      for (const auto& p : r.diagram.pairs)
        if (p.dim == k && !p.essential()) ++count;
      row.counts.push_back(count);
      row.distances.push_back(bottleneck_distance(r.diagram, baseline, k));
    }
    table.rows.push_back(std::move(row));
    for (const auto& w : r.warnings)
      table.warnings.push_back("size " + std::to_string(sizes[i]) + ": " + w);
  }
  for (const auto& w : results[0].warnings) table.warnings.insert(table.warnings.begin(), "baseline: " + w);
  return table;
}

void write_subsample_csv(const SubsampleTable& table, std::ostream& out) {
  out << "size,kept,removed";
  for (int k = 0; k <= table.max_dim; ++k) out << ",count_h" << k << ",distance_h" << k;
  out << '\n';
  for (const auto& r : table.rows) {
    out << r.size << ',' << r.kept << ',' << r.removed;
    for (std::size_t k = 0; k < r.counts.size(); ++k)
      out << ',' << r.counts[k] << ',' << io::format_double(r.distances[k]);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

struct HalfJob {
  CloudKey key;
  PointCloud cloud;
  bool with_lof;
};

}  // namespace

LofComparison lof_comparison(const CloudSet& set, LofSettings lof, const PipelineOptions& base,
                             std::size_t pair_budget, std::uint64_t seed, unsigned jobs) {
  LofComparison result;
  // (model, layer) -> usable class keys, in key order
  std::map<std::pair<std::string, std::string>, std::vector<CloudKey>> layers;
  for (const auto& [key, cloud] : set.clouds()) {
    if (cloud.size() < 4) {
      result.warnings.push_back("skipping " + describe(key) + ": fewer than 4 points");
      continue;
    }
    layers[{key.model, key.layer}].push_back(key);
  }
  for (const auto& [layer, keys] : layers) {
    if (keys.size() < 2)
      throw DataError("LOF comparison needs at least two usable classes in " + layer.first +
                      "/" + layer.second);
  }
  if (layers.empty()) throw DataError("LOF comparison found no usable classes");

  // Two halves per class, each with LOF off and on.
  std::vector<HalfJob> work;
  for (const auto& [layer, keys] : layers) {
    for (const auto& key : keys) {
      const auto& cloud = set.clouds().at(key);
      const auto order = shuffled_indices(cloud.size(), key_seed(seed, key));
      const std::size_t half = cloud.size() / 2;
      std::vector<std::size_t> first(order.begin(), order.begin() + static_cast<long>(half));
      std::vector<std::size_t> second(order.begin() + static_cast<long>(half), order.end());
      std::sort(first.begin(), first.end());
      std::sort(second.begin(), second.end());
      for (const bool with_lof : {false, true}) {
        work.push_back({key, cloud.select(first), with_lof});
        work.push_back({key, cloud.select(second), with_lof});
      }
    }
  }
  std::vector<PipelineResult> diagrams(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    auto options = base;
    options.lof = work[i].with_lof ? std::optional<LofSettings>(lof) : std::nullopt;
    diagrams[i] = run_pipeline(work[i].cloud, options);
  });
  for (std::size_t i = 0; i < work.size(); ++i)
    for (const auto& w : diagrams[i].warnings)
      result.warnings.push_back(describe(work[i].key) + ": " + w);

  // Index of the first half of each class: 4 jobs per class, off-halves then on-halves.
  std::size_t class_offset = 0;
  for (const auto& [layer, keys] : layers) {
    const std::size_t m = 2 * keys.size();  // diagrams per LOF setting
    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) all.emplace_back(i, j);
    if (pair_budget > 0 && all.size() > pair_budget) {
      const auto keep = subsample_indices(all.size(), pair_budget,
                                          key_seed(seed, {layer.first, layer.second, ""}));
      std::vector<std::pair<std::size_t, std::size_t>> sampled;
      for (const auto idx : keep) sampled.push_back(all[idx]);
      all = std::move(sampled);
    }
    for (const bool with_lof : {false, true}) {
      // diagram index within this layer -> position in `diagrams`
      auto at = [&](std::size_t local) -> const PersistenceDiagram& {
        const std::size_t cls = local / 2, half = local % 2;
        return diagrams[class_offset + 4 * cls + (with_lof ? 2 : 0) + half].diagram;
      };
      std::vector<std::pair<std::size_t, std::size_t>> pairs = all;
      const std::size_t all_count = pairs.size();
      for (std::size_t c = 0; c < keys.size(); ++c) pairs.emplace_back(2 * c, 2 * c + 1);
      const int max_dim = base.rips.max_dim;
      std::vector<double> dist(pairs.size() * std::size_t(max_dim + 1));
      parallel_for(pairs.size(), jobs, [&](std::size_t p) {
        for (int k = 0; k <= max_dim; ++k)
          dist[p * std::size_t(max_dim + 1) + std::size_t(k)] =
              bottleneck_distance(at(pairs[p].first), at(pairs[p].second), k);
      });
      for (int k = 0; k <= max_dim; ++k) {
        std::vector<double> all_d, class_d;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
          const double d = dist[p * std::size_t(max_dim + 1) + std::size_t(k)];
          (p < all_count ? all_d : class_d).push_back(d);
        }
        const auto a = mean_std(all_d), c = mean_std(class_d);
        LofComparisonRow row{layer.first, layer.second, k, all_d.size(), a.mean, a.std,
                             class_d.size(), c.mean, c.std};
        (with_lof ? result.with_lof : result.without_lof).push_back(std::move(row));
      }
    }
    class_offset += 4 * keys.size();
  }
  return result;
}

namespace {

void write_lof_row(const LofComparisonRow& r, std::ostream& out) {
  io::require_plain_label(r.model);
  io::require_plain_label(r.layer);
  out << r.model << ',' << r.layer << ',' << r.dim << ',' << r.all_pairs << ','
      << io::format_double(r.all_mean) << ',' << io::format_double(r.all_std) << ','
      << r.class_pairs << ',' << io::format_double(r.class_mean) << ','
      << io::format_double(r.class_std) << '\n';
}

constexpr const char* kLofHeader =
    "model,layer,dim,all_pairs,all_mean,all_std,class_pairs,class_mean,class_std";

}  // namespace

void write_lof_table(std::span<const LofComparisonRow> rows, std::ostream& out) {
  out << kLofHeader << '\n';
  for (const auto& r : rows) write_lof_row(r, out);
}

void write_lof_comparison_csv(const LofComparison& result, std::ostream& out) {
  out << "lof," << kLofHeader << '\n';
  for (const auto& r : result.without_lof) {
    out << "off,";
    write_lof_row(r, out);
  }
  for (const auto& r : result.with_lof) {
    out << "on,";
    write_lof_row(r, out);
  }
}

// ---------------------------------------------------------------------------

std::vector<LayerHeatmap> layer_heatmap(const CloudSet& set, const std::string& model_name,
                                        std::span<const std::string> layer_order,
                                        const PipelineOptions& options, unsigned jobs) {
  if (layer_order.empty()) throw DataError("heatmap needs at least one layer");
  std::string model = model_name;
  if (model.empty()) {
    const auto models = set.models();
    if (models.size() != 1)
      throw DataError("the cloud set holds several models; choose one for the heatmap");
    model = models.front();
  }
  std::set<std::string> classes;
  for (const auto& [key, cloud] : set.clouds())
    if (key.model == model &&
        std::find(layer_order.begin(), layer_order.end(), key.layer) != layer_order.end())
      classes.insert(key.cls);
  if (classes.empty()) throw DataError("no clouds for model '" + model + "' at the listed layers");

  std::vector<CloudKey> keys;
  std::string gaps;
  for (const auto& cls : classes) {
    for (const auto& layer : layer_order) {
      CloudKey key{model, layer, cls};
      if (!set.clouds().count(key)) gaps += " (" + layer + ", " + cls + ")";
      keys.push_back(std::move(key));
    }
  }
  if (!gaps.empty()) throw DataError("heatmap is missing (layer, class) cells:" + gaps);

  std::vector<PipelineResult> diagrams(keys.size());
  parallel_for(keys.size(), jobs, [&](std::size_t i) {
    diagrams[i] = run_pipeline(set.clouds().at(keys[i]), options);
  });

  const std::size_t L = layer_order.size();
  const int max_dim = options.rips.max_dim;
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> work;  // (class, i, j)
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = i + 1; j < L; ++j) work.emplace_back(c, i, j);
  std::vector<double> dist(work.size() * std::size_t(max_dim + 1));
  parallel_for(work.size(), jobs, [&](std::size_t w) {
    const auto [c, i, j] = work[w];
    for (int k = 0; k <= max_dim; ++k)
      dist[w * std::size_t(max_dim + 1) + std::size_t(k)] = bottleneck_distance(
          diagrams[c * L + i].diagram, diagrams[c * L + j].diagram, k);
  });

  std::vector<LayerHeatmap> maps;
  for (int k = 0; k <= max_dim; ++k) {
    LayerHeatmap h;
    h.dim = k;
    h.layers.assign(layer_order.begin(), layer_order.end());
    h.classes = classes.size();
    h.values.assign(L * L, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < L; ++i) h.values[i * L + i] = 0.0;
    std::vector<double> sums(L * L, 0.0);
    for (std::size_t w = 0; w < work.size(); ++w) {
      const auto [c, i, j] = work[w];
      sums[i * L + j] += dist[w * std::size_t(max_dim + 1) + std::size_t(k)];
    }
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = i + 1; j < L; ++j)
        h.values[i * L + j] = sums[i * L + j] / double(classes.size());
    maps.push_back(std::move(h));
  }
  return maps;
}

void write_heatmap_csv(const LayerHeatmap& h, std::ostream& out) {
  const std::size_t L = h.layers.size();
  for (const auto& l : h.layers) {
    io::require_plain_label(l);
    out << ',' << l;
  }
  out << '\n';
  for (std::size_t i = 0; i < L; ++i) {
    out << h.layers[i];
    for (std::size_t j = 0; j < L; ++j) {
      out << ',';
      if (j >= i) out << io::format_double(h.values[i * L + j]);
    }
    out << '\n';
  }
}

LayerHeatmap read_heatmap_csv(std::istream& in) {
  std::vector<std::string> lines;
  for (auto& l : io::read_lines(in))
    if (!io::trim(l).empty()) lines.push_back(std::move(l));
  if (lines.empty()) throw DataError("heatmap CSV is empty");
  LayerHeatmap h;
  const auto header = io::split(lines[0]);
  for (std::size_t i = 1; i < header.size(); ++i) h.layers.emplace_back(io::trim(header[i]));
  const std::size_t L = h.layers.size();
  if (lines.size() != L + 1) throw DataError("heatmap CSV row count does not match its header");
  h.values.assign(L * L, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < L; ++i) {
    const auto f = io::split(lines[i + 1]);
    if (f.size() != L + 1) throw DataError("heatmap CSV line " + std::to_string(i + 2) +
                                           ": wrong number of fields");
    for (std::size_t j = 0; j < L; ++j) {
      if (io::trim(f[j + 1]).empty()) continue;
      const auto v = io::parse_double(f[j + 1]);
      if (!v) throw DataError("heatmap CSV line " + std::to_string(i + 2) + ": invalid value");
      h.values[i * L + j] = *v;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------

ClassMatrixResult class_matrix_and_embedding(const CloudSet& set, const std::string& layer,
                                             int dim, const PipelineOptions& options,
                                             unsigned jobs) {
  if (dim < 0 || dim > options.rips.max_dim)
    throw DataError("dimension " + std::to_string(dim) + " is outside 0..max_dim");
  std::vector<CloudKey> keys;
  for (const auto& [key, cloud] : set.clouds())
    if (key.layer == layer) keys.push_back(key);
  if (keys.size() < 3)
    throw DataError("layer '" + layer + "' has " + std::to_string(keys.size()) +
                    " clouds; at least 3 are needed");
  std::vector<PersistenceDiagram> diagrams(keys.size());
  parallel_for(keys.size(), jobs, [&](std::size_t i) {
    diagrams[i] = run_pipeline(set.clouds().at(keys[i]), options).diagram;
  });
  std::vector<std::string> labels;
  for (const auto& key : keys) labels.push_back(key.model + "/" + key.cls);
  ClassMatrixResult result;
  result.matrix = pairwise_distances(diagrams, labels, dim, jobs);
  result.embedding = classical_mds(result.matrix);
  return result;
}

}  // namespace neurotopo
