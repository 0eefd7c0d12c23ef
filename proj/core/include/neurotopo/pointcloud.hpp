#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace neurotopo {

/// Free-form description of where a cloud came from.
struct SourceMeta {
  std::string model;
  std::string layer;
  std::string cls;

  bool operator==(const SourceMeta&) const = default;
};

/// n points in R^d stored row-major. Every coordinate is finite; n, d >= 1.
class PointCloud {
 public:
  PointCloud(std::size_t n, std::size_t d, std::vector<double> values,
             std::vector<std::string> labels = {}, SourceMeta meta = {});

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * d_, d_};
  }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const SourceMeta& meta() const { return meta_; }

  /// Rows at the given indices, in the given order.
  PointCloud select(std::span<const std::size_t> rows) const;

  PointCloud with_meta(SourceMeta meta) const;

  bool operator==(const PointCloud&) const = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> values_;
  std::vector<std::string> labels_;
  SourceMeta meta_;
};

/// Symmetric n x n Euclidean distances with a zero diagonal.
class DistanceMatrix {
 public:
  /// Validates symmetry, zero diagonal, and finite nonnegative entries.
  DistanceMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return values_[i * n_ + j];
  }
  const std::vector<double>& values() const { return values_; }

 private:
  struct Unchecked {};
  DistanceMatrix(Unchecked, std::size_t n, std::vector<double> values)
      : n_(n), values_(std::move(values)) {}
  friend DistanceMatrix distance_matrix(const PointCloud&, unsigned);

  std::size_t n_;
  std::vector<double> values_;
};

enum class CloudFormat { csv, tdac };

struct CsvOptions {
  bool header = false;
};

/// ".csv" maps to csv; everything else is treated as tdac-binary.
CloudFormat format_from_path(const std::filesystem::path& path);

PointCloud read_cloud_csv(std::istream& in, CsvOptions options = {});
PointCloud read_cloud_tdac(std::span<const unsigned char> bytes);
std::string encode_cloud_tdac(const PointCloud& cloud);
void write_cloud_csv(const PointCloud& cloud, std::ostream& out);

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format,
                      CsvOptions options = {});
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                CloudFormat format);

/// Per-row z-scoring with the population standard deviation.
PointCloud normalize_cloud(const PointCloud& cloud);

DistanceMatrix distance_matrix(const PointCloud& cloud, unsigned jobs = 1);

/// k distinct indices drawn uniformly without replacement, ascending.
/// Depends only on (n, k, seed).
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k,
                                           std::uint64_t seed);

/// Uniform random permutation of [0, n) determined by the seed.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

PointCloud subsample(const PointCloud& cloud, std::size_t k,
                     std::uint64_t seed);

}  // namespace neurotopo
