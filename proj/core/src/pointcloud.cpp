#include "neurotopo/pointcloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"
#include "neurotopo/parallel.hpp"

namespace neurotopo {

PointCloud::PointCloud(std::size_t n, std::size_t d, std::vector<double> values,
                       std::vector<std::string> labels, SourceMeta meta)
    : n_(n), d_(d), values_(std::move(values)), labels_(std::move(labels)),
      meta_(std::move(meta)) {
  if (n_ == 0 || d_ == 0) throw DataError("point cloud must have n >= 1 and d >= 1");
  if (values_.size() != n_ * d_)
    throw DataError("point cloud has " + std::to_string(values_.size()) +
                    " values, expected " + std::to_string(n_ * d_));
  if (!labels_.empty() && labels_.size() != n_)
    throw DataError("point cloud has " + std::to_string(labels_.size()) +
                    " labels for " + std::to_string(n_) + " points");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]))
      throw DataError("non-finite value at row " + std::to_string(i / d_) +
                      ", column " + std::to_string(i % d_));
  }
}

PointCloud PointCloud::select(std::span<const std::size_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size() * d_);
  std::vector<std::string> labels;
  for (const std::size_t r : rows) {
    if (r >= n_) throw DataError("row index " + std::to_string(r) + " out of range");
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
    if (!labels_.empty()) labels.push_back(labels_[r]);
  }
  return PointCloud(rows.size(), d_, std::move(values), std::move(labels), meta_);
}

PointCloud PointCloud::with_meta(SourceMeta meta) const {
  auto copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_)
    throw DataError("distance matrix must be square");
  for (std::size_t i = 0; i < n_; ++i) {
    if (values_[i * n_ + i] != 0.0)
      throw DataError("distance matrix diagonal entry " + std::to_string(i) +
                      " is not zero");
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double v = values_[i * n_ + j];
      if (!std::isfinite(v) || v < 0.0)
        throw DataError("distance matrix entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ") is negative or non-finite");
      if (v != values_[j * n_ + i])
        throw DataError("distance matrix is not symmetric at (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
}

CloudFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? CloudFormat::csv : CloudFormat::tdac;
}

PointCloud read_cloud_csv(std::istream& in, CsvOptions options) {
  const auto lines = io::read_lines(in);
  std::vector<double> values;
  std::size_t d = 0;
  std::size_t n = 0;
  bool header_pending = options.header;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto line = io::trim(lines[li]);
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = io::split(line);
    if (d == 0) d = fields.size();
    if (fields.size() != d)
      throw DataError("line " + std::to_string(li + 1) + ": expected " +
                      std::to_string(d) + " values, found " +
                      std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = io::parse_double(fields[c]);
      if (!v)
        throw DataError("line " + std::to_string(li + 1) + ": cannot parse '" +
                        std::string(io::trim(fields[c])) + "' as a number");
      if (!std::isfinite(*v))
        throw DataError("line " + std::to_string(li + 1) +
                        ": non-finite value at row " + std::to_string(n) +
                        ", column " + std::to_string(c));
      values.push_back(*v);
    }
    ++n;
  }
  if (n == 0) throw DataError("cloud file contains no points");
  return PointCloud(n, d, std::move(values));
}

namespace {

constexpr char kMagic[4] = {'T', 'D', 'A', 'C'};
constexpr std::uint32_t kTdacVersion = 1;
constexpr std::size_t kTdacHeader = 4 + 4 + 8 + 8;

template <typename T>
T load_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

template <typename T>
void store_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

PointCloud read_cloud_tdac(std::span<const unsigned char> bytes) {
  if (bytes.size() < kTdacHeader) throw DataError("tdac file truncated: header incomplete");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("tdac file: bad magic bytes");
  const auto version = load_le<std::uint32_t>(bytes.data() + 4);
  if (version != kTdacVersion)
    throw DataError("tdac file: unsupported version " + std::to_string(version));
  const auto n = load_le<std::uint64_t>(bytes.data() + 8);
  const auto d = load_le<std::uint64_t>(bytes.data() + 16);
  if (n == 0 || d == 0) throw DataError("tdac file: n and d must be positive");
  const std::uint64_t limit = (std::numeric_limits<std::uint64_t>::max() / 8) / d;
  if (n > limit) throw DataError("tdac file: n*d overflows");
  const std::uint64_t payload = n * d * 8;
  if (bytes.size() - kTdacHeader != payload)
    throw DataError("tdac file: payload has " +
                    std::to_string(bytes.size() - kTdacHeader) +
                    " bytes, header declares " + std::to_string(payload));
  std::vector<double> values(n * d);
  const unsigned char* p = bytes.data() + kTdacHeader;
  for (std::size_t i = 0; i < values.size(); ++i, p += 8) {
    values[i] = std::bit_cast<double>(load_le<std::uint64_t>(p));
    if (!std::isfinite(values[i]))
      throw DataError("tdac file: non-finite value at row " + std::to_string(i / d) +
                      ", column " + std::to_string(i % d));
  }
  return PointCloud(n, d, std::move(values));
}

std::string encode_cloud_tdac(const PointCloud& cloud) {
  std::string out(kMagic, 4);
  out.reserve(kTdacHeader + cloud.values().size() * 8);
  store_le<std::uint32_t>(out, kTdacVersion);
  store_le<std::uint64_t>(out, cloud.size());
  store_le<std::uint64_t>(out, cloud.dim());
  for (const double v : cloud.values()) store_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

void write_cloud_csv(const PointCloud& cloud, std::ostream& out) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto row = cloud.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << io::format_double(row[c]);
    }
    out << '\n';
  }
}

PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format,
                      CsvOptions options) {
  if (format == CloudFormat::csv) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    try {
      return read_cloud_csv(in, options);
    } catch (const DataError& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  try {
    return read_cloud_tdac(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                CloudFormat format) {
  if (format == CloudFormat::csv) {
    io::write_file_atomic(path, [&](std::ostream& out) { write_cloud_csv(cloud, out); });
  } else {
    io::write_file_atomic_binary(path, encode_cloud_tdac(cloud));
  }
}

PointCloud normalize_cloud(const PointCloud& cloud) {
  const std::size_t d = cloud.dim();
  std::vector<double> out(cloud.values().size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto row = cloud.row(i);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / double(d);
    double var = 0.0;
    for (const double x : row) var += (x - mean) * (x - mean);
    const double sigma = std::sqrt(var / double(d));
    if (!(sigma > 1e-12))
      throw DataError("constant activation vector at row " + std::to_string(i));
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] = (row[c] - mean) / sigma;
  }
  return PointCloud(cloud.size(), d, std::move(out), cloud.labels(), cloud.meta());
}

DistanceMatrix distance_matrix(const PointCloud& cloud, unsigned jobs) {
  const std::size_t n = cloud.size();
  std::vector<double> values(n * n, 0.0);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto a = cloud.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = cloud.row(j);
      double sum = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) {
        const double diff = a[c] - b[c];
        sum += diff * diff;
      }
      const double dist = std::sqrt(sum);
      values[i * n + j] = dist;
      values[j * n + i] = dist;
    }
  });
  return DistanceMatrix(DistanceMatrix::Unchecked{}, n, std::move(values));
}

namespace {

// Unbiased draw from [0, bound) using only raw mt19937_64 output, so the
// sequence is identical on every standard library.
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t reject_below = (0 - bound) % bound;
  while (true) {
    const std::uint64_t x = gen();
    if (x >= reject_below) return x % bound;
  }
}

std::vector<std::size_t> partial_shuffle(std::size_t n, std::size_t k,
                                         std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    const auto j = i + static_cast<std::size_t>(bounded(gen, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k,
                                           std::uint64_t seed) {
  if (k < 1 || k > n)
    throw DataError("subsample size " + std::to_string(k) + " outside [1, " +
                    std::to_string(n) + "]");
  auto idx = partial_shuffle(n, k, seed);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  return partial_shuffle(n, n, seed);
}

PointCloud subsample(const PointCloud& cloud, std::size_t k, std::uint64_t seed) {
  const auto idx = subsample_indices(cloud.size(), k, seed);
  return cloud.select(idx);
}

}  // namespace neurotopo
