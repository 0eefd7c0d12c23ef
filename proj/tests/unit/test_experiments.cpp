#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "neurotopo/error.hpp"
#include "neurotopo/experiments.hpp"
#include "oracles.hpp"

using namespace neurotopo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PipelineOptions plain(int max_dim = 1) {
  PipelineOptions o;
  o.normalize = false;
  o.rips.max_dim = max_dim;
  return o;
}

PointCloud noisy_circle(std::mt19937_64& rng, std::size_t n, double noise) {
  std::normal_distribution<double> g(0.0, noise);
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * std::numbers::pi * double(i) / double(n);
    v.push_back(std::cos(t) + g(rng));
    v.push_back(std::sin(t) + g(rng));
  }
  return PointCloud(n, 2, v);
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("neurotopo_exp_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("size ranges") {
  CHECK(parse_size_range("50:500:25").size() == 19);
  CHECK(parse_size_range("50:500:25").back() == 500);
  CHECK(parse_size_range("10,20,40") == std::vector<std::size_t>{10, 20, 40});
  CHECK(parse_size_range("5:5:1") == std::vector<std::size_t>{5});
  CHECK_THROWS_AS(parse_size_range("5:1:1"), DataError);
  CHECK_THROWS_AS(parse_size_range("1:5"), DataError);
  CHECK_THROWS_AS(parse_size_range("0,5"), DataError);
  CHECK_THROWS_AS(parse_size_range("a,5"), DataError);
}

TEST_CASE("pipeline normalizes, filters and labels") {
  std::mt19937_64 rng(1);
  auto cloud = oracle::gaussian_cloud(rng, 40, 6).with_meta({"m", "l", "c"});
  auto options = plain();
  options.normalize = true;
  options.lof = LofSettings{50, 1.5};
  const auto r = run_pipeline(cloud, options);
  CHECK(r.diagram.meta == cloud.meta());
  CHECK(r.kept + r.removed == 40);
  CHECK(r.warnings.size() == 1);
  std::size_t finite_h0 = 0;
  for (const auto& p : r.diagram.in_dim(0)) finite_h0 += !p.essential();
  CHECK(finite_h0 == r.kept - 1);
}

TEST_CASE("subsample study: single full-size row") {
  std::mt19937_64 rng(2);
  const auto cloud = oracle::gaussian_cloud(rng, 30, 3);
  const std::vector<std::size_t> sizes{30};
  const auto table = subsample_study(cloud, sizes, 7, plain(), 1);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].distances == std::vector<double>{0.0, 0.0});
  const auto base = run_pipeline(cloud, plain()).diagram;
  std::size_t h1 = 0;
  for (const auto& p : base.in_dim(1)) h1 += !p.essential();
  CHECK(table.rows[0].counts == std::vector<std::size_t>{29, h1});
}

TEST_CASE("subsample study: rows, H0 counts and determinism") {
  std::mt19937_64 rng(3);
  const auto cloud = oracle::gaussian_cloud(rng, 60, 4);
  const auto sizes = parse_size_range("10:60:10");
  auto options = plain();
  options.lof = LofSettings{5, 1.3};
  const auto a = subsample_study(cloud, sizes, 11, options, 1);
  const auto b = subsample_study(cloud, sizes, 11, options, 4);
  const auto c = subsample_study(cloud, sizes, 12, options, 2);
  REQUIRE(a.rows.size() == 6);
  for (const auto& row : a.rows) CHECK(row.counts[0] == row.size - 1 - row.removed);
  CHECK(a.rows.back().distances[0] == 0.0);
  CHECK(a.rows.back().distances[1] == 0.0);
  CHECK(c.rows.back().distances[0] == 0.0);
  std::ostringstream sa, sb;
  write_subsample_csv(a, sa);
  write_subsample_csv(b, sb);
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().rfind("size,kept,removed,count_h0,distance_h0,count_h1,distance_h1\n", 0) == 0);
}

TEST_CASE("subsample study errors") {
  std::mt19937_64 rng(4);
  const auto cloud = oracle::gaussian_cloud(rng, 10, 2);
  CHECK_THROWS_AS(subsample_study(cloud, std::vector<std::size_t>{11}, 1, plain()), DataError);
  CHECK_THROWS_AS(subsample_study(cloud, std::vector<std::size_t>{5, 4}, 1, plain()), DataError);
  CHECK_THROWS_AS(subsample_study(cloud, std::vector<std::size_t>{}, 1, plain()), DataError);
}

TEST_CASE("lof comparison: pair counts") {
  std::mt19937_64 rng(5);
  CloudSet set;
  set.add({"m", "L", "a"}, oracle::gaussian_cloud(rng, 24, 3));
  set.add({"m", "L", "b"}, oracle::gaussian_cloud(rng, 24, 3));
  const auto r = lof_comparison(set, {5, 1.5}, plain(), 0, 3, 2);
  REQUIRE(r.without_lof.size() == 2);
  for (const auto& row : r.without_lof) {
    CHECK(row.all_pairs == 6);
    CHECK(row.class_pairs == 2);
  }
  CHECK(r.with_lof.size() == 2);
}

TEST_CASE("lof comparison: infinite threshold changes nothing") {
  std::mt19937_64 rng(6);
  CloudSet set;
  for (const char* cls : {"a", "b", "c"}) set.add({"m", "L", cls}, oracle::gaussian_cloud(rng, 20, 3));
  const auto r = lof_comparison(set, {5, kInf}, plain(), 0, 9, 1);
  std::ostringstream off, on;
  write_lof_table(r.without_lof, off);
  write_lof_table(r.with_lof, on);
  CHECK(off.str() == on.str());
}

TEST_CASE("lof comparison: class distances are smaller for distinct classes") {
  std::mt19937_64 rng(7);
  CloudSet set;
  set.add({"m", "L", "loops"}, noisy_circle(rng, 60, 0.03));
  for (const char* cls : {"blob1", "blob2", "blob3"})
    set.add({"m", "L", cls}, oracle::gaussian_cloud(rng, 60, 2, 0.3));
  const auto r = lof_comparison(set, {10, 1.5}, plain(), 0, 1, 2);
  const auto& h1 = r.without_lof[1];
  CHECK(h1.dim == 1);
  CHECK(h1.class_mean < h1.all_mean);
}

TEST_CASE("lof comparison: small classes are skipped, budget caps all-pairs") {
  std::mt19937_64 rng(8);
  CloudSet set;
  set.add({"m", "L", "a"}, oracle::gaussian_cloud(rng, 16, 2));
  set.add({"m", "L", "b"}, oracle::gaussian_cloud(rng, 16, 2));
  set.add({"m", "L", "c"}, oracle::gaussian_cloud(rng, 16, 2));
  set.add({"m", "L", "tiny"}, oracle::gaussian_cloud(rng, 3, 2));
  const auto r = lof_comparison(set, {4, 1.5}, plain(0), 5, 2, 1);
  CHECK(r.without_lof[0].all_pairs == 5);
  CHECK(r.without_lof[0].class_pairs == 3);
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("tiny") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("heatmap examples") {
  std::mt19937_64 rng(9);
  const auto base = oracle::gaussian_cloud(rng, 20, 3);
  CloudSet same;
  for (const char* layer : {"l1", "l2", "l3"}) same.add({"m", layer, "c"}, base);
  const std::vector<std::string> order{"l1", "l2", "l3"};
  for (const auto& h : layer_heatmap(same, "", order, plain(), 2)) {
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i; j < 3; ++j) CHECK(h.values[i * 3 + j] == 0.0);
    CHECK(std::isnan(h.values[3]));
  }

  CloudSet two;
  const auto other = oracle::gaussian_cloud(rng, 20, 3);
  two.add({"m", "a", "c"}, base);
  two.add({"m", "b", "c"}, other);
  const std::vector<std::string> ab{"a", "b"};
  const auto maps = layer_heatmap(two, "m", ab, plain(), 1);
  REQUIRE(maps.size() == 2);
  const auto da = run_pipeline(base, plain()).diagram;
  const auto db = run_pipeline(other, plain()).diagram;
  CHECK(maps[1].values[1] == bottleneck_distance(da, db, 1));
  CHECK(maps[0].values[1] == bottleneck_distance(da, db, 0));

  std::stringstream buf;
  write_heatmap_csv(maps[1], buf);
  const auto back = read_heatmap_csv(buf);
  CHECK(back.layers == ab);
  CHECK(back.values[1] == maps[1].values[1]);
  CHECK(std::isnan(back.values[2]));
}

TEST_CASE("heatmap reports missing cells") {
  std::mt19937_64 rng(10);
  CloudSet set;
  set.add({"m", "a", "x"}, oracle::gaussian_cloud(rng, 10, 2));
  set.add({"m", "b", "x"}, oracle::gaussian_cloud(rng, 10, 2));
  set.add({"m", "a", "y"}, oracle::gaussian_cloud(rng, 10, 2));
  const std::vector<std::string> order{"a", "b"};
  try {
    layer_heatmap(set, "m", order, plain(), 1);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("(b, y)") != std::string::npos);
  }
}

TEST_CASE("class matrix examples") {
  std::mt19937_64 rng(11);
  const auto cloud = oracle::gaussian_cloud(rng, 20, 3);
  CloudSet same;
  for (const char* cls : {"a", "b", "c"}) same.add({"m", "L", cls}, cloud);
  const auto r = class_matrix_and_embedding(same, "L", 1, plain(), 2);
  CHECK(r.matrix.labels == std::vector<std::string>{"m/a", "m/b", "m/c"});
  for (const double v : r.matrix.values) CHECK(v == 0.0);
  for (const auto& c : r.embedding.coords) CHECK(c == r.embedding.coords[0]);

  CloudSet mixed;
  for (int i = 0; i < 5; ++i) {
    mixed.add({"m", "L", "circle" + std::to_string(i)}, noisy_circle(rng, 40, 0.05));
    mixed.add({"m", "L", "blob" + std::to_string(i)}, oracle::gaussian_cloud(rng, 40, 2, 0.5));
  }
  const auto m = class_matrix_and_embedding(mixed, "L", 1, plain(), 2);
  CHECK(m.matrix.size() == 10);
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) {
      const bool si = m.matrix.labels[i].find("circle") != std::string::npos;
      const bool sj = m.matrix.labels[j].find("circle") != std::string::npos;
      (si == sj ? within : across) += m.matrix(i, j);
      (si == sj ? nw : na)++;
    }
  CHECK(within / nw < across / na);

  CHECK_THROWS_AS(class_matrix_and_embedding(mixed, "nope", 1, plain(), 1), DataError);
}

TEST_CASE("manifest loading") {
  const auto dir = scratch_dir("manifest");
  std::mt19937_64 rng(12);
  save_cloud(oracle::gaussian_cloud(rng, 8, 2), dir / "a.csv", CloudFormat::csv);
  save_cloud(oracle::gaussian_cloud(rng, 8, 2), dir / "b.tdac", CloudFormat::tdac);
  {
    std::ofstream m(dir / "set.csv");
    m << "model,layer,class,path\nnet,conv1,cat,a.csv\nnet,conv1,dog," << (dir / "b.tdac").string()
      << "\n";
  }
  const auto set = CloudSet::load(dir / "set.csv");
  CHECK(set.clouds().size() == 2);
  CHECK(set.clouds().at({"net", "conv1", "dog"}).meta().cls == "dog");
  CHECK(set.models() == std::vector<std::string>{"net"});

  {
    std::ofstream m(dir / "dup.csv");
    m << "model,layer,class,path\nnet,conv1,cat,a.csv\nnet,conv1,cat,a.csv\n";
  }
  CHECK_THROWS_AS(CloudSet::load(dir / "dup.csv"), DataError);
  {
    std::ofstream m(dir / "missing.csv");
    m << "model,layer,class,path\nnet,conv1,cat,nothere.csv\n";
  }
  CHECK_THROWS_AS(CloudSet::load(dir / "missing.csv"), DataError);
  {
    std::ofstream m(dir / "header.csv");
    m << "a,b,c,d\n";
  }
  CHECK_THROWS_AS(CloudSet::load(dir / "header.csv"), DataError);
  std::filesystem::remove_all(dir);
}

}
