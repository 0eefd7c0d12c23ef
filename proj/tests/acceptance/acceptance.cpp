#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "neurotopo/bottleneck.hpp"
#include "neurotopo/experiments.hpp"
#include "neurotopo/outlier.hpp"
#include "neurotopo/persistence.hpp"
#include "neurotopo/rips.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace neurotopo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Outcome h0_count_law() {
  Outcome o;
  std::mt19937_64 rng(101);
  for (const std::size_t n : {1, 2, 3, 10, 100, 500}) {
    const auto cloud = oracle::gaussian_cloud(rng, n, 8);
    const auto d = compute_persistence(
        build_filtration(distance_matrix(cloud), {0, Scale::diameter, kInf}));
    std::size_t finite = 0, infinite = 0;
    for (const auto& p : d.in_dim(0)) (p.essential() ? infinite : finite)++;
    if (finite != n - 1 || infinite != 1)
      o.fail("n=" + std::to_string(n) + ": " + std::to_string(finite) + " finite, " +
             std::to_string(infinite) + " infinite");
  }
  if (o.pass) o.detail = "n=500: 499 finite + 1 infinite";
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> size(4, 15);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = size(rng);
    const auto cloud = trial % 2 ? oracle::gaussian_cloud(rng, n, 2 + trial % 3)
                                 : oracle::uniform_cloud(rng, n, 2 + trial % 3);
    const auto dm = distance_matrix(cloud);
    const auto f = build_filtration(dm, {2});
    const auto fast = persistence_pairs(f);
    const auto naive =
        oracle::naive_pairs(oracle::brute_rips(dm, 3, oracle::enclosing_radius(dm)), 2);
    if (fast != naive) o.fail("cloud " + std::to_string(trial) + " (n=" + std::to_string(n) + ") differs");
  }
  if (o.pass) o.detail = "50 clouds, max_dim 2, identical pair multisets";
  return o;
}

Outcome known_topology() {
  Outcome o;
  const auto polygon =
      compute_persistence(build_filtration(distance_matrix(oracle::circle_polygon(60)), {1}));
  std::vector<PersistencePair> loops;
  for (const auto& p : polygon.in_dim(1))
    if (p.lifetime() > 0.5) loops.push_back(p);
  const double want_birth = 0.10467191248588828, want_death = 1.7320508075688772;
  if (loops.size() != 1)
    o.fail("polygon: " + std::to_string(loops.size()) + " long H1 pairs");
  else if (std::abs(loops[0].birth - want_birth) > 1e-12 ||
           std::abs(loops[0].death - want_death) > 1e-12)
    o.fail("polygon pair (" + fmt(loops[0].birth) + ", " + fmt(loops[0].death) + ")");

  const auto sphere =
      compute_persistence(build_filtration(distance_matrix(oracle::fibonacci_sphere(80)), {2}));
  std::vector<double> lifetimes;
  const PersistencePair* top = nullptr;
  for (const auto& p : sphere.pairs)
    if (p.dim == 2) {
      lifetimes.push_back(p.lifetime());
      if (!top || p.lifetime() > top->lifetime()) top = &p;
    }
  std::sort(lifetimes.rbegin(), lifetimes.rend());
  if (lifetimes.empty()) {
    o.fail("sphere: no H2 pair");
    return o;
  }
  const double second = lifetimes.size() > 1 ? lifetimes[1] : 0.0;
  if (lifetimes[0] < 3 * second)
    o.fail("sphere: top H2 lifetime " + fmt(lifetimes[0]) + " vs second " + fmt(second));
  if (std::abs(top->birth - 0.57838632166229287) > 1e-12 ||
      std::abs(top->death - 1.6757153541113812) > 1e-12)
    o.fail("sphere pair (" + fmt(top->birth) + ", " + fmt(top->death) + ")");
  if (o.pass)
    o.detail = "polygon H1 (" + fmt(want_birth) + ", " + fmt(want_death) + "); sphere H2 lifetime " +
               fmt(lifetimes[0]) + ", runner-up " + fmt(second);
  return o;
}

Outcome betti_cross_check() {
  Outcome o;
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 8;
    const auto dm = distance_matrix(oracle::uniform_cloud(rng, n, 2 + trial % 2));
    const auto f = build_filtration(dm, {2});
    const auto simplices = oracle::brute_rips(dm, 3, kInf);
    for (int s = 0; s < 10; ++s) {
      const double eps = u(rng) * f.threshold();
      if (betti_numbers(f, eps) != oracle::rank_betti(simplices, eps, 2))
        o.fail("cloud " + std::to_string(trial) + " at epsilon " + fmt(eps));
    }
  }
  if (o.pass) o.detail = "200 (cloud, scale) checks";
  return o;
}

Outcome bottleneck_exactness() {
  Outcome o;
  std::mt19937_64 rng(505);
  for (int t = 0; t < 200; ++t) {
    const auto a = oracle::random_points(rng, 5, t % 2 == 0);
    const auto b = oracle::random_points(rng, 5, t % 2 == 0);
    const double got = bottleneck_finite(a, b), want = oracle::exhaustive_bottleneck(a, b);
    if (got != want) o.fail("pair " + std::to_string(t) + ": " + fmt(got) + " vs " + fmt(want));
  }
  for (int t = 0; t < 500; ++t) {
    const auto a = oracle::random_points(rng, 8, t % 3 == 0);
    const auto b = oracle::random_points(rng, 8, t % 3 == 1);
    const auto c = oracle::random_points(rng, 8, false);
    const double ab = bottleneck_finite(a, b), ba = bottleneck_finite(b, a);
    const double bc = bottleneck_finite(b, c), ac = bottleneck_finite(a, c);
    if (ab != ba) o.fail("asymmetric on triple " + std::to_string(t));
    if (ac > ab + bc + 1e-9) o.fail("triangle inequality broken on triple " + std::to_string(t));
    if (bottleneck_finite(a, a) != 0.0) o.fail("d(a, a) != 0 on triple " + std::to_string(t));
  }
  if (o.pass) o.detail = "200 exact pairs, 500 triples";
  return o;
}

Outcome stability() {
  Outcome o;
  std::mt19937_64 rng(606);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double delta = 0.01;
  const std::size_t n = 40, d = 3;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto cloud = oracle::uniform_cloud(rng, n, d);
    std::vector<double> moved = cloud.values();
    for (std::size_t p = 0; p < n; ++p) {
      std::vector<double> dir(d);
      double norm = 0.0;
      for (double& x : dir) {
        x = g(rng);
        norm += x * x;
      }
      const double len = delta * u(rng) / std::sqrt(norm);
      for (std::size_t c = 0; c < d; ++c) moved[p * d + c] += dir[c] * len;
    }
    const auto a = compute_persistence(build_filtration(distance_matrix(cloud), {2}));
    const auto b =
        compute_persistence(build_filtration(distance_matrix(PointCloud(n, d, moved)), {2}));
    for (int k = 0; k <= 2; ++k) {
      const double dist = bottleneck_distance(a, b, k);
      worst = std::max(worst, dist);
      if (dist > 2 * delta + 1e-9)
        o.fail("cloud " + std::to_string(trial) + " H" + std::to_string(k) + ": " + fmt(dist));
    }
  }
  if (o.pass) o.detail = "max d_B " + fmt(worst) + " <= " + fmt(2 * delta + 1e-9);
  return o;
}

PointCloud planted_cloud(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v = oracle::gaussian_cloud(rng, 100, 16).values();
  v.push_back(10.0);
  v.insert(v.end(), 15, 0.0);
  return PointCloud(101, 16, v);
}

Outcome lof_planted() {
  Outcome o;
  std::size_t false_flags = 0, inliers = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto report = flag_outliers(lof_scores(distance_matrix(planted_cloud(seed)), 20), 1.5);
    const auto top = std::max_element(report.scores.begin(), report.scores.end());
    if (top - report.scores.begin() != 100 || *top <= 1.5)
      o.fail("seed " + std::to_string(seed) + ": planted point not the flagged maximum");
    if (std::find(report.flagged.begin(), report.flagged.end(), 100) == report.flagged.end())
      o.fail("seed " + std::to_string(seed) + ": planted point kept");
    false_flags += report.flagged.size() -
                   std::count(report.flagged.begin(), report.flagged.end(), std::size_t{100});
    inliers += 100;
  }
  const double rate = double(false_flags) / double(inliers);
  if (rate > 0.05) o.fail("false-flag rate " + fmt(rate));
  if (o.pass) o.detail = "20 seeds, false-flag rate " + fmt(rate);
  return o;
}

Outcome subsample_protocol() {
  Outcome o;
  std::mt19937_64 rng(808);
  const auto cloud = oracle::gaussian_cloud(rng, 500, 8);
  PipelineOptions options;
  options.rips.max_dim = 1;
  options.lof = LofSettings{};
  const auto sizes = parse_size_range("50:500:25");
  const auto table = subsample_study(cloud, sizes, 17, options, 1);
  if (table.rows.size() != 19) o.fail(std::to_string(table.rows.size()) + " rows");
  for (const auto& row : table.rows)
    if (row.counts[0] != row.size - 1 - row.removed)
      o.fail("size " + std::to_string(row.size) + ": H0 count " + std::to_string(row.counts[0]));
  if (!table.rows.empty()) {
    const auto& last = table.rows.back();
    if (last.size != 500) o.fail("last row has size " + std::to_string(last.size));
    for (const double d : last.distances)
      if (d != 0.0) o.fail("s=500 distance " + fmt(d));
  }
  if (o.pass) o.detail = "19 rows, s=500 distances all 0";
  return o;
}

Outcome lof_comparison_structure() {
  Outcome o;
  std::mt19937_64 rng(909);
  CloudSet set;
  for (const char* cls : {"a", "b", "c", "d"}) set.add({"net", "L", cls}, oracle::gaussian_cloud(rng, 100, 8));
  PipelineOptions base;
  base.rips.max_dim = 1;
  const auto with_default = lof_comparison(set, LofSettings{}, base, 0, 5, 1);
  for (const auto* rows : {&with_default.without_lof, &with_default.with_lof})
    for (const auto& r : *rows)
      if (r.all_pairs != 28 || r.class_pairs != 4)
        o.fail("H" + std::to_string(r.dim) + ": " + std::to_string(r.all_pairs) + " all, " +
               std::to_string(r.class_pairs) + " class pairs");
  const auto infinite = lof_comparison(set, LofSettings{20, kInf}, base, 0, 5, 1);
  std::ostringstream off, on;
  write_lof_table(infinite.without_lof, off);
  write_lof_table(infinite.with_lof, on);
  if (off.str() != on.str()) o.fail("threshold inf: LOF-on and LOF-off tables differ");
  if (o.pass) o.detail = "28 all pairs, 4 class pairs, identical tables at threshold inf";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_determinism() {
  Outcome o;
#ifndef NEUROTOPO_CLI
  o.fail("command-line tool was not built");
  return o;
#else
  const fs::path dir = fs::temp_directory_path() / "neurotopo_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };

  std::mt19937_64 rng(1010);
  std::string manifest = "model,layer,class,path\n";
  for (const char* layer : {"l1", "l2"})
    for (const char* cls : {"a", "b", "c"}) {
      const std::string file = std::string(layer) + "_" + cls + ".tdac";
      save_cloud(oracle::gaussian_cloud(rng, 40, 4), dir / file, CloudFormat::tdac);
      manifest += std::string("net,") + layer + "," + cls + "," + file + "\n";
    }
  std::ofstream(dir / "set.csv") << manifest;
  save_cloud(oracle::gaussian_cloud(rng, 60, 4), dir / "cloud.csv", CloudFormat::csv);
  std::string diagrams;
  for (int i = 0; i < 3; ++i) {
    const auto cloud = dir / ("g" + std::to_string(i) + ".csv");
    const auto diagram = dir / ("d" + std::to_string(i) + ".csv");
    save_cloud(oracle::gaussian_cloud(rng, 30, 3), cloud, CloudFormat::csv);
    const std::string line = "'" + std::string(NEUROTOPO_CLI) + "' persist --layer L -i " +
                             q(cloud) + " -o " + q(diagram);
    if (std::system(line.c_str()) != 0) {
      o.fail("could not prepare diagrams");
      return o;
    }
    diagrams += " " + q(diagram);
  }

  // each entry: arguments with {out} standing for the output stem; later
  // entries may read outputs of earlier ones (c<index>_j1...)
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
      {"persist -i " + q(dir / "cloud.csv") + " --max-dim 2 --lof -o {out}.csv --dump-filtration {out}.f.csv", {".csv", ".f.csv"}},
      {"betti -i " + q(dir / "cloud.csv") + " -e 0.5,1,1.5 -o {out}.csv", {".csv"}},
      {"lof -i " + q(dir / "cloud.csv") + " --lof-k 10 -o {out}.csv --filtered {out}.kept.tdac", {".csv", ".kept.tdac"}},
      {"distmat --cloud " + q(dir / "cloud.csv") + " -o {out}.csv", {".csv"}},
      {"bottleneck " + q(dir / "d0.csv") + " " + q(dir / "d1.csv") + " -d 1 -o {out}.txt", {".txt"}},
      {"distmat --diagrams" + diagrams + " -d 1 -o {out}.csv", {".csv"}},
      {"stats --diagrams" + diagrams + " -o {out}.csv --quantiles {out}.q.csv", {".csv", ".q.csv"}},
      {"plot diagram -i " + q(dir / "d0.csv") + " -o {out}.svg", {".svg"}},
      {"experiment subsample -i " + q(dir / "cloud.csv") + " --sizes 20:60:10 --lof -o {out}.csv", {".csv"}},
      {"experiment lof-compare -m " + q(dir / "set.csv") + " --lof-k 5 -o {out}.csv", {".csv"}},
      {"experiment heatmap -m " + q(dir / "set.csv") + " --layers l1,l2 -o {out}", {"_h0.csv", "_h1.csv"}},
      {"experiment class-matrix -m " + q(dir / "set.csv") + " --layer l1 -d 0 -o {out}.csv --embedding {out}.e.csv", {".csv", ".e.csv"}},
      {"embed -i " + q(dir / "c5_j1.csv") + " -o {out}.csv --svg {out}.svg", {".csv", ".svg"}},
      {"plot boxplot -i " + q(dir / "c6_j1.q.csv") + " -o {out}.svg", {".svg"}},
      {"plot heatmap -i " + q(dir / "c10_j1_h1.csv") + " -o {out}.svg", {".svg"}},
  };
  std::size_t files = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<std::string> outputs[2];
    for (int variant = 0; variant < 2; ++variant) {
      const unsigned jobs = variant == 0 ? 1 : 8;
      const fs::path stem = dir / ("c" + std::to_string(c) + "_j" + std::to_string(jobs));
      std::string args = commands[c].first;
      for (std::size_t at; (at = args.find("{out}")) != std::string::npos;)
        args.replace(at, 5, stem.string());
      const std::string line = "'" + std::string(NEUROTOPO_CLI) + "' --jobs " +
                               std::to_string(jobs) + " " + args + " 2>/dev/null";
      const int status = std::system(line.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        o.fail("command failed: " + commands[c].first);
        break;
      }
      for (const auto& suffix : commands[c].second)
        outputs[variant].push_back(slurp(stem.string() + suffix));
    }
    if (!o.pass) break;
    for (std::size_t k = 0; k < outputs[0].size(); ++k) {
      ++files;
      if (outputs[0][k].empty() || outputs[0][k] != outputs[1][k])
        o.fail("jobs 1 vs 8 differ: " + commands[c].first);
    }
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = std::to_string(files) + " output files byte-identical";
  return o;
#endif
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"H0 count law", 5, h0_count_law},
      {"oracle equivalence", 30, oracle_equivalence},
      {"known-topology recovery", 60, known_topology},
      {"betti cross-check", 20, betti_cross_check},
      {"bottleneck exactness and metric axioms", 30, bottleneck_exactness},
      {"stability", 60, stability},
      {"LOF planted outlier and false-flag rate", 10, lof_planted},
      {"subsample protocol", 120, subsample_protocol},
      {"LOF-comparison protocol structure", 60, lof_comparison_structure},
      {"CLI determinism across --jobs", kInf, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.check();
    } catch (const std::exception& e) {
      outcome.fail(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget_seconds) outcome.fail("took " + fmt(seconds) + " s, limit " + fmt(c.budget_seconds) + " s");
    failures += !outcome.pass;
    std::printf("%s  %-42s %7.2f s  %s\n", outcome.pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
