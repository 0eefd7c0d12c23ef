#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "neurotopo/bottleneck.hpp"
#include "neurotopo/diagram.hpp"
#include "neurotopo/embed.hpp"
#include "neurotopo/error.hpp"
#include "neurotopo/experiments.hpp"
#include "neurotopo/io.hpp"
#include "neurotopo/outlier.hpp"
#include "neurotopo/persistence.hpp"
#include "neurotopo/pointcloud.hpp"
#include "neurotopo/rips.hpp"
#include "neurotopo/svg.hpp"

namespace neurotopo::cli {

namespace {

namespace fs = std::filesystem;

/// Writes to `path`, or standard output when the path is empty or "-".
void emit(const std::string& path, const std::function<void(std::ostream&)>& writer) {
  if (path.empty() || path == "-") {
    writer(std::cout);
    std::cout.flush();
    return;
  }
  io::write_file_atomic(path, writer);
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

struct CloudInput {
  std::string path;
  std::string format = "auto";
  bool header = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-i,--input", path, "Point cloud file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--format", format, "Cloud format")
        ->check(CLI::IsMember({"auto", "csv", "tdac"}));
    cmd->add_flag("--header", header, "CSV input starts with a header line");
  }

  PointCloud load() const {
    CloudFormat f = format_from_path(path);
    if (format == "csv") f = CloudFormat::csv;
    if (format == "tdac") f = CloudFormat::tdac;
    return load_cloud(path, f, {header});
  }
};

struct RipsFlags {
  int max_dim = 1;
  std::string scale = "diameter";
  double threshold = -1.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--max-dim", max_dim, "Highest homology degree (0..2)")
        ->check(CLI::Range(0, kMaxHomologyDim));
    cmd->add_option("--scale", scale, "Filtration value convention")
        ->check(CLI::IsMember({"diameter", "radius"}));
    cmd->add_option("--threshold", threshold,
                    "Truncation value in scale units; negative means the enclosing radius");
  }

  RipsOptions options(const GlobalOptions& global) const {
    RipsOptions o;
    o.max_dim = max_dim;
    o.scale = parse_scale(scale);
    if (threshold >= 0.0) o.threshold = threshold;
    o.memory_budget = global.memory_budget;
    return o;
  }
};

struct LofFlags {
  bool enabled = false;
  std::size_t k = kDefaultLofNeighbors;
  double threshold = kDefaultLofThreshold;

  void add_to(CLI::App* cmd, bool with_switch) {
    if (with_switch) cmd->add_flag("--lof", enabled, "Remove LOF outliers before persistence");
    cmd->add_option("--lof-k", k, "LOF neighbor count")->check(CLI::PositiveNumber);
    cmd->add_option("--lof-threshold", threshold, "LOF score cutoff (inf disables flagging)");
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto part : io::split(text, ','))
    if (!io::trim(part).empty()) out.emplace_back(io::trim(part));
  return out;
}

// ---------------------------------------------------------------------------

void add_persist(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    CloudInput input;
    RipsFlags rips;
    LofFlags lof;
    bool normalize = false;
    bool include_zero = false;
    std::string out;
    std::string dump;
    std::string model, layer, cls;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("persist", "Persistence diagram of a point cloud");
  o->input.add_to(cmd);
  o->rips.add_to(cmd);
  o->lof.add_to(cmd, true);
  cmd->add_flag("--normalize", o->normalize, "Z-score every point before anything else");
  cmd->add_flag("--include-zero", o->include_zero, "Keep zero-lifetime pairs");
  cmd->add_option("-o,--out", o->out, "Diagram CSV (standard output if omitted)");
  cmd->add_option("--dump-filtration", o->dump, "Also write the filtration as CSV");
  cmd->add_option("--model", o->model, "Model name stored in the diagram metadata");
  cmd->add_option("--layer", o->layer, "Layer name stored in the diagram metadata");
  cmd->add_option("--class", o->cls, "Class name stored in the diagram metadata");
  cmd->callback([o, &global] {
    PointCloud cloud = o->input.load();
    if (o->normalize) cloud = normalize_cloud(cloud);
    if (o->lof.enabled) {
      auto [kept, report] = filter_outliers(cloud, o->lof.k, o->lof.threshold, global.jobs);
      std::cerr << "LOF removed " << report.flagged.size() << " of " << cloud.size()
                << " points\n";
      cloud = std::move(kept);
    }
    const auto filtration =
        build_filtration(distance_matrix(cloud, global.jobs), o->rips.options(global));
    if (!o->dump.empty())
      io::write_file_atomic(o->dump, [&](std::ostream& out) { filtration.write_csv(out); });
    auto diagram = compute_persistence(filtration, {o->include_zero});
    diagram.meta = {o->model, o->layer, o->cls};
    emit(o->out, [&](std::ostream& out) { write_diagram(diagram, out); });
  });
}

void add_betti(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    CloudInput input;
    RipsFlags rips;
    bool normalize = false;
    std::vector<double> epsilons;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("betti", "Betti numbers of the Rips complex at fixed scales");
  o->input.add_to(cmd);
  o->rips.add_to(cmd);
  cmd->add_flag("--normalize", o->normalize, "Z-score every point first");
  cmd->add_option("-e,--epsilon", o->epsilons, "Scale values in scale units (repeatable)")
      ->required()
      ->delimiter(',');
  cmd->add_option("-o,--out", o->out, "CSV output (standard output if omitted)");
  cmd->callback([o, &global] {
    PointCloud cloud = o->input.load();
    if (o->normalize) cloud = normalize_cloud(cloud);
    const auto filtration =
        build_filtration(distance_matrix(cloud, global.jobs), o->rips.options(global));
    std::vector<std::vector<std::size_t>> rows;
    for (const double eps : o->epsilons) rows.push_back(betti_numbers(filtration, eps));
    emit(o->out, [&](std::ostream& out) {
      out << "epsilon";
      for (int k = 0; k <= filtration.max_dim(); ++k) out << ",b" << k;
      out << '\n';
      for (std::size_t i = 0; i < rows.size(); ++i) {
        out << io::format_double(o->epsilons[i]);
        for (const auto b : rows[i]) out << ',' << b;
        out << '\n';
      }
    });
  });
}

void add_bottleneck(CLI::App& app, GlobalOptions&) {
  struct Opts {
    std::string a, b, out;
    int dim = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("bottleneck", "Bottleneck distance between two diagram files");
  cmd->add_option("a", o->a, "First diagram CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("b", o->b, "Second diagram CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("-d,--dim", o->dim, "Homology degree")->check(CLI::NonNegativeNumber);
  cmd->add_option("-o,--out", o->out, "Output file (standard output if omitted)");
  cmd->callback([o] {
    const auto a = load_diagram(o->a);
    const auto b = load_diagram(o->b);
    const double d = bottleneck_distance(a, b, o->dim);
    emit(o->out, [&](std::ostream& out) { out << io::format_double(d) << '\n'; });
  });
}

std::vector<std::string> labels_for(const std::vector<std::string>& paths,
                                    const std::string& label_list) {
  std::vector<std::string> labels;
  if (!label_list.empty()) {
    labels = split_list(label_list);
    if (labels.size() != paths.size())
      throw DataError("--labels lists " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(paths.size()) + " diagrams");
  } else {
    for (const auto& p : paths) labels.push_back(fs::path(p).stem().string());
  }
  return labels;
}

void add_distmat(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    std::vector<std::string> diagrams;
    std::string cloud;
    std::string labels;
    int dim = 0;
    std::string out;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand(
      "distmat", "Pairwise bottleneck matrix of diagrams, or Euclidean matrix of a cloud");
  auto* diags = cmd->add_option("--diagrams", o->diagrams, "Diagram CSV files")
                    ->check(CLI::ExistingFile);
  auto* cloud = cmd->add_option("--cloud", o->cloud, "Point cloud file (csv or tdac)")
                    ->check(CLI::ExistingFile);
  diags->excludes(cloud);
  cmd->add_option("--labels", o->labels, "Comma-separated labels (default: file stems)");
  cmd->add_option("-d,--dim", o->dim, "Homology degree")->check(CLI::NonNegativeNumber);
  cmd->add_option("-o,--out", o->out, "Matrix CSV (standard output if omitted)");
  cmd->callback([o, &global] {
    if (!o->cloud.empty()) {
      const auto pc = load_cloud(o->cloud, format_from_path(o->cloud));
      const auto dm = distance_matrix(pc, global.jobs);
      emit(o->out, [&](std::ostream& out) {
        for (std::size_t j = 0; j < dm.size(); ++j) out << ',' << j;
        out << '\n';
        for (std::size_t i = 0; i < dm.size(); ++i) {
          out << i;
          for (std::size_t j = 0; j < dm.size(); ++j) out << ',' << io::format_double(dm(i, j));
          out << '\n';
        }
      });
      return;
    }
    if (o->diagrams.size() < 2) throw CLI::ValidationError("--diagrams", "needs at least two files");
    std::vector<PersistenceDiagram> diagrams;
    for (const auto& p : o->diagrams) diagrams.push_back(load_diagram(p));
    const auto labels = labels_for(o->diagrams, o->labels);
    const auto m = pairwise_distances(diagrams, labels, o->dim, global.jobs);
    emit(o->out, [&](std::ostream& out) { write_distance_matrix(m, out); });
  });
}

void add_stats(CLI::App& app, GlobalOptions&) {
  struct Opts {
    std::vector<std::string> diagrams;
    int max_dim = -1;
    std::string out;
    std::string quantiles;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("stats", "Per-dimension diagram statistics and quantiles");
  cmd->add_option("--diagrams", o->diagrams, "Diagram CSV files")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--max-dim", o->max_dim,
                  "Report dims 0..max-dim (negative: highest dimension present)");
  cmd->add_option("-o,--out", o->out, "Statistics CSV (standard output if omitted)");
  cmd->add_option("--quantiles", o->quantiles, "Also write the per-layer quantile CSV here");
  cmd->callback([o] {
    std::vector<DiagramStatistics> records;
    for (const auto& p : o->diagrams) {
      auto d = load_diagram(p);
      if (d.meta.cls.empty()) d.meta.cls = fs::path(p).stem().string();
      records.push_back(diagram_stats(d, o->max_dim));
    }
    emit(o->out, [&](std::ostream& out) { write_statistics_csv(records, out); });
    if (!o->quantiles.empty()) {
      const auto rows = quantile_summary(records);
      io::write_file_atomic(o->quantiles,
                            [&](std::ostream& out) { write_quantile_csv(rows, out); });
    }
  });
}

void add_lof(CLI::App& app, GlobalOptions& global) {
  struct Opts {
    CloudInput input;
    LofFlags lof;
    bool normalize = false;
    std::string out;
    std::string filtered;
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("lof", "Local Outlier Factor scores and filtering");
  o->input.add_to(cmd);
  o->lof.add_to(cmd, false);
  cmd->add_flag("--normalize", o->normalize, "Z-score every point first");
  cmd->add_option("-o,--out", o->out, "Report CSV (standard output if omitted)");
  cmd->add_option("--filtered", o->filtered, "Write the kept points here (csv or tdac by extension)");
  cmd->callback([o, &global] {
    PointCloud cloud = o->input.load();
    if (o->normalize) cloud = normalize_cloud(cloud);
    auto [kept, report] = filter_outliers(cloud, o->lof.k, o->lof.threshold, global.jobs);
    emit(o->out, [&](std::ostream& out) { write_lof_csv(report, out); });
    if (!o->filtered.empty()) save_cloud(kept, o->filtered, format_from_path(o->filtered));
  });
}

void add_embed(CLI::App& app, GlobalOptions&) {
  struct Opts {
    std::string input, out, svg;
    char sep = '/';
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("embed", "Classical MDS embedding of a distance matrix");
  cmd->add_option("-i,--input", o->input, "Distance matrix CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", o->out, "Embedding CSV (standard output if omitted)");
  cmd->add_option("--svg", o->svg, "Also render a scatter plot");
  cmd->add_option("--group-sep", o->sep, "Color groups by the label prefix before this character");
  cmd->callback([o] {
    std::ifstream in(o->input);
    const auto m = read_distance_matrix(in);
    const auto e = classical_mds(m);
    std::cerr << "stress " << io::format_double(e.stress) << '\n';
    emit(o->out, [&](std::ostream& out) { write_embedding_csv(e, out); });
    if (!o->svg.empty()) {
      const auto text = svg::render_embedding(e, o->sep);
      io::write_file_atomic(o->svg, [&](std::ostream& out) { out << text; });
    }
  });
}

// ---------------------------------------------------------------------------

struct ExperimentFlags {
  RipsFlags rips;
  bool no_normalize = false;
  std::uint64_t seed = 0;

  void add_to(CLI::App* cmd) {
    rips.add_to(cmd);
    cmd->add_flag("--no-normalize", no_normalize, "Skip per-point z-scoring");
    cmd->add_option("--seed", seed, "Random seed");
  }

  PipelineOptions pipeline(const GlobalOptions& global) const {
    PipelineOptions p;
    p.normalize = !no_normalize;
    p.rips = rips.options(global);
    return p;
  }
};

void add_experiments(CLI::App& app, GlobalOptions& global) {
  auto* exp = app.add_subcommand("experiment", "Run an experiment protocol");
  exp->require_subcommand(1);

  {
    struct Opts {
      CloudInput input;
      ExperimentFlags flags;
      LofFlags lof;
      std::string sizes;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = exp->add_subcommand("subsample", "Diagram drift of random subsets vs the full cloud");
    o->input.add_to(cmd);
    o->flags.add_to(cmd);
    o->lof.add_to(cmd, true);
    cmd->add_option("--sizes", o->sizes, "start:stop:step or comma list")->required();
    cmd->add_option("-o,--out", o->out, "Result CSV (standard output if omitted)");
    cmd->callback([o, &global] {
      const auto cloud = o->input.load();
      auto options = o->flags.pipeline(global);
      if (o->lof.enabled) options.lof = LofSettings{o->lof.k, o->lof.threshold};
      const auto sizes = parse_size_range(o->sizes);
      const auto table = subsample_study(cloud, sizes, o->flags.seed, options, global.jobs);
      warn_all(table.warnings);
      emit(o->out, [&](std::ostream& out) { write_subsample_csv(table, out); });
    });
  }
  {
    struct Opts {
      std::string manifest;
      ExperimentFlags flags;
      LofFlags lof;
      std::size_t pair_budget = 0;
      std::string out;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = exp->add_subcommand("lof-compare", "Split-half bottleneck distances with and without LOF");
    cmd->add_option("-m,--manifest", o->manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
    o->flags.add_to(cmd);
    o->lof.add_to(cmd, false);
    cmd->add_option("--pair-budget", o->pair_budget, "Cap on 'all' pairs per layer (0 = every pair)");
    cmd->add_option("-o,--out", o->out, "Result CSV (standard output if omitted)");
    cmd->callback([o, &global] {
      const auto set = CloudSet::load(o->manifest);
      const auto result = lof_comparison(set, {o->lof.k, o->lof.threshold},
                                         o->flags.pipeline(global), o->pair_budget,
                                         o->flags.seed, global.jobs);
      warn_all(result.warnings);
      emit(o->out, [&](std::ostream& out) { write_lof_comparison_csv(result, out); });
    });
  }
  {
    struct Opts {
      std::string manifest;
      ExperimentFlags flags;
      std::string layers;
      std::string model;
      std::string prefix;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = exp->add_subcommand("heatmap", "Class-averaged bottleneck distances between layers");
    cmd->add_option("-m,--manifest", o->manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
    o->flags.add_to(cmd);
    cmd->add_option("--layers", o->layers, "Comma-separated layer order")->required();
    cmd->add_option("--model", o->model, "Model to use (required when the set has several)");
    cmd->add_option("-o,--out-prefix", o->prefix, "Writes <prefix>_h<k>.csv per dimension")
        ->required();
    cmd->callback([o, &global] {
      const auto set = CloudSet::load(o->manifest);
      const auto layers = split_list(o->layers);
      const auto maps = layer_heatmap(set, o->model, layers, o->flags.pipeline(global), global.jobs);
      for (const auto& h : maps) {
        io::write_file_atomic(o->prefix + "_h" + std::to_string(h.dim) + ".csv",
                              [&](std::ostream& out) { write_heatmap_csv(h, out); });
      }
    });
  }
  {
    struct Opts {
      std::string manifest;
      ExperimentFlags flags;
      std::string layer;
      int dim = 0;
      std::string out;
      std::string embedding;
    };
    auto o = std::make_shared<Opts>();
    auto* cmd = exp->add_subcommand("class-matrix", "Diagram distance matrix and embedding at one layer");
    cmd->add_option("-m,--manifest", o->manifest, "Manifest CSV")->required()->check(CLI::ExistingFile);
    o->flags.add_to(cmd);
    cmd->add_option("--layer", o->layer, "Layer name")->required();
    cmd->add_option("-d,--dim", o->dim, "Homology degree compared")->check(CLI::NonNegativeNumber);
    cmd->add_option("-o,--out", o->out, "Distance matrix CSV (standard output if omitted)");
    cmd->add_option("--embedding", o->embedding, "Embedding CSV output");
    cmd->callback([o, &global] {
      const auto set = CloudSet::load(o->manifest);
      const auto result =
          class_matrix_and_embedding(set, o->layer, o->dim, o->flags.pipeline(global), global.jobs);
      std::cerr << "stress " << io::format_double(result.embedding.stress) << '\n';
      emit(o->out, [&](std::ostream& out) { write_distance_matrix(result.matrix, out); });
      if (!o->embedding.empty())
        io::write_file_atomic(o->embedding,
                              [&](std::ostream& out) { write_embedding_csv(result.embedding, out); });
    });
  }
}

void add_plot(CLI::App& app, GlobalOptions&) {
  struct Opts {
    std::string kind;
    std::string input;
    std::string out;
    std::string stat = "birth_mean";
    char sep = '/';
  };
  auto o = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("plot", "Render a result CSV as SVG");
  cmd->add_option("kind", o->kind, "What the input holds")
      ->required()
      ->check(CLI::IsMember({"diagram", "embedding", "boxplot", "heatmap"}));
  cmd->add_option("-i,--input", o->input, "Input CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", o->out, "SVG output (standard output if omitted)");
  cmd->add_option("--stat", o->stat, "Statistic drawn by boxplot");
  cmd->add_option("--group-sep", o->sep, "Embedding color-group separator");
  cmd->callback([o] {
    std::ifstream in(o->input);
    if (!in) throw DataError("cannot open " + o->input);
    std::string text;
    if (o->kind == "diagram") {
      text = svg::render_diagram(read_diagram(in));
    } else if (o->kind == "embedding") {
      text = svg::render_embedding(read_embedding_csv(in), o->sep);
    } else if (o->kind == "boxplot") {
      text = svg::render_boxplot(read_quantile_csv(in), o->stat);
    } else {
      text = svg::render_heatmap(read_heatmap_csv(in));
    }
    emit(o->out, [&](std::ostream& out) { out << text; });
  });
}

}  // namespace

void register_commands(CLI::App& app, GlobalOptions& global) {
  add_persist(app, global);
  add_betti(app, global);
  add_bottleneck(app, global);
  add_distmat(app, global);
  add_stats(app, global);
  add_lof(app, global);
  add_embed(app, global);
  add_experiments(app, global);
  add_plot(app, global);
}

}  // namespace neurotopo::cli
