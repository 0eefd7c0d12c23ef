#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "neurotopo/svg.hpp"

using namespace neurotopo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_golden(const std::string& name, const std::string& text) {
  const std::filesystem::path path = std::filesystem::path(NEUROTOPO_GOLDEN_DIR) / name;
  if (std::getenv("NEUROTOPO_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(path, std::ios::binary) << text;
  }
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == text);
}

bool well_formed(const std::string& text) {
  return text.rfind("<svg ", 0) == 0 && text.size() > 7 &&
         text.compare(text.size() - 7, 7, "</svg>\n") == 0;
}

PersistenceDiagram sample_diagram() {
  PersistenceDiagram d;
  d.pairs = {{0, 0, 0.5}, {0, 0, 1.0}, {0, 0, kInf}, {1, 0.8, 1.3}, {1, 1.1, 1.2}};
  d.meta = {"net", "conv1", "cat"};
  return d;
}

}  // namespace

TEST_SUITE("svg") {

TEST_CASE("diagram plot") {
  const auto text = svg::render_diagram(sample_diagram());
  CHECK(well_formed(text));
  CHECK(text.find(">inf<") != std::string::npos);
  check_golden("diagram.svg", text);
  CHECK(well_formed(svg::render_diagram(PersistenceDiagram{})));
}

TEST_CASE("embedding plot") {
  Embedding2D e;
  e.coords = {{0, 0}, {1, 0}, {0, 1}, {-1, 0.5}};
  e.labels = {"a/x", "a/y", "b/x", "b&<y>"};
  const auto text = svg::render_embedding(e);
  CHECK(well_formed(text));
  CHECK(text.find("b&amp;&lt;y&gt;") != std::string::npos);
  check_golden("embedding.svg", text);
}

TEST_CASE("boxplot") {
  QuantileRow r1{"conv1", 0, "birth_mean", 0.1, 0.2, 0.3, 0.4, 0.5, {0.9}};
  QuantileRow r2{"conv2", 0, "birth_mean", 0.2, 0.25, 0.3, 0.35, 0.4, {}};
  QuantileRow r3{"conv2", 0, "life_mean", 1, 2, 3, 4, 5, {}};
  const std::vector<QuantileRow> rows{r1, r2, r3};
  const auto text = svg::render_boxplot(rows, "birth_mean");
  CHECK(well_formed(text));
  check_golden("boxplot.svg", text);
}

TEST_CASE("heatmap plot") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  LayerHeatmap h;
  h.dim = 1;
  h.layers = {"l1", "l2", "l3"};
  h.values = {0, 0.5, 1.0, nan, 0, 0.25, nan, nan, 0};
  h.classes = 2;
  const auto text = svg::render_heatmap(h);
  CHECK(well_formed(text));
  check_golden("heatmap.svg", text);
}

}
