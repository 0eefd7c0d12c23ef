#pragma once

#include <span>
#include <string>
#include <string_view>

#include "neurotopo/diagram.hpp"
#include "neurotopo/embed.hpp"
#include "neurotopo/experiments.hpp"

namespace neurotopo::svg {

/// Birth/death scatter with the diagonal; essential features sit on a
/// dashed "inf" line above the finite range. One color per dimension.
std::string render_diagram(const PersistenceDiagram& diagram);

/// Scatter of an embedding. Points are colored by the label prefix before
/// the first `group_separator` (the whole label if absent).
std::string render_embedding(const Embedding2D& embedding, char group_separator = '/');

/// One box per (layer, dim) for the chosen statistic.
std::string render_boxplot(std::span<const QuantileRow> rows, std::string_view stat);

/// Upper-triangular heatmap; empty cells are left blank.
std::string render_heatmap(const LayerHeatmap& heatmap);

}  // namespace neurotopo::svg
