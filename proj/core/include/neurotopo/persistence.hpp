#pragma once

#include <cstddef>
#include <vector>

#include "neurotopo/diagram.hpp"
#include "neurotopo/rips.hpp"

namespace neurotopo {

struct PersistenceOptions {
  bool include_zero_lifetime = false;
};

/// Every persistence pair of dimension <= f.max_dim(), zero-lifetime pairs
/// included, sorted by (dim, birth, death). Z/2 coefficients.
///
/// H0 comes from a union-find sweep over the edges. Higher degrees reduce
/// the boundary matrices from the top dimension down, clearing columns of
/// simplices already known to be positive. On a coned filtration the number
/// of pivots each reduction must find is known in advance, and reduction
/// stops as soon as they are all found.
std::vector<PersistencePair> persistence_pairs(const Filtration& f);

PersistenceDiagram compute_persistence(const Filtration& f, PersistenceOptions options = {});

/// beta_k of the complex at `epsilon` (scale units) for k = 0..max_dim.
/// Requires 0 <= epsilon <= f.threshold().
std::vector<std::size_t> betti_numbers(const Filtration& f, double epsilon);

}  // namespace neurotopo
