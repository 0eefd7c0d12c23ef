#pragma once

// Deliberately slow reference implementations used to cross-check the
// library. None of them share code with it.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "neurotopo/bottleneck.hpp"
#include "neurotopo/diagram.hpp"
#include "neurotopo/pointcloud.hpp"
#include "neurotopo/rips.hpp"

namespace oracle {

using neurotopo::DistanceMatrix;
using neurotopo::FiltrationSimplex;
using neurotopo::PersistenceDiagram;
using neurotopo::PersistencePair;
using neurotopo::PointCloud;

double enclosing_radius(const DistanceMatrix& dm);

/// Every vertex subset of size <= top_dim + 1 whose diameter is <= cutoff,
/// sorted by (value, dimension, vertices). Values are scaled by `factor`.
std::vector<FiltrationSimplex> brute_rips(const DistanceMatrix& dm, int top_dim, double cutoff,
                                          double factor = 1.0);

/// Pairs from the plain left-to-right reduction of the full boundary matrix,
/// restricted to degrees <= max_dim, zero-length pairs included.
std::vector<PersistencePair> naive_pairs(std::span<const FiltrationSimplex> ordered, int max_dim);

/// Betti numbers of the subcomplex with values <= epsilon from ranks of the
/// boundary matrices over Z/2. `simplices` must contain dimension max_dim + 1.
std::vector<std::size_t> rank_betti(std::span<const FiltrationSimplex> simplices, double epsilon,
                                    int max_dim);

/// Minimum cost over every partial matching, finite points only.
double exhaustive_bottleneck(std::span<const neurotopo::DiagramPoint> a,
                             std::span<const neurotopo::DiagramPoint> b);

/// Exhaustive bottleneck distance in one degree, essential points included.
double exhaustive_bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);

/// LOF straight from the definitions.
std::vector<double> naive_lof(const DistanceMatrix& dm, std::size_t k);

DistanceMatrix naive_distances(const PointCloud& cloud);

// generators

PointCloud uniform_cloud(std::mt19937_64& rng, std::size_t n, std::size_t d, double side = 1.0);
PointCloud gaussian_cloud(std::mt19937_64& rng, std::size_t n, std::size_t d, double sigma = 1.0);
PointCloud circle_polygon(std::size_t n, double radius = 1.0);
PointCloud fibonacci_sphere(std::size_t n);

/// Random diagram in degrees 0..max_dim. With `grid`, coordinates are
/// multiples of 0.25 so ties are frequent.
PersistenceDiagram random_diagram(std::mt19937_64& rng, std::size_t max_points, int max_dim,
                                  bool grid, std::size_t essential = 0);

std::vector<neurotopo::DiagramPoint> random_points(std::mt19937_64& rng, std::size_t max_points,
                                                   bool grid);

std::vector<PersistencePair> sorted(std::vector<PersistencePair> pairs);
std::vector<PersistencePair> drop_zero_length(std::vector<PersistencePair> pairs);

}  // namespace oracle
