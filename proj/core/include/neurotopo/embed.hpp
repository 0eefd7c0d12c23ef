#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "neurotopo/bottleneck.hpp"

namespace neurotopo {

struct Embedding2D {
  std::vector<std::array<double, 2>> coords;
  std::vector<std::string> labels;
  double stress = 0.0;  // sum (d_ij - |c_i - c_j|)^2 / sum d_ij^2 over i < j
};

/// Classical (Torgerson) MDS into the plane: double-center -1/2 D^2, keep
/// the two largest eigenpairs with negative eigenvalues clamped to zero,
/// and scale eigenvectors by sqrt(eigenvalue). Each axis is signed so its
/// first nonzero coordinate is positive.
Embedding2D classical_mds(const DiagramDistanceMatrix& dm);

/// CSV "label,x,y".
void write_embedding_csv(const Embedding2D& e, std::ostream& out);
Embedding2D read_embedding_csv(std::istream& in);

}  // namespace neurotopo
