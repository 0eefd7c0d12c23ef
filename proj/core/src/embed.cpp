#include "neurotopo/embed.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <ostream>

#include "neurotopo/error.hpp"
#include "neurotopo/io.hpp"

namespace neurotopo {

Embedding2D classical_mds(const DiagramDistanceMatrix& dm) {
  const std::size_t n = dm.size();
  if (n < 3) throw DataError("embedding needs at least 3 diagrams");
  if (dm.values.size() != n * n) throw DataError("distance matrix is not square");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = dm(i, j);
      if (std::isinf(v))
        throw DataError("distance between '" + dm.labels[i] + "' and '" + dm.labels[j] +
                        "' is infinite (mismatched essential features); drop one of "
                        "these diagrams before embedding");
      if (!std::isfinite(v) || v < 0.0) throw DataError("distance matrix has invalid entries");
      if (v != dm(j, i)) throw DataError("distance matrix is not symmetric");
    }
    if (dm(i, i) != 0.0) throw DataError("distance matrix diagonal must be zero");
  }

  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd sq(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) {
      const double v = dm(std::size_t(i), std::size_t(j));
      sq(i, j) = v * v;
    }
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::VectorXd col_mean = sq.colwise().mean().transpose();
  const double grand = sq.mean();
  Eigen::MatrixXd gram(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j)
      gram(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw DataError("eigendecomposition failed");

  Embedding2D out;
  out.labels = dm.labels;
  out.coords.assign(n, {0.0, 0.0});
  for (int axis = 0; axis < 2; ++axis) {
    const Eigen::Index which = size - 1 - axis;  // eigenvalues ascend
    const double lambda = std::max(0.0, solver.eigenvalues()(which));
    Eigen::VectorXd v = solver.eigenvectors().col(which);
    for (Eigen::Index i = 0; i < size; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    const double s = std::sqrt(lambda);
    for (Eigen::Index i = 0; i < size; ++i) out.coords[std::size_t(i)][axis] = v(i) * s;
  }

  double residual = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = out.coords[i][0] - out.coords[j][0];
      const double dy = out.coords[i][1] - out.coords[j][1];
      const double diff = dm(i, j) - std::sqrt(dx * dx + dy * dy);
      residual += diff * diff;
      total += dm(i, j) * dm(i, j);
    }
  }
  out.stress = total > 0.0 ? residual / total : 0.0;
  return out;
}

void write_embedding_csv(const Embedding2D& e, std::ostream& out) {
  out << "label,x,y\n";
  for (std::size_t i = 0; i < e.coords.size(); ++i) {
    io::require_plain_label(e.labels[i]);
    out << e.labels[i] << ',' << io::format_double(e.coords[i][0]) << ','
        << io::format_double(e.coords[i][1]) << '\n';
  }
}

Embedding2D read_embedding_csv(std::istream& in) {
  const auto lines = io::read_lines(in);
  if (lines.empty() || io::trim(lines[0]) != "label,x,y")
    throw DataError("embedding CSV: missing 'label,x,y' header");
  Embedding2D e;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (io::trim(lines[li]).empty()) continue;
    const auto f = io::split(lines[li]);
    const auto x = f.size() == 3 ? io::parse_double(f[1]) : std::nullopt;
    const auto y = f.size() == 3 ? io::parse_double(f[2]) : std::nullopt;
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y))
      throw DataError("embedding CSV line " + std::to_string(li + 1) + ": malformed row");
    e.labels.emplace_back(io::trim(f[0]));
    e.coords.push_back({*x, *y});
  }
  return e;
}

}  // namespace neurotopo
