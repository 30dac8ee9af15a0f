#pragma once

// Spectra of the normalized Laplacian L = I - A/d of the d-regularized graph
// (A carries d - deg(v) loop weight on the diagonal, so L = (Deg - A_G) / d).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subcluster/graph.hpp"
#include "subcluster/rng.hpp"

namespace subcluster {

// Dense solves stay below this many vertices.
inline constexpr std::size_t kDenseLimit = 4096;

class DeskLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Eigen::MatrixXd dense_laplacian(const Graph& g) {
  const std::size_t n = g.num_vertices();
  if (n > kDenseLimit) throw DeskLimitError("graph too large for a dense eigensolve");
  const double d = g.degree_bound();
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (d == 0) return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Vertex v = 0; v < n; ++v) {
    const auto nb = g.neighbors(v);
    // Loop weight d - deg contributes to A/d on the diagonal.
    l(v, v) = static_cast<double>(nb.size()) / d;
    for (Vertex u : nb) l(v, u) -= 1.0 / d;
  }
  return l;
}

// Laplacian of a symmetric weighted graph with degree bound d: off-diagonal
// weights w_uv, diagonal sum_u w_uv, all divided by d. Diagonal input entries
// (loop weights) are ignored.
inline Eigen::MatrixXd weighted_laplacian(const Eigen::MatrixXd& w, double d) {
  const Eigen::Index n = w.rows();
  Eigen::MatrixXd l = -w / d;
  for (Eigen::Index i = 0; i < n; ++i) {
    l(i, i) = 0.0;
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) s += w(i, j);
    }
    l(i, i) = s / d;
  }
  return l;
}

struct SpectralReport {
  std::vector<double> eigenvalues;          // ascending
  std::optional<Eigen::MatrixXd> vectors;   // column j pairs with eigenvalues[j]
};

inline SpectralReport symmetric_spectrum(const Eigen::MatrixXd& m, bool keep_vectors) {
  SpectralReport r;
  if (m.rows() == 0) return r;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, keep_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
  r.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + m.rows());
  if (keep_vectors) r.vectors = solver.eigenvectors();
  return r;
}

inline SpectralReport laplacian_spectrum(const Graph& g, bool keep_vectors = false) {
  return symmetric_spectrum(dense_laplacian(g), keep_vectors);
}

// Largest |1 - sum_j v_j(u)^2| over vertices u.
inline double eigenvector_norm_deviation(const SpectralReport& r) {
  if (!r.vectors) throw std::invalid_argument("spectral report kept no eigenvectors");
  const auto& v = *r.vectors;
  double worst = 0.0;
  for (Eigen::Index u = 0; u < v.rows(); ++u) worst = std::max(worst, std::abs(1.0 - v.row(u).squaredNorm()));
  return worst;
}

// Second-smallest eigenvalue of L by Lanczos with full reorthogonalization on
// A/d restricted to the complement of the all-ones vector. Handles graphs
// beyond the dense limit.
inline double lanczos_lambda2(const Graph& g, std::size_t max_iter = 400, double tol = 1e-10,
                              std::uint64_t seed = 1) {
  const std::size_t n = g.num_vertices();
  if (n < 2) throw std::invalid_argument("lambda2 needs at least 2 vertices");
  const double d = g.degree_bound();
  if (d == 0) return 0.0;
  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Vertex v = 0; v < n; ++v) {
      const auto nb = g.neighbors(v);
      double s = (d - static_cast<double>(nb.size())) * x(v);
      for (Vertex u : nb) s += x(u);
      y(v) = s / d;
    }
    return y;
  };
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)) / std::sqrt(static_cast<double>(n));
  Rng rng(seed);
  Eigen::VectorXd q(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = rng.uniform() - 0.5;
  q -= ones * ones.dot(q);
  q.normalize();

  const std::size_t steps = std::min(max_iter, n - 1);
  std::vector<Eigen::VectorXd> basis{q};
  std::vector<double> alpha, beta;
  double previous = 2.0;
  double mu = 1.0;
  for (std::size_t k = 0; k < steps; ++k) {
    Eigen::VectorXd w = apply(basis.back());
    const double a = basis.back().dot(w);
    alpha.push_back(a);
    for (int pass = 0; pass < 2; ++pass) {
      w -= ones * ones.dot(w);
      for (const auto& b : basis) w -= b * b.dot(w);
    }
    const double bnorm = w.norm();

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    mu = es.eigenvalues()(m - 1);
    if (bnorm < 1e-12 || std::abs(mu - previous) < tol) break;
    previous = mu;
    beta.push_back(bnorm);
    basis.push_back(w / bnorm);
  }
  return std::max(0.0, 1.0 - mu);
}

// lambda2 by the dense solver when small, Lanczos otherwise.
inline double spectral_gap(const Graph& g) {
  if (g.num_vertices() < 2) throw std::invalid_argument("spectral gap needs at least 2 vertices");
  if (g.num_vertices() <= 1024) return laplacian_spectrum(g).eigenvalues[1];
  return lanczos_lambda2(g);
}

}  // namespace subcluster
