#pragma once

// Independent reference computations used by the unit tests.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dtninv/mesh.hpp"

namespace oracle {

using dtninv::Index;
using dtninv::Mesh;
using dtninv::Point;

// Dense stiffness with the element coefficient taken as the vertex mean,
// built directly from barycentric gradients.
inline Eigen::MatrixXd dense_stiffness(const Mesh& mesh, const Eigen::VectorXd& k) {
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : mesh.triangles()) {
    const Point p0 = mesh.vertex(t[0]), p1 = mesh.vertex(t[1]), p2 = mesh.vertex(t[2]);
    Eigen::Matrix3d m;
    m << 1, p0.x, p0.y, 1, p1.x, p1.y, 1, p2.x, p2.y;
    const double area = 0.5 * std::abs(m.determinant());
    const Eigen::Matrix3d c = m.inverse();  // column i holds the coefficients of basis i
    const double kbar = (k[t[0]] + k[t[1]] + k[t[2]]) / 3.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        a(t[i], t[j]) += kbar * area * (c(1, i) * c(1, j) + c(2, i) * c(2, j));
      }
    }
  }
  return a;
}

// Dense Dirichlet solve: p = g on boundary, A_II p_I = b_I - A_IB g.
inline Eigen::VectorXd dense_dirichlet(const Mesh& mesh, const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const Eigen::VectorXd& g_by_slot) {
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  std::vector<Index> interior;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
  for (Index v = 0; v < n; ++v) {
    if (mesh.on_boundary(v)) {
      p[v] = g_by_slot[mesh.boundary_slot(v)];
    } else {
      interior.push_back(v);
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior.size());
  Eigen::MatrixXd aii(ni, ni);
  Eigen::VectorXd rhs(ni);
  for (Eigen::Index r = 0; r < ni; ++r) {
    rhs[r] = b[interior[static_cast<std::size_t>(r)]];
    for (Index v = 0; v < n; ++v) {
      if (mesh.on_boundary(v)) rhs[r] -= a(interior[static_cast<std::size_t>(r)], v) * p[v];
    }
    for (Eigen::Index c = 0; c < ni; ++c) aii(r, c) = a(interior[static_cast<std::size_t>(r)], interior[static_cast<std::size_t>(c)]);
  }
  const Eigen::VectorXd pi = aii.ldlt().solve(rhs);
  for (Eigen::Index r = 0; r < ni; ++r) p[interior[static_cast<std::size_t>(r)]] = pi[r];
  return p;
}

// Direct 2D Gaussian convolution with truncation at ceil(3 sigma) and
// renormalization over in-bounds cells.
inline std::vector<double> direct_gaussian(const std::vector<double>& v, int nx, int ny, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> out(v.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double s = 0.0, w = 0.0;
      for (int dj = -r; dj <= r; ++dj) {
        for (int di = -r; di <= r; ++di) {
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
          const double g = std::exp(-0.5 * (di * di + dj * dj) / (sigma * sigma));
          s += g * v[static_cast<std::size_t>(jj) * nx + ii];
          w += g;
        }
      }
      out[static_cast<std::size_t>(j) * nx + i] = s / w;
    }
  }
  return out;
}

}  // namespace oracle
