#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dtninv/fem.hpp"
#include "dtninv/mesh.hpp"

namespace dtninv {

/// Square image with an inside-the-domain mask; row 0 is the bottom row.
struct MaskedImage {
  int size = 0;
  std::vector<double> values;
  std::vector<bool> inside;

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * size + i]; }
  bool is_inside(int i, int j) const { return inside[static_cast<std::size_t>(j) * size + i]; }
};

struct MetricsReport {
  double rel_l2 = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  double psnr = 0.0;  // +inf when mse == 0
  double ssim = 1.0;
  double data_range = 0.0;
  int raster = 0;
  double vertex_mse = 0.0;
};

/// sqrt(e^T M e / k^T M k) with e = k_exact - k_recon and M the consistent mass matrix.
double relative_l2(const Mesh& mesh, const NodalField& k_exact, const NodalField& k_recon);

/// Per-cell containing triangle and barycentric weights for a G x G raster
/// of cell centers over the mesh bounding box. Reusable across fields.
class Rasterizer {
public:
  Rasterizer(const Mesh& mesh, int grid);

  int grid() const { return grid_; }
  MaskedImage operator()(const Vector& field) const;

private:
  struct Cell {
    Index triangle = -1;
    std::array<double, 3> bary{};
  };
  const Mesh* mesh_;
  int grid_;
  std::vector<Cell> cells_;
};

MaskedImage rasterize(const Mesh& mesh, const NodalField& field, int grid);

/// Barycentric interpolation of a P1 field at arbitrary points; NaN outside the mesh.
std::vector<double> sample_field(const Mesh& mesh, const Vector& field, const std::vector<Point>& points);

/// 10 log10(data_range^2 / mse); +inf when mse == 0.
double psnr(double mse, double data_range);

/// Mean local SSIM over inside pixels with an 11x11 Gaussian window
/// (sigma 1.5), renormalized over the inside pixels of each window.
double ssim(const MaskedImage& a, const MaskedImage& b, double data_range);

MetricsReport full_report(const Mesh& mesh, const NodalField& k_exact, const NodalField& k_recon, int grid = 256);

/// JSON object with the report fields followed by `extras` in order.
void write_metrics_json(std::ostream& os, const MetricsReport& report,
                        const std::vector<std::pair<std::string, double>>& extras = {});
/// P2 PGM (maxval 65535) scaled to [lo, hi]; masked cells are written as 0.
void write_pgm(std::ostream& os, const MaskedImage& img, double lo, double hi);

} // namespace dtninv
