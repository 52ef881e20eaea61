#include "dtninv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "dtninv/error.hpp"

namespace dtninv {

namespace {

// Uniform bucket grid over triangle bounding boxes for point location.
class TriangleLocator {
public:
  explicit TriangleLocator(const Mesh& mesh) : mesh_(&mesh), box_(mesh.bounding_box()) {
    nb_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
    buckets_.resize(static_cast<std::size_t>(nb_) * nb_);
    const auto tris = mesh.triangles();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
      for (Index v : tris[t]) {
        const Point p = mesh.vertex(v);
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
      }
      for (int j = bucket_y(y0); j <= bucket_y(y1); ++j) {
        for (int i = bucket_x(x0); i <= bucket_x(x1); ++i) {
          buckets_[static_cast<std::size_t>(j) * nb_ + i].push_back(static_cast<Index>(t));
        }
      }
    }
  }

  // Containing triangle and barycentric weights, or triangle -1.
  std::pair<Index, std::array<double, 3>> locate(Point p) const {
    if (p.x < box_.first.x || p.x > box_.second.x || p.y < box_.first.y || p.y > box_.second.y) return {-1, {}};
    constexpr double tol = -1e-12;
    for (Index t : buckets_[static_cast<std::size_t>(bucket_y(p.y)) * nb_ + bucket_x(p.x)]) {
      const auto& tri = mesh_->triangles()[static_cast<std::size_t>(t)];
      const Point a = mesh_->vertex(tri[0]);
      const Point b = mesh_->vertex(tri[1]);
      const Point c = mesh_->vertex(tri[2]);
      const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
      const double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
      const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
      const double l0 = 1.0 - l1 - l2;
      if (l0 >= tol && l1 >= tol && l2 >= tol) return {t, {l0, l1, l2}};
    }
    return {-1, {}};
  }

private:
  int bucket_x(double x) const {
    return std::clamp(static_cast<int>((x - box_.first.x) / (box_.second.x - box_.first.x) * nb_), 0, nb_ - 1);
  }
  int bucket_y(double y) const {
    return std::clamp(static_cast<int>((y - box_.first.y) / (box_.second.y - box_.first.y) * nb_), 0, nb_ - 1);
  }

  const Mesh* mesh_;
  std::pair<Point, Point> box_;
  int nb_ = 1;
  std::vector<std::vector<Index>> buckets_;
};

} // namespace

double relative_l2(const Mesh& mesh, const NodalField& k_exact, const NodalField& k_recon) {
  require(&k_exact.mesh() == &mesh && &k_recon.mesh() == &mesh, "relative_l2: fields must live on the mesh");
  const SparseMatrix m = P1Space(mesh).mass_matrix();
  const Vector e = k_exact.values() - k_recon.values();
  const double denom = k_exact.values().dot(m * k_exact.values());
  require(denom > 0.0, "relative_l2: exact field has zero norm");
  return std::sqrt(std::max(0.0, e.dot(m * e)) / denom);
}

Rasterizer::Rasterizer(const Mesh& mesh, int grid) : mesh_(&mesh), grid_(grid) {
  require(grid >= 8, "raster grid must be at least 8");
  const auto [lo, hi] = mesh.bounding_box();
  const TriangleLocator loc(mesh);
  cells_.resize(static_cast<std::size_t>(grid) * grid);
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const Point p{lo.x + (i + 0.5) * (hi.x - lo.x) / grid,
                    lo.y + (j + 0.5) * (hi.y - lo.y) / grid};
      auto [t, bary] = loc.locate(p);
      cells_[static_cast<std::size_t>(j) * grid + i] = {t, bary};
    }
  }
}

MaskedImage Rasterizer::operator()(const Vector& field) const {
  require(static_cast<std::size_t>(field.size()) == mesh_->num_vertices(), "rasterize: field size mismatch");
  MaskedImage img;
  img.size = grid_;
  img.values.assign(cells_.size(), 0.0);
  img.inside.assign(cells_.size(), false);
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (cells_[c].triangle < 0) continue;
    const auto& tri = mesh_->triangles()[static_cast<std::size_t>(cells_[c].triangle)];
    const auto& w = cells_[c].bary;
    img.values[c] = w[0] * field[tri[0]] + w[1] * field[tri[1]] + w[2] * field[tri[2]];
    img.inside[c] = true;
  }
  return img;
}

MaskedImage rasterize(const Mesh& mesh, const NodalField& field, int grid) {
  return Rasterizer(mesh, grid)(field.values());
}

std::vector<double> sample_field(const Mesh& mesh, const Vector& field, const std::vector<Point>& points) {
  const TriangleLocator loc(mesh);
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    auto [t, w] = loc.locate(p);
    if (t < 0) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    out.push_back(w[0] * field[tri[0]] + w[1] * field[tri[1]] + w[2] * field[tri[2]]);
  }
  return out;
}

double psnr(double mse, double data_range) {
  require(mse >= 0.0 && data_range > 0.0, "psnr needs mse >= 0 and data_range > 0");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / mse);
}

double ssim(const MaskedImage& a, const MaskedImage& b, double data_range) {
  require(a.size == b.size && a.values.size() == b.values.size(), "ssim: image shapes differ");
  require(a.inside == b.inside, "ssim: image masks differ");
  constexpr int radius = 5;
  constexpr double sigma = 1.5;
  std::array<double, 2 * radius + 1> g{};
  for (int d = -radius; d <= radius; ++d) g[d + radius] = std::exp(-0.5 * d * d / (sigma * sigma));
  const double c1 = (0.01 * data_range) * (0.01 * data_range);
  const double c2 = (0.03 * data_range) * (0.03 * data_range);

  const int n = a.size;
  double total = 0.0;
  std::size_t count = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (!a.is_inside(i, j)) continue;
      double wsum = 0.0, mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (int dj = -radius; dj <= radius; ++dj) {
        const int jj = j + dj;
        if (jj < 0 || jj >= n) continue;
        for (int di = -radius; di <= radius; ++di) {
          const int ii = i + di;
          if (ii < 0 || ii >= n || !a.is_inside(ii, jj)) continue;
          const double w = g[di + radius] * g[dj + radius];
          const double x = a.at(ii, jj);
          const double y = b.at(ii, jj);
          wsum += w;
          mx += w * x;
          my += w * y;
          sxx += w * x * x;
          syy += w * y * y;
          sxy += w * (x * y);
        }
      }
      mx /= wsum;
      my /= wsum;
      const double vx = sxx / wsum - mx * mx;
      const double vy = syy / wsum - my * my;
      const double cxy = sxy / wsum - mx * my;
      total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  require(count > 0, "ssim: no pixels inside the mask");
  return total / static_cast<double>(count);
}

MetricsReport full_report(const Mesh& mesh, const NodalField& k_exact, const NodalField& k_recon, int grid) {
  const Rasterizer raster(mesh, grid);
  const MaskedImage ex = raster(k_exact.values());
  const MaskedImage rc = raster(k_recon.values());

  MetricsReport r;
  r.raster = grid;
  r.rel_l2 = relative_l2(mesh, k_exact, k_recon);
  double se = 0.0, ae = 0.0, peak = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (std::size_t c = 0; c < ex.values.size(); ++c) {
    if (!ex.inside[c]) continue;
    const double d = rc.values[c] - ex.values[c];
    se += d * d;
    ae += std::abs(d);
    peak = std::max(peak, ex.values[c]);
    ++count;
  }
  require(count > 0, "full_report: raster has no inside cells");
  r.mse = se / static_cast<double>(count);
  r.mae = ae / static_cast<double>(count);
  r.data_range = peak;
  r.psnr = psnr(r.mse, r.data_range);
  r.ssim = ssim(ex, rc, r.data_range);
  r.vertex_mse = (k_recon.values() - k_exact.values()).squaredNorm() / static_cast<double>(mesh.num_vertices());
  return r;
}

void write_metrics_json(std::ostream& os, const MetricsReport& report,
                        const std::vector<std::pair<std::string, double>>& extras) {
  nlohmann::ordered_json j;
  j["rel_l2"] = report.rel_l2;
  j["mse"] = report.mse;
  j["mae"] = report.mae;
  if (std::isinf(report.psnr)) {
    j["psnr"] = "inf";
  } else {
    j["psnr"] = report.psnr;
  }
  j["ssim"] = report.ssim;
  j["data_range"] = report.data_range;
  j["raster"] = report.raster;
  j["vertex_mse"] = report.vertex_mse;
  for (const auto& [key, value] : extras) j[key] = value;
  os << j.dump(2) << '\n';
}

void write_pgm(std::ostream& os, const MaskedImage& img, double lo, double hi) {
  const double span = hi > lo ? hi - lo : 1.0;
  os << "P2\n" << img.size << ' ' << img.size << "\n65535\n";
  for (int j = img.size - 1; j >= 0; --j) {
    for (int i = 0; i < img.size; ++i) {
      long q = 0;
      if (img.is_inside(i, j)) q = std::lround(std::clamp((img.at(i, j) - lo) / span, 0.0, 1.0) * 65535.0);
      os << q << (i + 1 == img.size ? '\n' : ' ');
    }
  }
}

} // namespace dtninv
