#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "dtninv/mesh.hpp"

namespace dtninv {

double eval_constant(double c, Point p);
/// 0.9 * sin(pi * (x + y + 0.1) / 3)
double eval_sinusoid(Point p);
/// 0.9 strictly inside the circle of radius 0.25 about (0.5, 0.5), else 0.5.
double eval_disk_inclusion(Point p);

struct Disk {
  Point center;
  double radius;
};

struct Inclusion {
  Disk shape;
  double value;
};

/// Cell-centered raster over a box, sampled bilinearly (clamped at the edges).
class PhantomRaster {
public:
  PhantomRaster(int nx, int ny, Point lo, Point hi, std::vector<double> values, double sigma);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  Point lo() const { return lo_; }
  Point hi() const { return hi_; }
  double sigma() const { return sigma_; }
  /// Row-major, row 0 at the bottom of the box.
  const std::vector<double>& values() const { return values_; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
  Point cell_center(int i, int j) const;

  double operator()(Point p) const;

private:
  int nx_, ny_;
  Point lo_, hi_;
  std::vector<double> values_;
  double sigma_;
};

/// Separable Gaussian blur with standard deviation `sigma` (in cells), kernel
/// truncated at ceil(3 sigma) and renormalized over the cells inside the raster.
std::vector<double> gaussian_smooth(const std::vector<double>& values, int nx, int ny, double sigma);

class CoefficientField {
public:
  struct Constant { double c; };
  struct Sinusoid {};
  struct DiskInclusion {
    double inside = 0.9;
    double outside = 0.5;
    Point center{0.5, 0.5};
    double radius = 0.25;
  };
  using Phantom = std::shared_ptr<const PhantomRaster>;

  static CoefficientField constant(double c);
  static CoefficientField sinusoid();
  static CoefficientField disk_inclusion();
  static CoefficientField disk_inclusion(DiskInclusion d);
  static CoefficientField phantom(PhantomRaster raster, std::string tag = "phantom");

  double operator()(Point p) const;
  /// Values at every mesh vertex.
  std::vector<double> interpolate(const Mesh& mesh) const;

  /// True when a closed-form gradient exists (constant, sinusoid).
  bool differentiable() const;
  /// Gradient of k; only for differentiable kinds.
  Point gradient(Point p) const;

  const std::string& name() const { return name_; }
  const PhantomRaster* raster() const;

private:
  using Kind = std::variant<Constant, Sinusoid, DiskInclusion, Phantom>;
  CoefficientField(Kind kind, std::string name) : kind_(std::move(kind)), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
};

/// Rasterizes the disks (later entries drawn over earlier ones) onto an
/// `resolution`^2 grid covering [lo, hi], then blurs with `sigma` cells.
CoefficientField make_phantom(const std::vector<Inclusion>& inclusions, double background, double sigma,
                              int resolution = 256, Point lo = {0.0, 0.0}, Point hi = {1.0, 1.0},
                              std::string tag = "phantom");

/// Two low-conductivity disks (0.3, 0.5) on a 0.9 background inside the unit disk.
CoefficientField phantom1(double sigma = 2.0, int resolution = 256);
/// Three high-conductivity disks (5, 4, 3) on a 1.0 background inside the unit disk.
CoefficientField phantom2(double sigma = 2.0, int resolution = 256);

/// p*(x, y) = cos(a pi x) cos(b pi y)
struct ManufacturedSolution {
  double a = 0.0;
  double b = 0.0;

  double value(Point p) const;
  Point gradient(Point p) const;
  double laplacian(Point p) const;
};

/// -div(k grad p*) evaluated analytically; k must be differentiable.
double manufactured_source_closed_form(const CoefficientField& k, const ManufacturedSolution& sol, Point p);

/// PGM (P2, maxval 65535) plus "<stem>.txt" sidecar holding the box, sigma
/// and the value range used for quantization.
void write_phantom_pgm(const std::filesystem::path& stem, const PhantomRaster& raster);
PhantomRaster read_phantom_pgm(const std::filesystem::path& stem);

} // namespace dtninv
