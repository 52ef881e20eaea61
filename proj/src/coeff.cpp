#include "dtninv/coeff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "dtninv/error.hpp"

namespace dtninv {

namespace {
constexpr double pi = std::numbers::pi;

double lerp(double a, double b, double t) { return a + t * (b - a); }
} // namespace

double eval_constant(double c, Point) { return c; }

double eval_sinusoid(Point p) { return 0.9 * std::sin(pi * (p.x + p.y + 0.1) / 3.0); }

double eval_disk_inclusion(Point p) {
  const double dx = p.x - 0.5;
  const double dy = p.y - 0.5;
  return dx * dx + dy * dy < 0.25 * 0.25 ? 0.9 : 0.5;
}

PhantomRaster::PhantomRaster(int nx, int ny, Point lo, Point hi, std::vector<double> values, double sigma)
    : nx_(nx), ny_(ny), lo_(lo), hi_(hi), values_(std::move(values)), sigma_(sigma) {
  require(nx >= 1 && ny >= 1, "raster must be non-empty");
  require(values_.size() == static_cast<std::size_t>(nx) * ny, "raster size mismatch");
  require(hi.x > lo.x && hi.y > lo.y, "raster box must have positive extent");
}

Point PhantomRaster::cell_center(int i, int j) const {
  return {lo_.x + (i + 0.5) * (hi_.x - lo_.x) / nx_, lo_.y + (j + 0.5) * (hi_.y - lo_.y) / ny_};
}

double PhantomRaster::operator()(Point p) const {
  const double fx = std::clamp((p.x - lo_.x) / (hi_.x - lo_.x) * nx_ - 0.5, 0.0, nx_ - 1.0);
  const double fy = std::clamp((p.y - lo_.y) / (hi_.y - lo_.y) * ny_ - 0.5, 0.0, ny_ - 1.0);
  const int i0 = std::min(static_cast<int>(fx), nx_ - 1);
  const int j0 = std::min(static_cast<int>(fy), ny_ - 1);
  const int i1 = std::min(i0 + 1, nx_ - 1);
  const int j1 = std::min(j0 + 1, ny_ - 1);
  const double tx = fx - i0;
  const double ty = fy - j0;
  return lerp(lerp(at(i0, j0), at(i1, j0), tx), lerp(at(i0, j1), at(i1, j1), tx), ty);
}

std::vector<double> gaussian_smooth(const std::vector<double>& values, int nx, int ny, double sigma) {
  require(sigma >= 0.0, "smoothing sigma must be non-negative");
  if (sigma == 0.0) return values;
  const int radius = std::min(static_cast<int>(std::ceil(3.0 * sigma)), std::max(nx, ny));
  std::vector<double> w(static_cast<std::size_t>(radius) + 1);
  for (int d = 0; d <= radius; ++d) w[d] = std::exp(-0.5 * d * d / (sigma * sigma));

  auto pass = [&](const std::vector<double>& in, int len, int count, bool along_x) {
    std::vector<double> out(in.size());
    for (int c = 0; c < count; ++c) {
      for (int i = 0; i < len; ++i) {
        double acc = 0.0;
        double norm = 0.0;
        const int a = std::max(0, i - radius);
        const int b = std::min(len - 1, i + radius);
        for (int k = a; k <= b; ++k) {
          const double wk = w[static_cast<std::size_t>(std::abs(k - i))];
          const std::size_t idx = along_x ? static_cast<std::size_t>(c) * nx + k
                                          : static_cast<std::size_t>(k) * nx + c;
          acc += wk * in[idx];
          norm += wk;
        }
        const std::size_t idx = along_x ? static_cast<std::size_t>(c) * nx + i
                                        : static_cast<std::size_t>(i) * nx + c;
        out[idx] = acc / norm;
      }
    }
    return out;
  };
  return pass(pass(values, nx, ny, true), ny, nx, false);
}

CoefficientField CoefficientField::constant(double c) {
  require(std::isfinite(c) && c > 0.0, "constant coefficient must be positive");
  std::ostringstream os;
  os << "constant(" << c << ")";
  return CoefficientField(Constant{c}, os.str());
}

CoefficientField CoefficientField::sinusoid() { return CoefficientField(Sinusoid{}, "sinusoid"); }

CoefficientField CoefficientField::disk_inclusion() { return disk_inclusion(DiskInclusion{}); }

CoefficientField CoefficientField::disk_inclusion(DiskInclusion d) {
  require(d.inside > 0.0 && d.outside > 0.0 && d.radius > 0.0, "disk inclusion values must be positive");
  return CoefficientField(d, "disk_inclusion");
}

CoefficientField CoefficientField::phantom(PhantomRaster raster, std::string tag) {
  for (double v : raster.values()) require(std::isfinite(v) && v > 0.0, "phantom values must be positive");
  return CoefficientField(std::make_shared<const PhantomRaster>(std::move(raster)), std::move(tag));
}

double CoefficientField::operator()(Point p) const {
  return std::visit(
      [p](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Constant>) {
          return eval_constant(k.c, p);
        } else if constexpr (std::is_same_v<T, Sinusoid>) {
          return eval_sinusoid(p);
        } else if constexpr (std::is_same_v<T, DiskInclusion>) {
          const double dx = p.x - k.center.x;
          const double dy = p.y - k.center.y;
          return dx * dx + dy * dy < k.radius * k.radius ? k.inside : k.outside;
        } else {
          return (*k)(p);
        }
      },
      kind_);
}

std::vector<double> CoefficientField::interpolate(const Mesh& mesh) const {
  std::vector<double> out;
  out.reserve(mesh.num_vertices());
  for (const auto& p : mesh.vertices()) out.push_back((*this)(p));
  return out;
}

bool CoefficientField::differentiable() const {
  return std::holds_alternative<Constant>(kind_) || std::holds_alternative<Sinusoid>(kind_);
}

Point CoefficientField::gradient(Point p) const {
  if (std::holds_alternative<Constant>(kind_)) return {0.0, 0.0};
  if (std::holds_alternative<Sinusoid>(kind_)) {
    const double g = 0.9 * (pi / 3.0) * std::cos(pi * (p.x + p.y + 0.1) / 3.0);
    return {g, g};
  }
  throw InvalidArgument("coefficient '" + name_ + "' has no closed-form gradient");
}

const PhantomRaster* CoefficientField::raster() const {
  const auto* ph = std::get_if<Phantom>(&kind_);
  return ph ? ph->get() : nullptr;
}

CoefficientField make_phantom(const std::vector<Inclusion>& inclusions, double background, double sigma,
                              int resolution, Point lo, Point hi, std::string tag) {
  require(background > 0.0, "phantom background must be positive");
  require(sigma >= 0.0, "phantom sigma must be non-negative");
  require(resolution >= 1, "phantom resolution must be positive");
  for (const auto& inc : inclusions) require(inc.value > 0.0, "phantom inclusion values must be positive");

  std::vector<double> raw(static_cast<std::size_t>(resolution) * resolution, background);
  PhantomRaster probe(resolution, resolution, lo, hi, raw, 0.0);
  for (int j = 0; j < resolution; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const Point c = probe.cell_center(i, j);
      for (const auto& inc : inclusions) {
        const double dx = c.x - inc.shape.center.x;
        const double dy = c.y - inc.shape.center.y;
        if (dx * dx + dy * dy < inc.shape.radius * inc.shape.radius) {
          raw[static_cast<std::size_t>(j) * resolution + i] = inc.value;
        }
      }
    }
  }
  auto smoothed = gaussian_smooth(raw, resolution, resolution, sigma);
  return CoefficientField::phantom(PhantomRaster(resolution, resolution, lo, hi, std::move(smoothed), sigma),
                                   std::move(tag));
}

CoefficientField phantom1(double sigma, int resolution) {
  return make_phantom({{{{0.35, 0.6}, 0.12}, 0.3}, {{{0.65, 0.4}, 0.15}, 0.5}}, 0.9, sigma, resolution,
                      {0.0, 0.0}, {1.0, 1.0}, "phantom1");
}

CoefficientField phantom2(double sigma, int resolution) {
  return make_phantom({{{{0.32, 0.62}, 0.1}, 5.0}, {{{0.66, 0.64}, 0.12}, 4.0}, {{{0.5, 0.3}, 0.13}, 3.0}},
                      1.0, sigma, resolution, {0.0, 0.0}, {1.0, 1.0}, "phantom2");
}

double ManufacturedSolution::value(Point p) const {
  return std::cos(a * pi * p.x) * std::cos(b * pi * p.y);
}

Point ManufacturedSolution::gradient(Point p) const {
  return {-a * pi * std::sin(a * pi * p.x) * std::cos(b * pi * p.y),
          -b * pi * std::cos(a * pi * p.x) * std::sin(b * pi * p.y)};
}

double ManufacturedSolution::laplacian(Point p) const { return -(a * a + b * b) * pi * pi * value(p); }

double manufactured_source_closed_form(const CoefficientField& k, const ManufacturedSolution& sol, Point p) {
  require(k.differentiable(), "closed-form source needs a differentiable coefficient; use the weak load");
  const Point gk = k.gradient(p);
  const Point gp = sol.gradient(p);
  return -(gk.x * gp.x + gk.y * gp.y + k(p) * sol.laplacian(p));
}

void write_phantom_pgm(const std::filesystem::path& stem, const PhantomRaster& raster) {
  const auto [mn, mx] = std::minmax_element(raster.values().begin(), raster.values().end());
  const double vmin = *mn;
  const double vmax = *mx;
  const double span = vmax > vmin ? vmax - vmin : 1.0;

  std::ofstream pgm(std::filesystem::path(stem).replace_extension(".pgm"));
  if (!pgm) throw IoError("cannot write " + stem.string() + ".pgm");
  pgm << "P2\n" << raster.nx() << ' ' << raster.ny() << "\n65535\n";
  // PGM rows run top to bottom.
  for (int j = raster.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < raster.nx(); ++i) {
      const long q = std::lround((raster.at(i, j) - vmin) / span * 65535.0);
      pgm << q << (i + 1 == raster.nx() ? '\n' : ' ');
    }
  }

  std::ofstream side(std::filesystem::path(stem).replace_extension(".txt"));
  if (!side) throw IoError("cannot write " + stem.string() + ".txt");
  side << std::setprecision(17) << "lo_x = " << raster.lo().x << "\nlo_y = " << raster.lo().y
       << "\nhi_x = " << raster.hi().x << "\nhi_y = " << raster.hi().y << "\nsigma = " << raster.sigma()
       << "\nvalue_min = " << vmin << "\nvalue_max = " << vmax << '\n';
}

PhantomRaster read_phantom_pgm(const std::filesystem::path& stem) {
  std::ifstream side(std::filesystem::path(stem).replace_extension(".txt"));
  if (!side) throw IoError("cannot read " + stem.string() + ".txt");
  double lo_x = 0, lo_y = 0, hi_x = 1, hi_y = 1, sigma = 0, vmin = 0, vmax = 1;
  std::string line;
  while (std::getline(side, line)) {
    std::istringstream is(line);
    std::string key, eq;
    double v = 0;
    if (!(is >> key >> eq >> v) || eq != "=") throw IoError("malformed sidecar line: " + line);
    if (key == "lo_x") lo_x = v;
    else if (key == "lo_y") lo_y = v;
    else if (key == "hi_x") hi_x = v;
    else if (key == "hi_y") hi_y = v;
    else if (key == "sigma") sigma = v;
    else if (key == "value_min") vmin = v;
    else if (key == "value_max") vmax = v;
    else throw IoError("unknown sidecar key " + key);
  }

  std::ifstream pgm(std::filesystem::path(stem).replace_extension(".pgm"));
  if (!pgm) throw IoError("cannot read " + stem.string() + ".pgm");
  std::string magic;
  int nx = 0, ny = 0, maxval = 0;
  if (!(pgm >> magic >> nx >> ny >> maxval) || magic != "P2" || nx < 1 || ny < 1 || maxval < 1) {
    throw IoError("not an ASCII PGM: " + stem.string());
  }
  std::vector<double> values(static_cast<std::size_t>(nx) * ny);
  const double span = vmax > vmin ? vmax - vmin : 0.0;
  for (int j = ny - 1; j >= 0; --j) {
    for (int i = 0; i < nx; ++i) {
      long q = 0;
      if (!(pgm >> q)) throw IoError("truncated PGM: " + stem.string());
      values[static_cast<std::size_t>(j) * nx + i] = vmin + span * static_cast<double>(q) / maxval;
    }
  }
  return PhantomRaster(nx, ny, {lo_x, lo_y}, {hi_x, hi_y}, std::move(values), sigma);
}

} // namespace dtninv
