#include "dtninv/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtninv/config.hpp"
#include "dtninv/error.hpp"
#include "dtninv/io.hpp"
#include "dtninv/metrics.hpp"

namespace dtninv {

namespace fs = std::filesystem;

namespace {

constexpr int kSlicePoints = 201;

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// Line chart with a shared x axis. `log_y` plots log10 of positive values.
std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, bool log_y) {
  const double w = 640, h = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto ty = [log_y](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (ty(y) - y0) / (y1 - y0) * (h - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
     << "</text>\n"
     << "<text x=\"16\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << h / 2 << ")\">" << (log_y ? "log10 " : "") << ylabel << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0;
    const double yv = y0 + (y1 - y0) * t / 4.0;
    const double ypix = h - mb - t / 4.0 * (h - mt - mb);
    os << "<text x=\"" << fixed(px(xv), 1) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
       << fixed(xv, 2) << "</text>\n"
       << "<text x=\"" << ml - 6 << "\" y=\"" << fixed(ypix + 3, 1) << "\" text-anchor=\"end\" font-size=\"10\">"
       << fixed(yv, 3) << "</text>\n";
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      os << fixed(px(s.x[i]), 2) << ',' << fixed(py(s.y[i]), 2) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << w - mr - 4 << "\" y=\"" << mt + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
       << s.color << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Blue-white-red ramp, P3 with masked cells grey.
std::string heat_ppm(const MaskedImage& img, double lo, double hi) {
  const double span = hi > lo ? hi - lo : 1.0;
  std::ostringstream os;
  os << "P3\n" << img.size << ' ' << img.size << "\n255\n";
  for (int j = img.size - 1; j >= 0; --j) {
    for (int i = 0; i < img.size; ++i) {
      int r = 128, g = 128, b = 128;
      if (img.is_inside(i, j)) {
        const double t = std::clamp((img.at(i, j) - lo) / span, 0.0, 1.0);
        if (t < 0.5) {
          const double u = t / 0.5;
          r = static_cast<int>(std::lround(255 * u));
          g = static_cast<int>(std::lround(255 * u));
          b = 255;
        } else {
          const double u = (t - 0.5) / 0.5;
          r = 255;
          g = static_cast<int>(std::lround(255 * (1 - u)));
          b = static_cast<int>(std::lround(255 * (1 - u)));
        }
      }
      os << r << ' ' << g << ' ' << b << (i + 1 == img.size ? '\n' : ' ');
    }
  }
  return os.str();
}

} // namespace

WindowAverage window_average(const std::vector<EpochRecord>& history, int window) {
  require(window >= 1, "window must be positive");
  WindowAverage out;
  for (std::size_t start = 0; start < history.size(); start += static_cast<std::size_t>(window)) {
    const std::size_t end = std::min(history.size(), start + static_cast<std::size_t>(window));
    double l = 0.0, e = 0.0, ep = 0.0;
    for (std::size_t i = start; i < end; ++i) {
      l += history[i].mean_loss;
      e += history[i].rel_error;
      ep += history[i].epoch + 1;
    }
    const auto n = static_cast<double>(end - start);
    out.epoch.push_back(ep / n);
    out.mean_loss.push_back(l / n);
    out.rel_error.push_back(e / n);
  }
  return out;
}

const std::vector<SliceLine>& standard_slices() {
  static const std::vector<SliceLine> lines{{"y0", {0, 0}, {1, 0}},   {"x0", {0, 0}, {0, 1}},
                                            {"y1", {0, 1}, {1, 1}},   {"x1", {1, 0}, {1, 1}},
                                            {"yx", {0, 0}, {1, 1}},   {"y05", {0, 0.5}, {1, 0.5}}};
  return lines;
}

std::vector<fs::path> plot_run(const fs::path& run_dir) {
  // Read and validate everything first so a failure leaves no partial output.
  const auto history = read_history_csv(run_dir / "history.csv");
  if (history.empty()) throw IoError("history.csv in " + run_dir.string() + " has no epochs");
  const RunConfig config = load_config_file((run_dir / "config.txt").string());
  const FieldTable field = read_field_csv(run_dir / "field.csv");
  const Mesh mesh = build_mesh(config);
  if (field.points.size() != mesh.num_vertices()) {
    throw IoError("field.csv does not match the mesh described by config.txt");
  }
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point p = mesh.vertex(static_cast<Index>(v));
    if (std::abs(p.x - field.points[v].x) > 1e-12 || std::abs(p.y - field.points[v].y) > 1e-12) {
      throw IoError("field.csv vertex order does not match the mesh");
    }
  }

  std::vector<std::pair<std::string, std::string>> outputs;

  const WindowAverage avg = window_average(history, 10);
  outputs.emplace_back("curves.svg",
                       svg_chart("Training history (10-epoch averages)", "epoch", "value",
                                 {{"Neumann loss", "#1f4e9c", avg.epoch, avg.mean_loss},
                                  {"relative error", "#c0392b", avg.epoch, avg.rel_error}},
                                 true));

  const Vector err = (field.k_exact - field.k_recon).cwiseAbs();
  const Rasterizer raster(mesh, config.raster);
  const double lo = std::min(field.k_exact.minCoeff(), field.k_recon.minCoeff());
  const double hi = std::max(field.k_exact.maxCoeff(), field.k_recon.maxCoeff());
  outputs.emplace_back("heat_exact.ppm", heat_ppm(raster(field.k_exact), lo, hi));
  outputs.emplace_back("heat_recon.ppm", heat_ppm(raster(field.k_recon), lo, hi));
  outputs.emplace_back("heat_error.ppm", heat_ppm(raster(err), 0.0, err.maxCoeff()));

  std::ostringstream csv;
  csv << "line,t,x,y,k_exact,k_recon\n";
  for (const auto& line : standard_slices()) {
    std::vector<Point> pts;
    std::vector<double> ts;
    for (int i = 0; i < kSlicePoints; ++i) {
      const double t = static_cast<double>(i) / (kSlicePoints - 1);
      pts.push_back({line.from.x + t * (line.to.x - line.from.x), line.from.y + t * (line.to.y - line.from.y)});
      ts.push_back(t);
    }
    const auto ex = sample_field(mesh, field.k_exact, pts);
    const auto rc = sample_field(mesh, field.k_recon, pts);
    Series se{"exact", "#e67e22", {}, {}};
    Series sr{"reconstructed", "#1f4e9c", {}, {}};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::isnan(ex[i])) continue;
      csv << line.name << ',' << format_double(ts[i]) << ',' << format_double(pts[i].x) << ','
          << format_double(pts[i].y) << ',' << format_double(ex[i]) << ',' << format_double(rc[i]) << '\n';
      se.x.push_back(ts[i]);
      se.y.push_back(ex[i]);
      sr.x.push_back(ts[i]);
      sr.y.push_back(rc[i]);
    }
    if (!se.x.empty()) {
      outputs.emplace_back("slice_" + line.name + ".svg",
                           svg_chart("Slice " + line.name, "t", "k", {se, sr}, false));
    }
  }
  outputs.emplace_back("slices.csv", csv.str());

  const fs::path dir = run_dir / "plots";
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (const auto& [name, text] : outputs) {
    write_text_file(dir / name, text);
    written.push_back(dir / name);
  }
  return written;
}

} // namespace dtninv
