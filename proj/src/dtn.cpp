#include "dtninv/dtn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "dtninv/error.hpp"

namespace dtninv {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

Vector boundary_weights(const Mesh& mesh) {
  const auto w = mesh.boundary_weights();
  return Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
}

// Linear interpolation of a boundary-loop trace from `fine` onto the boundary
// vertices of `coarse`.
Vector transfer_trace(const Mesh& fine, const Vector& fine_values, const Mesh& coarse) {
  const auto fe = fine.boundary_edges();
  const auto cb = coarse.boundary_vertices();
  Vector out(static_cast<Eigen::Index>(cb.size()));
  for (std::size_t i = 0; i < cb.size(); ++i) {
    const Point p = coarse.vertex(cb[i]);
    double best = std::numeric_limits<double>::infinity();
    double value = 0.0;
    for (std::size_t e = 0; e < fe.size(); ++e) {
      const Point a = fine.vertex(fe[e].v[0]);
      const Point b = fine.vertex(fe[e].v[1]);
      const double dx = b.x - a.x;
      const double dy = b.y - a.y;
      const double t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
      const double d = std::hypot(a.x + t * dx - p.x, a.y + t * dy - p.y);
      if (d < best) {
        best = d;
        const auto e1 = (e + 1) % fe.size();
        value = (1.0 - t) * fine_values[static_cast<Eigen::Index>(e)] + t * fine_values[static_cast<Eigen::Index>(e1)];
      }
    }
    out[static_cast<Eigen::Index>(i)] = value;
  }
  return out;
}

Mesh refine(const Mesh& mesh) {
  if (mesh.kind() == DomainKind::unit_square) {
    const auto n = static_cast<int>(mesh.boundary_vertices().size() / 4);
    return unit_square_mesh(2 * n);
  }
  const auto rings = static_cast<double>(mesh.boundary_vertices().size() / 6);
  return disk_mesh(mesh.disk_center(), mesh.disk_radius(), mesh.disk_radius() / (2.0 * rings));
}

struct SolvedTrace {
  Vector g;
  Vector h;  // unmasked flux
};

SolvedTrace solve_sample(const Mesh& mesh, const P1Space& space, const SparseMatrix& a, const DirichletSolver& solver,
                         const Vector& k, const ManufacturedSolution& sol, const BoundaryMask& mask, bool zero_source) {
  const auto bv = mesh.boundary_vertices();
  Vector g(static_cast<Eigen::Index>(bv.size()));
  for (std::size_t i = 0; i < bv.size(); ++i) {
    g[static_cast<Eigen::Index>(i)] = mask.observed[i] ? sol.value(mesh.vertex(bv[i])) : 0.0;
  }
  const Vector load = zero_source ? Vector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()))
                                  : manufactured_weak_load(space, k, sol);
  const Vector p = solver.solve_dirichlet(a, load, g);
  return {g, boundary_flux(mesh, a, p, load).values};
}

CauchyDataset generate(const Mesh& mesh, const CoefficientField& k_true, const ObservationSpec& spec, int count,
                       std::uint64_t seed, DatasetOptions options, bool zero_source) {
  require(count >= 1, "dataset needs at least one sample");
  CauchyDataset data;
  data.seed = seed;
  data.mesh_fingerprint = mesh.fingerprint();
  data.observation = spec;
  data.mask = mark_boundary(mesh, spec);

  const auto freqs = draw_frequencies(count, seed);
  const P1Space space(mesh);
  const Vector k = Eigen::Map<const Vector>(k_true.interpolate(mesh).data(), static_cast<Eigen::Index>(mesh.num_vertices()));
  const SparseMatrix a = space.assemble(k);
  DirichletSolver solver(space);
  solver.factorize(space.assemble_interior(k));

  // Optional fine-mesh data path.
  std::unique_ptr<Mesh> fine;
  std::unique_ptr<P1Space> fine_space;
  std::unique_ptr<DirichletSolver> fine_solver;
  SparseMatrix fine_a;
  Vector fine_k;
  BoundaryMask fine_mask;
  if (options.refined) {
    fine = std::make_unique<Mesh>(refine(mesh));
    fine_space = std::make_unique<P1Space>(*fine);
    const auto kv = k_true.interpolate(*fine);
    fine_k = Eigen::Map<const Vector>(kv.data(), static_cast<Eigen::Index>(kv.size()));
    fine_a = fine_space->assemble(fine_k);
    fine_solver = std::make_unique<DirichletSolver>(*fine_space);
    fine_solver->factorize(fine_space->assemble_interior(fine_k));
    fine_mask = mark_boundary(*fine, spec);
  }

  const Vector weights = boundary_weights(mesh);
  data.samples.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const auto& sol = freqs[static_cast<std::size_t>(s)];
    CauchySample sample;
    sample.id = s;
    sample.a = sol.a;
    sample.b = sol.b;
    sample.tag = k_true.name();
    sample.load = zero_source ? Vector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()))
                              : manufactured_weak_load(space, k, sol);
    Vector h;
    if (fine) {
      const auto st = solve_sample(*fine, *fine_space, fine_a, *fine_solver, fine_k, sol, fine_mask, zero_source);
      h = transfer_trace(*fine, st.h, mesh);
      const auto bv = mesh.boundary_vertices();
      sample.g.resize(static_cast<Eigen::Index>(bv.size()));
      for (std::size_t i = 0; i < bv.size(); ++i) {
        sample.g[static_cast<Eigen::Index>(i)] = data.mask.observed[i] ? sol.value(mesh.vertex(bv[i])) : 0.0;
      }
    } else {
      auto st = solve_sample(mesh, space, a, solver, k, sol, data.mask, zero_source);
      sample.g = std::move(st.g);
      h = std::move(st.h);
    }
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      if (!data.mask.observed[static_cast<std::size_t>(i)]) h[i] = nan_v;
    }
    sample.h = {std::move(h), weights, data.mask.observed};
    data.samples.push_back(std::move(sample));
  }
  return data;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& s) {
  if (s == "nan") return nan_v;
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw IoError("malformed number '" + s + "'");
  return v;
}

std::string sample_name(const char* prefix, int id) {
  std::ostringstream os;
  os << prefix << std::setw(5) << std::setfill('0') << id << ".csv";
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

} // namespace

BoundaryTrace boundary_flux(const Mesh& mesh, const SparseMatrix& stiffness, const Vector& p, const Vector& load) {
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  require(p.size() == nv && load.size() == nv && stiffness.rows() == nv, "boundary_flux: size mismatch");
  const Vector ap = stiffness * p;
  const Vector r = ap - load;
  const double scale = std::max({ap.cwiseAbs().maxCoeff(), load.cwiseAbs().maxCoeff(), 1e-300});
  double interior = 0.0;
  for (Eigen::Index v = 0; v < nv; ++v) {
    if (!mesh.on_boundary(static_cast<Index>(v))) interior = std::max(interior, std::abs(r[v]));
  }
  if (interior > 1e-8 * scale) {
    throw NumericalError("boundary_flux: interior residual " + std::to_string(interior) +
                         " too large; p does not solve the system");
  }
  const auto bv = mesh.boundary_vertices();
  BoundaryTrace trace;
  trace.weights = boundary_weights(mesh);
  trace.values.resize(static_cast<Eigen::Index>(bv.size()));
  for (std::size_t i = 0; i < bv.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    trace.values[ii] = r[bv[i]] / trace.weights[ii];
  }
  trace.observed.assign(bv.size(), true);
  return trace;
}

BoundaryTrace dtn_apply(const Mesh& mesh, const NodalField& k, const Vector& g, const Vector& load) {
  const P1Space space(mesh);
  const SparseMatrix a = space.assemble(k.values());
  DirichletSolver solver(space);
  solver.factorize(space.assemble_interior(k.values()));
  const Vector p = solver.solve_dirichlet(a, load, g);
  return boundary_flux(mesh, a, p, load);
}

Vector manufactured_weak_load(const P1Space& space, const Vector& k, const ManufacturedSolution& sol) {
  const Mesh& mesh = space.mesh();
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  Vector pstar(nv);
  for (Eigen::Index v = 0; v < nv; ++v) pstar[v] = sol.value(mesh.vertex(static_cast<Index>(v)));
  Vector load = space.assemble(k) * pstar;
  for (const auto& e : mesh.boundary_edges()) {
    for (Index v : e.v) {
      const Point gp = sol.gradient(mesh.vertex(v));
      load[v] -= 0.5 * e.length * k[v] * (gp.x * e.normal.x + gp.y * e.normal.y);
    }
  }
  return load;
}

std::vector<ManufacturedSolution> draw_frequencies(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // 53 random mantissa bits; avoids library-specific distribution code.
  auto uniform02 = [&rng] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<ManufacturedSolution> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double a = uniform02();
    const double b = uniform02();
    out.push_back({a, b});
  }
  return out;
}

CauchyDataset generate_dataset(const Mesh& mesh, const CoefficientField& k_true, const ObservationSpec& spec,
                               int count, std::uint64_t seed, DatasetOptions options) {
  return generate(mesh, k_true, spec, count, seed, options, false);
}

CauchyDataset generate_phantom_dataset(const Mesh& mesh, const CoefficientField& k_true, int count,
                                       std::uint64_t seed, DatasetOptions options) {
  require(mesh.kind() == DomainKind::disk, "phantom datasets live on a disk mesh");
  return generate(mesh, k_true, ObservationSpec::full(), count, seed, options, true);
}

void save_dataset(const std::filesystem::path& dir, const CauchyDataset& data, const Mesh& mesh) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["seed"] = data.seed;
  manifest["count"] = data.samples.size();
  manifest["mesh_fingerprint"] = data.mesh_fingerprint;
  manifest["observation"] = format_observation(data.observation);
  manifest["gamma0_length"] = data.mask.gamma0_length;
  auto& samples = manifest["samples"] = nlohmann::ordered_json::array();
  for (const auto& s : data.samples) {
    samples.push_back({{"id", s.id}, {"a", s.a}, {"b", s.b}, {"tag", s.tag}});
  }
  {
    std::ofstream os(dir / "manifest.json");
    if (!os) throw IoError("cannot write dataset manifest in " + dir.string());
    os << manifest.dump(2) << '\n';
  }

  const auto bv = mesh.boundary_vertices();
  for (const auto& s : data.samples) {
    std::ofstream os(dir / sample_name("sample_", s.id));
    if (!os) throw IoError("cannot write dataset sample in " + dir.string());
    os << "vertex_id,g,h,m,observed\n";
    for (std::size_t i = 0; i < bv.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      os << bv[i] << ',' << format_double(s.g[ii]) << ',' << format_double(s.h.values[ii]) << ','
         << format_double(s.h.weights[ii]) << ',' << (s.h.observed[i] ? 1 : 0) << '\n';
    }
    std::ofstream ls(dir / sample_name("load_", s.id));
    if (!ls) throw IoError("cannot write dataset load in " + dir.string());
    ls << "vertex_id,load\n";
    for (Eigen::Index v = 0; v < s.load.size(); ++v) ls << v << ',' << format_double(s.load[v]) << '\n';
  }
}

CauchyDataset load_dataset(const std::filesystem::path& dir, const Mesh& mesh) {
  std::ifstream ms(dir / "manifest.json");
  if (!ms) throw IoError("no dataset manifest in " + dir.string());
  const auto manifest = nlohmann::json::parse(ms);
  CauchyDataset data;
  data.seed = manifest.at("seed").get<std::uint64_t>();
  data.mesh_fingerprint = manifest.at("mesh_fingerprint").get<std::string>();
  if (data.mesh_fingerprint != mesh.fingerprint()) {
    throw IoError("dataset was generated on a different mesh (fingerprint " + data.mesh_fingerprint + ")");
  }
  data.observation = parse_observation(manifest.at("observation").get<std::string>());
  data.mask = mark_boundary(mesh, data.observation);

  const auto bv = mesh.boundary_vertices();
  const auto nb = static_cast<Eigen::Index>(bv.size());
  for (const auto& entry : manifest.at("samples")) {
    CauchySample s;
    s.id = entry.at("id").get<int>();
    s.a = entry.at("a").get<double>();
    s.b = entry.at("b").get<double>();
    s.tag = entry.at("tag").get<std::string>();
    s.g.resize(nb);
    s.h.values.resize(nb);
    s.h.weights.resize(nb);
    s.h.observed.assign(bv.size(), false);

    std::ifstream is(dir / sample_name("sample_", s.id));
    if (!is) throw IoError("missing sample file for id " + std::to_string(s.id));
    std::string line;
    std::getline(is, line);
    for (Eigen::Index i = 0; i < nb; ++i) {
      if (!std::getline(is, line)) throw IoError("truncated sample file for id " + std::to_string(s.id));
      const auto f = split_csv(line);
      if (f.size() != 5 || std::stoi(f[0]) != bv[static_cast<std::size_t>(i)]) {
        throw IoError("malformed sample row: " + line);
      }
      s.g[i] = parse_double(f[1]);
      s.h.values[i] = parse_double(f[2]);
      s.h.weights[i] = parse_double(f[3]);
      s.h.observed[static_cast<std::size_t>(i)] = f[4] == "1";
    }

    std::ifstream ls(dir / sample_name("load_", s.id));
    if (!ls) throw IoError("missing load file for id " + std::to_string(s.id));
    std::getline(ls, line);
    s.load.resize(static_cast<Eigen::Index>(mesh.num_vertices()));
    for (Eigen::Index v = 0; v < s.load.size(); ++v) {
      if (!std::getline(ls, line)) throw IoError("truncated load file for id " + std::to_string(s.id));
      const auto f = split_csv(line);
      if (f.size() != 2) throw IoError("malformed load row: " + line);
      s.load[v] = parse_double(f[1]);
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

} // namespace dtninv
