#include "dtninv/run.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dtninv/error.hpp"
#include "dtninv/io.hpp"

#ifndef DTNINV_VERSION
#define DTNINV_VERSION "0.0.0"
#endif

namespace dtninv {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& run_layout() {
  static const std::vector<std::string> files{
      "config.txt", "manifest.json",   "history.csv",    "timing.csv",     "metrics.json", "field.csv",
      "field.vtk",  "raster_exact.pgm", "raster_recon.pgm", "raster_error.pgm", "checkpoints/", "data/"};
  return files;
}

std::string manifest_text(const RunConfig& config, const Mesh& mesh) {
  nlohmann::ordered_json j;
  j["tool"] = "dtninv";
  j["version"] = DTNINV_VERSION;
  j["preset"] = config.preset;
  const auto entries = config_entries(config);
  nlohmann::ordered_json cfg;
  for (const auto& key : config_keys()) cfg[key] = entries.at(key);
  j["config"] = cfg;
  j["seeds"] = {{"data", config.seed_data}, {"init", config.train.init_seed}, {"shuffle", config.train.shuffle_seed}};
  j["mesh"] = {{"kind", config.mesh_kind},
               {"vertices", mesh.num_vertices()},
               {"triangles", mesh.num_triangles()},
               {"fingerprint", mesh.fingerprint()}};
  j["layout"] = run_layout();
  return j.dump(2) + "\n";
}

void write_rasters(const fs::path& dir, const Mesh& mesh, int grid, const Vector& k_exact, const Vector& k_recon) {
  const Rasterizer raster(mesh, grid);
  const MaskedImage ex = raster(k_exact);
  const MaskedImage rc = raster(k_recon);
  const MaskedImage err = raster((k_exact - k_recon).cwiseAbs());
  const double lo = std::min(k_exact.minCoeff(), k_recon.minCoeff());
  const double hi = std::max(k_exact.maxCoeff(), k_recon.maxCoeff());
  auto emit = [&](const char* name, const MaskedImage& img, double a, double b) {
    std::ostringstream os;
    write_pgm(os, img, a, b);
    write_text_file(dir / name, os.str());
  };
  emit("raster_exact.pgm", ex, lo, hi);
  emit("raster_recon.pgm", rc, lo, hi);
  emit("raster_error.pgm", err, 0.0, std::max(1e-300, (k_exact - k_recon).cwiseAbs().maxCoeff()));
}

void write_vtk_file(const fs::path& path, const Mesh& mesh, const Vector& k_exact, const Vector& k_recon) {
  const std::vector<double> ex(k_exact.begin(), k_exact.end());
  const std::vector<double> rc(k_recon.begin(), k_recon.end());
  std::vector<double> err(ex.size());
  for (std::size_t i = 0; i < ex.size(); ++i) err[i] = std::abs(ex[i] - rc[i]);
  std::ostringstream os;
  write_vtk(os, mesh, {{"k_exact", ex}, {"k_recon", rc}, {"abs_err", err}});
  write_text_file(path, os.str());
}

} // namespace

CauchyDataset make_dataset(const Mesh& mesh, const RunConfig& config, const CoefficientField& truth) {
  const DatasetOptions opts{config.refine_data};
  if (config.coeff_kind == "phantom1" || config.coeff_kind == "phantom2") {
    require(config.observation == "full", "phantom experiments use full observation");
    return generate_phantom_dataset(mesh, truth, config.data_n, config.seed_data, opts);
  }
  return generate_dataset(mesh, truth, parse_observation(config.observation), config.data_n, config.seed_data, opts);
}

RunOutcome run_experiment(const RunConfig& config, const fs::path& out_dir, const RunOptions& options) {
  fs::create_directories(out_dir / "checkpoints");
  const Mesh mesh = build_mesh(config);
  const CoefficientField truth = build_coefficient(config);
  const NodalField k_true(mesh, truth.interpolate(mesh));

  write_text_file(out_dir / "config.txt", format_config(config));
  write_text_file(out_dir / "manifest.json", manifest_text(config, mesh));

  const CauchyDataset data = make_dataset(mesh, config, truth);
  if (options.save_dataset) save_dataset(out_dir / "data", data, mesh);

  const auto on_epoch = [&](const EpochRecord& rec, const SineMlpParams& params) {
    if (options.log) {
      *options.log << "epoch " << rec.epoch + 1 << "/" << config.train.epochs << "  loss " << rec.mean_loss
                   << "  rel_error " << rec.rel_error << "  lr " << rec.lr << "  clamps " << rec.clamps << "  "
                   << rec.seconds << "s" << std::endl;
    }
    const auto all = static_cast<long>(mesh.num_vertices() * data.samples.size());
    if (options.warnings && rec.clamps == all) {
      *options.warnings << "warning: every vertex was clamped at the floor in epoch " << rec.epoch + 1
                        << "; the gradient is zero (try another seed.init or train.clamp_grad=projected)"
                        << std::endl;
    }
    if (config.checkpoint_every > 0 && (rec.epoch + 1) % config.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%04d.csv", rec.epoch + 1);
      write_checkpoint(out_dir / "checkpoints" / name, params, config.train.init_seed);
    }
  };

  RunOutcome out;
  out.training = train(mesh, data, k_true.values(), config.train, on_epoch);
  const Vector& k_recon = out.training.k_recon;
  const NodalField recon(mesh, k_recon);
  out.report = full_report(mesh, k_true, recon, config.raster);
  out.grad_energy = regularization_grad(mesh, recon, 1.0).loss;

  write_history_csv(out_dir / "history.csv", out.training.history);
  {
    std::ostringstream os;
    os << "epoch,seconds\n";
    for (const auto& r : out.training.history) os << r.epoch << ',' << format_double(r.seconds) << '\n';
    write_text_file(out_dir / "timing.csv", os.str());
  }
  write_field_csv(out_dir / "field.csv", mesh, k_true.values(), k_recon);
  write_vtk_file(out_dir / "field.vtk", mesh, k_true.values(), k_recon);
  write_rasters(out_dir, mesh, config.raster, k_true.values(), k_recon);

  const auto& last = out.training.history.back();
  std::ostringstream js;
  write_metrics_json(js, out.report,
                     {{"grad_energy", out.grad_energy},
                      {"final_mean_loss", last.mean_loss},
                      {"final_rel_error", last.rel_error},
                      {"k_min", k_recon.minCoeff()},
                      {"k_max", k_recon.maxCoeff()}});
  write_text_file(out_dir / "metrics.json", js.str());
  return out;
}

void generate_experiment_data(const RunConfig& config, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const Mesh mesh = build_mesh(config);
  const CoefficientField truth = build_coefficient(config);
  const CauchyDataset data = make_dataset(mesh, config, truth);
  write_text_file(out_dir / "config.txt", format_config(config));
  save_dataset(out_dir / "data", data, mesh);
  {
    std::ostringstream os;
    write_vertex_csv(os, mesh, data.mask);
    write_text_file(out_dir / "mesh.csv", os.str());
  }
  {
    const auto k = truth.interpolate(mesh);
    std::ostringstream os;
    write_vtk(os, mesh, {{"k_exact", k}});
    write_text_file(out_dir / "mesh.vtk", os.str());
  }
  if (const PhantomRaster* r = truth.raster()) write_phantom_pgm(out_dir / "phantom", *r);
}

RunConfig read_manifest_config(const fs::path& run_dir) {
  const auto path = run_dir / "manifest.json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) throw IoError("manifest has no config object");
  RunConfig c;
  for (const auto& key : config_keys()) {
    if (!j["config"].contains(key)) throw IoError("manifest config is missing '" + key + "'");
    apply_setting(c, key, j["config"][key].get<std::string>());
  }
  return c;
}

} // namespace dtninv
