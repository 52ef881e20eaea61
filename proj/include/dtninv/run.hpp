#pragma once

#include <filesystem>
#include <iosfwd>

#include "dtninv/config.hpp"
#include "dtninv/dtn.hpp"
#include "dtninv/metrics.hpp"
#include "dtninv/trainer.hpp"

namespace dtninv {

struct RunOutcome {
  MetricsReport report;
  TrainResult training;
  double grad_energy = 0.0;  // ||grad k~||^2 over the domain
};

struct RunOptions {
  std::ostream* log = nullptr;       // per-epoch progress lines
  std::ostream* warnings = nullptr;  // e.g. an epoch with every vertex clamped
  bool save_dataset = true;
};

/// Dataset for a config: manufactured samples on the square, zero-source
/// samples for phantoms on the disk.
CauchyDataset make_dataset(const Mesh& mesh, const RunConfig& config, const CoefficientField& truth);

/// generate -> train -> report. Writes config.txt, manifest.json,
/// history.csv, timing.csv, metrics.json, field.csv, field.vtk, raster PGMs,
/// checkpoints/ and data/ under `out_dir`.
RunOutcome run_experiment(const RunConfig& config, const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Dataset, mesh and truth only: data/, mesh.csv, mesh.vtk, config.txt.
void generate_experiment_data(const RunConfig& config, const std::filesystem::path& out_dir);

/// The resolved config stored in a run directory's manifest.
RunConfig read_manifest_config(const std::filesystem::path& run_dir);

} // namespace dtninv
