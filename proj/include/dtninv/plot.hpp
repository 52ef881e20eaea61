#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dtninv/trainer.hpp"

namespace dtninv {

/// Means over consecutive windows of `window` epochs (last window may be short).
struct WindowAverage {
  std::vector<double> epoch;  // window centre
  std::vector<double> mean_loss;
  std::vector<double> rel_error;
};
WindowAverage window_average(const std::vector<EpochRecord>& history, int window = 10);

struct SliceLine {
  std::string name;
  Point from;
  Point to;
};
/// y=0, x=0, y=1, x=1, y=x, y=0.5 over the unit square.
const std::vector<SliceLine>& standard_slices();

/// Reads a run directory and writes plots/: curves.svg, heat_exact.ppm,
/// heat_recon.ppm, heat_error.ppm, slices.csv and slice_<name>.svg. All
/// inputs are validated before anything is written. Returns the files written.
std::vector<std::filesystem::path> plot_run(const std::filesystem::path& run_dir);

} // namespace dtninv
