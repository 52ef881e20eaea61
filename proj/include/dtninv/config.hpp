#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dtninv/coeff.hpp"
#include "dtninv/mesh.hpp"
#include "dtninv/trainer.hpp"

namespace dtninv {

/// Everything needed to reproduce one experiment.
struct RunConfig {
  std::string preset = "custom";
  std::string mesh_kind = "square";  // square | disk
  int mesh_n = 32;                   // square: cells per side
  double mesh_h = 0.5 / 42.0;        // disk: target edge length
  bool refine_data = false;
  std::string coeff_kind = "constant";  // constant | sinusoid | disk_inclusion | phantom1 | phantom2
  double coeff_value = 1.0;             // constant only
  double coeff_sigma = 2.0;             // phantom smoothing, raster cells
  std::string observation = "full";     // full | paper | side:lo:hi,...
  int data_n = 256;
  std::uint64_t seed_data = 1;
  TrainConfig train;
  int raster = 256;
  int checkpoint_every = 10;
};

/// Known keys in their canonical order.
const std::vector<std::string>& config_keys();

/// Sets one dotted key; throws InvalidArgument on unknown keys or bad values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Canonical string value of every key.
std::map<std::string, std::string> config_entries(const RunConfig& config);

/// "key = value" lines in canonical order.
std::string format_config(const RunConfig& config);
/// Parses "key = value" lines ('#' starts a comment) on top of the defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
RunConfig make_preset(const std::string& name);

Mesh build_mesh(const RunConfig& config);
CoefficientField build_coefficient(const RunConfig& config);

} // namespace dtninv
