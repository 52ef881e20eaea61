#include "dtninv/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dtninv/error.hpp"
#include "dtninv/io.hpp"

namespace dtninv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw InvalidArgument("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw InvalidArgument("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw InvalidArgument("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("'" + key + "' expects true or false, got '" + v + "'");
}

std::string choice(const std::string& key, const std::string& v, const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw InvalidArgument("'" + key + "' must be one of " + list + ", got '" + v + "'");
  }
  return v;
}

} // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "preset",         "mesh.kind",      "mesh.n",           "mesh.h",       "mesh.refine_data",
      "coeff.kind",     "coeff.value",    "coeff.sigma",      "obs.exclusions", "data.n",
      "seed.data",      "seed.init",      "seed.shuffle",     "train.epochs", "train.lr_preset",
      "train.lr",       "train.floor",    "train.clamp_grad", "train.range",  "train.range_mode",
      "reg.lambda",     "net.omega0",     "net.normalize_inputs", "output.raster", "output.checkpoint_every"};
  return keys;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "preset") {
    c.preset = v;
  } else if (key == "mesh.kind") {
    c.mesh_kind = choice(key, v, {"square", "disk"});
  } else if (key == "mesh.n") {
    c.mesh_n = static_cast<int>(parse_int(key, v));
    require(c.mesh_n >= 1, "mesh.n must be at least 1");
  } else if (key == "mesh.h") {
    c.mesh_h = parse_double(key, v);
    require(c.mesh_h > 0.0, "mesh.h must be positive");
  } else if (key == "mesh.refine_data") {
    c.refine_data = parse_bool(key, v);
  } else if (key == "coeff.kind") {
    c.coeff_kind = choice(key, v, {"constant", "sinusoid", "disk_inclusion", "phantom1", "phantom2"});
  } else if (key == "coeff.value") {
    c.coeff_value = parse_double(key, v);
    require(c.coeff_value > 0.0, "coeff.value must be positive");
  } else if (key == "coeff.sigma") {
    c.coeff_sigma = parse_double(key, v);
    require(c.coeff_sigma >= 0.0, "coeff.sigma must be non-negative");
  } else if (key == "obs.exclusions") {
    parse_observation(v);
    c.observation = v.empty() ? "full" : v;
  } else if (key == "data.n") {
    c.data_n = static_cast<int>(parse_int(key, v));
    require(c.data_n >= 1, "data.n must be at least 1");
  } else if (key == "seed.data") {
    c.seed_data = parse_seed(key, v);
  } else if (key == "seed.init") {
    c.train.init_seed = parse_seed(key, v);
  } else if (key == "seed.shuffle") {
    c.train.shuffle_seed = parse_seed(key, v);
  } else if (key == "train.epochs") {
    c.train.epochs = static_cast<int>(parse_int(key, v));
    require(c.train.epochs >= 1, "train.epochs must be at least 1");
  } else if (key == "train.lr_preset") {
    c.train.lr_preset = lr_preset_from_string(v);
  } else if (key == "train.lr") {
    if (v == "schedule") {
      c.train.fixed_lr.reset();
    } else {
      c.train.fixed_lr = parse_double(key, v);
      require(*c.train.fixed_lr >= 0.0, "train.lr must be non-negative");
    }
  } else if (key == "train.floor") {
    c.train.floor = parse_double(key, v);
    require(c.train.floor > 0.0, "train.floor must be positive");
  } else if (key == "train.clamp_grad") {
    const std::string mode = choice(key, v, {"zero", "straight_through", "projected"});
    c.train.clamp_gradient = mode == "zero"       ? ClampGradient::zero
                             : mode == "projected" ? ClampGradient::projected
                                                   : ClampGradient::straight_through;
  } else if (key == "train.range") {
    if (v == "none") {
      c.train.range.reset();
    } else {
      const auto colon = v.find(':');
      if (colon == std::string::npos) throw InvalidArgument("train.range expects lo:hi or none");
      OutputRange r{parse_double(key, v.substr(0, colon)), parse_double(key, v.substr(colon + 1))};
      require(r.lo > 0.0 && r.lo < r.hi, "train.range needs 0 < lo < hi");
      c.train.range = r;
    }
  } else if (key == "train.range_mode") {
    c.train.range_mode = choice(key, v, {"during", "after"}) == "during" ? RangeMode::during : RangeMode::after;
  } else if (key == "reg.lambda") {
    c.train.lambda = parse_double(key, v);
    require(c.train.lambda >= 0.0, "reg.lambda must be non-negative");
  } else if (key == "net.omega0") {
    c.train.omega0 = parse_double(key, v);
    require(c.train.omega0 > 0.0, "net.omega0 must be positive");
  } else if (key == "net.normalize_inputs") {
    c.train.normalize_inputs = parse_bool(key, v);
  } else if (key == "output.raster") {
    c.raster = static_cast<int>(parse_int(key, v));
    require(c.raster >= 8, "output.raster must be at least 8");
  } else if (key == "output.checkpoint_every") {
    c.checkpoint_every = static_cast<int>(parse_int(key, v));
    require(c.checkpoint_every >= 0, "output.checkpoint_every must be non-negative");
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> config_entries(const RunConfig& c) {
  std::map<std::string, std::string> m;
  m["preset"] = c.preset;
  m["mesh.kind"] = c.mesh_kind;
  m["mesh.n"] = std::to_string(c.mesh_n);
  m["mesh.h"] = format_double(c.mesh_h);
  m["mesh.refine_data"] = c.refine_data ? "true" : "false";
  m["coeff.kind"] = c.coeff_kind;
  m["coeff.value"] = format_double(c.coeff_value);
  m["coeff.sigma"] = format_double(c.coeff_sigma);
  m["obs.exclusions"] = c.observation;
  m["data.n"] = std::to_string(c.data_n);
  m["seed.data"] = std::to_string(c.seed_data);
  m["seed.init"] = std::to_string(c.train.init_seed);
  m["seed.shuffle"] = std::to_string(c.train.shuffle_seed);
  m["train.epochs"] = std::to_string(c.train.epochs);
  m["train.lr_preset"] = to_string(c.train.lr_preset);
  m["train.lr"] = c.train.fixed_lr ? format_double(*c.train.fixed_lr) : "schedule";
  m["train.floor"] = format_double(c.train.floor);
  m["train.clamp_grad"] = c.train.clamp_gradient == ClampGradient::zero        ? "zero"
                          : c.train.clamp_gradient == ClampGradient::projected ? "projected"
                                                                               : "straight_through";
  m["train.range"] =
      c.train.range ? format_double(c.train.range->lo) + ":" + format_double(c.train.range->hi) : std::string("none");
  m["train.range_mode"] = c.train.range_mode == RangeMode::during ? "during" : "after";
  m["reg.lambda"] = format_double(c.train.lambda);
  m["net.omega0"] = format_double(c.train.omega0);
  m["net.normalize_inputs"] = c.train.normalize_inputs ? "true" : "false";
  m["output.raster"] = std::to_string(c.raster);
  m["output.checkpoint_every"] = std::to_string(c.checkpoint_every);
  return m;
}

std::string format_config(const RunConfig& c) {
  const auto entries = config_entries(c);
  std::string out;
  for (const auto& key : config_keys()) out += key + " = " + entries.at(key) + "\n";
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_setting(c, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return c;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> preset_names() {
  static const std::vector<std::string> bases{"ex1-1",   "ex1-2",   "ex2-1",   "ex2-2",    "ex3-1-1",
                                              "ex3-1-2", "ex3-2-1", "ex3-2-2", "ex4-full", "ex4-partial"};
  std::vector<std::string> names;
  for (const auto& b : bases) {
    names.push_back(b + "-desk");
    names.push_back(b + "-paper");
  }
  return names;
}

bool is_preset(const std::string& name) {
  const auto names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

RunConfig make_preset(const std::string& name) {
  if (!is_preset(name)) throw InvalidArgument("unknown preset '" + name + "'");
  const bool paper = name.ends_with("-paper");
  const std::string base = name.substr(0, name.rfind('-'));

  RunConfig c;
  c.preset = name;
  c.data_n = paper ? 2048 : 256;
  c.train.epochs = paper ? 100 : 40;
  c.mesh_n = paper ? 64 : 32;
  // Ring meshes: 131 rings give 51,877 vertices; 42 rings give 5,419.
  c.mesh_h = paper ? 0.5 / 131.0 : 0.5 / 42.0;

  if (base.starts_with("ex3")) {
    c.mesh_kind = "disk";
    c.train.lr_preset = LrPreset::phantom;
    c.coeff_kind = base.starts_with("ex3-1") ? "phantom1" : "phantom2";
    if (base == "ex3-1-1") c.train.lambda = 2e-8;
    if (base == "ex3-1-2") {
      c.train.lambda = 2e-7;
      c.train.range = OutputRange{0.2, 1.0};
    }
    if (base == "ex3-2-1") c.train.lambda = 2e-6;
    if (base == "ex3-2-2") {
      c.train.lambda = 2e-6;
      c.train.range = OutputRange{1.0, 5.0};
    }
    return c;
  }

  c.mesh_kind = "square";
  c.train.lr_preset = LrPreset::square;
  if (base == "ex1-1" || base == "ex1-2") c.coeff_kind = "constant";
  if (base == "ex2-1" || base == "ex2-2") c.coeff_kind = "sinusoid";
  if (base.starts_with("ex4")) {
    c.coeff_kind = "disk_inclusion";
    c.train.range = OutputRange{0.4, 1.0};
  }
  if (base == "ex1-2" || base == "ex2-2" || base == "ex4-partial") c.observation = "paper";
  return c;
}

Mesh build_mesh(const RunConfig& c) {
  if (c.mesh_kind == "disk") return disk_mesh({0.5, 0.5}, 0.5, c.mesh_h);
  return unit_square_mesh(c.mesh_n);
}

CoefficientField build_coefficient(const RunConfig& c) {
  if (c.coeff_kind == "constant") return CoefficientField::constant(c.coeff_value);
  if (c.coeff_kind == "sinusoid") return CoefficientField::sinusoid();
  if (c.coeff_kind == "disk_inclusion") return CoefficientField::disk_inclusion();
  if (c.coeff_kind == "phantom1") return phantom1(c.coeff_sigma);
  if (c.coeff_kind == "phantom2") return phantom2(c.coeff_sigma);
  throw InvalidArgument("unknown coefficient kind '" + c.coeff_kind + "'");
}

} // namespace dtninv
