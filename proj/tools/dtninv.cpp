// dtninv: coefficient reconstruction from Cauchy data with a sine network.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtninv/config.hpp"
#include "dtninv/error.hpp"
#include "dtninv/plot.hpp"
#include "dtninv/run.hpp"
#include "dtninv/verify.hpp"

namespace fs = std::filesystem;
using namespace dtninv;

namespace {

constexpr int kUsage = 1;
constexpr int kVerifyFailed = 2;
constexpr int kNumerical = 3;

// "--key=value" overrides left over after CLI11 parsing.
void apply_overrides(RunConfig& config, const std::vector<std::string>& extras) {
  for (const auto& arg : extras) {
    const auto eq = arg.find('=');
    if (arg.rfind("--", 0) != 0 || eq == std::string::npos) {
      throw InvalidArgument("unexpected argument '" + arg + "', overrides look like --key=value");
    }
    apply_setting(config, arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
}

RunConfig resolve(const std::string& source) {
  if (is_preset(source)) return make_preset(source);
  if (fs::exists(source)) return load_config_file(source);
  throw InvalidArgument("'" + source + "' is neither a preset nor a config file (see `dtninv presets`)");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coefficient reconstruction from boundary Cauchy data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(DTNINV_VERSION));

  auto* run = app.add_subcommand("run", "generate data, train, and report");
  run->allow_extras();
  std::string run_source, run_out, from_manifest;
  bool quiet = false;
  run->add_option("source", run_source, "preset name or config file");
  run->add_option("-o,--out", run_out, "output directory (default runs/<preset>)");
  run->add_option("--from-manifest", from_manifest, "replay the run stored in this directory");
  run->add_flag("-q,--quiet", quiet, "no per-epoch progress");

  auto* gen = app.add_subcommand("generate", "write the Cauchy dataset, mesh and truth only");
  gen->allow_extras();
  std::string gen_source, gen_out;
  gen->add_option("source", gen_source, "preset name or config file")->required();
  gen->add_option("-o,--out", gen_out, "output directory")->required();

  auto* verify = app.add_subcommand("verify", "run a property suite");
  std::string suite = "all";
  verify->add_option("suite", suite, "fem, adjoint, dtn, neural, metrics or all");

  auto* plot = app.add_subcommand("plot", "curves, heat maps and slices for a run directory");
  std::string plot_dir;
  plot->add_option("run_dir", plot_dir, "run directory")->required();

  auto* presets = app.add_subcommand("presets", "list presets or print one as a config file");
  std::string preset_name;
  presets->add_option("name", preset_name, "preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*run) {
      RunConfig config;
      fs::path out;
      if (!from_manifest.empty()) {
        if (!run_source.empty()) throw InvalidArgument("give either a source or --from-manifest, not both");
        config = read_manifest_config(from_manifest);
        out = run_out.empty() ? fs::path(from_manifest + "-replay") : fs::path(run_out);
      } else {
        if (run_source.empty()) throw InvalidArgument("run needs a preset, a config file, or --from-manifest");
        config = resolve(run_source);
        out = run_out.empty() ? fs::path("runs") / config.preset : fs::path(run_out);
      }
      apply_overrides(config, run->remaining());
      RunOptions opts;
      if (!quiet) opts.log = &std::cerr;
      opts.warnings = &std::cerr;
      const RunOutcome res = run_experiment(config, out, opts);
      std::cout << "run directory: " << out.string() << "\n"
                << "rel_l2 " << res.report.rel_l2 << "  mse " << res.report.mse << "  mae " << res.report.mae
                << "  psnr " << res.report.psnr << "  ssim " << res.report.ssim << "\n";
      return 0;
    }
    if (*gen) {
      RunConfig config = resolve(gen_source);
      apply_overrides(config, gen->remaining());
      generate_experiment_data(config, gen_out);
      std::cout << "dataset written to " << gen_out << "\n";
      return 0;
    }
    if (*verify) {
      std::vector<std::string> suites;
      if (suite == "all") {
        suites = verify_suites();
      } else {
        suites.push_back(suite);
      }
      bool ok = true;
      for (const auto& s : suites) {
        const auto checks = run_verify_suite(s);
        print_checks(std::cout, checks);
        for (const auto& c : checks) ok = ok && c.passed;
      }
      std::cout << (ok ? "{\"summary\":\"pass\"}" : "{\"summary\":\"fail\"}") << "\n";
      return ok ? 0 : kVerifyFailed;
    }
    if (*plot) {
      for (const auto& f : plot_run(plot_dir)) std::cout << f.string() << "\n";
      return 0;
    }
    if (*presets) {
      if (preset_name.empty()) {
        for (const auto& n : preset_names()) std::cout << n << "\n";
      } else {
        std::cout << format_config(make_preset(preset_name));
      }
      return 0;
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}
