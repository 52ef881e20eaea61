#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "dtninv/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::path(DTNINV_TEST_TMP) / "cli";

int cli(const std::string& args) {
  const std::string cmd = std::string(DTNINV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kTiny = "--mesh.n=6 --data.n=3 --train.epochs=2 --output.raster=16 --output.checkpoint_every=1";

} // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 1") {
    CHECK(cli("") == 1);
    CHECK(cli("frobnicate") == 1);
    CHECK(cli("run") == 1);
    CHECK(cli("run no-such-preset") == 1);
    CHECK(cli("run ex1-1-desk -q --train.epochs=zero -o " + (kTmp / "bad").string()) == 1);
    CHECK(cli("run ex1-1-desk -q --no.such.key=1 -o " + (kTmp / "bad").string()) == 1);
    CHECK(cli("verify nonsense") == 1);
    CHECK(cli("presets ex9-desk") == 1);
    CHECK(cli("plot " + (kTmp / "missing").string()) == 1);
  }

  TEST_CASE("informational commands succeed") {
    CHECK(cli("--help") == 0);
    CHECK(cli("--version") == 0);
    CHECK(cli("presets") == 0);
    CHECK(cli("presets ex2-1-desk") == 0);
    CHECK(cli("verify metrics") == 0);
    CHECK(cli("verify dtn") == 0);
  }

  TEST_CASE("tiny run, replay, and plots") {
    fs::remove_all(kTmp);
    const auto dir = kTmp / "tiny";
    REQUIRE(cli("run ex2-1-desk -q -o " + dir.string() + " " + kTiny) == 0);
    for (const char* f : {"config.txt", "manifest.json", "history.csv", "timing.csv", "metrics.json", "field.csv",
                          "field.vtk", "raster_exact.pgm", "raster_recon.pgm", "raster_error.pgm",
                          "checkpoints/epoch_0001.csv", "checkpoints/epoch_0002.csv", "data/manifest.json"}) {
      CHECK_MESSAGE(fs::exists(dir / f), f);
    }
    const auto hist = dtninv::read_history_csv(dir / "history.csv");
    CHECK(hist.size() == 2);

    const auto replay = kTmp / "replay";
    REQUIRE(cli("run -q --from-manifest " + dir.string() + " -o " + replay.string()) == 0);
    CHECK(dtninv::read_text_file(dir / "history.csv") == dtninv::read_text_file(replay / "history.csv"));
    CHECK(dtninv::read_text_file(dir / "metrics.json") == dtninv::read_text_file(replay / "metrics.json"));
    CHECK(dtninv::read_text_file(dir / "config.txt") == dtninv::read_text_file(replay / "config.txt"));

    REQUIRE(cli("plot " + dir.string()) == 0);
    const std::string curves = dtninv::read_text_file(dir / "plots" / "curves.svg");
    const std::string slices = dtninv::read_text_file(dir / "plots" / "slices.csv");
    REQUIRE(cli("plot " + dir.string()) == 0);
    CHECK(dtninv::read_text_file(dir / "plots" / "curves.svg") == curves);
    CHECK(dtninv::read_text_file(dir / "plots" / "slices.csv") == slices);
    CHECK(fs::exists(dir / "plots" / "heat_error.ppm"));

    // Plotting a run without epochs is an input error.
    const auto empty = kTmp / "empty";
    fs::create_directories(empty);
    for (const char* f : {"config.txt", "manifest.json", "field.csv", "metrics.json"}) fs::copy_file(dir / f, empty / f);
    dtninv::write_text_file(empty / "history.csv", "epoch,mean_loss,rel_error,lr,clamps,seconds\n");
    CHECK(cli("plot " + empty.string()) == 1);
    CHECK(!fs::exists(empty / "plots"));
  }

  TEST_CASE("generate writes the dataset only") {
    const auto dir = kTmp / "gen";
    fs::remove_all(dir);
    REQUIRE(cli("generate ex3-1-1-desk -o " + dir.string() + " --mesh.h=0.1 --data.n=2") == 0);
    CHECK(fs::exists(dir / "data" / "manifest.json"));
    CHECK(fs::exists(dir / "mesh.vtk"));
    CHECK(!fs::exists(dir / "history.csv"));
  }

  TEST_CASE("divergence exits with 3") {
    const auto dir = kTmp / "diverge";
    CHECK(cli("run ex1-1-desk -q -o " + dir.string() + " " + kTiny + " --train.lr=1e308") == 3);
  }
}
