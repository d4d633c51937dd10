#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#ifndef RECON_CLI_PATH
#error "RECON_CLI_PATH must point at the recon binary"
#endif

namespace {

namespace fs = std::filesystem;

struct CliDir {
  fs::path root;
  CliDir() {
    root = fs::temp_directory_path() / ("recon-cli-" + std::to_string(::getpid()));
    fs::create_directories(root);
  }
  ~CliDir() { fs::remove_all(root); }
  std::string sub(const std::string& name) const { return (root / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(RECON_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::string kData = "--data synth --n 16 --k 12 --data-seed 3";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);
  CHECK(run("reconstruct") == 2);                 // missing required --weights
  CHECK(run("train --no-such-flag") == 2);
  CliDir dir;
  CHECK(run("train " + kData + " --arch pyramid --out " + dir.sub("t")) == 2);
}

TEST_CASE("numeric failures exit with code 3") {
  CliDir dir;
  CHECK(run("train " + kData + " --loss mse --rho 0 --lr 50 --seed 1 --out " + dir.sub("t")) == 3);
}

TEST_CASE("io failures exit with code 4") {
  CliDir dir;
  CHECK(run("reconstruct --weights /nonexistent/w.bin " + kData + " --out " + dir.sub("r")) == 4);
  CHECK(run("replay --manifest /nonexistent/m.json --out " + dir.sub("p")) == 4);
}

TEST_CASE("train, reconstruct, analyze, replay round-trip byte-identically") {
  CliDir dir;
  const std::string t = dir.sub("train");
  REQUIRE(run("train " + kData + " --arch affine --loss logistic --rho 1e-4 --lr 0.5 --seed 1 --out " + t) == 0);
  REQUIRE(fs::exists(t + "/weights.bin"));
  REQUIRE(fs::exists(t + "/manifest.json"));

  const std::string r = dir.sub("rec");
  REQUIRE(run("reconstruct --weights " + t + "/weights.bin " + kData +
              " --method gradpen --init random --gp-iters 200 --seed 2 --out " + r) == 0);
  REQUIRE(fs::exists(r + "/x_rec.csv"));
  REQUIRE(fs::exists(r + "/nn_table.csv"));
  REQUIRE(fs::exists(r + "/images/recon_0000.ppm"));

  const std::string la = dir.sub("lin");
  REQUIRE(run("linear-analysis --weights " + t + "/weights.bin " + kData + " --out " + la) == 0);
  REQUIRE(fs::exists(la + "/report.json"));

  // replay both runs into fresh directories and compare artifact bytes
  const std::string t2 = dir.sub("train-replay");
  REQUIRE(run("replay --manifest " + t + "/manifest.json --out " + t2) == 0);
  CHECK(slurp(t + "/weights.bin") == slurp(t2 + "/weights.bin"));
  CHECK(slurp(t + "/train_trace.csv") == slurp(t2 + "/train_trace.csv"));

  const std::string r2 = dir.sub("rec-replay");
  REQUIRE(run("replay --manifest " + r + "/manifest.json --out " + r2) == 0);
  CHECK(slurp(r + "/x_rec.csv") == slurp(r2 + "/x_rec.csv"));
  CHECK(slurp(r + "/recon_trace.csv") == slurp(r2 + "/recon_trace.csv"));
  CHECK(slurp(r + "/nn_table.csv") == slurp(r2 + "/nn_table.csv"));
}

TEST_CASE("unknown method is a usage error") {
  CliDir dir;
  const std::string t = dir.sub("train2");
  REQUIRE(run("train " + kData + " --arch affine --loss logistic --rho 1e-4 --lr 0.5 --seed 1 --out " + t) == 0);
  CHECK(run("reconstruct --weights " + t + "/weights.bin " + kData + " --method sorcery --out " +
            dir.sub("r2")) == 2);
}

TEST_CASE("config file merges under CLI flags") {
  CliDir dir;
  const std::string cfg_path = dir.sub("cfg.json");
  {
    std::ofstream out(cfg_path);
    out << R"({"data": {"n": 16, "k": 12, "seed": 3}, "rho": 1e-4, "lr": 0.5, "seed": 7})";
  }
  const std::string t = dir.sub("train-cfg");
  REQUIRE(run("train --config " + cfg_path + " --arch affine --out " + t) == 0);
  const auto manifest = slurp(t + "/manifest.json");
  const std::string text(manifest.begin(), manifest.end());
  CHECK(text.find("\"master_seed\": 7") != std::string::npos);  // from the config file
  CHECK(text.find("\"k\": 12") != std::string::npos);

  // a flag overrides the same key
  const std::string t2 = dir.sub("train-cfg2");
  REQUIRE(run("train --config " + cfg_path + " --arch affine --seed 9 --out " + t2) == 0);
  const auto m2 = slurp(t2 + "/manifest.json");
  CHECK(std::string(m2.begin(), m2.end()).find("\"master_seed\": 9") != std::string::npos);
}

TEST_CASE("small sweep writes one grid row per cell") {
  CliDir dir;
  const std::string t = dir.sub("train3");
  REQUIRE(run("train " + kData + " --arch affine --loss logistic --rho 1e-4 --lr 0.5 --seed 1 --out " + t) == 0);
  const std::string s = dir.sub("sweep");
  REQUIRE(run("sweep --weights " + t + "/weights.bin " + kData +
              " --method gradpen --lambdas 0,1 --gp-iters 100 --seed 4 --out " + s) == 0);
  std::ifstream grid(s + "/grid_gradpen.csv");
  REQUIRE(grid.good());
  std::string line;
  int rows = 0;
  while (std::getline(grid, line)) ++rows;
  CHECK(rows == 5);  // header + 2x2 cells

  const std::string s2 = dir.sub("sweep-replay");
  REQUIRE(run("replay --manifest " + s + "/manifest.json --out " + s2) == 0);
  CHECK(slurp(s + "/grid_gradpen.csv") == slurp(s2 + "/grid_gradpen.csv"));
}

}  // TEST_SUITE
