#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dssp/cli.hpp"

using namespace dssp;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DSSP_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& name) : path(fs::temp_directory_path() / ("dssp_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string conf() { return (kData / "small.conf").string(); }

}  // namespace

TEST_CASE("run matches its golden files") {
  ScratchDir dir("run");
  auto r = cli({"run", conf(), "--out", dir.str(), "--trace"});
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir.path / "report.csv") == slurp(kData / "golden_report.csv"));
  CHECK(slurp(dir.path / "loss.csv") == slurp(kData / "golden_loss.csv"));
  CHECK(slurp(dir.path / "trace.tsv") == slurp(kData / "golden_trace.tsv"));
}

TEST_CASE("compare matches its golden file") {
  ScratchDir dir("compare");
  auto r = cli({"compare", conf(), "--out", dir.str()});
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir.path / "compare.csv") == slurp(kData / "golden_compare.csv"));
  CHECK(r.out == slurp(kData / "golden_compare.csv"));
}

TEST_CASE("sweep-ssp matches its golden file") {
  ScratchDir dir("sweep");
  auto r = cli({"sweep-ssp", conf(), "--s", "0..2", "--out", dir.str()});
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir.path / "sweep_ssp.csv") == slurp(kData / "golden_sweep_ssp.csv"));
}

TEST_CASE("check prints the normalized config") {
  auto r = cli({"check", conf()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out == slurp(kData / "golden_check.conf"));
}

TEST_CASE("check rejects a negative r_max with a staleness diagnostic") {
  auto r = cli({"check", (kData / "bad_rmax.conf").string()});
  CHECK(r.code == kExitBadConfig);
  CHECK(r.err.find("staleness") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
}

TEST_CASE("usage errors and missing files") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  auto missing = cli({"check", (kData / "nope.conf").string()});
  CHECK(missing.code == kExitBadConfig);
  CHECK(cli({"sweep-ssp", conf(), "--s", "5..2"}).code == kExitBadConfig);
  CHECK(cli({"compare", conf(), "--paradigms", "bsp,xyz"}).code == kExitBadConfig);
}

TEST_CASE("run twice gives identical bytes") {
  ScratchDir a("det_a"), b("det_b");
  REQUIRE(cli({"run", conf(), "--out", a.str(), "--trace", "--seed", "99"}).code == kExitOk);
  REQUIRE(cli({"run", conf(), "--out", b.str(), "--trace", "--seed", "99"}).code == kExitOk);
  for (auto name : {"report.csv", "loss.csv", "trace.tsv"}) {
    CHECK(slurp(a.path / name) == slurp(b.path / name));
  }
  ScratchDir c("det_c");
  REQUIRE(cli({"run", conf(), "--out", c.str(), "--trace", "--seed", "100"}).code == kExitOk);
  // Constant timings: the seed only changes the data, so compare losses.
  CHECK(slurp(a.path / "loss.csv") != slurp(c.path / "loss.csv"));
}

TEST_CASE("every compare row is reproduced by a single run") {
  ScratchDir dir("repro");
  auto cmp = cli({"compare", conf(), "--out", dir.str()});
  REQUIRE(cmp.code == kExitOk);
  std::istringstream rows(cmp.out);
  std::string line;
  std::getline(rows, line);
  const auto base = parse_config(slurp(kData / "small.conf"));
  for (auto p : {Paradigm::BSP, Paradigm::ASP, Paradigm::SSP, Paradigm::DSSP}) {
    REQUIRE(std::getline(rows, line));
    auto config = base;
    config.paradigm = p;
    config = validate_config(config);
    CHECK(line + "\n" == comparison_csv_row(config, execute(config).report));
  }
}
