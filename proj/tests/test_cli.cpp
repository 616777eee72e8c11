#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cope/cli.hpp"
#include "cope/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("cope_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the installed binary in the work directory.
Result spawn(const std::string& args) {
  const auto dir = work_dir();
  const std::string cmd = "cd '" + dir.string() + "' && '" COPE_CLI_PATH "' " + args + " > stdout.txt 2> stderr.txt";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(dir / "stdout.txt"), slurp(dir / "stderr.txt")};
}

Result in_process(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cope::cli::run(std::move(args), out, err);
  return {status, out.str(), err.str()};
}

}  // namespace

TEST_CASE("critdim prints the critical dimension", "[cli]") {
  const auto r = spawn("critdim --pretrain-len 8192 --d 128 --base 500000");
  CHECK(r.status == 0);
  CHECK(r.out == "70\n");
}

TEST_CASE("freqs writes the frequency table", "[cli]") {
  const auto r = spawn("freqs --d 4 --base 10000 --out t.csv");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("wrote 2 rows") != std::string::npos);
  const auto csv = slurp(work_dir() / "t.csv");
  CHECK(csv.find("\n0,1.0,") != std::string::npos);
  CHECK(csv.find("\n1,0.01,") != std::string::npos);
  CHECK(csv.starts_with("# "));
  CHECK(csv.find("# option.base: 10000") != std::string::npos);
}

TEST_CASE("unknown flags are usage errors", "[cli]") {
  const auto r = spawn("decay --bad-flag");
  CHECK(r.status == 2);
  CHECK(r.err.find("--bad-flag") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(spawn("nosuchcommand").status == 2);
  CHECK(spawn("").status == 2);
}

TEST_CASE("invalid ranges name the violated precondition", "[cli]") {
  auto r = spawn("freqs --d 3 --out bad.csv");
  CHECK(r.status == 1);
  CHECK(r.err.find("d must be an even integer") != std::string::npos);
  r = spawn("spectrum --d 8 --onset 9 --out bad.csv");
  CHECK(r.status == 1);
  CHECK(r.err.find("onset_index") != std::string::npos);
  r = spawn("decay --tau-step -1 --out bad.csv");
  CHECK(r.status == 1);
  CHECK(r.err.find("--tau-step") != std::string::npos);
  r = spawn("retrieval --n-trials 0 --out bad.csv");
  CHECK(r.status == 1);
  CHECK(r.err.find("n_trials") != std::string::npos);
  CHECK_FALSE(fs::exists(work_dir() / "bad.csv"));
}

TEST_CASE("unwritable output is a runtime error", "[cli]") {
  const auto r = spawn("spectrum --out /nonexistent-dir/s.csv");
  CHECK(r.status == 1);
  CHECK(r.err.find("/nonexistent-dir/s.csv") != std::string::npos);
}

TEST_CASE("plot flag writes an SVG next to the CSV", "[cli]") {
  const auto r = spawn("spectrum --d 128 --base 500000 --onset 44 --out spec.csv --plot");
  REQUIRE(r.status == 0);
  const auto svg = slurp(work_dir() / "spec.svg");
  CHECK(svg.starts_with("<svg"));
  CHECK(svg.find("soft_44") != std::string::npos);
  const auto table = cope::read_csv(work_dir() / "spec.csv");
  CHECK(table.rows() == 64);
}

TEST_CASE("identical runs produce byte-identical CSV", "[cli]") {
  const std::string args = "retrieval --d 32 --onset 10 --n-trials 200 --distances 0 4096 --seed 5";
  REQUIRE(spawn(args + " --out r1.csv").status == 0);
  REQUIRE(spawn(args + " --out r2.csv").status == 0);
  const auto a = slurp(work_dir() / "r1.csv");
  const auto b = slurp(work_dir() / "r2.csv");
  // Only the echoed output path differs.
  auto strip = [](std::string s) {
    const auto p = s.find("# option.out:");
    return s.erase(p, s.find('\n', p) - p);
  };
  CHECK(strip(a) == strip(b));
  REQUIRE(spawn(args + " --out r1.csv").status == 0);
  CHECK(slurp(work_dir() / "r1.csv") == a);
}

TEST_CASE("every subcommand runs on small inputs", "[cli]") {
  const auto dir = work_dir().string();
  for (const std::string args :
       {"scale --d 16 --base 10000 --pretrain-len 512 --scaling ntk", "decay --d 16 --base 10000 --onset 5 --tau-max 4096",
        "decay --d 16 --base 10000 --onset 5 --tau-max 4096 --clip-apply frequency --clip-order scale-then-clip",
        "gap --d 8 --onset 2 --tau-max 100 --tau-step 50 --n-samples 500 --shards 2",
        "ringing --d 16 --base 10000 --onset 5 --tau-max 60000 --signal-support 1000",
        "retrieval --d 16 --onset 5 --n-trials 100 --distances 0 100", "spectrum --d 16 --onset 5"}) {
    INFO(args);
    const auto r = in_process(CLI::detail::split_up(args + " --out " + dir + "/any.csv --plot"));
    CHECK(r.status == 0);
    CHECK(r.err.empty());
    CHECK(fs::exists(work_dir() / "any.svg"));
    fs::remove(work_dir() / "any.svg");
  }
}

TEST_CASE("config files supply options and reject unknown keys", "[cli]") {
  const auto good = work_dir() / "good.toml";
  {
    std::ofstream f(good);
    f << "[critdim]\nd = 128\nbase = 500000\npretrain-len = 8192\n";
  }
  auto r = in_process({"--config", good.string(), "critdim"});
  CHECK(r.status == 0);
  CHECK(r.out == "70\n");
  const auto bad = work_dir() / "bad.toml";
  {
    std::ofstream f(bad);
    f << "[critdim]\nd = 128\nnot-an-option = 1\n";
  }
  r = in_process({"--config", bad.string(), "critdim"});
  CHECK(r.status == 2);
}

TEST_CASE("help exits cleanly", "[cli]") {
  const auto r = in_process({"--help"});
  CHECK(r.status == 0);
  CHECK(r.out.find("retrieval") != std::string::npos);
}
