#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "cli.hpp"
#include "workspace.hpp"

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "colorwai");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return colorwai::cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with code 2") {
    CHECK(run({}) == 2);
    CHECK(run({"frobnicate"}) == 2);
    CHECK(run({"fit", "--bogus"}) == 2);
    CHECK(run({"fit", "--method", "pca"}) == 2);
    CHECK(run({"fit", "-C", "-1"}) == 2);
    CHECK(run({"export-board"}) == 2);
  }

  TEST_CASE("small end-to-end pipeline") {
    fixtures::TempDir dir("cli");
    const std::string ws = dir.path.string();
    CHECK(run({"-w", ws, "export-board", "--id", "missing"}) == 2);
    CHECK(run({"-w", ws, "fit"}) == 2);

    REQUIRE(run({"-w", ws, "gen-corpus", "--n", "40", "--resolution", "32"}) == 0);
    CHECK(fs::exists(dir.path / "corpus" / "manifest.csv"));
    CHECK(line_count(dir.path / "corpus" / "manifest.csv") == 41);
    CHECK(fs::exists(dir.path / "generator.json"));

    REQUIRE(run({"-w", ws, "build-codebook", "--k", "5"}) == 0);
    CHECK(fs::exists(dir.path / "codebook.json"));
    std::ifstream manifest(dir.path / "corpus" / "manifest.csv");
    std::string header, first;
    std::getline(manifest, header);
    std::getline(manifest, first);
    CHECK(first.back() != ',');

    REQUIRE(run({"-w", ws, "couple", "--n", "150"}) == 0);
    CHECK(fs::exists(dir.path / "datasets" / "texgen.json"));
    REQUIRE(run({"-w", ws, "fit", "--method", "interfacegan", "-C", "1"}) == 0);
    CHECK(fs::exists(dir.path / "directions" / "texgen-interfacegan-v1.json"));
    REQUIRE(run({"-w", ws, "eval", "--method", "interfacegan", "--samples", "8", "--alpha-samples", "2"}) == 0);
    CHECK(fs::exists(dir.path / "directions" / "texgen-interfacegan-v2.json"));
    CHECK(fs::exists(dir.path / "reports" / "texgen-interfacegan-rows.csv"));
    REQUIRE(run({"-w", ws, "report", "--method", "interfacegan"}) == 0);
    CHECK(fs::exists(dir.path / "reports" / "texgen-interfacegan-v2-cosine.csv"));
    CHECK(fs::exists(dir.path / "reports" / "texgen-interfacegan-v2-confusion.csv"));
    CHECK(run({"-w", ws, "eval", "--method", "stylespace"}) == 2);
  }
}
