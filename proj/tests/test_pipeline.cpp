#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "curvlab/config.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/io.hpp"
#include "curvlab/pipeline.hpp"

using namespace curvlab;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.mesh_generator = "regular-octagon-genus2(3)";
  c.empirical_m = 5;
  return c;
}

std::filesystem::path fresh_dir(const char* tag) {
  std::filesystem::path p = std::filesystem::temp_directory_path() /
                            (std::string("curvlab_pipeline_") + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::vector<std::string> dir_listing(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST_CASE("surface command emits a complete self-describing directory") {
  const std::filesystem::path dir = fresh_dir("surface");
  const CommandResult res = run_command("surface", small_config(), dir.string());

  CHECK(res.out_dir == dir.string());
  CHECK(std::is_sorted(res.artifacts.begin(), res.artifacts.end()));
  for (const char* name : {"surface.json", "config.json", "MANIFEST.json", "phi_mu.csv"}) {
    CAPTURE(name);
    CHECK(std::find(res.artifacts.begin(), res.artifacts.end(), name) !=
          res.artifacts.end());
    CHECK(std::filesystem::exists(dir / name));
  }
  // The manifest inventories exactly what is on disk, itself included.
  CHECK(dir_listing(dir) == res.artifacts);
  const nlohmann::json manifest = read_json_file((dir / "MANIFEST.json").string());
  CHECK(manifest["command"] == "surface");
  CHECK(manifest["artifacts"].get<std::vector<std::string>>() == res.artifacts);
  CHECK(!manifest["guarantees"].empty());

  // The embedded config reloads, validates, and reproduces itself.
  const RunConfig back = load_config((dir / "config.json").string());
  CHECK(back.to_json().dump(2) == small_config().to_json().dump(2));

  // The primary report matches its on-disk copy and the basic geometry.
  CHECK(read_json_file((dir / "surface.json").string()) == res.report);
  CHECK(res.report["genus"] == 2);
  CHECK(std::abs(res.report["volume"]["value"].get<double>() - 4.0 * M_PI) <= 1e-7);
  CHECK(res.report["curvature_residual_sup"].get<double>() <= 1e-8);
  std::filesystem::remove_all(dir);
}

TEST_CASE("constant-data curvature run certifies against the scalar root") {
  const std::filesystem::path dir = fresh_dir("gauss");
  RunConfig c = small_config();
  c.f_source = "constant";
  const CommandResult res = run_command("gauss", c, dir.string());

  REQUIRE(res.report.contains("constant_oracle"));
  CHECK(res.report["constant_oracle"]["sup_diff"].get<double>() <= 1e-8);
  CHECK(res.report["residual_sup"].get<double>() <= 1e-9);
  CHECK(res.report["bracket"]["ok"] == true);
  CHECK(read_json_file((dir / "gauss.json").string()) == res.report);

  // One labelled row per vertex in the field table.
  const std::string csv = read_text_file((dir / "u.csv").string());
  const long rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == 34 + 1);  // genus-2 mesh at refinement 3 plus the header
  std::filesystem::remove_all(dir);
}

TEST_CASE("genus gate rejects non-hyperbolic input meshes") {
  const std::filesystem::path dir = fresh_dir("torus");
  RunConfig c = small_config();
  c.mesh_generator = "flat-torus(6)";
  CHECK_THROWS_AS((void)run_command("surface", c, dir.string()), PreconditionError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown verbs are rejected") {
  const std::filesystem::path dir = fresh_dir("verb");
  CHECK_THROWS_AS((void)run_command("solve", small_config(), dir.string()),
                  PreconditionError);
  const std::vector<std::string> expected = {
      "surface",  "gauss",     "ray", "poisson", "fixedpoint",
      "sections", "criterion", "h4",  "reproduce-theorem-a"};
  CHECK(command_verbs() == expected);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical configs reproduce every artifact byte for byte") {
  const std::filesystem::path dir1 = fresh_dir("poisson1");
  const std::filesystem::path dir2 = fresh_dir("poisson2");
  const RunConfig c = small_config();
  const CommandResult r1 = run_command("poisson", c, dir1.string());
  const CommandResult r2 = run_command("poisson", c, dir2.string());
  REQUIRE(r1.artifacts == r2.artifacts);
  for (const std::string& name : r1.artifacts) {
    CAPTURE(name);
    CHECK(read_text_file((dir1 / name).string()) ==
          read_text_file((dir2 / name).string()));
  }

  // A different seed draws different data.
  RunConfig c2 = c;
  c2.seed = c.seed + 1;
  const std::filesystem::path dir3 = fresh_dir("poisson3");
  (void)run_command("poisson", c2, dir3.string());
  CHECK(read_text_file((dir1 / "v.csv").string()) !=
        read_text_file((dir3 / "v.csv").string()));
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
  std::filesystem::remove_all(dir3);
}
