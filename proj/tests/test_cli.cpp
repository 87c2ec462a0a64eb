#include <doctest.h>

#include "gdm/cli.hpp"
#include "gdm/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = gdm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gdm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

int lines(const fs::path& path) {
  std::ifstream in(path);
  int n = 0;
  for (std::string l; std::getline(in, l);) ++n;
  return n;
}

std::string estimate_config(const std::string& family, const std::string& extra = "") {
  std::string text =
      "[data]\npath = sim/dataset.csv\navail = avail\n\n[utility]\nb_price = price\nb_quality = quality\n\n"
      "[heterogeneity]\nfamily = " + family + "\n";
  if (family == "LC") text += "block.class = b_price, b_quality\n";
  if (family == "DM" || family == "GDM") text += "block.cost = b_price\nblock.quality = b_quality\n";
  if (family == "GDM") text += "boost.diag1 = cost=1 & quality=1\nboost.diag2 = *=2\n";
  text += "\n[options]\nstarts = 2\nlabel = " + family + "\n" + extra;
  return text;
}

// Shared simulated dataset for the estimate/compare/export checks.
fs::path simulated_project() {
  static fs::path dir;
  if (!dir.empty()) return dir;
  dir = scratch("project");
  write(dir / "sim.ini", "[design]\ntype = quadrant\npreset = table1-dataset1\nn_individuals = 300\n");
  const Run r = run({"simulate", "--config", (dir / "sim.ini").string(), "--out", (dir / "sim").string()});
  REQUIRE(r.code == 0);
  return dir;
}

}  // namespace

TEST_CASE("simulate presets") {
  const fs::path dir = scratch("simulate");
  write(dir / "d1.ini", "[design]\ntype = quadrant\npreset = table1-dataset1\n");
  Run r = run({"simulate", "--config", (dir / "d1.ini").string(), "--out", (dir / "d1").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("individuals             1000") != std::string::npos);
  CHECK(r.out.find("both-sensitive") != std::string::npos);
  CHECK(lines(dir / "d1" / "dataset.csv") == 1 + 1000 * 10 * 8);
  CHECK(lines(dir / "d1" / "truth.csv") == 1001);

  write(dir / "d3.ini", "[design]\npreset = table1-dataset3\n");
  r = run({"simulate", "--config", (dir / "d3.ini").string(), "--out", (dir / "d3").string()});
  REQUIRE(r.code == 0);
  for (const char* count : {" 50\n", " 450\n"}) CHECK(r.out.find(count) != std::string::npos);

  const std::string first = run({"simulate", "--config", (dir / "d3.ini").string(), "--out", (dir / "d3b").string(), "--seed", "5"}).out;
  const std::string second = run({"simulate", "--config", (dir / "d3.ini").string(), "--out", (dir / "d3c").string(), "--seed", "5"}).out;
  CHECK(first == second);
  CHECK(first != r.out);
}

TEST_CASE("simulate validation") {
  const fs::path dir = scratch("simulate_bad");
  write(dir / "bad.ini", "[design]\nproportions = 0.5, 0.5, 0.5, 0\n");
  Run r = run({"simulate", "--config", (dir / "bad.ini").string(), "--out", dir.string()});
  CHECK(r.code == gdm::cli::kValidationError);
  CHECK(r.err.find("proportions") != std::string::npos);

  write(dir / "typo.ini", "[design]\npreset = table1-dataset1\nn_individual = 10\n");
  r = run({"simulate", "--config", (dir / "typo.ini").string(), "--out", dir.string()});
  CHECK(r.code == gdm::cli::kValidationError);
  CHECK(r.err.find("n_individual") != std::string::npos);

  r = run({"simulate", "--config", (dir / "missing.ini").string()});
  CHECK(r.code == gdm::cli::kIoError);
  CHECK(run({"frobnicate"}).code == gdm::cli::kValidationError);
  CHECK(run({}).code == gdm::cli::kValidationError);
}

TEST_CASE("simulate from a model") {
  const fs::path dir = scratch("simulate_model");
  write(dir / "m.ini",
        "[design]\ntype = model\nn_individuals = 50\nn_tasks = 4\nn_alternatives = 3\nattributes = x1, x2\n\n"
        "[utility]\nb1 = x1\nb2 = x2\n\n[heterogeneity]\nfamily = LC\nblock.class = b1, b2\n\n"
        "[parameters]\nb1[1] = -1\nb1[2] = 1\ndelta[class,2] = 0.5\n");
  const Run r = run({"simulate", "--config", (dir / "m.ini").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(lines(dir / "mixtures.csv") == 51);
  CHECK(lines(dir / "dataset.csv") == 1 + 50 * 4 * 3);
}

TEST_CASE("estimate, compare and export") {
  const fs::path dir = simulated_project();
  for (const char* f : {"MNL", "LC", "DM", "GDM"}) write(dir / (std::string(f) + ".ini"), estimate_config(f));

  Run r = run({"estimate", "--config", (dir / "MNL.ini").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  auto mnl = gdm::read_result(dir / "out" / "MNL.json");
  CHECK(mnl.n_free == 2);
  CHECK(mnl.ll < 0);
  std::ifstream txt(dir / "out" / "MNL.txt");
  CHECK(txt.good());

  for (const char* f : {"LC", "DM", "GDM"}) {
    r = run({"estimate", "--config", (dir / (std::string(f) + ".ini")).string(), "--out", (dir / "out").string()});
    CHECK((r.code == 0 || r.code == gdm::cli::kNotConverged));
  }
  const auto gdm_result = gdm::read_result(dir / "out" / "GDM.json");
  int boosts = 0;
  for (const auto& n : gdm_result.params.names) boosts += n == "diag1" || n == "diag2";
  CHECK(boosts == 2);
  CHECK(gdm_result.dataset_hash == mnl.dataset_hash);

  std::vector<std::string> args{"compare"};
  for (const char* f : {"MNL", "LC", "DM", "GDM"}) args.push_back((dir / "out" / (std::string(f) + ".json")).string());
  args.insert(args.end(), {"--out", (dir / "cmp").string()});
  r = run(args);
  REQUIRE(r.code == 0);
  CHECK(lines(dir / "cmp" / "comparison.csv") == 5);
  CHECK(r.out.find("difference in LL (DM - LC)") != std::string::npos);
  std::ifstream csv(dir / "cmp" / "comparison.csv");
  std::string header, row;
  std::getline(csv, header);
  bool gdm_top = false;
  while (std::getline(csv, row))
    if (row.rfind("GDM,", 0) == 0) gdm_top = row.find(",1\n") != std::string::npos || row.back() == '1';
  CHECK(gdm_top);

  r = run({"compare", (dir / "out" / "MNL.json").string(), "--out", (dir / "one").string()});
  CHECK(r.code == 0);
  CHECK(lines(dir / "one" / "comparison.csv") == 2);

  for (const auto& [family, points] : std::vector<std::pair<std::string, int>>{{"DM", 4}, {"LC", 2}, {"MNL", 1}}) {
    const fs::path out = dir / ("plot_" + family);
    r = run({"export-plotdata", (dir / "out" / (family + ".json")).string(), (dir / "sim" / "dataset.csv").string(),
             "--coefs", "b_price,b_quality", "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(lines(out / "grid.csv") == 1 + points);
    CHECK(lines(out / "individuals.csv") == 301);
  }
  r = run({"export-plotdata", (dir / "out" / "DM.json").string(), (dir / "sim" / "dataset.csv").string(), "--truth",
           (dir / "sim" / "truth.csv").string(), "--out", (dir / "plot_truth").string()});
  REQUIRE(r.code == 0);
  std::ifstream ind(dir / "plot_truth" / "individuals.csv");
  std::string ind_header;
  std::getline(ind, ind_header);
  CHECK(ind_header ==
        "id,ll,modal_mixture,post_b_price,post_b_quality,true_b_price,err_b_price,true_b_quality,err_b_quality");

  r = run({"export-plotdata", (dir / "out" / "DM.json").string(), (dir / "sim" / "dataset.csv").string(), "--coefs",
           "b_nope", "--out", (dir / "plot_bad").string()});
  CHECK(r.code == gdm::cli::kValidationError);
}

TEST_CASE("estimate errors") {
  const fs::path dir = simulated_project();
  write(dir / "missing.ini", "[data]\npath = nowhere.csv\n\n[utility]\nb = price\n");
  Run r = run({"estimate", "--config", (dir / "missing.ini").string(), "--out", (dir / "x").string()});
  CHECK(r.code == gdm::cli::kIoError);

  write(dir / "typo.ini", estimate_config("MNL", "strats = 3\n"));
  r = run({"estimate", "--config", (dir / "typo.ini").string(), "--out", (dir / "x").string()});
  CHECK(r.code == gdm::cli::kValidationError);
  CHECK(r.err.find("strats") != std::string::npos);

  write(dir / "badattr.ini", "[data]\npath = sim/dataset.csv\n\n[utility]\nb = colour\n");
  r = run({"estimate", "--config", (dir / "badattr.ini").string(), "--out", (dir / "x").string()});
  CHECK(r.code == gdm::cli::kValidationError);
}

TEST_CASE("compare rejects results from different datasets") {
  const fs::path dir = simulated_project();
  const fs::path other = scratch("other");
  write(other / "sim.ini", "[design]\npreset = table1-dataset2\nn_individuals = 60\n");
  REQUIRE(run({"simulate", "--config", (other / "sim.ini").string(), "--out", (other / "sim").string()}).code == 0);
  write(other / "MNL.ini", estimate_config("MNL"));
  REQUIRE(run({"estimate", "--config", (other / "MNL.ini").string(), "--out", (other / "out").string()}).code == 0);
  write(dir / "MNL2.ini", estimate_config("MNL"));
  REQUIRE(run({"estimate", "--config", (dir / "MNL2.ini").string(), "--out", (dir / "out2").string()}).code == 0);
  const std::string a = (dir / "out2" / "MNL.json").string();
  const std::string b = (other / "out" / "MNL.json").string();
  const Run r = run({"compare", a, b, "--out", (other / "cmp").string()});
  CHECK(r.code == gdm::cli::kValidationError);
  CHECK(r.err.find(a) != std::string::npos);
  CHECK(r.err.find(b) != std::string::npos);
}
