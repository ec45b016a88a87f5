#include "oracles.hpp"
#include "qpt/cli.hpp"
#include "qpt/config.hpp"
#include "qpt/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace qpt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("qpt_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run qpt_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string config_path(const std::string& name) { return std::string(QPT_CONFIG_DIR) + "/" + name; }

std::string config_error(const std::string& text) {
  try {
    parse_config(json::parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config defaults") {
  const auto c = parse_config(json::parse(R"({"scenario": "compare", "process": {"kind": "identity"}})"));
  REQUIRE(c.noise);
  CHECK(c.noise->counts_per_setting == 13000);
  CHECK(c.trials == 100);
  CHECK(c.kernel == CoherenceKernel::Triangular);
  CHECK(c.pair_settings == 36);
  CHECK(c.processes.size() == 1);
  CHECK(c.ancilla_mode == AncillaMode::Measured);
  CHECK(c.n_lat == 33);
  CHECK(c.n_lon == 64);

  const auto e = parse_config(json::parse(R"({"scenario": "werner", "noise": "exact"})"));
  CHECK_FALSE(e.noise);
}

TEST_CASE("config validation names the field") {
  CHECK(config_error(R"({"scenario": "compare", "noise": {"counts": 0}})").find("noise.counts") != std::string::npos);
  const auto kinds = config_error(R"({"scenario": "compare", "process": {"kind": "mirror"}})");
  CHECK(kinds.find("process.kind") != std::string::npos);
  for (const auto& k : valid_process_kinds()) CHECK(kinds.find(k) != std::string::npos);
  CHECK(config_error(R"({"scenario": "compare", "noise": {"foo": 1}})").find("noise.foo") != std::string::npos);
  CHECK(config_error(R"({"scenario": "dance"})").find("scenario") != std::string::npos);
  CHECK(config_error(R"({"process": {"kind": "identity"}})").find("scenario") != std::string::npos);
  CHECK(config_error(R"({"scenario": "compare", "trials": 0})").find("trials") != std::string::npos);
  CHECK(config_error(R"({"scenario": "compare", "pair_settings": 20})").find("pair_settings") != std::string::npos);
  CHECK(config_error(R"({"scenario": "compare", "process": [{"kind": "dephaser", "params": {"p": 3}}]})")
            .find("process[0].params") != std::string::npos);
  CHECK(config_error(R"({"scenario": "compare", "ancilla": {"state": "ghz"}})").find("ancilla.state") !=
        std::string::npos);
  CHECK(config_error(R"({"scenario": "spheremap", "resolution": [1, 2]})").find("resolution") != std::string::npos);
  CHECK(config_error(R"({"scenario": "compare", "noise": {"seed": -3}})").find("noise.seed") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"fig2a-identity.json", "fig2b-unitary.json", "fig2c-decoherer.json", "fig3-chi.json",
                           "fig4-polarizers.json", "werner-prep.json", "recoherer.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(config_path(name)));
  }
}

TEST_CASE("json encodings round trip") {
  std::mt19937_64 rng(103);
  const ComplexMatrix m = oracle::random_gaussian(rng, 4, 4);
  CHECK(matrix_from_json(matrix_to_json(m)) == m);
  const json jm = matrix_to_json(m);
  CHECK(jm["rows"] == 4);
  CHECK(jm["re"].size() == 16);
  CHECK(jm["re"][1].get<double>() == m(0, 1).real());

  const DensityMatrix rho(oracle::random_state(rng, 2));
  CHECK(state_from_json(state_to_json(rho)).matrix() == rho.matrix());
  CHECK(state_from_json(matrix_to_json(rho.matrix())).matrix() == rho.matrix());

  const ChiMatrix chi = kraus_to_chi(channels::coherent_partial_polarizer(0.88, 0.45));
  const json jc = chi_to_json(chi);
  CHECK(jc["basis"] == json({"I", "X", "Y", "Z"}));
  CHECK(chi_from_json(jc).entries == chi.entries);
  CHECK_THROWS(matrix_from_json(json::parse(R"({"rows": 2, "cols": 2, "re": [1], "im": [0]})")));
}

TEST_CASE("cli usage errors") {
  CHECK(qpt_run({}).code == cli::kExitUsage);
  CHECK(qpt_run({"dance"}).code == cli::kExitUsage);
  CHECK(qpt_run({"--help"}).code == cli::kExitOk);

  TempDir tmp("usage");
  put(tmp.path / "bad.json", "{ not json");
  const auto bad = qpt_run({"scenario", (tmp.path / "bad.json").string(), "--out-dir", (tmp.path / "o").string()});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("malformed") != std::string::npos);

  put(tmp.path / "kind.json", R"({"scenario": "compare", "process": {"kind": "mirror"}})");
  const auto kind = qpt_run({"compare", (tmp.path / "kind.json").string(), "--out-dir", (tmp.path / "o").string()});
  CHECK(kind.code == cli::kExitUsage);
  CHECK(kind.err.find("valid kinds") != std::string::npos);

  CHECK(qpt_run({"scenario", (tmp.path / "missing.json").string()}).code == cli::kExitUsage);

  put(tmp.path / "blocker", "x");
  const auto unwritable = qpt_run({"scenario", config_path("werner-prep.json"), "--out-dir",
                                   (tmp.path / "blocker" / "sub").string()});
  CHECK(unwritable.code == cli::kExitUsage);
}

TEST_CASE("cli numerical failure") {
  TempDir tmp("numerical");
  put(tmp.path / "zero.csv", "setting_1,setting_2,counts,reference_counts\nH,,0,10\nV,,0,10\nD,,0,10\n"
                             "A,,0,10\nR,,0,10\nL,,0,10\n");
  const auto r = qpt_run({"reconstruct", (tmp.path / "zero.csv").string(), "--out-dir", tmp.path.string()});
  CHECK(r.code == cli::kExitNumerical);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("cli werner scenario") {
  TempDir tmp("werner");
  const auto r = qpt_run({"scenario", config_path("werner-prep.json"), "--out-dir", tmp.path.string()});
  REQUIRE(r.code == cli::kExitOk);
  const json doc = read_json(tmp.path / "werner_state.json");
  CHECK(doc["fidelity_to_werner"].get<double>() >= 1.0 - 1e-9);
  CHECK(doc["schmidt_number"] == 4);
  CHECK(doc["entangled"] == false);
  const json manifest = read_json(tmp.path / "run_manifest.json");
  CHECK(manifest["subcommand"] == "scenario");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["seed"].is_null());
  CHECK(manifest["artifacts"] == json({"werner_state.json"}));
}

TEST_CASE("cli schmidt on a product state") {
  TempDir tmp("schmidt");
  const auto r = qpt_run({"schmidt", config_path("states/product.json"), "--out-dir", tmp.path.string()});
  REQUIRE(r.code == cli::kExitOk);
  const json doc = read_json(tmp.path / "schmidt.json");
  CHECK(doc["schmidt_number"] == 1);
  CHECK(doc["usable"] == false);
}

TEST_CASE("cli spheremap of the dephaser") {
  TempDir tmp("sphere");
  put(tmp.path / "c.json", R"({"scenario": "spheremap", "process": {"kind": "dephaser", "params": {"p": 1}},
                               "resolution": [9, 16]})");
  const auto r = qpt_run({"spheremap", (tmp.path / "c.json").string(), "--out-dir", tmp.path.string()});
  REQUIRE(r.code == cli::kExitOk);
  std::ifstream csv(tmp.path / "dephaser_sphere.csv");
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 10);
    CHECK(std::abs(v[6]) < 1e-10);
    CHECK(std::abs(v[7]) < 1e-10);
    ++rows;
  }
  CHECK(rows == 7 * 16 + 2);
}

TEST_CASE("cli simulate then reconstruct") {
  TempDir tmp("sim");
  const auto s = qpt_run({"simulate", config_path("states/diagonal.json"), "--seed", "4", "--counts", "20000",
                          "--out-dir", tmp.path.string()});
  REQUIRE(s.code == cli::kExitOk);
  CHECK(read_json(tmp.path / "run_manifest.json")["seed"] == 4);
  const auto r = qpt_run({"reconstruct", (tmp.path / "counts.csv").string(), "--out-dir", tmp.path.string()});
  REQUIRE(r.code == cli::kExitOk);
  const json doc = read_json(tmp.path / "state.json");
  CHECK(doc["physical"] == true);
  CHECK(doc["stokes"][1].get<double>() > 0.98);
  CHECK(qpt_run({"reconstruct", (tmp.path / "counts.csv").string(), "--method", "magic", "--out-dir",
                 tmp.path.string()})
            .code == cli::kExitUsage);
}

TEST_CASE("cli output directory from the environment") {
  TempDir tmp("env");
  const fs::path target = tmp.path / "from_env";
  ::setenv("QPT_OUT_DIR", target.c_str(), 1);
  const auto r = qpt_run({"schmidt", config_path("states/bell-phi-minus.json")});
  ::unsetenv("QPT_OUT_DIR");
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(target / "schmidt.json"));
  CHECK(read_json(target / "schmidt.json")["usable"] == true);
}

TEST_CASE("cli runs are deterministic") {
  TempDir tmp("det");
  put(tmp.path / "c.json", R"({"scenario": "compare", "process": {"kind": "waveplate"},
                               "noise": {"counts": 13000, "seed": 9}, "trials": 3, "sphere_maps": true,
                               "resolution": [5, 6]})");
  const auto a = qpt_run({"compare", (tmp.path / "c.json").string(), "--out-dir", (tmp.path / "a").string()});
  const auto b = qpt_run({"compare", (tmp.path / "c.json").string(), "--out-dir", (tmp.path / "b").string()});
  REQUIRE(a.code == cli::kExitOk);
  REQUIRE(b.code == cli::kExitOk);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(tmp.path / "a")) {
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(tmp.path / "b" / entry.path().filename()));
    ++files;
  }
  CHECK(files == 10);

  // A different seed changes the hash and the results.
  const auto c = qpt_run({"compare", (tmp.path / "c.json").string(), "--seed", "10", "--out-dir",
                          (tmp.path / "c").string()});
  REQUIRE(c.code == cli::kExitOk);
  CHECK(read_json(tmp.path / "a" / "run_manifest.json")["config_hash"] !=
        read_json(tmp.path / "c" / "run_manifest.json")["config_hash"]);
  CHECK(slurp(tmp.path / "a" / "waveplate_comparison.json") != slurp(tmp.path / "c" / "waveplate_comparison.json"));
}

TEST_CASE("fnv1a") {
  CHECK(cli::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}
