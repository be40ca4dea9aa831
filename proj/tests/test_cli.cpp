#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "eifkit/cli.hpp"
#include "eifkit/eif.hpp"
#include "eifkit/error.hpp"
#include "eifkit/generate.hpp"
#include "eifkit/io.hpp"
#include "eifkit/verify.hpp"

using namespace eifkit;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = EIFKIT_CONFIG_DIR;
const fs::path kOut = EIFKIT_TEST_OUT;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "eifkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Run run_config(const std::string& command, const std::string& config, const fs::path& out_dir,
               std::vector<std::string> extra = {}) {
  std::vector<std::string> args{command, "--config", (kConfigs / config).string(), "--out", out_dir.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return run(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::create_directories(kOut / "configs");
  const fs::path path = kOut / "configs" / name;
  std::ofstream(path) << text;
  return path;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Value after a "key  " prefix at the start of a line in a section that
// begins with "== label ".
std::string field(const std::string& out, const std::string& label, const std::string& key) {
  std::istringstream in(out);
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (line.rfind("== ", 0) == 0) inside = line.rfind("== " + label + " ", 0) == 0;
    if (inside && line.rfind(key + " ", 0) == 0) {
      std::istringstream l(line);
      std::string k, v;
      l >> k >> v;
      return v;
    }
  }
  return "";
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("verify") {
  SUBCASE("default config passes") {
    const auto r = run_config("verify", "verify_default.json", kOut / "verify_default");
    CHECK(r.code == 0);
    CHECK(r.out.find("\nPASS ") != std::string::npos);
    const auto report = nlohmann::json::parse(slurp(kOut / "verify_default" / "report.json"));
    CHECK(report["pass"] == true);
    CHECK(report["config"]["n_distributions"] == 100);
    CHECK(report["config"]["n_scores"] == 20);
    CHECK(count_lines(slurp(kOut / "verify_default" / "checks.csv")) == report["checks"].get<std::size_t>() + 1);
  }
  SUBCASE("corrupted gradient fails") {
    const auto r = run_config("verify", "verify_corrupted.json", kOut / "verify_corrupted");
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL tsm riesz") != std::string::npos);
  }
  SUBCASE("same config twice gives identical files, serial or not") {
    CHECK(run_config("verify", "verify_quick.json", kOut / "quick_a").code == 0);
    CHECK(run_config("verify", "verify_quick.json", kOut / "quick_b", {"--serial"}).code == 0);
    CHECK(slurp(kOut / "quick_a" / "report.json") == slurp(kOut / "quick_b" / "report.json"));
    CHECK(slurp(kOut / "quick_a" / "checks.csv") == slurp(kOut / "quick_b" / "checks.csv"));
  }
  SUBCASE("seed override") {
    CHECK(run_config("verify", "verify_quick.json", kOut / "quick_seed", {"--seed", "99"}).code == 0);
    const auto report = nlohmann::json::parse(slurp(kOut / "quick_seed" / "report.json"));
    CHECK(report["config"]["master_seed"] == 99);
  }
  SUBCASE("empty suite") {
    const auto cfg = write_config("empty.json", R"({"suite": {"n_distributions": 0}})");
    CHECK(run({"verify", "--config", cfg.string(), "--out", (kOut / "empty").string()}).code == 0);
  }
}

TEST_CASE("configuration errors exit with 2") {
  const fs::path out = kOut / "errors";
  auto code_for = [&](const std::string& command, const std::string& text) {
    const auto cfg = write_config("bad.json", text);
    const auto r = run({command, "--config", cfg.string(), "--out", out.string()});
    CHECK_FALSE(r.err.empty());
    return r.code;
  };
  CHECK(code_for("verify", "{ not json") == 2);
  CHECK(code_for("verify", R"({"suite": {"h": 0.5}})") == 2);
  CHECK(code_for("verify", R"({"suite": {"colour": "red"}})") == 2);
  CHECK(code_for("verify", R"({"suite": {"corruption": "nonsense"}})") == 2);
  CHECK(code_for("verify", R"({"command": "simulate"})") == 2);
  CHECK(code_for("simulate", R"({"distribution": "tsm_missing.json", "parameter": {"type": "tsm"},
                                 "study": {"n": 10, "replications": 5}})") == 2);
  const std::string dist = "\"" + (kConfigs / "tsm_example_distribution.json").string() + "\"";
  CHECK(code_for("simulate", R"({"distribution": )" + dist +
                                 R"(, "parameter": {"type": "tsm"}, "study": {"n": 10, "replications": 0}})") == 2);
  CHECK(code_for("simulate", R"({"distribution": )" + dist + R"(, "parameter": {"type": "tsm"}})") == 2);
  CHECK(code_for("describe", R"({"distribution": )" + dist + R"(, "parameter": {"type": "wobble"}})") == 2);
  CHECK(code_for("describe", R"({"distribution": )" + dist + R"(, "parameter": {"type": "cdf_square"}})") == 2);
  CHECK(code_for("describe", R"({"distribution": {"variables": [{"name": "X", "levels": [0, 1]}],
                                  "factors": [{"child": "X", "rows": [{"parents": [], "probs": [0.7, 0.7]}]}]},
                                  "parameter": {"type": "cdf_square"}})") == 2);
  CHECK(code_for("sample", R"({"distribution": )" + dist + R"(, "sample": {"n": 0}})") == 2);
  CHECK(run({"verify", "--config", (out / "does_not_exist.json").string()}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"verify"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("simulate") {
  const auto r = run_config("simulate", "simulate_tsm.json", kOut / "sim_a");
  CHECK(r.code == 0);
  const auto csv = slurp(kOut / "sim_a" / "study.csv");
  CHECK(count_lines(csv) == 2);
  CHECK(csv.find("\ntsm,1000,2000,1,") != std::string::npos);
  const auto study = nlohmann::json::parse(slurp(kOut / "sim_a" / "study.json"));
  CHECK(study["replicates"].size() == 2000);
  CHECK(study["coverage_95"].get<double>() >= 0.92);
  CHECK(study["coverage_95"].get<double>() <= 0.97);

  CHECK(run_config("simulate", "simulate_tsm.json", kOut / "sim_b", {"--serial"}).code == 0);
  CHECK(slurp(kOut / "sim_b" / "study.csv") == csv);
  CHECK(slurp(kOut / "sim_b" / "study.json") == slurp(kOut / "sim_a" / "study.json"));

  CHECK(run_config("simulate", "simulate_tsm.json", kOut / "sim_c", {"--seed", "2"}).code == 0);
  CHECK(slurp(kOut / "sim_c" / "study.csv") != csv);
}

TEST_CASE("describe") {
  SUBCASE("tsm values match the verification module exactly") {
    const auto r = run_config("describe", "describe_tsm.json", kOut / "describe_tsm");
    REQUIRE(r.code == 0);
    const auto p = distribution_from_json(read_json_file(kConfigs / "tsm_example_distribution.json"));
    CHECK(field(r.out, "tsm", "psi") == fmt(psi_tsm(p)));
    CHECK(field(r.out, "tsm", "var_eif") == fmt(efficiency_bound_check(p).var_eif));
    const auto csv = slurp(kOut / "describe_tsm" / "eif_table.csv");
    CHECK(csv.rfind("parameter,W,A,Y,p,total,D_Y,D_W\n", 0) == 0);
    CHECK(count_lines(csv) == p.joint().size() + 1);
    const auto f = eif_tsm(p);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    for (std::size_t i = 0; std::getline(in, line); ++i) {
      std::vector<std::string> cells;
      std::istringstream l(line);
      for (std::string c; std::getline(l, c, ',');) cells.push_back(c);
      REQUIRE(cells.size() == 8);
      CHECK(cells[5] == fmt(f.total[i]));
    }
  }
  SUBCASE("point mass has a zero EIF column") {
    const auto r = run_config("describe", "describe_point_mass.json", kOut / "describe_point_mass");
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(kOut / "describe_point_mass" / "eif_table.csv"));
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    for (; std::getline(in, line); ++rows) {
      const auto total = line.substr(0, line.rfind(','));
      CHECK(total.substr(total.rfind(',') + 1) == "0");
    }
    CHECK(rows == 4);
  }
  SUBCASE("transport with all four model variants") {
    const auto r = run_config("describe", "describe_transport.json", kOut / "describe_transport");
    REQUIRE(r.code == 0);
    std::size_t sections = 0;
    for (std::size_t pos = r.out.find("== "); pos != std::string::npos; pos = r.out.find("\n== ", pos + 1)) ++sections;
    CHECK(sections == 4);
    for (const char* label : {"unrestricted_supplied", "restricted_supplied", "unrestricted_fixed", "restricted_fixed"}) {
      CAPTURE(label);
      CHECK_FALSE(field(r.out, label, "var_Y").empty());
      CHECK_FALSE(field(r.out, label, "var_Z").empty());
      CHECK_FALSE(field(r.out, label, "var_W").empty());
      const bool fixed = std::string(label).find("fixed") != std::string::npos;
      CHECK(field(r.out, label, "var_M").empty() != fixed);
    }
    // Same psi in both models; smaller variance in the restricted one.
    CHECK(field(r.out, "restricted_fixed", "psi") == field(r.out, "unrestricted_fixed", "psi"));
    CHECK(std::stod(field(r.out, "restricted_fixed", "var_eif")) <
          std::stod(field(r.out, "unrestricted_fixed", "var_eif")));
    const auto csv = slurp(kOut / "describe_transport" / "eif_table.csv");
    CHECK(csv.rfind("parameter,S,W,A,Z,M,Y,p,total,D_Y,D_Z,D_W,D_M\n", 0) == 0);
  }
  SUBCASE("longitudinal and survival configs") {
    CHECK(run_config("describe", "describe_longitudinal.json", kOut / "describe_long").code == 0);
    CHECK(run_config("describe", "describe_survival.json", kOut / "describe_surv").code == 0);
    CHECK(run_config("describe", "describe_point_treatment.json", kOut / "describe_pt").code == 0);
  }
  SUBCASE("written distribution round-trips") {
    REQUIRE(run_config("describe", "describe_transport.json", kOut / "describe_rt").code == 0);
    const auto back = distribution_from_json(read_json_file(kOut / "describe_rt" / "distribution.json"));
    const auto orig = generate_shape("transport_restricted", 3);
    CHECK(back.factors() == orig.factors());
    CHECK(back.positivity_floor() == orig.positivity_floor());
    CHECK(back.variables().size() == orig.variables().size());
  }
}

TEST_CASE("sample") {
  const auto r = run_config("sample", "sample_tsm.json", kOut / "sample");
  CHECK(r.code == 0);
  const auto csv = slurp(kOut / "sample" / "sample.csv");
  CHECK(count_lines(csv) == 501);
  CHECK(csv.rfind("W,A,Y\n", 0) == 0);
  CHECK(run_config("sample", "sample_tsm.json", kOut / "sample_b").code == 0);
  CHECK(slurp(kOut / "sample_b" / "sample.csv") == csv);
}

TEST_CASE("json encodings") {
  SUBCASE("distributions") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto p = random_survival(seed, 2);
      const auto back = distribution_from_json(nlohmann::json::parse(distribution_to_json(p).dump()));
      CHECK(back.factors() == p.factors());
      CHECK(back.joint() == p.joint());
    }
    // A flat joint is refactorized.
    const auto j = nlohmann::json::parse(R"({"variables": [{"name": "A", "levels": [0, 1]}, {"name": "B", "levels": [0, 1]}],
                                             "joint": [0.1, 0.2, 0.3, 0.4]})");
    const auto p = distribution_from_json(j);
    CHECK(p.conditional(1, 1, 1) == doctest::Approx(4.0 / 7).epsilon(1e-15));
  }
  SUBCASE("parameters") {
    const auto p = random_transport(2, true);
    for (const char* text : {R"({"type": "transport_sde", "a": 0, "a_star": 1, "s_star": 0, "model": "restricted",
                                 "intervention": {"supplied": [[0.2, 0.8], [0.5, 0.5], [0.9, 0.1]]}})",
                             R"({"type": "transport_sde", "intervention": "from_p"})"}) {
      const auto spec = parameter_from_json(nlohmann::json::parse(text), p).spec;
      const auto again = parameter_from_json(nlohmann::json::parse(parameter_to_json(spec).dump()), p).spec;
      CHECK(psi(p, spec) == psi(p, again));
      CHECK(eif(p, spec).total == eif(p, again).total);
    }
    const auto s = random_survival(3, 3);
    const auto spec = parameter_from_json(nlohmann::json::parse(R"({"type": "survival", "t0": 2, "rule": {"random": 4}})"), s);
    CHECK(std::get<SurvivalSpec>(spec.spec).t0 == 2);
    CHECK_THROWS_AS(parameter_from_json(nlohmann::json::parse(R"({"type": "survival", "t0": 9, "rule": [0, 1, 0]})"), s),
                    ConfigError);
  }
}
