#include "eifkit/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "eifkit/error.hpp"
#include "eifkit/estimate.hpp"
#include "eifkit/io.hpp"
#include "eifkit/suite.hpp"
#include "eifkit/tangent.hpp"

namespace eifkit {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Options {
  std::string command;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool serial = false;
};

struct Context {
  Options opt;
  Json config;
  fs::path config_dir;
  fs::path out_dir;
  Execution exec = Execution::parallel;
};

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("failed writing " + path.string());
}

void allow_top_keys(const Json& j, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ConfigError("config: key \"" + k + "\" is unknown or unused by this command");
  }
}

const Json& need(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("config: missing key \"") + key + "\"");
  return *it;
}

FactorizedDistribution load_distribution(const Context& ctx, bool seed_overrides_generator) {
  Json d = need(ctx.config, "distribution");
  if (seed_overrides_generator && ctx.opt.seed && d.is_object() && d.contains("generator") &&
      d["generator"].is_object()) {
    d["generator"]["seed"] = *ctx.opt.seed;
  }
  return distribution_from_json(d, ctx.config_dir);
}

int cmd_verify(const Context& ctx, std::ostream& out) {
  allow_top_keys(ctx.config, {"command", "suite", "output_dir"});
  CheckSuiteConfig suite = ctx.config.contains("suite") ? suite_from_json(ctx.config["suite"]) : CheckSuiteConfig{};
  if (ctx.opt.seed) suite.master_seed = *ctx.opt.seed;
  const VerificationReport report = run_suite(suite, ctx.exec);
  write_file(ctx.out_dir / "report.json", report_json(report));
  write_file(ctx.out_dir / "checks.csv", checks_csv(report));
  for (const auto& s : report.summaries) {
    out << (s.failures == 0 ? "ok   " : "FAIL ") << s.group << " " << s.check << ": " << s.count - s.failures << "/"
        << s.count << " max " << fmt(s.max_value) << " tol " << fmt(s.tolerance) << "\n";
  }
  out << (report.pass() ? "PASS" : "FAIL") << " " << report.records.size() - report.failures << "/"
      << report.records.size() << " checks\n";
  return report.pass() ? 0 : 1;
}

int cmd_simulate(const Context& ctx, std::ostream& out) {
  allow_top_keys(ctx.config, {"command", "distribution", "parameter", "study", "output_dir"});
  StudyConfig study = study_from_json(need(ctx.config, "study"));
  if (ctx.opt.seed) study.seed = *ctx.opt.seed;
  const FactorizedDistribution p = load_distribution(ctx, false);
  const LabeledParameter param = parameter_from_json(need(ctx.config, "parameter"), p);
  const MCStudyReport r = mc_study(p, param.spec, study.n, study.replications, study.seed, study.options, ctx.exec);
  write_file(ctx.out_dir / "study.csv", study_csv(r));
  write_file(ctx.out_dir / "study.json", study_json(r));
  out << "parameter " << param.label << " (" << r.parameter << "), n " << r.n << ", replications " << r.replications
      << "\n";
  out << "truth        " << fmt(r.truth) << "\n";
  out << "mean plugin  " << fmt(r.mean_plugin) << "\n";
  out << "mean onestep " << fmt(r.mean_onestep) << " (mc se " << fmt(r.mc_se_onestep) << ")\n";
  out << "var onestep  " << fmt(r.var_onestep) << " vs Var(D*)/n " << fmt(r.eif_variance / static_cast<double>(r.n))
      << "\n";
  out << "coverage_95  " << fmt(r.coverage_95) << "\n";
  return 0;
}

int cmd_describe(const Context& ctx, std::ostream& out) {
  allow_top_keys(ctx.config, {"command", "distribution", "parameter", "parameters", "output_dir"});
  const FactorizedDistribution p = load_distribution(ctx, true);
  std::vector<LabeledParameter> params;
  const bool one = ctx.config.contains("parameter");
  if (one == ctx.config.contains("parameters")) {
    throw ConfigError("config: give exactly one of \"parameter\" and \"parameters\"");
  }
  if (one) {
    params.push_back(parameter_from_json(ctx.config["parameter"], p));
  } else {
    const Json& list = ctx.config["parameters"];
    if (!list.is_array() || list.empty()) throw ConfigError("config: \"parameters\" must be a non-empty array");
    for (const auto& j : list) params.push_back(parameter_from_json(j, p));
  }

  std::vector<LabeledInfluence> fs;
  for (const auto& param : params) {
    fs.push_back({param.label, eif(p, param.spec)});
    const InfluenceFunction& f = fs.back().f;
    out << "== " << param.label << " (" << parameter_type(param.spec) << ")\n";
    out << "psi      " << fmt(f.psi) << "\n";
    out << "var_eif  " << fmt(inner_product(p, f.total, f.total)) << "\n";
    for (const auto& c : f.components) {
      out << "var_" << c.name << "  " << fmt(inner_product(p, c.values, c.values)) << "\n";
    }
    out << "index";
    for (const auto& v : p.variables()) out << "\t" << v.name;
    out << "\tp\tD*";
    for (const auto& c : f.components) out << "\tD*_" << c.name;
    out << "\n";
    for (std::size_t idx = 0; idx < f.total.size(); ++idx) {
      out << idx;
      for (std::size_t v = 0; v < p.num_variables(); ++v) {
        out << "\t" << fmt(p.variable(v).levels[p.space().level_of(idx, v)]);
      }
      out << "\t" << fmt(p.joint()[idx]) << "\t" << fmt(f.total[idx]);
      for (const auto& c : f.components) out << "\t" << fmt(c.values[idx]);
      out << "\n";
    }
  }
  write_file(ctx.out_dir / "eif_table.csv", eif_table_csv(p, fs));
  write_file(ctx.out_dir / "distribution.json", distribution_to_json(p).dump(2) + "\n");
  return 0;
}

int cmd_sample(const Context& ctx, std::ostream& out) {
  allow_top_keys(ctx.config, {"command", "distribution", "sample", "output_dir"});
  SampleConfig sc = sample_from_json(need(ctx.config, "sample"));
  if (ctx.opt.seed) sc.seed = *ctx.opt.seed;
  const FactorizedDistribution p = load_distribution(ctx, false);
  const Dataset data = sample(p, sc.n, sc.seed);
  write_file(ctx.out_dir / "sample.csv", dataset_csv(data));
  out << "wrote " << data.size() << " rows to " << (ctx.out_dir / "sample.csv").string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Efficient influence functions on finite discrete distributions", "eifkit"};
  app.require_subcommand(1);
  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"verify", "Run the seeded verification suite; writes report.json and checks.csv"},
      {"simulate", "Run a Monte Carlo one-step study; writes study.csv and study.json"},
      {"describe", "Print Psi, Var(D*) and the D* table; writes eif_table.csv"},
      {"sample", "Draw an i.i.d. sample; writes sample.csv"},
  };
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", opt.config, "JSON config file")->required();
    sub->add_option("--seed", opt.seed, "Override the command's seed");
    sub->add_option("--out", opt.out_dir, "Output directory (default: output_dir in the config, else .)");
    sub->add_flag("--serial", opt.serial, "Run the fan-out on one thread");
    sub->callback([&opt, n = std::string(name)] { opt.command = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  Context ctx;
  ctx.opt = opt;
  ctx.exec = opt.serial ? Execution::serial : Execution::parallel;
  try {
    ctx.config = read_json_file(opt.config);
    ctx.config_dir = fs::path(opt.config).parent_path();
    if (!ctx.config.is_object()) throw ConfigError("config: expected a JSON object");
    if (ctx.config.contains("command")) {
      const Json& c = ctx.config["command"];
      if (!c.is_string() || c.get<std::string>() != opt.command) {
        throw ConfigError("config: \"command\" does not match the subcommand " + opt.command);
      }
    }
    if (!opt.out_dir.empty()) {
      ctx.out_dir = opt.out_dir;
    } else if (ctx.config.contains("output_dir")) {
      const Json& o = ctx.config["output_dir"];
      if (!o.is_string()) throw ConfigError("config: \"output_dir\" must be a string");
      ctx.out_dir = fs::path(o.get<std::string>());
      if (ctx.out_dir.is_relative()) ctx.out_dir = ctx.config_dir / ctx.out_dir;
    } else {
      ctx.out_dir = ".";
    }
    if (opt.command == "verify") return cmd_verify(ctx, out);
    if (opt.command == "simulate") return cmd_simulate(ctx, out);
    if (opt.command == "describe") return cmd_describe(ctx, out);
    return cmd_sample(ctx, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace eifkit
