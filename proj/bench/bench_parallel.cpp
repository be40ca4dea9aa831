// Serial reference vs OpenMP fan-out for the check suite and the Monte Carlo
// harness. Both modes must produce byte-identical reports.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "CLI11.hpp"

#include "eifkit/estimate.hpp"
#include "eifkit/generate.hpp"
#include "eifkit/suite.hpp"

namespace {

using eifkit::Execution;

double seconds(const std::function<std::string()>& run, std::string& output) {
  const auto t0 = std::chrono::steady_clock::now();
  output = run();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool compare(const char* name, const std::function<std::string(Execution)>& run) {
  std::string serial_out;
  std::string parallel_out;
  const double ts = seconds([&] { return run(Execution::serial); }, serial_out);
  const double tp = seconds([&] { return run(Execution::parallel); }, parallel_out);
  const bool same = serial_out == parallel_out;
  std::printf("%-10s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  identical %s\n", name, ts, tp, ts / tp,
              same ? "yes" : "NO");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs parallel timing"};
  std::size_t distributions = 20;
  std::size_t replications = 500;
  std::size_t n = 1000;
  app.add_option("--distributions", distributions, "Distributions per family in the suite run");
  app.add_option("--replications", replications, "Replications in the Monte Carlo run");
  app.add_option("--n", n, "Sample size in the Monte Carlo run");
  CLI11_PARSE(app, argc, argv);

  std::printf("threads %d\n", omp_get_max_threads());
  bool ok = true;
  ok &= compare("suite", [&](Execution exec) {
    eifkit::CheckSuiteConfig cfg;
    cfg.n_distributions = distributions;
    return eifkit::report_json(eifkit::run_suite(cfg, exec));
  });
  const eifkit::FactorizedDistribution p = eifkit::random_point_treatment(7);
  ok &= compare("mc_study", [&](Execution exec) {
    return eifkit::study_json(eifkit::mc_study(p, eifkit::TsmSpec{}, n, replications, 11, {}, exec));
  });
  return ok ? 0 : 1;
}
