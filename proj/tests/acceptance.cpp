// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance <config.ini> [output-dir]

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "mhd2d/mhd2d.hpp"

using namespace mhd2d;

namespace {

struct Criterion {
  int number;
  const char* experiment;
  const char* claim;
};

// Tolerances live with each experiment's assertions; the pinned values are
// listed next to the measured ones in summary.csv.
constexpr Criterion kCriteria[] = {
    {1, "identities", "discrete operator identities converge at second order"},
    {2, "mms", "manufactured solution: second order in space, first order in time"},
    {3, "energy_law", "energy decreases without forcing and the discrete defect is O(dt)"},
    {4, "heat_decay", "heat lift decays at twice the first Laplacian eigenvalue"},
    {5, "gronwall", "weak and strong energy bounds hold on every scenario"},
    {6, "continuous_dependence", "trajectories depend quadratically on initial and boundary perturbations"},
    {7, "picard", "magnetic fixed point contracts and the ratio shrinks with dt"},
    {8, "absorbing", "absorbing radii are entered and never left"},
    {9, "tail", "high-mode velocity tail decreases under refinement of the basis"},
    {10, "basis_inequality", "Laplacian bound on the span of Stokes modes is grid stable"},
    {11, "brezis_gallouet", "logarithmic sup-norm bound constant is grid stable"},
    {12, "determinism", "runs and reports are bit-identical for a fixed seed"},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <config.ini> [output-dir]\n";
    return 2;
  }
  const std::filesystem::path out = argc > 2 ? argv[2] : "acceptance_out";

  RunConfig rc;
  try {
    rc = parse_config(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  ExperimentContext ctx;
  ctx.seed = rc.experiment.seed.value_or(0);
  const auto t0 = std::chrono::steady_clock::now();
  ctx.calibration = calibrate({rc.solver.nx, rc.solver.dt, rc.solver.horizon, ctx.seed});
  ctx.calibration.save(out / rc.experiment.calibration);
  std::cout << "calibration (" << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            << " s)\n"
            << ctx.calibration.to_text();

  std::vector<ExperimentReport> reports;
  int failed = 0;
  for (const auto& c : kCriteria) {
    ExperimentReport r;
    std::string detail;
    try {
      r = run_experiment(c.experiment, ctx);
      for (const auto* a : r.failures())
        detail += " [" + a->id + ": " + format_double(a->measured) + " " + to_string(a->bound) + " " +
                  format_double(a->tolerance) + "]";
    } catch (const std::exception& e) {
      r.id = c.experiment;
      r.check("completed", "experiment ran to completion", 0.0, Bound::at_least, 1.0);
      detail = std::string(" [error: ") + e.what() + "]";
    }
    const bool pass = r.pass();
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.number << " (" << c.experiment << "): " << c.claim
              << detail << '\n'
              << std::flush;
    atomic_write(out / (std::string(c.experiment) + ".csv"), r.table.csv());
    reports.push_back(std::move(r));
  }
  atomic_write(out / "summary.csv", summary_csv(reports));
  std::cout << (std::size(kCriteria) - failed) << "/" << std::size(kCriteria)
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
