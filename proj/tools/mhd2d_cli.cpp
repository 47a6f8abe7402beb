#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "mhd2d/mhd2d.hpp"

namespace fs = std::filesystem;
using namespace mhd2d;

namespace {

enum Exit : int { ok = 0, bad_input = 2, solver_failure = 3, assertion_failure = 4 };

struct Common {
  std::string config;
  std::string output_dir = "out";
  int threads = 1;
  bool verbose = false;
};

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void log(const Common& c, const std::string& s) {
  if (c.verbose) std::cerr << s << '\n';
}

fs::path config_dir(const Common& c) { return fs::absolute(c.config).parent_path(); }

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path out(p);
  return out.is_relative() ? base / out : out;
}

// Loads a cached basis from the output directory when one with the same key
// exists, otherwise builds it.
std::shared_ptr<const SpectralBasis> stokes_basis(const Common& c, const SolverConfig& cfg) {
  if (!cfg.truncation) return nullptr;
  const Grid g = cfg.grid();
  const fs::path cache = fs::path(c.output_dir) / basis_cache_name(BasisKind::stokes, g, *cfg.truncation);
  if (fs::exists(cache)) {
    log(c, "basis: loading " + cache.string());
    return std::make_shared<const SpectralBasis>(decode_basis(read_file(cache), BasisKind::stokes, g, *cfg.truncation));
  }
  log(c, "basis: building Stokes basis with " + std::to_string(*cfg.truncation) + " modes");
  return std::make_shared<const SpectralBasis>(build_stokes_basis(g, *cfg.truncation));
}

int run(const Common& c) {
  const Clock clock;
  const RunConfig rc = parse_config(c.config);
  const SolverConfig& cfg = rc.solver;
  const fs::path base = config_dir(c), out(c.output_dir);
  const BoundaryTrace trace = build_trace(rc, base);

  Integrator in(cfg, trace, stokes_basis(c, cfg));
  std::optional<SimState> start;
  if (rc.initial.checkpoint) {
    start = read_checkpoint(resolve(base, *rc.initial.checkpoint), cfg);
    log(c, "resuming from t = " + format_double(start->t));
  } else {
    auto [u0, b0] = initial_fields(initial_preset(rc), trace, rc.initial.seed.value_or(0), rc.initial.amplitude);
    start = in.initial_state(std::move(u0), std::move(b0));
  }

  Recorder rec(trace, cfg.dt, rc.outputs.strong, start->b);
  const int every = rc.outputs.checkpoint_every;
  SimState last = in.advance(std::move(*start), [&](const SimState& s, const StepReport* rep) {
    const auto& row = rec.record(s);
    const long k = in.step_index(s.t);
    if (rep && c.verbose)
      log(c, "step " + std::to_string(k) + " t=" + format_double(s.t) + " E=" +
                 format_double(row.u_L2_sq + row.b_L2_sq) + " picard=" + std::to_string(rep->picard_iterations));
    if (rep && every > 0 && k % every == 0)
      write_checkpoint(out / ("checkpoint_" + std::to_string(k) + ".ckpt"), s, cfg);
  });
  write_checkpoint(out / "final.ckpt", last, cfg);
  atomic_write(out / rc.outputs.ledger, rec.ledger().csv());
  std::cout << "run: " << cfg.steps() << " steps to t = " << format_double(last.t) << ", ledger "
            << (out / rc.outputs.ledger).string() << ", runtime " << clock.seconds() << " s\n";
  return Exit::ok;
}

CalibrationStore load_calibration(const Common& c, const RunConfig& rc) {
  const fs::path p = resolve(c.output_dir, rc.experiment.calibration);
  if (!fs::exists(p))
    throw InputError("calibration file " + p.string() + " not found; run the calibrate subcommand first");
  return CalibrationStore::load(p);
}

int experiment(const Common& c, const std::string& override_id) {
  const Clock clock;
  const RunConfig rc = parse_config(c.config);
  const std::string id = override_id.empty() ? rc.experiment.id.value_or("") : override_id;
  if (id.empty()) throw InputError("experiment.id: required (or pass --id)");
  const ExperimentSpec& spec = find_experiment(id);

  ExperimentContext ctx;
  ctx.seed = rc.experiment.seed.value_or(0);
  ctx.params = override_id.empty() || override_id == rc.experiment.id ? rc.experiment.params : ParamMap{};
  if (c.verbose) ctx.progress = [](const std::string& s) { std::cerr << s << '\n'; };
  if (spec.needs_calibration) ctx.calibration = load_calibration(c, rc);

  const ExperimentReport r = run_experiment(id, ctx);
  const fs::path out(c.output_dir);
  atomic_write(out / (id + ".csv"), r.table.csv());
  atomic_write(out / "summary.csv", summary_csv({r}));
  for (const auto& a : r.assertions)
    std::cout << (a.pass() ? "PASS " : "FAIL ") << id << '.' << a.id << ": measured " << format_double(a.measured)
              << ' ' << to_string(a.bound) << ' ' << format_double(a.tolerance) << '\n';
  std::cout << "experiment " << id << ": " << (r.pass() ? "pass" : "FAIL") << ", runtime " << clock.seconds()
            << " s\n";
  return r.pass() ? Exit::ok : Exit::assertion_failure;
}

int calibrate_cmd(const Common& c) {
  const Clock clock;
  const RunConfig rc = parse_config(c.config);
  CalibrationSettings s;
  s.nx = rc.solver.nx;
  s.dt = rc.solver.dt;
  s.horizon = rc.solver.horizon;
  s.seed = rc.experiment.seed.value_or(0);
  const CalibrationStore store = calibrate(s);
  const fs::path p = resolve(c.output_dir, rc.experiment.calibration);
  store.save(p);
  std::cout << store.to_text() << "calibration written to " << p.string() << ", runtime " << clock.seconds()
            << " s\n";
  return Exit::ok;
}

int basis_cmd(const Common& c) {
  const Clock clock;
  const RunConfig rc = parse_config(c.config);
  const Grid g = rc.solver.grid();
  auto write = [&](BasisKind kind, int count) {
    const SpectralBasis b = build_basis(kind, g, count);
    const fs::path p = fs::path(c.output_dir) / basis_cache_name(kind, g, count);
    atomic_write(p, encode_basis(b));
    std::cout << to_string(kind) << ": " << count << " modes, first eigenvalue " << format_double(b.value(0))
              << ", written to " << p.string() << '\n';
  };
  if (!rc.solver.truncation && rc.diagnostic_modes == 0)
    throw InputError("galerkin: set n and/or m to choose which basis to build");
  if (rc.solver.truncation) write(BasisKind::stokes, *rc.solver.truncation);
  if (rc.diagnostic_modes > 0) write(BasisKind::dirichlet_laplacian, rc.diagnostic_modes);
  std::cout << "runtime " << clock.seconds() << " s\n";
  return Exit::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D MHD solver with boundary lifting and estimate checkers"};
  app.require_subcommand(1);
  Common common;
  std::string id;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", common.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", common.output_dir, "directory for all outputs");
    sub->add_option("-j,--threads", common.threads, "worker threads for Eigen")->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", common.verbose, "progress on stderr");
  };
  auto* run_sub = app.add_subcommand("run", "integrate the configured scenario and write the energy ledger");
  auto* exp_sub = app.add_subcommand("experiment", "run one verification experiment and write its tables");
  auto* cal_sub = app.add_subcommand("calibrate", "measure checker constants on the reference scenario");
  auto* basis_sub = app.add_subcommand("basis", "build and cache Stokes / Laplacian eigenbases");
  for (auto* s : {run_sub, exp_sub, cal_sub, basis_sub}) add_common(s);
  exp_sub->add_option("--id", id, "experiment id, overriding experiment.id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : Exit::bad_input;
  }

  Eigen::setNbThreads(common.threads);
  try {
    if (run_sub->parsed()) return run(common);
    if (exp_sub->parsed()) return experiment(common, id);
    if (cal_sub->parsed()) return calibrate_cmd(common);
    return basis_cmd(common);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return Exit::bad_input;
  } catch (const ShapeError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return Exit::bad_input;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return Exit::solver_failure;
  }
}
