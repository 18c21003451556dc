// hones: sequential simplex-QP benchmark harness.
//
//   hones run-synthetic --n 100 --c-factor 0.1 --steps 1000 --seed 7 --solver hones
//   hones run-ons --prices prices.csv --solver pg-warm
//   hones run-synthetic --grid grid.json --jobs 4 --out-dir out
//   hones verify [--n 12 --exhaustive] [--inject-fault m-corruption]

#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace hones;
using namespace hones::cli;

struct RunFlags {
  std::string solver = "hones";
  std::string twin;
  std::string counters = "on";
  std::string m_layout = "dense";
  std::string grid;
  int jobs = 1;
  bool eager_a = false;
  std::string polish = "on";
  double polish_tol = 1e-9;
};

void add_run_flags(CLI::App* cmd, RunOptions& o, RunFlags& f, FlowKind kind) {
  cmd->add_option("--solver", f.solver, "hones | pg-warm | oracle")
      ->check(CLI::IsMember({"hones", "pg-warm", "oracle"}))
      ->capture_default_str();
  cmd->add_option("--twin", f.twin, "second solver on the same stream; writes x_agreement.csv")
      ->check(CLI::IsMember({"hones", "pg-warm", "oracle"}));
  cmd->add_option("--n", o.flow.n, "assets (ignored with --prices)")->capture_default_str();
  cmd->add_option("--steps", o.flow.steps, "T")->capture_default_str();
  cmd->add_option("--seed", o.flow.seed)->capture_default_str();
  cmd->add_option("--epsilon", o.flow.epsilon, "A_0 = epsilon I")->capture_default_str();
  cmd->add_option("--epoch", o.epoch, "steps per timing epoch")->capture_default_str();
  cmd->add_option("--rebuild-every", o.session.rebuild_every, "0 disables")->capture_default_str();
  cmd->add_option("--tol", o.session.tol, "KKT residual tolerance")->capture_default_str();
  cmd->add_option("--cycle-cap", o.cycle_cap, "events per leg; 0 means 10 n")->capture_default_str();
  cmd->add_option("--counters", f.counters)->check(CLI::IsMember({"on", "off"}))->capture_default_str();
  cmd->add_option("--m-layout", f.m_layout)->check(CLI::IsMember({"dense", "compressed"}))->capture_default_str();
  cmd->add_flag("--eager-a", f.eager_a, "update every column of A every step");
  cmd->add_option("--polish", f.polish, "refinement sweep when |M_SS|_1 * residual > --polish-tol")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_option("--polish-tol", f.polish_tol)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--threads", o.threads, "OpenMP threads for the kernels; 0 keeps the default");
  cmd->add_option("--out-dir", o.out_dir)->capture_default_str();
  cmd->add_option("--grid", f.grid, "JSON array of scenario overrides");
  cmd->add_option("--jobs", f.jobs, "grid worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  if (kind == FlowKind::synthetic)
    cmd->add_option("--c-factor", o.flow.c_factor)->capture_default_str();
  else
    cmd->add_option("--prices", o.flow.prices, "wide price CSV; generated prices when omitted");
  if (kind == FlowKind::markowitz) cmd->add_option("--lambda", o.flow.lambda, "weight on the mean")->capture_default_str();
}

int run_command(RunOptions o, const RunFlags& f, FlowKind kind) {
  o.flow.kind = kind;
  o.solver = parse_solver(f.solver);
  if (!f.twin.empty()) o.twin = parse_solver(f.twin);
  o.session.counters = f.counters == "on";
  o.session.m_layout = f.m_layout == "dense" ? MLayout::dense : MLayout::compressed;
  o.session.lazy_a = !f.eager_a;
  o.session.polish = f.polish == "on";
  o.session.polish_tol = f.polish_tol;
  if (!f.grid.empty()) {
    std::ifstream in(f.grid);
    if (!in) throw std::runtime_error("cannot read grid file " + f.grid);
    std::stringstream text;
    text << in.rdbuf();
    const int failed = run_grid(o, text.str(), f.jobs, std::cerr);
    std::cout << "grid summary: " << (o.out_dir / "grid_summary.csv").string() << '\n';
    return failed == 0 ? 0 : 1;
  }
  run_and_write(o);
  std::cout << "wrote " << o.out_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential simplex-QP solver benchmark harness"};
  app.require_subcommand(1);

  RunOptions synthetic, ons, markowitz;
  RunFlags synthetic_flags, ons_flags, markowitz_flags;
  CLI::App* cmd_synthetic = app.add_subcommand("run-synthetic", "synthetic standard-QP flow");
  CLI::App* cmd_ons = app.add_subcommand("run-ons", "online Newton step projections");
  CLI::App* cmd_markowitz = app.add_subcommand("run-markowitz", "mean-variance flow");
  add_run_flags(cmd_synthetic, synthetic, synthetic_flags, FlowKind::synthetic);
  add_run_flags(cmd_ons, ons, ons_flags, FlowKind::ons);
  add_run_flags(cmd_markowitz, markowitz, markowitz_flags, FlowKind::markowitz);

  VerifyOptions verify;
  Index seed_count = 30;
  std::uint64_t seed_start = 0;
  Index verify_n = 0;
  CLI::App* cmd_verify = app.add_subcommand("verify", "property suite on seeded small instances");
  cmd_verify->add_option("--seeds", seed_count, "number of seeded runs")->capture_default_str();
  cmd_verify->add_option("--seed-start", seed_start)->capture_default_str();
  cmd_verify->add_option("--n", verify_n, "fixed size (default cycles 5, 10, 30)");
  cmd_verify->add_option("--steps", verify.steps)->capture_default_str();
  cmd_verify->add_flag("--exhaustive", verify.exhaustive, "enumeration oracle (needs --n <= 20)");
  cmd_verify->add_option("--inject-fault", verify.inject_fault, "m-corruption")
      ->check(CLI::IsMember({"m-corruption"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_synthetic->parsed()) return run_command(synthetic, synthetic_flags, FlowKind::synthetic);
    if (cmd_ons->parsed()) return run_command(ons, ons_flags, FlowKind::ons);
    if (cmd_markowitz->parsed()) return run_command(markowitz, markowitz_flags, FlowKind::markowitz);
    if (cmd_verify->parsed()) {
      verify.seeds.resize(static_cast<std::size_t>(seed_count));
      std::iota(verify.seeds.begin(), verify.seeds.end(), seed_start);
      if (verify_n > 0) verify.n = verify_n;
      return run_verify(verify, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
