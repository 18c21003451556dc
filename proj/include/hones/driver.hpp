#pragma once

// Sequential outer loop. Each step moves from (A, c) to (A + g g^T, c_new)
// along the matrix leg and then the vector leg. Only columns of A indexed by
// S* (every index that has ever been in the support) are kept current; other
// columns are caught up from the stored history of g when they enter.

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "hones/counters.hpp"
#include "hones/kernels.hpp"
#include "hones/kkt.hpp"
#include "hones/path_common.hpp"
#include "hones/state.hpp"

namespace hones {

struct SolverConfig {
  /// Full Par1 refactorization every this many steps; 0 disables.
  Index rebuild_every = 1000;
  /// KKT residual above which the state and quadruple are refreshed.
  double tol = 1e-8;
  /// Events per leg attempt; 0 means 10 n.
  Index cycle_cap = 0;
  bool counters = true;
  /// Update only S* columns of A (false: every column, every step).
  bool lazy_a = true;
  /// When the forward-error estimate |M_SS|_1 * residual exceeds polish_tol,
  /// run one refinement sweep of (x_S, mu0, v_{S^c}) using M_SS as the
  /// approximate inverse.
  bool polish = true;
  double polish_tol = 1e-9;
  MLayout m_layout = MLayout::dense;
  kernels::ExecPolicy policy;
  OracleOptions oracle;
};

struct StepReport {
  Index t = 0;
  Index k_a = 0;
  Index k_c = 0;
  Index k_t = 0;
  /// (k_t - |S_t delta S_{t-1}|) / 2.
  Index e_t = 0;
  /// |S_t delta S_{t-1}|.
  Index support_change = 0;
  Index support_size = 0;
  /// Largest support size along the step's path.
  Index s_max = 0;
  Index s_star = 0;
  double kkt_residual = 0.0;
  std::int64_t wall_ns = 0;
  std::int64_t a_update_ns = 0;
  std::uint64_t mult_count = 0;
  std::uint64_t mult_bound = 0;
  /// Multiplications spent in polish (not part of mult_count).
  std::uint64_t maintenance_mults = 0;
  Index rebuilds = 0;
  /// Solver iterations (baselines only).
  Index iterations = 0;
};

/// Per-step multiplication budget: n s* + n s (3 k_A + 2 k_c + 2)
/// + n (12 k_A + 6 k_c + 3) + 100 (k_t + 1).
std::uint64_t complexity_bound(Index n, Index s, Index s_star, Index k_a, Index k_c);

/// Common interface of the sequential solvers driven by the harness.
class SequentialSolver {
 public:
  virtual ~SequentialSolver() = default;
  virtual StepReport step(const Vec& g, const Vec& c_new) = 0;
  virtual Vec x() const = 0;
  virtual Index dim() const = 0;
};

class SolverSession : public SequentialSolver {
 public:
  using EventObserver = std::function<void(const SolverSession&, const PathEvent&)>;

  /// Solves the initial problem with the oracle. Throws InvalidProblem.
  SolverSession(Mat a0, Vec c0, SolverConfig config = {});

  StepReport step(const Vec& g, const Vec& c_new) override;
  Vec x() const override { return q_.x(); }
  Index dim() const override { return q_.dim(); }

  /// Refactorizes Par1 for the current matrix and recomputes Par2 / Par3
  /// for the step in progress. The quadruple is untouched.
  void rebuild();

  Index t() const { return t_; }
  const SolverConfig& config() const { return config_; }
  const Quadruple& quadruple() const { return q_; }
  const Par1& par1() const { return par1_; }
  const Par2& par2() const { return par2_; }
  const Par3& par3() const { return par3_; }
  const Support& s_star() const { return s_star_; }
  const Vec& c() const { return c_; }
  /// Stored matrix; columns outside S* may be stale.
  const Mat& a_stored() const { return a_; }
  /// Fully caught-up copy of the current matrix.
  Mat a_current() const;
  const std::vector<PathEvent>& last_events() const { return events_; }
  const Counters& counters() const { return counters_; }

  /// validate_state for the position currently being tracked (inside a leg
  /// this is the matrix at the current lambda).
  double validate() const;
  double kappa() const;

  void set_event_observer(EventObserver observer) { observer_ = std::move(observer); }

  /// Write access for fault-injection tests.
  Par1& mutable_par1() { return par1_; }

  void save(std::ostream& out) const;
  static SolverSession load(std::istream& in, SolverConfig config = {});

 private:
  enum class Phase : std::uint8_t { idle, matrix, vector };

  SolverSession() = default;
  void catch_up(Index j);
  void catch_up_all();
  LegContext leg_context();
  void run_matrix_leg(const Vec& g, Index& rebuilds);
  void run_vector_leg(Index& rebuilds);
  void rebuild_at(double lambda);
  /// Re-solves the quadruple on its support (oracle when signs fail).
  void refresh();
  /// Refines the quadruple in place and returns its KKT residual.
  double polish();

  SolverConfig config_;
  Index n_ = 0;
  Index t_ = 0;
  Mat a_;
  Vec c_;
  /// History of g still needed by some stale column; entry k is step
  /// g_base_ + k + 1.
  std::deque<Vec> g_log_;
  std::size_t g_base_ = 0;
  /// Number of history entries already applied to column j.
  std::vector<std::size_t> applied_;
  Support s_star_;
  Quadruple q_;
  Par1 par1_;
  Par2 par2_;
  Par3 par3_;
  Counters counters_;
  std::vector<PathEvent> events_;
  EventObserver observer_;

  Phase phase_ = Phase::idle;
  const Vec* g_cur_ = nullptr;
  Vec l_cur_;
  double lambda_cur_ = 0.0;
  Index s_max_cur_ = 0;
};

struct SequenceEntry {
  Vec x;
  StepReport report;
};

class Flow;

/// Drives `solver` through T steps of `flow`, feeding back each x.
std::vector<SequenceEntry> run_sequence(SequentialSolver& solver, Flow& flow, Index steps);

}  // namespace hones
