#pragma once

// Cached intermediate variables of the path solver.
//
//   Par1 = {M, eta~, D}, M_SS = A_SS^-1, M_{S^c S} = -A_{S^c S} A_SS^-1,
//          M_{., S^c} = 0, eta~ = [0; 1_{S^c}] + M 1, D = 1^T eta~_S.
//   Par2 = {eta, D_g, D_gg, D_gc}, eta = [0; g_{S^c}] + M g,
//          D_g = 1^T eta_S, D_gg = eta_S^T g_S, D_gc = -eta_S^T c_S.
//   Par3 = {xi, D_l}, xi = -([0; l_{S^c}] + M l), D_l = 1^T xi_S.

#include <iosfwd>
#include <vector>

#include "hones/counters.hpp"
#include "hones/kernels.hpp"
#include "hones/kkt.hpp"

namespace hones {

enum class MLayout : std::uint8_t { dense, compressed };

/// Columns of M. Only columns of the current support are active; every
/// other column is structurally zero. The compressed layout keeps active
/// columns in a slot pool (n x |S| storage).
class ColumnStore {
 public:
  ColumnStore() = default;
  ColumnStore(Index n, MLayout layout);

  Index dim() const { return n_; }
  MLayout layout() const { return layout_; }
  bool active(Index j) const { return slot_[static_cast<std::size_t>(j)] >= 0; }

  /// Zero-filled on activation.
  void activate(Index j);
  void deactivate(Index j);
  void clear();

  double* col(Index j);
  const double* col(Index j) const;
  double entry(Index i, Index j) const { return active(j) ? col(j)[i] : 0.0; }

  Mat to_dense() const;
  /// Active column indices, increasing.
  std::vector<Index> active_columns() const;

 private:
  Index n_ = 0;
  MLayout layout_ = MLayout::dense;
  std::vector<Index> slot_;  // -1 when inactive
  Mat dense_;
  std::vector<Vec> pool_;
  std::vector<Index> free_;
};

/// Pointers to the columns of `store` indexed by `s`, in increasing order.
std::vector<const double*> column_ptrs(const ColumnStore& store, const Support& s);
std::vector<double*> column_ptrs(ColumnStore& store, const Support& s);
/// Same for the columns of a dense matrix.
std::vector<const double*> column_ptrs(const Mat& a, const Support& s);

struct Par1 {
  ColumnStore m;
  Vec eta_tilde;
  /// Extended precision: expand/shrink pass through D_{S+j}, which can
  /// exceed D_S by the inverse of a tiny Schur pivot.
  long double d = 0.0;
};

struct Par2 {
  Vec eta;
  double dg = 0.0;
  double dgg = 0.0;
  double dgc = 0.0;
};

struct Par3 {
  Vec xi;
  double dl = 0.0;
};

/// Direct factorization of A_SS. Throws SingularSubmatrix.
Par1 init_par1(const MatrixView& a, const Support& s, MLayout layout = MLayout::dense,
               double condition_cap = 1e12);
Par1 init_par1(const Problem& problem, const Support& s, MLayout layout = MLayout::dense);

Par2 direct_update_par2(const Support& s, const Par1& par1, const Vec& c, const Vec& g,
                        Counters* counters = nullptr,
                        const kernels::ExecPolicy& policy = {});

Par3 direct_update_par3(const Support& s, const Par1& par1, const Vec& l,
                        Counters* counters = nullptr,
                        const kernels::ExecPolicy& policy = {});

struct Par2Check {
  const Par2& par2;
  const Vec& c;
  const Vec& g;
};

struct Par3Check {
  const Par3& par3;
  const Vec& l;
};

/// Largest relative deviation, max |stored - fresh| / max(1, |fresh|_inf)
/// per field, against values recomputed by fresh factorization. Returns
/// infinity when M has an active column outside S.
double validate_state(const MatrixView& a, const Support& s, const Par1& par1,
                      const Par2Check* par2 = nullptr, const Par3Check* par3 = nullptr);
double validate_state(const Problem& problem, const Support& s, const Par1& par1,
                      const Par2Check* par2 = nullptr, const Par3Check* par3 = nullptr);

/// Condition proxy |M_SS|_1 * |A_SS|_1 from the stored M.
double kappa_estimate(const MatrixView& a, const Support& s, const Par1& par1);

/// Versioned little-endian binary snapshot of (S, Par1, Par2, Par3, quadruple).
struct StateSnapshot {
  Quadruple quadruple;
  Par1 par1;
  Par2 par2;
  Par3 par3;
};

void write_snapshot(std::ostream& out, const StateSnapshot& snap);
StateSnapshot read_snapshot(std::istream& in);

namespace binio {

void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
void put_vec(std::ostream& out, const Vec& v);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
double get_f64(std::istream& in);
Vec get_vec(std::istream& in, Index expected_size = -1);

}  // namespace binio

}  // namespace hones
