#include "hones/state.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace hones {

ColumnStore::ColumnStore(Index n, MLayout layout)
    : n_(n), layout_(layout), slot_(static_cast<std::size_t>(n), -1) {
  if (layout_ == MLayout::dense) dense_ = Mat::Zero(n, n);
}

void ColumnStore::activate(Index j) {
  auto& slot = slot_[static_cast<std::size_t>(j)];
  if (slot >= 0) return;
  if (layout_ == MLayout::dense) {
    slot = j;
    dense_.col(j).setZero();
    return;
  }
  if (free_.empty()) {
    pool_.emplace_back(Vec::Zero(n_));
    slot = static_cast<Index>(pool_.size()) - 1;
  } else {
    slot = free_.back();
    free_.pop_back();
    pool_[static_cast<std::size_t>(slot)].setZero();
  }
}

void ColumnStore::deactivate(Index j) {
  auto& slot = slot_[static_cast<std::size_t>(j)];
  if (slot < 0) return;
  if (layout_ == MLayout::dense)
    dense_.col(j).setZero();
  else
    free_.push_back(slot);
  slot = -1;
}

void ColumnStore::clear() {
  for (Index j = 0; j < n_; ++j) deactivate(j);
}

double* ColumnStore::col(Index j) {
  const Index slot = slot_[static_cast<std::size_t>(j)];
  return layout_ == MLayout::dense ? dense_.col(j).data()
                                   : pool_[static_cast<std::size_t>(slot)].data();
}

const double* ColumnStore::col(Index j) const {
  const Index slot = slot_[static_cast<std::size_t>(j)];
  return layout_ == MLayout::dense ? dense_.col(j).data()
                                   : pool_[static_cast<std::size_t>(slot)].data();
}

Mat ColumnStore::to_dense() const {
  if (layout_ == MLayout::dense) return dense_;
  Mat out = Mat::Zero(n_, n_);
  for (Index j = 0; j < n_; ++j)
    if (active(j)) out.col(j) = Eigen::Map<const Vec>(col(j), n_);
  return out;
}

std::vector<Index> ColumnStore::active_columns() const {
  std::vector<Index> out;
  for (Index j = 0; j < n_; ++j)
    if (active(j)) out.push_back(j);
  return out;
}

std::vector<const double*> column_ptrs(const ColumnStore& store, const Support& s) {
  std::vector<const double*> out;
  out.reserve(static_cast<std::size_t>(s.size()));
  for (Index j : s) out.push_back(store.col(j));
  return out;
}

std::vector<double*> column_ptrs(ColumnStore& store, const Support& s) {
  std::vector<double*> out;
  out.reserve(static_cast<std::size_t>(s.size()));
  for (Index j : s) out.push_back(store.col(j));
  return out;
}

std::vector<const double*> column_ptrs(const Mat& a, const Support& s) {
  std::vector<const double*> out;
  out.reserve(static_cast<std::size_t>(s.size()));
  for (Index j : s) out.push_back(a.col(j).data());
  return out;
}

Par1 init_par1(const MatrixView& a, const Support& s, MLayout layout, double condition_cap) {
  const Index n = a.dim();
  if (s.dim() != n) throw DimensionMismatch("support does not match A");
  if (s.empty()) throw EmptySupport("Par1 needs a non-empty support");

  Eigen::LLT<Mat> llt(a.block(s));
  if (llt.info() != Eigen::Success) throw SingularSubmatrix("Cholesky of A_SS failed");
  if (llt.rcond() * condition_cap < 1.0) throw SingularSubmatrix("A_SS condition estimate exceeds cap");
  const Index k = s.size();
  const Mat inv = llt.solve(Mat::Identity(k, k));
  Mat cols = -(a.columns(s) * inv);
  for (Index r = 0; r < k; ++r) cols.row(s[static_cast<std::size_t>(r)]) = inv.row(r);

  Par1 p{ColumnStore(n, layout), Vec::Ones(n), 0.0};
  for (Index b = 0; b < k; ++b) {
    const Index j = s[static_cast<std::size_t>(b)];
    p.m.activate(j);
    Eigen::Map<Vec>(p.m.col(j), n) = cols.col(b);
    p.eta_tilde(j) = 0.0;
  }
  const std::vector<double> ones(static_cast<std::size_t>(k), 1.0);
  const auto ptrs = column_ptrs(p.m, s);
  kernels::serial::combine_columns(ptrs, ones, p.eta_tilde.data(), n);
  for (Index j : s) p.d += p.eta_tilde(j);
  return p;
}

Par1 init_par1(const Problem& problem, const Support& s, MLayout layout) {
  return init_par1(problem.view(), s, layout);
}

Par2 direct_update_par2(const Support& s, const Par1& par1, const Vec& c, const Vec& g,
                        Counters* counters, const kernels::ExecPolicy& policy) {
  const Index n = g.size();
  Par2 p{g, 0.0, 0.0, 0.0};
  std::vector<double> coeff;
  coeff.reserve(static_cast<std::size_t>(s.size()));
  for (Index j : s) {
    p.eta(j) = 0.0;
    coeff.push_back(g(j));
  }
  kernels::combine_columns(column_ptrs(par1.m, s), coeff, p.eta.data(), n, policy);
  for (Index j : s) {
    p.dg += p.eta(j);
    p.dgg += p.eta(j) * g(j);
    p.dgc -= p.eta(j) * c(j);
  }
  count(counters, Op::direct_par2, static_cast<std::uint64_t>(n * s.size() + 2 * s.size()));
  return p;
}

Par3 direct_update_par3(const Support& s, const Par1& par1, const Vec& l, Counters* counters,
                        const kernels::ExecPolicy& policy) {
  const Index n = l.size();
  Vec acc = l;
  std::vector<double> coeff;
  coeff.reserve(static_cast<std::size_t>(s.size()));
  for (Index j : s) {
    acc(j) = 0.0;
    coeff.push_back(l(j));
  }
  kernels::combine_columns(column_ptrs(par1.m, s), coeff, acc.data(), n, policy);
  Par3 p{-acc, 0.0};
  for (Index j : s) p.dl += p.xi(j);
  count(counters, Op::direct_par3, static_cast<std::uint64_t>(n * s.size()));
  return p;
}

namespace {

double rel_dev(const Vec& stored, const Vec& fresh) {
  if (stored.size() != fresh.size()) return kInf;
  if (fresh.size() == 0) return 0.0;
  const double scale = std::max(1.0, fresh.cwiseAbs().maxCoeff());
  const double dev = (stored - fresh).cwiseAbs().maxCoeff();
  return std::isfinite(dev) ? dev / scale : kInf;
}

double rel_dev(double stored, double fresh) {
  const double dev = std::abs(stored - fresh);
  return std::isfinite(dev) ? dev / std::max(1.0, std::abs(fresh)) : kInf;
}

}  // namespace

double validate_state(const MatrixView& a, const Support& s, const Par1& par1,
                      const Par2Check* par2, const Par3Check* par3) {
  const Index n = a.dim();
  if (par1.m.dim() != n) return kInf;
  for (Index j = 0; j < n; ++j)
    if (par1.m.active(j) != s.contains(j)) return kInf;

  const Par1 fresh = init_par1(a, s, MLayout::dense, kInf);
  double dev = 0.0;
  double mscale = 1.0;
  double mdiff = 0.0;
  for (Index j : s) {
    const Eigen::Map<const Vec> stored(par1.m.col(j), n);
    const Eigen::Map<const Vec> ref(fresh.m.col(j), n);
    mscale = std::max(mscale, ref.cwiseAbs().maxCoeff());
    mdiff = std::max(mdiff, (stored - ref).cwiseAbs().maxCoeff());
  }
  dev = std::isfinite(mdiff) ? mdiff / mscale : kInf;
  dev = std::max(dev, rel_dev(par1.eta_tilde, fresh.eta_tilde));
  dev = std::max(dev, rel_dev(par1.d, fresh.d));

  if (par2 != nullptr) {
    const Par2 ref = direct_update_par2(s, fresh, par2->c, par2->g);
    dev = std::max(dev, rel_dev(par2->par2.eta, ref.eta));
    dev = std::max(dev, rel_dev(par2->par2.dg, ref.dg));
    dev = std::max(dev, rel_dev(par2->par2.dgg, ref.dgg));
    dev = std::max(dev, rel_dev(par2->par2.dgc, ref.dgc));
  }
  if (par3 != nullptr) {
    const Par3 ref = direct_update_par3(s, fresh, par3->l);
    dev = std::max(dev, rel_dev(par3->par3.xi, ref.xi));
    dev = std::max(dev, rel_dev(par3->par3.dl, ref.dl));
  }
  return dev;
}

double validate_state(const Problem& problem, const Support& s, const Par1& par1,
                      const Par2Check* par2, const Par3Check* par3) {
  return validate_state(problem.view(), s, par1, par2, par3);
}

double kappa_estimate(const MatrixView& a, const Support& s, const Par1& par1) {
  double mnorm = 0.0;
  double anorm = 0.0;
  for (Index j : s) {
    double mcol = 0.0;
    double acol = 0.0;
    for (Index i : s) {
      mcol += std::abs(par1.m.entry(i, j));
      acol += std::abs(a(i, j));
    }
    mnorm = std::max(mnorm, mcol);
    anorm = std::max(anorm, acol);
  }
  return std::max(1.0, mnorm * anorm);
}

namespace binio {

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_vec(std::ostream& out, const Vec& v) {
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}

namespace {
void read_exact(std::istream& in, unsigned char* b, std::size_t count) {
  in.read(reinterpret_cast<char*>(b), static_cast<std::streamsize>(count));
  if (in.gcount() != static_cast<std::streamsize>(count)) throw ParseError("truncated binary stream", 0, 0);
}
}  // namespace

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  read_exact(in, b, 4);
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  read_exact(in, b, 8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

Vec get_vec(std::istream& in, Index expected_size) {
  const auto size = static_cast<Index>(get_u64(in));
  if (expected_size >= 0 && size != expected_size && size != 0)
    throw ParseError("vector length mismatch in binary stream", 0, 0);
  if (size < 0 || size > (Index{1} << 32)) throw ParseError("implausible vector length", 0, 0);
  Vec v(size);
  for (Index i = 0; i < size; ++i) v(i) = get_f64(in);
  return v;
}

}  // namespace binio

namespace {
constexpr char kSnapshotMagic[8] = {'H', 'O', 'N', 'E', 'S', 'S', 'N', 'P'};
constexpr std::uint32_t kSnapshotVersion = 1;
}  // namespace

void write_snapshot(std::ostream& out, const StateSnapshot& snap) {
  using namespace binio;
  const Quadruple& q = snap.quadruple;
  const Index n = q.dim();
  out.write(kSnapshotMagic, 8);
  put_u32(out, kSnapshotVersion);
  put_u64(out, static_cast<std::uint64_t>(n));
  put_u32(out, static_cast<std::uint32_t>(snap.par1.m.layout()));
  put_u64(out, static_cast<std::uint64_t>(q.support.size()));
  for (Index j : q.support) put_u64(out, static_cast<std::uint64_t>(j));
  put_f64(out, q.mu0);
  put_vec(out, q.v);
  const auto d_hi = static_cast<double>(snap.par1.d);
  put_f64(out, d_hi);
  put_f64(out, static_cast<double>(snap.par1.d - d_hi));
  put_vec(out, snap.par1.eta_tilde);
  for (Index j : q.support)
    for (Index i = 0; i < n; ++i) put_f64(out, snap.par1.m.col(j)[i]);
  put_f64(out, snap.par2.dg);
  put_f64(out, snap.par2.dgg);
  put_f64(out, snap.par2.dgc);
  put_vec(out, snap.par2.eta);
  put_f64(out, snap.par3.dl);
  put_vec(out, snap.par3.xi);
  if (!out) throw Error("snapshot write failed");
}

StateSnapshot read_snapshot(std::istream& in) {
  using namespace binio;
  char magic[8];
  in.read(magic, 8);
  if (in.gcount() != 8 || std::memcmp(magic, kSnapshotMagic, 8) != 0)
    throw ParseError("not a state snapshot", 0, 0);
  const std::uint32_t version = get_u32(in);
  if (version != kSnapshotVersion) throw ParseError("unsupported snapshot version", 0, 0);
  const auto n = static_cast<Index>(get_u64(in));
  const auto layout = static_cast<MLayout>(get_u32(in));
  if (layout != MLayout::dense && layout != MLayout::compressed)
    throw ParseError("unknown M layout", 0, 0);
  const auto k = static_cast<Index>(get_u64(in));
  if (n < 1 || k < 0 || k > n) throw ParseError("implausible snapshot dimensions", 0, 0);
  std::vector<Index> idx;
  for (Index b = 0; b < k; ++b) idx.push_back(static_cast<Index>(get_u64(in)));

  StateSnapshot snap;
  snap.quadruple.support = Support(n, idx);
  snap.quadruple.mu0 = get_f64(in);
  snap.quadruple.v = get_vec(in, n);
  snap.par1.m = ColumnStore(n, layout);
  snap.par1.d = get_f64(in);
  snap.par1.d += get_f64(in);
  snap.par1.eta_tilde = get_vec(in, n);
  for (Index j : snap.quadruple.support) {
    snap.par1.m.activate(j);
    for (Index i = 0; i < n; ++i) snap.par1.m.col(j)[i] = get_f64(in);
  }
  snap.par2.dg = get_f64(in);
  snap.par2.dgg = get_f64(in);
  snap.par2.dgc = get_f64(in);
  snap.par2.eta = get_vec(in, n);
  snap.par3.dl = get_f64(in);
  snap.par3.xi = get_vec(in, n);
  return snap;
}

}  // namespace hones
