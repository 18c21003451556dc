#pragma once

// Problem flows: an initial (A0, c0) plus a stream of (g_t, c_t) with
// A_t = A_{t-1} + g_t g_t^T.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hones/types.hpp"

namespace hones {

/// SplitMix64 over a 64-bit counter; normals by Box-Muller. The output
/// sequence depends only on the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  Vec normal_vec(Index n);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct FlowStep {
  Vec g;
  Vec c;
};

class Flow {
 public:
  virtual ~Flow() = default;
  virtual Index dim() const = 0;
  virtual Mat initial_matrix() const = 0;
  virtual Vec initial_c() const = 0;
  /// Next (g_t, c_t). `x_prev` is the solver output of the previous step.
  virtual FlowStep next(const Vec& x_prev) = 0;
  /// Number of steps available; -1 when unbounded.
  virtual Index length() const { return -1; }
};

/// Standard QP flow: minimize 1/2 (x - y)^T A_t (x - y), A_0 = eps I,
/// g_t ~ N(0, I), y = c_factor * y0 with y0 ~ N(0, I); in linear form
/// c_t = A_t y, so c_t - c_{t-1} = g_t (g_t^T y).
class SyntheticFlow : public Flow {
 public:
  SyntheticFlow(Index n, double epsilon, double c_factor, std::uint64_t seed);

  Index dim() const override { return n_; }
  Mat initial_matrix() const override;
  Vec initial_c() const override { return epsilon_ * y_; }
  FlowStep next(const Vec& x_prev) override;
  const Vec& y() const { return y_; }

 private:
  Index n_;
  double epsilon_;
  Rng rng_;
  Vec y_;
  Vec c_;
};

struct PriceSeries {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  /// rows x assets, strictly positive.
  Mat prices;
  /// Rows dropped for missing or non-positive cells.
  std::size_t dropped_rows = 0;

  Index rows() const { return prices.rows(); }
  Index assets() const { return prices.cols(); }
};

/// Online Newton Step projections: A_0 = I, c_0 = 0,
/// g_t = gamma_t / (x_prev^T gamma_t) with gamma_t the price ratios,
/// c_t = c_{t-1} + g_t / 4.
class OnsFlow : public Flow {
 public:
  explicit OnsFlow(PriceSeries prices);

  Index dim() const override { return prices_.assets(); }
  Mat initial_matrix() const override;
  Vec initial_c() const override { return Vec::Zero(dim()); }
  FlowStep next(const Vec& x_prev) override;
  Index length() const override { return prices_.rows() - 1; }
  /// The x used by the most recent next() call.
  const Vec& last_feedback() const { return last_x_; }

 private:
  PriceSeries prices_;
  Index row_ = 0;
  Vec c_;
  Vec last_x_;
};

/// Mean-variance flow: A_t = eps I + t Sigma_t where Sigma_t is the sample
/// covariance about the running mean, so g_t = sqrt((t-1)/t)(w_t - mu_{t-1}).
/// c_t = lambda t mu_t (identically zero for lambda = 0).
class MarkowitzFlow : public Flow {
 public:
  MarkowitzFlow(Mat log_returns, double epsilon, double lambda = 0.0);

  Index dim() const override { return returns_.cols(); }
  Mat initial_matrix() const override;
  Vec initial_c() const override { return Vec::Zero(dim()); }
  FlowStep next(const Vec& x_prev) override;
  Index length() const override { return returns_.rows(); }
  const Vec& mean() const { return mean_; }

 private:
  Mat returns_;
  double epsilon_;
  double lambda_;
  Index row_ = 0;
  Vec mean_;
};

enum class FlowKind : std::uint8_t { ons, markowitz, synthetic };

std::string_view flow_kind_name(FlowKind kind);
FlowKind parse_flow_kind(std::string_view name);

struct FlowConfig {
  FlowKind kind = FlowKind::synthetic;
  Index n = 100;
  Index steps = 1000;
  double epsilon = 1e-4;
  double c_factor = 0.1;
  std::uint64_t seed = 0;
  /// Markowitz risk-aversion weight on the mean; 0 gives c_t = 0.
  double lambda = 0.0;
  /// Price CSV for ons / markowitz; empty means generated prices.
  std::string prices;

  /// Throws InvalidProblem.
  void validate() const;
};

/// JSON object with the field names above; `kind` is a string.
std::string flow_config_to_json(const FlowConfig& config);
/// Missing fields keep their defaults. Throws ParseError / InvalidProblem.
FlowConfig flow_config_from_json(const std::string& text);

/// Builds the flow; generated prices use `steps + 1` rows.
std::unique_ptr<Flow> make_flow(const FlowConfig& config);

/// Wide CSV: header `date,ticker_1,...,ticker_n`, one row per date.
/// Rows with a missing, non-finite or non-positive price are dropped.
/// Throws ParseError (with location) and EmptySeries.
PriceSeries parse_prices(std::istream& in);
PriceSeries load_prices(const std::string& path);
void write_prices(std::ostream& out, const PriceSeries& series);
void write_prices(const std::string& path, const PriceSeries& series);

/// Geometric Brownian motion prices, deterministic per seed.
PriceSeries synthetic_prices(Index assets, Index rows, std::uint64_t seed);

/// log(p_t / p_{t-1}), (rows - 1) x assets.
Mat log_returns(const PriceSeries& series);

}  // namespace hones
