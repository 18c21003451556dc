#pragma once

#include <cstdint>
#include <vector>

#include "hones/driver.hpp"

namespace hones {

struct SequenceSummary {
  Index steps = 0;
  double support_mean = 0.0;
  /// Population standard deviation.
  double support_std = 0.0;
  Index support_min = 0;
  Index support_max = 0;
  double mean_k_t = 0.0;
  /// Fraction of steps with e_t = 0.
  double e_zero_fraction = 0.0;
  double e_q99 = 0.0;
  double e_q999 = 0.0;
  Index e_max = 0;
  double max_kkt_residual = 0.0;
  Index total_rebuilds = 0;
  std::uint64_t total_mults = 0;
  std::uint64_t total_maintenance_mults = 0;
  /// Steps where polish ran.
  Index polished_steps = 0;
  /// Steps whose tally exceeds the complexity bound.
  Index bound_violations = 0;
  /// Steps with k_t < |S_t delta S_{t-1}|.
  Index lower_bound_violations = 0;
  std::int64_t total_wall_ns = 0;
  std::int64_t total_a_update_ns = 0;
  Index epoch = 250;
  /// Cumulative wall time at the end of each epoch (last may be partial).
  std::vector<std::int64_t> epoch_cumulative_wall_ns;
};

/// Nearest-rank quantile: the ceil(q * N)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double q);

SequenceSummary summarize(const std::vector<StepReport>& reports, Index epoch = 250);

}  // namespace hones
