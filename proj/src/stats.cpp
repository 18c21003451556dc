#include "hones/stats.hpp"

#include <algorithm>
#include <cmath>

namespace hones {

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

SequenceSummary summarize(const std::vector<StepReport>& reports, Index epoch) {
  SequenceSummary s;
  s.epoch = epoch;
  s.steps = static_cast<Index>(reports.size());
  if (reports.empty()) return s;

  std::vector<double> e_values;
  e_values.reserve(reports.size());
  double sum = 0.0;
  double sum_kt = 0.0;
  Index zeros = 0;
  s.support_min = reports.front().support_size;
  s.support_max = reports.front().support_size;
  std::int64_t cumulative = 0;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const StepReport& r = reports[k];
    sum += static_cast<double>(r.support_size);
    sum_kt += static_cast<double>(r.k_t);
    s.support_min = std::min(s.support_min, r.support_size);
    s.support_max = std::max(s.support_max, r.support_size);
    if (r.e_t == 0) ++zeros;
    e_values.push_back(static_cast<double>(r.e_t));
    s.e_max = std::max(s.e_max, r.e_t);
    s.max_kkt_residual = std::max(s.max_kkt_residual, r.kkt_residual);
    s.total_rebuilds += r.rebuilds;
    s.total_mults += r.mult_count;
    s.total_maintenance_mults += r.maintenance_mults;
    if (r.maintenance_mults > 0) ++s.polished_steps;
    if (r.mult_count > r.mult_bound) ++s.bound_violations;
    if (r.k_t < r.support_change) ++s.lower_bound_violations;
    s.total_wall_ns += r.wall_ns;
    s.total_a_update_ns += r.a_update_ns;
    cumulative += r.wall_ns;
    const bool epoch_end = epoch > 0 && (static_cast<Index>(k) + 1) % epoch == 0;
    if (epoch_end || k + 1 == reports.size()) s.epoch_cumulative_wall_ns.push_back(cumulative);
  }
  const auto n = static_cast<double>(reports.size());
  s.support_mean = sum / n;
  s.mean_k_t = sum_kt / n;
  double var = 0.0;
  for (const StepReport& r : reports) {
    const double d = static_cast<double>(r.support_size) - s.support_mean;
    var += d * d;
  }
  s.support_std = std::sqrt(var / n);
  s.e_zero_fraction = static_cast<double>(zeros) / n;
  s.e_q99 = nearest_rank_quantile(e_values, 0.99);
  s.e_q999 = nearest_rank_quantile(e_values, 0.999);
  return s;
}

}  // namespace hones
