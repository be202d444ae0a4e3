#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aquah {

/// Observed/simulated discharge pairs; a NaN in either series marks the pair
/// missing. Every metric uses only jointly valid pairs.
struct PairedSeries {
  std::vector<double> obs;
  std::vector<double> sim;

  PairedSeries() = default;
  /// Throws ShapeError when the lengths differ.
  PairedSeries(std::vector<double> obs, std::vector<double> sim);

  std::size_t valid_count() const;
};

/// All metrics throw UndefinedMetricError when their preconditions fail.
double nse(const PairedSeries& p);
/// Mean error (1/T) sum(sim - obs).
double bias_mean(const PairedSeries& p);
/// 100 * sum(sim - obs) / sum(obs).
double bias_percent(const PairedSeries& p);
double rmse(const PairedSeries& p);
double cc(const PairedSeries& p);
/// 1 - sqrt((CC-1)^2 + (sd_sim/sd_obs - 1)^2 + (mean_sim/mean_obs - 1)^2)
double kge(const PairedSeries& p);

/// Metrics that could be evaluated; undefined ones are nullopt.
struct MetricBundle {
  std::size_t valid_pairs = 0;
  std::optional<double> nse;
  std::optional<double> kge;
  std::optional<double> cc;
  std::optional<double> rmse;
  std::optional<double> bias_mean;
  std::optional<double> bias_percent;

  /// key=value lines, "undefined" for missing values.
  std::string to_key_values() const;
  /// metric,value CSV.
  std::string to_csv() const;
};

MetricBundle compute_metrics(const PairedSeries& p);

}  // namespace aquah
