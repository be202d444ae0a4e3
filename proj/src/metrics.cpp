#include "aquah/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "aquah/common.hpp"
#include "aquah/error.hpp"

namespace aquah {

namespace {

struct Valid {
  std::vector<double> obs, sim;
};

Valid valid_pairs(const PairedSeries& p) {
  Valid v;
  for (std::size_t i = 0; i < p.obs.size(); ++i)
    if (std::isfinite(p.obs[i]) && std::isfinite(p.sim[i])) {
      v.obs.push_back(p.obs[i]);
      v.sim.push_back(p.sim[i]);
    }
  return v;
}

Valid require_pairs(const PairedSeries& p, std::size_t min, const char* metric) {
  Valid v = valid_pairs(p);
  if (v.obs.size() < min)
    throw UndefinedMetricError(std::string(metric) + " needs at least " + std::to_string(min) +
                               " valid pairs, found " + std::to_string(v.obs.size()));
  return v;
}

double mean(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Sum of squared deviations from the mean.
double ss(const std::vector<double>& x, double m) {
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s;
}

template <class F>
std::optional<double> maybe(F f) {
  try {
    return f();
  } catch (const UndefinedMetricError&) {
    return std::nullopt;
  }
}

}  // namespace

PairedSeries::PairedSeries(std::vector<double> o, std::vector<double> s) : obs(std::move(o)), sim(std::move(s)) {
  if (obs.size() != sim.size())
    throw ShapeError("observed and simulated series differ in length (" + std::to_string(obs.size()) +
                     " vs " + std::to_string(sim.size()) + ")");
}

std::size_t PairedSeries::valid_count() const { return valid_pairs(*this).obs.size(); }

double nse(const PairedSeries& p) {
  const Valid v = require_pairs(p, 2, "NSE");
  const double denom = ss(v.obs, mean(v.obs));
  if (denom == 0.0) throw UndefinedMetricError("NSE undefined for constant observations");
  double num = 0.0;
  for (std::size_t i = 0; i < v.obs.size(); ++i) num += (v.obs[i] - v.sim[i]) * (v.obs[i] - v.sim[i]);
  return 1.0 - num / denom;
}

double bias_mean(const PairedSeries& p) {
  const Valid v = require_pairs(p, 1, "BIAS");
  double s = 0.0;
  for (std::size_t i = 0; i < v.obs.size(); ++i) s += v.sim[i] - v.obs[i];
  return s / static_cast<double>(v.obs.size());
}

double bias_percent(const PairedSeries& p) {
  const Valid v = require_pairs(p, 1, "BIAS%");
  double diff = 0.0, total = 0.0;
  for (std::size_t i = 0; i < v.obs.size(); ++i) {
    diff += v.sim[i] - v.obs[i];
    total += v.obs[i];
  }
  if (total == 0.0) throw UndefinedMetricError("percent bias undefined when observations sum to 0");
  return 100.0 * diff / total;
}

double rmse(const PairedSeries& p) {
  const Valid v = require_pairs(p, 1, "RMSE");
  double s = 0.0;
  for (std::size_t i = 0; i < v.obs.size(); ++i) s += (v.sim[i] - v.obs[i]) * (v.sim[i] - v.obs[i]);
  return std::sqrt(s / static_cast<double>(v.obs.size()));
}

double cc(const PairedSeries& p) {
  const Valid v = require_pairs(p, 2, "CC");
  const double mo = mean(v.obs), ms = mean(v.sim);
  const double so = ss(v.obs, mo), s_s = ss(v.sim, ms);
  if (so == 0.0 || s_s == 0.0) throw UndefinedMetricError("CC undefined for a constant series");
  double cov = 0.0;
  for (std::size_t i = 0; i < v.obs.size(); ++i) cov += (v.sim[i] - ms) * (v.obs[i] - mo);
  return std::clamp(cov / std::sqrt(s_s * so), -1.0, 1.0);
}

double kge(const PairedSeries& p) {
  const Valid v = require_pairs(p, 2, "KGE");
  const double mo = mean(v.obs), ms = mean(v.sim);
  const double so = ss(v.obs, mo), s_s = ss(v.sim, ms);
  if (mo == 0.0) throw UndefinedMetricError("KGE undefined for zero mean observations");
  if (so == 0.0) throw UndefinedMetricError("KGE undefined for constant observations");
  double r = 0.0;
  if (s_s > 0.0) {
    double cov = 0.0;
    for (std::size_t i = 0; i < v.obs.size(); ++i) cov += (v.sim[i] - ms) * (v.obs[i] - mo);
    r = std::clamp(cov / std::sqrt(s_s * so), -1.0, 1.0);
  }
  // Both deviations share the 1/T factor, which cancels in the ratio.
  const double alpha = std::sqrt(s_s) / std::sqrt(so);
  const double beta = ms / mo;
  return 1.0 - std::sqrt((r - 1) * (r - 1) + (alpha - 1) * (alpha - 1) + (beta - 1) * (beta - 1));
}

MetricBundle compute_metrics(const PairedSeries& p) {
  MetricBundle m;
  m.valid_pairs = p.valid_count();
  m.nse = maybe([&] { return nse(p); });
  m.kge = maybe([&] { return kge(p); });
  m.cc = maybe([&] { return cc(p); });
  m.rmse = maybe([&] { return rmse(p); });
  m.bias_mean = maybe([&] { return bias_mean(p); });
  m.bias_percent = maybe([&] { return bias_percent(p); });
  return m;
}

namespace {

std::string show(const std::optional<double>& v) { return v ? text::fixed(*v, 6) : "undefined"; }

}  // namespace

std::string MetricBundle::to_key_values() const {
  return "valid_pairs=" + std::to_string(valid_pairs) + "\nnse=" + show(nse) + "\nkge=" + show(kge) +
         "\ncc=" + show(cc) + "\nrmse_m3s=" + show(rmse) + "\nbias_mean_m3s=" + show(bias_mean) +
         "\nbias_percent=" + show(bias_percent) + "\n";
}

std::string MetricBundle::to_csv() const {
  std::string out = "metric,value\n";
  out += "valid_pairs," + std::to_string(valid_pairs) + "\n";
  out += "nse," + show(nse) + "\nkge," + show(kge) + "\ncc," + show(cc) + "\nrmse_m3s," + show(rmse) +
         "\nbias_mean_m3s," + show(bias_mean) + "\nbias_percent," + show(bias_percent) + "\n";
  return out;
}

}  // namespace aquah
