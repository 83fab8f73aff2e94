#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triad/errors.hpp"
#include "triad/image.hpp"
#include "triad/parallel.hpp"

namespace triad {

inline constexpr std::array<double, 5> kDeltaThresholds = {1.05, 1.10, 1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25};

inline constexpr std::array<double, 4> kDefaultSweepThresholds = {0.5, 0.16, 0.10, 0.08};

struct DeltaAccuracy {
  double delta = 0.0;
  double percent = 0.0;
};

struct MetricReport {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double log_rmse = 0.0;
  double irmse = 0.0;
  double rmse = 0.0;
  std::vector<DeltaAccuracy> delta_acc;
  std::size_t n_evaluated = 0;
};

namespace detail {

template <typename P, typename G>
bool usable(const Image<P, 1>& pred, const Image<G, 1>& gt, const Mask* mask, std::size_t i) {
  if (mask && !mask->at(i)) return false;
  return std::isfinite(static_cast<double>(pred.at(i))) && std::isfinite(static_cast<double>(gt.at(i)));
}

template <typename P, typename G>
MetricReport evaluate_impl(const Image<P, 1>& pred, const Image<G, 1>& gt, const Mask* mask) {
  require_same_size(pred, gt, "evaluate");
  if (mask) require_same_size(pred, *mask, "evaluate");
  CompensatedSum abs_rel, sq_rel, log_sq, inv_sq, sq;
  std::array<std::size_t, kDeltaThresholds.size()> hits{};
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!usable(pred, gt, mask, i)) continue;
    const double p = pred.at(i);
    const double g = gt.at(i);
    if (!(p > 0.0) || !(g > 0.0)) throw InputError("evaluate: non-positive depth under the mask");
    const double diff = p - g;
    abs_rel.add(std::abs(diff) / g);
    sq_rel.add(diff * diff / g);
    const double dl = std::log(p) - std::log(g);
    log_sq.add(dl * dl);
    const double di = 1.0 / p - 1.0 / g;
    inv_sq.add(di * di);
    sq.add(diff * diff);
    const double ratio = std::max(p / g, g / p);
    for (std::size_t t = 0; t < kDeltaThresholds.size(); ++t) hits[t] += ratio < kDeltaThresholds[t];
    ++n;
  }
  if (n == 0) throw EmptyEvaluation("evaluate: no pixels under the mask");
  const double count = static_cast<double>(n);
  MetricReport r;
  r.n_evaluated = n;
  r.abs_rel = abs_rel.value() / count;
  r.sq_rel = sq_rel.value() / count;
  r.log_rmse = std::sqrt(log_sq.value() / count);
  r.irmse = std::sqrt(inv_sq.value() / count);
  r.rmse = std::sqrt(sq.value() / count);
  for (std::size_t t = 0; t < kDeltaThresholds.size(); ++t) {
    r.delta_acc.push_back({kDeltaThresholds[t], 100.0 * static_cast<double>(hits[t]) / count});
  }
  return r;
}

}  // namespace detail

/// Standard depth metrics over pixels where both maps are finite.
template <typename P, typename G>
MetricReport evaluate(const Image<P, 1>& pred, const Image<G, 1>& gt) {
  return detail::evaluate_impl(pred, gt, nullptr);
}

/// Same, restricted to the pixels set in `mask`.
template <typename P, typename G>
MetricReport evaluate(const Image<P, 1>& pred, const Image<G, 1>& gt, const Mask& mask) {
  return detail::evaluate_impl(pred, gt, &mask);
}

/// Pixels where prediction, uncertainty and ground truth are all finite.
template <typename P, typename S, typename G>
Mask common_support(const Image<P, 1>& pred, const Image<S, 1>& sigma, const Image<G, 1>& gt) {
  require_same_size(pred, gt, "support");
  require_same_size(pred, sigma, "support");
  Mask m(pred.width(), pred.height(), 0);
  for (std::size_t i = 0; i < m.pixel_count(); ++i) {
    m.at(i) = std::isfinite(static_cast<double>(pred.at(i))) && std::isfinite(static_cast<double>(gt.at(i))) &&
              std::isfinite(static_cast<double>(sigma.at(i)));
  }
  return m;
}

struct SweepRow {
  double sigma_threshold = 0.0;
  double coverage_percent = 0.0;
  std::size_t retained = 0;
  std::optional<MetricReport> metrics;  // empty when nothing is retained
};

/// For each threshold t, keeps the pixels with sigma < t and reports coverage
/// against all evaluable pixels together with metrics on the kept ones.
template <typename P, typename S, typename G>
std::vector<SweepRow> uncertainty_sweep(const Image<P, 1>& pred, const Image<S, 1>& sigma,
                                        const Image<G, 1>& gt, std::span<const double> thresholds) {
  const Mask base = common_support(pred, sigma, gt);
  std::size_t base_count = 0;
  for (auto v : base.data()) base_count += v != 0;
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    if (!(t > 0.0)) throw InputError("uncertainty_sweep: thresholds must be positive");
    Mask keep(base.width(), base.height(), 0);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < keep.pixel_count(); ++i) {
      if (base.at(i) && static_cast<double>(sigma.at(i)) < t) {
        keep.at(i) = 1;
        ++kept;
      }
    }
    SweepRow row;
    row.sigma_threshold = t;
    row.retained = kept;
    row.coverage_percent = base_count ? 100.0 * static_cast<double>(kept) / static_cast<double>(base_count) : 0.0;
    if (kept > 0) row.metrics = evaluate(pred, gt, keep);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Mask of the `fraction` of masked pixels with the lowest sigma; ties go to the
/// earlier pixel in row-major order.
template <typename S>
Mask retain_lowest_sigma(const Image<S, 1>& sigma, const Mask& support, double fraction) {
  require_same_size(sigma, support, "retain_lowest_sigma");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InputError("retain_lowest_sigma: fraction not in [0, 1]");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < support.pixel_count(); ++i) {
    if (support.at(i)) idx.push_back(i);
  }
  std::ranges::stable_sort(idx, [&](std::size_t a, std::size_t b) {
    return static_cast<double>(sigma.at(a)) < static_cast<double>(sigma.at(b));
  });
  const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(idx.size()) + 1e-9));
  Mask out(support.width(), support.height(), 0);
  for (std::size_t j = 0; j < keep; ++j) out.at(idx[j]) = 1;
  return out;
}

/// Average ranks (1-based) with ties sharing the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

struct Correlation {
  double rho = 0.0;
  bool defined = true;  // false when either side is constant; rho is then 0
  std::size_t n = 0;
};

/// Spearman rank correlation of two equally long samples.
inline Correlation spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("spearman: sample sizes differ");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = 0.5 * (n + 1.0);
  CompensatedSum cov, va, vb;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov.add(da * db);
    va.add(da * da);
    vb.add(db * db);
  }
  Correlation c;
  c.n = a.size();
  if (va.value() <= 0.0 || vb.value() <= 0.0) {
    c.defined = false;
    return c;
  }
  c.rho = std::clamp(cov.value() / std::sqrt(va.value() * vb.value()), -1.0, 1.0);
  return c;
}

/// Spearman correlation between |pred - gt| and sigma over the masked pixels
/// where all three maps are finite.
template <typename P, typename S, typename G>
Correlation error_uncertainty_correlation(const Image<P, 1>& pred, const Image<S, 1>& sigma,
                                          const Image<G, 1>& gt, const Mask& mask) {
  const Mask support = common_support(pred, sigma, gt);
  require_same_size(support, mask, "error_uncertainty_correlation");
  std::vector<double> err, sig;
  for (std::size_t i = 0; i < support.pixel_count(); ++i) {
    if (!support.at(i) || !mask.at(i)) continue;
    err.push_back(std::abs(static_cast<double>(pred.at(i)) - static_cast<double>(gt.at(i))));
    sig.push_back(static_cast<double>(sigma.at(i)));
  }
  if (err.size() < 10) throw InputError("error_uncertainty_correlation: need at least 10 pixels");
  return spearman(err, sig);
}

template <typename P, typename S, typename G>
Correlation error_uncertainty_correlation(const Image<P, 1>& pred, const Image<S, 1>& sigma,
                                          const Image<G, 1>& gt) {
  return error_uncertainty_correlation(pred, sigma, gt, Mask(pred.width(), pred.height(), 1));
}

// ---------------------------------------------------------------------------
// Report formatting

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string delta_label(double delta) {
  if (delta == kDeltaThresholds[3]) return "1.25^2";
  if (delta == kDeltaThresholds[4]) return "1.25^3";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", delta);
  return buf;
}

}  // namespace detail

/// Human-readable block, one metric per line.
inline std::string format_report(const std::string& name, const MetricReport& r) {
  std::string out = "[" + name + "]\n";
  out += "  n_evaluated  " + std::to_string(r.n_evaluated) + "\n";
  out += "  abs_rel      " + detail::fmt(r.abs_rel) + "\n";
  out += "  sq_rel       " + detail::fmt(r.sq_rel) + "\n";
  out += "  log_rmse     " + detail::fmt(r.log_rmse) + "\n";
  out += "  irmse        " + detail::fmt(r.irmse) + "\n";
  out += "  rmse         " + detail::fmt(r.rmse) + "\n";
  for (const auto& d : r.delta_acc) {
    std::string label = "  delta<" + detail::delta_label(d.delta);
    label.resize(15, ' ');
    out += label + detail::fmt(d.percent) + "\n";
  }
  return out;
}

/// Machine-readable "prefix.key=value" lines.
inline std::string format_report_kv(const std::string& prefix, const MetricReport& r) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += prefix + "." + k + "=" + v + "\n"; };
  kv("n_evaluated", std::to_string(r.n_evaluated));
  kv("abs_rel", detail::fmt(r.abs_rel));
  kv("sq_rel", detail::fmt(r.sq_rel));
  kv("log_rmse", detail::fmt(r.log_rmse));
  kv("irmse", detail::fmt(r.irmse));
  kv("rmse", detail::fmt(r.rmse));
  for (const auto& d : r.delta_acc) kv("delta_" + detail::delta_label(d.delta), detail::fmt(d.percent));
  return out;
}

inline std::string metric_csv_header() {
  std::string h = "abs_rel,sq_rel,log_rmse,irmse,rmse";
  for (double d : kDeltaThresholds) h += ",delta_" + detail::delta_label(d);
  return h + ",n_evaluated";
}

inline std::string metric_csv_fields(const std::optional<MetricReport>& r) {
  if (!r) {
    std::string empty(",,,,");
    for (std::size_t i = 0; i < kDeltaThresholds.size(); ++i) empty += ",";
    return empty + ",0";
  }
  std::string s = detail::fmt(r->abs_rel) + "," + detail::fmt(r->sq_rel) + "," + detail::fmt(r->log_rmse) +
                  "," + detail::fmt(r->irmse) + "," + detail::fmt(r->rmse);
  for (const auto& d : r->delta_acc) s += "," + detail::fmt(d.percent);
  return s + "," + std::to_string(r->n_evaluated);
}

inline std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "sigma_threshold,coverage_percent,retained," + metric_csv_header() + "\n";
  for (const auto& row : rows) {
    out += detail::fmt(row.sigma_threshold) + "," + detail::fmt(row.coverage_percent) + "," +
           std::to_string(row.retained) + "," + metric_csv_fields(row.metrics) + "\n";
  }
  return out;
}

}  // namespace triad
