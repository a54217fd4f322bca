#include "bilayer/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace bilayer {

namespace {

struct Stat {
  double mean = 0, se = 0;
};

// mean and its standard error
Stat mean_stat(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double m = 0;
  for (double v : x) m += v;
  m /= n;
  double s2 = 0;
  for (double v : x) s2 += (v - m) * (v - m);
  s2 /= (n - 1);
  return {m, std::sqrt(s2 / n)};
}

// unbiased sample variance with a fourth-moment standard error
Stat variance_stat(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double m = 0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  const double var = m2 * n / (n - 1);
  const double se2 = (m4 - (n - 3) / (n - 1) * m2 * m2) / n;
  return {var, se2 > 0 ? std::sqrt(se2) : 0.0};
}

}  // namespace

ObservableSeries measure(const EnsembleSeries& series, double v_avg) {
  const std::size_t R = series.trajectories;
  if (R < 2) throw ParameterError("statistics need at least two trajectories");
  if (series.n_a != series.n_b)
    throw ParameterError("pair counting expects equally occupied layers");
  const double n_occ = static_cast<double>(series.n_a);
  ObservableSeries out;
  out.meta.n_occ = series.n_a;
  out.meta.v_avg = v_avg;
  out.meta.trajectories = R;
  out.meta.dt = series.dt_used;
  out.points.resize(series.times.size());

  std::vector<double> w(R);
  for (std::size_t s = 0; s < series.times.size(); ++s) {
    ObservablePoint& p = out.points[s];
    p.t = series.times[s];
    p.tau = n_occ * v_avg * p.t;
    auto col = [&](int c) {
      for (std::size_t r = 0; r < R; ++r) w[r] = series.sums(s, r)[c];
    };
    auto combo = [&](int c1, double f1, int c2, double f2) {
      for (std::size_t r = 0; r < R; ++r) {
        const double* q = series.sums(s, r);
        w[r] = f1 * q[c1] + f2 * q[c2];
      }
    };

    col(2);
    const Stat saz = mean_stat(w);
    col(5);
    const Stat sbz = mean_stat(w);
    p.s_a_z = saz.mean;
    p.s_b_z = sbz.mean;
    combo(2, 1.0, 5, -1.0);
    const Stat dz = mean_stat(w);
    p.n_pair = dz.mean + n_occ;
    p.n_pair_err = dz.se;

    combo(0, 1.0, 4, 1.0);  // S_A^x + S_B^y
    const Stat vm1 = variance_stat(w);
    combo(1, 1.0, 3, -1.0);  // S_A^y - S_B^x
    const Stat vm2 = variance_stat(w);
    combo(0, 1.0, 4, -1.0);  // S_A^x - S_B^y
    const Stat vp1 = variance_stat(w);
    combo(1, 1.0, 3, 1.0);  // S_A^y + S_B^x
    const Stat vp2 = variance_stat(w);
    p.var_minus_1 = vm1.mean;
    p.var_minus_1_err = vm1.se;
    p.var_minus_2 = vm2.mean;
    p.var_minus_2_err = vm2.se;
    p.var_plus_1 = vp1.mean;
    p.var_plus_1_err = vp1.se;
    p.var_plus_2 = vp2.mean;
    p.var_plus_2_err = vp2.se;
    p.var_minus = 0.5 * (vm1.mean + vm2.mean);
    p.var_minus_err = 0.5 * std::sqrt(vm1.se * vm1.se + vm2.se * vm2.se);
    p.var_plus = 0.5 * (vp1.mean + vp2.mean);
    p.var_plus_err = 0.5 * std::sqrt(vp1.se * vp1.se + vp2.se * vp2.se);

    for (std::size_t r = 0; r < R; ++r) {
      const double* q = series.sums(s, r);
      w[r] = q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3] + q[4] * q[4] + q[5] * q[5];
    }
    const Stat len = mean_stat(w);
    p.spin_length = len.mean;
    p.spin_length_err = len.se;
  }
  return out;
}

ObservableSeries measure(const std::vector<SpinEnsemble>& snapshots, const SiteSet& sites,
                         double v_avg) {
  if (snapshots.empty()) throw ParameterError("no snapshots to measure");
  const std::size_t n_a = sites.occupied_count(Layer::A);
  const std::size_t n_b = sites.occupied_count(Layer::B);
  EnsembleSeries series;
  series.trajectories = snapshots.front().trajectories;
  series.n_a = n_a;
  series.n_b = n_b;
  series.layer_sums.assign(snapshots.size() * series.trajectories * 6, 0.0);
  for (std::size_t s = 0; s < snapshots.size(); ++s) {
    const SpinEnsemble& e = snapshots[s];
    if (e.sites != n_a + n_b || e.trajectories != series.trajectories)
      throw ParameterError("snapshot does not match site set");
    series.times.push_back(e.time);
    const std::size_t R = e.trajectories;
    for (std::size_t r = 0; r < R; ++r) {
      double* dst = series.layer_sums.data() + (s * R + r) * 6;
      for (std::size_t i = 0; i < e.sites; ++i) {
        const int off = i < n_a ? 0 : 3;
        dst[off + 0] += e.sx[i * R + r];
        dst[off + 1] += e.sy[i * R + r];
        dst[off + 2] += e.sz[i * R + r];
      }
    }
  }
  return measure(series, v_avg);
}

MinVariance min_variance(const ObservableSeries& series) {
  const auto& pts = series.points;
  if (pts.size() < 3) throw ParameterError("min_variance needs at least 3 time points");
  std::vector<double> logv(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) logv[i] = std::log(pts[i].var_minus);
  // 3-point moving average, truncated at the ends
  std::size_t best = 0;
  double best_val = 1e300;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = std::min(pts.size() - 1, i + 1);
    double acc = 0;
    for (std::size_t k = lo; k <= hi; ++k) acc += logv[k];
    acc /= static_cast<double>(hi - lo + 1);
    if (acc < best_val) {
      best_val = acc;
      best = i;
    }
  }
  MinVariance mv;
  mv.index = best;
  mv.t = pts[best].t;
  mv.tau = pts[best].tau;
  mv.value = pts[best].var_minus;
  mv.err = pts[best].var_minus_err;
  mv.boundary = best == 0 || best + 1 == pts.size();
  return mv;
}

ScalingFit scaling_fit(std::span<const ScalingPoint> points) {
  if (points.size() < 3) throw ParameterError("scaling fit needs at least 3 sizes");
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (!(p.n > 0) || !(p.var_min > 0)) throw ParameterError("scaling fit needs positive N, var");
    x.push_back(std::log(p.n));
    y.push_back(std::log(p.var_min / p.n));
  }
  const double n = static_cast<double>(x.size());
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= n;
  ym /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (sxx == 0) throw ParameterError("degenerate abscissae in scaling fit");
  const double slope = sxy / sxx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (ym + slope * (x[i] - xm));
    ssr += r * r;
  }
  ScalingFit fit;
  fit.nu = -slope;
  fit.n_points = x.size();
  fit.intercept = ym - slope * xm;
  fit.nu_err = x.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return fit;
}

double collapse_metric(std::span<const ObservableSeries> series, std::span<const double> factors) {
  if (series.size() < 2) throw ParameterError("collapse metric needs at least two series");
  if (factors.size() != series.size()) throw ParameterError("one rescale factor per series");
  double lo = 0, hi = 1e300;
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (series[k].points.empty()) throw ParameterError("empty series in collapse metric");
    lo = std::max(lo, series[k].points.front().t * factors[k]);
    hi = std::min(hi, series[k].points.back().t * factors[k]);
  }
  if (!(hi > lo)) throw ParameterError("rescaled time ranges do not overlap");

  // log Var- normalized by the exact t=0 value N/2, with its relative error
  auto interp = [&](const ObservableSeries& s, double factor, double tau, double& logv,
                    double& sigma) {
    const auto& pts = s.points;
    const double t = tau / factor;
    std::size_t j = 1;
    while (j + 1 < pts.size() && pts[j].t < t) ++j;
    const auto& p0 = pts[j - 1];
    const auto& p1 = pts[j];
    const double u = p1.t > p0.t ? (t - p0.t) / (p1.t - p0.t) : 0.0;
    const double norm = static_cast<double>(s.meta.n_occ) / 2.0;
    const double l0 = std::log(p0.var_minus / norm), l1 = std::log(p1.var_minus / norm);
    const double s0 = p0.var_minus_err / p0.var_minus, s1 = p1.var_minus_err / p1.var_minus;
    logv = (1 - u) * l0 + u * l1;
    sigma = (1 - u) * s0 + u * s1;
  };

  constexpr int kGrid = 129;
  double metric = 0;
  for (int g = 0; g < kGrid; ++g) {
    const double tau = lo + (hi - lo) * g / (kGrid - 1);
    double vmax = -1e300, vmin = 1e300, smax = 0, smin = 0;
    for (std::size_t k = 0; k < series.size(); ++k) {
      double l, s;
      interp(series[k], factors[k], tau, l, s);
      if (l > vmax) {
        vmax = l;
        smax = s;
      }
      if (l < vmin) {
        vmin = l;
        smin = s;
      }
    }
    const double spread = vmax - vmin;
    if (spread <= 0) continue;
    const double comb = std::sqrt(smax * smax + smin * smin);
    metric = std::max(metric, comb > 0 ? spread / comb : 1e300);
  }
  return metric;
}

}  // namespace bilayer
