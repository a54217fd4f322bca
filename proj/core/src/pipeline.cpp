#include "bilayer/pipeline.hpp"

#include <cmath>

#include "bilayer/rng.hpp"

namespace bilayer {

void TimeGrid::validate() const {
  const bool has_times = !times.empty();
  const bool has_tau = tau_points > 0 || tau_max > 0;
  if (has_times == has_tau)
    throw ParameterError("time grid needs exactly one of explicit times or a tau grid");
  if (has_times) {
    if (times.front() < 0) throw ParameterError("times must start at or after 0");
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1])) throw ParameterError("times must be strictly increasing");
  } else {
    if (!(tau_max > 0) || tau_points < 2)
      throw ParameterError("tau grid needs tau_max > 0 and at least 2 points");
  }
}

std::vector<double> TimeGrid::resolve(double n_v_avg) const {
  validate();
  if (!times.empty()) return times;
  if (!(n_v_avg > 0)) throw ParameterError("tau grid needs N V_avg > 0");
  std::vector<double> out(tau_points);
  for (int k = 0; k < tau_points; ++k)
    out[k] = tau_max * k / double(tau_points - 1) / n_v_avg;
  return out;
}

namespace {

struct Stat {
  double mean = 0, err = 0;
};

struct BuiltPoint {
  SiteSet sites;
  EffectiveModel model;
};

BuiltPoint build_point(const RunSpec& spec) {
  BuiltPoint b;
  b.sites = build_sites(spec.lattice);
  const CouplingMatrix couplings = compute_couplings(b.sites, spec.lattice.alpha);
  b.model = build_model(spec.kind, couplings, spec.model);
  return b;
}

void fill_meta(SeriesMeta& meta, const RunSpec& spec, const EffectiveModel& model) {
  meta.kind = spec.kind;
  meta.side = spec.lattice.side;
  meta.a_lat = spec.lattice.a_lat;
  meta.a_z = spec.lattice.a_z;
  meta.alpha = spec.lattice.alpha;
  meta.filling = spec.lattice.filling;
  meta.n_occ = model.n_a;
  meta.v_avg = model.v_avg;
  meta.stagger_h = model.stagger_h;
  meta.trajectories = spec.trajectories;
  meta.lattice_seed = spec.lattice.seed;
  meta.dtwa_seed = spec.dtwa_seed;
}

}  // namespace

RunResult run_point(const RunSpec& spec) {
  BuiltPoint b = build_point(spec);
  IntegratorConfig cfg = spec.integrator;
  cfg.sample_times = spec.grid.resolve(double(b.model.n_a) * b.model.v_avg);
  const SpinEnsemble initial = sample_initial(b.sites, spec.trajectories, spec.dtwa_seed);
  const EnsembleSeries ens = integrate(initial, b.model, cfg);
  RunResult res;
  res.series = measure(ens, b.model.v_avg);
  fill_meta(res.series.meta, spec, b.model);
  res.series.meta.dt = ens.dt_used;
  res.v_avg = b.model.v_avg;
  res.stagger_h = b.model.stagger_h;
  res.n_occ = b.model.n_a;
  res.dt = ens.dt_used;
  return res;
}

ObservableSeries disorder_average(const RunSpec& spec, int n_realizations,
                                  std::uint64_t disorder_seed) {
  if (n_realizations < 1) throw ParameterError("need at least one disorder realization");
  if (spec.lattice.filling >= 1.0) {
    RunResult res = run_point(spec);  // no positional disorder at unit filling
    res.series.meta.realizations = 1;
    return res.series;
  }

  // realization seeds, plus couplings to fix the shared time grid
  std::vector<RunSpec> specs;
  double v_avg_mean = 0;
  std::size_t n_occ = 0;
  for (int r = 0; r < n_realizations; ++r) {
    RunSpec s = spec;
    s.lattice.seed = mix_seed(disorder_seed, 2 * static_cast<std::uint64_t>(r));
    s.dtwa_seed = mix_seed(disorder_seed, 2 * static_cast<std::uint64_t>(r) + 1);
    const SiteSet sites = build_sites(s.lattice);
    const CouplingMatrix c = compute_couplings(sites, s.lattice.alpha);
    v_avg_mean += average_inter_coupling(c);
    n_occ = c.n_a;
    specs.push_back(std::move(s));
  }
  v_avg_mean /= n_realizations;

  const std::vector<double> times = spec.grid.resolve(double(n_occ) * v_avg_mean);
  std::vector<ObservableSeries> runs;
  for (auto& s : specs) {
    s.grid.times = times;
    s.grid.tau_max = 0;
    s.grid.tau_points = 0;
    runs.push_back(run_point(s).series);
  }

  ObservableSeries out = runs.front();
  out.meta.realizations = n_realizations;
  out.meta.lattice_seed = disorder_seed;
  out.meta.v_avg = v_avg_mean;
  const double inv_n = 1.0 / n_realizations;
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    auto pick = [&](auto member) {
      double mean = 0;
      for (const auto& run : runs) mean += run.points[k].*member;
      mean *= inv_n;
      double spread = 0;
      for (const auto& run : runs) {
        const double d = run.points[k].*member - mean;
        spread += d * d;
      }
      const double se =
          n_realizations > 1 ? std::sqrt(spread / (n_realizations - 1) / n_realizations) : 0.0;
      return Stat{mean, se};
    };
    ObservablePoint& p = out.points[k];
    auto set = [&](double ObservablePoint::*val, double ObservablePoint::*err) {
      const Stat s = pick(val);
      p.*val = s.mean;
      p.*err = s.err;
    };
    set(&ObservablePoint::n_pair, &ObservablePoint::n_pair_err);
    set(&ObservablePoint::var_minus, &ObservablePoint::var_minus_err);
    set(&ObservablePoint::var_plus, &ObservablePoint::var_plus_err);
    set(&ObservablePoint::var_minus_1, &ObservablePoint::var_minus_1_err);
    set(&ObservablePoint::var_minus_2, &ObservablePoint::var_minus_2_err);
    set(&ObservablePoint::var_plus_1, &ObservablePoint::var_plus_1_err);
    set(&ObservablePoint::var_plus_2, &ObservablePoint::var_plus_2_err);
    set(&ObservablePoint::spin_length, &ObservablePoint::spin_length_err);
    double saz = 0, sbz = 0;
    for (const auto& run : runs) {
      saz += run.points[k].s_a_z;
      sbz += run.points[k].s_b_z;
    }
    p.s_a_z = saz * inv_n;
    p.s_b_z = sbz * inv_n;
    p.tau = double(n_occ) * v_avg_mean * p.t;
  }
  return out;
}

ObservableSeries oracle_series(const RunSpec& spec, OracleKind kind) {
  BuiltPoint b = build_point(spec);
  const double n_v = double(b.model.n_a) * b.model.v_avg;
  const std::vector<double> times = spec.grid.resolve(n_v);
  if (kind == OracleKind::Auto)
    kind = spec.lattice.alpha == 0.0 ? OracleKind::Collective
           : b.model.size() <= 14    ? OracleKind::BruteForce
                                     : OracleKind::Tms;
  ObservableSeries out;
  switch (kind) {
    case OracleKind::Collective: {
      if (spec.lattice.alpha != 0.0)
        throw CapacityError("collective oracle requires alpha = 0");
      const auto h =
          build_collective_hamiltonian(spec.kind, static_cast<int>(b.model.n_a), b.model.v_avg);
      out = collective_series(h, times);
      break;
    }
    case OracleKind::BruteForce:
      out = exact_small_evolve(b.model, times);
      break;
    case OracleKind::Tms: {
      TmsPrediction tms{static_cast<int>(b.model.n_a), b.model.v_avg};
      for (double t : times) {
        ObservablePoint p;
        p.t = t;
        p.tau = n_v * t;
        p.n_pair = tms.n_pair(t);
        p.var_minus = p.var_minus_1 = p.var_minus_2 = tms.var_minus(t);
        p.var_plus = p.var_plus_1 = p.var_plus_2 = tms.var_plus(t);
        p.spin_length = 2.0 * (b.model.n_a / 2.0) * (b.model.n_a / 2.0 + 1.0);
        p.s_a_z = -(double(b.model.n_a) - p.n_pair) / 2.0;
        p.s_b_z = -p.s_a_z;
        out.points.push_back(p);
      }
      out.meta.exact = true;
      out.meta.label = "tms";
      break;
    }
    default:
      throw ParameterError("unresolved oracle kind");
  }
  const std::string label = out.meta.label;
  const bool exact = out.meta.exact;
  fill_meta(out.meta, spec, b.model);
  out.meta.label = label;
  out.meta.exact = exact;
  return out;
}

}  // namespace bilayer
