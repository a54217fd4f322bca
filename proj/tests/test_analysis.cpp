#include <doctest.h>

#include <cmath>
#include <random>

#include "bilayer/analysis.hpp"

using namespace bilayer;

namespace {

// hand-built ensemble series with one time point and given per-trajectory sums
EnsembleSeries tiny_series(const std::vector<std::array<double, 6>>& sums, double t = 0.0) {
  EnsembleSeries s;
  s.times = {t};
  s.trajectories = sums.size();
  s.n_a = s.n_b = 2;
  for (const auto& row : sums)
    for (double v : row) s.layer_sums.push_back(v);
  return s;
}

ObservableSeries synthetic_var_series(const std::vector<double>& taus,
                                      const std::vector<double>& vars, double err_frac,
                                      std::size_t n_occ) {
  ObservableSeries s;
  s.meta.n_occ = n_occ;
  s.meta.v_avg = 1.0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    ObservablePoint p;
    p.t = taus[k] / static_cast<double>(n_occ);
    p.tau = taus[k];
    p.var_minus = vars[k];
    p.var_minus_err = err_frac * vars[k];
    s.points.push_back(p);
  }
  return s;
}

}  // namespace

TEST_CASE("measure statistics") {
  SUBCASE("variance against a hand computation") {
    const EnsembleSeries e = tiny_series({{1.0, 0.0, -1.0, 0.0, 1.0, 1.0},
                                          {-1.0, 0.0, -1.0, 0.0, -1.0, 1.0},
                                          {3.0, 0.0, -1.0, 0.0, 1.0, 1.0},
                                          {1.0, 0.0, -1.0, 0.0, -1.0, 1.0}});
    const ObservableSeries s = measure(e, 1.0);
    // O- variant 1 = SAx + SBy: {2, -2, 4, 0} -> mean 1, var (1+9+9+1)/3
    CHECK(s.points[0].var_minus_1 == doctest::Approx(20.0 / 3.0));
    // n_pair = mean(SAz - SBz) + 2 = (-2) + 2 = 0
    CHECK(s.points[0].n_pair == doctest::Approx(0.0));
    CHECK(s.points[0].s_a_z == doctest::Approx(-1.0));
  }
  SUBCASE("needs two trajectories") {
    CHECK_THROWS_AS(measure(tiny_series({{0, 0, 0, 0, 0, 0}}), 1.0), ParameterError);
  }
  SUBCASE("snapshot overload agrees bit for bit") {
    LatticeSpec spec;
    spec.side = 2;
    spec.a_z = 2.0;
    spec.alpha = 3.0;
    const SiteSet sites = build_sites(spec);
    const EffectiveModel m =
        build_model(ModelKind::FloquetEngineered, compute_couplings(sites, 3.0));
    const SpinEnsemble e0 = sample_initial(sites, 64, 4);
    IntegratorConfig cfg;
    cfg.sample_times = {0.0, 0.2, 0.4};
    cfg.keep_snapshots = true;
    const EnsembleSeries run = integrate(e0, m, cfg);
    const ObservableSeries a = measure(run, m.v_avg);
    const ObservableSeries b = measure(run.snapshots, sites, m.v_avg);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
      CHECK(a.points[k].var_minus == b.points[k].var_minus);
      CHECK(a.points[k].n_pair == b.points[k].n_pair);
      CHECK(a.points[k].spin_length == b.points[k].spin_length);
    }
  }
  SUBCASE("t=0 sampling reproduces the exact moments") {
    LatticeSpec spec;
    spec.side = 5;
    spec.a_z = 2.0;
    const SiteSet sites = build_sites(spec);
    const double n = 25;
    const SpinEnsemble e0 = sample_initial(sites, 20000, 9);
    EnsembleSeries run;
    run.times = {0.0};
    run.trajectories = e0.trajectories;
    run.n_a = run.n_b = 25;
    run.layer_sums.assign(e0.trajectories * 6, 0.0);
    for (std::size_t r = 0; r < e0.trajectories; ++r)
      for (std::size_t i = 0; i < e0.sites; ++i) {
        double* dst = run.layer_sums.data() + r * 6 + (i < 25 ? 0 : 3);
        dst[0] += e0.sx[i * e0.trajectories + r];
        dst[1] += e0.sy[i * e0.trajectories + r];
        dst[2] += e0.sz[i * e0.trajectories + r];
      }
    const ObservableSeries s = measure(run, 1.0);
    const auto& p = s.points[0];
    CHECK(p.n_pair == doctest::Approx(0.0));
    CHECK(p.var_minus == doctest::Approx(n / 2).epsilon(0.05));
    // <S_A^2 + S_B^2> = 2 (N^2/4 + N/2)
    CHECK(p.spin_length == doctest::Approx(2 * (n * n / 4 + n / 2)).epsilon(0.01));
  }
}

TEST_CASE("min_variance") {
  SUBCASE("strictly decreasing series ends on the boundary") {
    std::vector<double> taus, vars;
    for (int k = 0; k <= 20; ++k) {
      taus.push_back(0.2 * k);
      vars.push_back(50.0 * std::exp(-0.2 * k));
    }
    const MinVariance mv = min_variance(synthetic_var_series(taus, vars, 0.01, 100));
    CHECK(mv.boundary);
    CHECK(mv.index == 20);
  }
  SUBCASE("TMS decay with a saturation floor finds the floor") {
    std::vector<double> taus, vars;
    for (int k = 0; k <= 60; ++k) {
      const double tau = 0.1 * k;
      taus.push_back(tau);
      vars.push_back(50.0 * std::exp(-std::min(tau, 3.0)) + 1.5);
    }
    const MinVariance mv = min_variance(synthetic_var_series(taus, vars, 0.01, 100));
    CHECK(!mv.boundary);
    CHECK(mv.tau >= 3.0);
    CHECK(mv.value == doctest::Approx(50.0 * std::exp(-3.0) + 1.5).epsilon(1e-12));
  }
  SUBCASE("log-space parabola vertex") {
    std::vector<double> taus, vars;
    for (int k = 0; k <= 40; ++k) {
      const double tau = 0.1 * k;
      taus.push_back(tau);
      vars.push_back(std::exp(2.0 * (tau - 2.0) * (tau - 2.0)));
    }
    const MinVariance mv = min_variance(synthetic_var_series(taus, vars, 0.01, 100));
    CHECK(mv.tau == doctest::Approx(2.0));
    CHECK(!mv.boundary);
  }
  SUBCASE("invariant under uniform time rescaling") {
    std::vector<double> taus, vars;
    for (int k = 0; k <= 30; ++k) {
      taus.push_back(0.2 * k);
      vars.push_back(5.0 + std::cos(k * 0.7));
    }
    ObservableSeries a = synthetic_var_series(taus, vars, 0.02, 64);
    ObservableSeries b = a;
    for (auto& p : b.points) p.t *= 3.5;
    CHECK(min_variance(a).index == min_variance(b).index);
  }
  SUBCASE("needs at least three points") {
    CHECK_THROWS_AS(min_variance(synthetic_var_series({0, 1}, {2, 1}, 0.1, 4)), ParameterError);
  }
}

TEST_CASE("scaling_fit") {
  SUBCASE("planted exponents recovered exactly") {
    auto planted = [](double nu) {
      std::vector<ScalingPoint> pts;
      for (double n : {16.0, 64.0, 256.0, 1024.0})
        pts.push_back({n, n * 3.0 * std::pow(n, -nu)});  // var_min/N = 3 N^-nu
      return pts;
    };
    for (double nu : {1.0, 0.5, 0.0}) {
      const auto pts = planted(nu);
      const ScalingFit fit = scaling_fit(pts);
      CHECK(fit.nu == doctest::Approx(nu).epsilon(1e-12));
      CHECK(fit.nu_err == doctest::Approx(0.0).epsilon(1e-10));
    }
  }
  SUBCASE("noisy data recovered within a couple of sigma") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<ScalingPoint> pts;
    for (double n : {16.0, 32.0, 64.0, 128.0, 256.0, 512.0})
      pts.push_back({n, n * std::pow(n, -0.8) * std::exp(noise(rng))});
    const ScalingFit fit = scaling_fit(pts);
    CHECK(std::abs(fit.nu - 0.8) <= 2.5 * fit.nu_err + 1e-9);
  }
  SUBCASE("degenerate abscissae rejected") {
    const std::vector<ScalingPoint> pts{{8, 1}, {8, 2}, {8, 3}};
    CHECK_THROWS_AS(scaling_fit(pts), ParameterError);
    const std::vector<ScalingPoint> two{{8, 1}, {16, 2}};
    CHECK_THROWS_AS(scaling_fit(two), ParameterError);
  }
}

TEST_CASE("collapse_metric") {
  std::vector<double> taus;
  for (int k = 0; k <= 40; ++k) taus.push_back(0.1 * k);
  auto decay = [&](std::size_t n_occ, double err) {
    std::vector<double> vars;
    for (double tau : taus) vars.push_back(0.5 * n_occ * std::exp(-tau));
    return synthetic_var_series(taus, vars, err, n_occ);
  };
  SUBCASE("identical series give zero") {
    const std::vector<ObservableSeries> group{decay(100, 0.02), decay(100, 0.02)};
    const std::vector<double> factors{100.0, 100.0};
    CHECK(collapse_metric(group, factors) == doctest::Approx(0.0));
  }
  SUBCASE("series built with different N collapse after rescaling") {
    // times in each series are t = tau / N_occ; factors N_occ map them back
    const std::vector<ObservableSeries> group{decay(100, 0.02), decay(400, 0.02),
                                              decay(25, 0.02)};
    const std::vector<double> factors{100.0, 400.0, 25.0};
    CHECK(collapse_metric(group, factors) < 1e-9);
  }
  SUBCASE("a genuinely different series is flagged") {
    ObservableSeries odd = decay(100, 0.02);
    for (auto& p : odd.points) p.var_minus *= std::exp(0.5);  // half a decade off
    const std::vector<ObservableSeries> group{decay(100, 0.02), odd};
    const std::vector<double> factors{100.0, 100.0};
    CHECK(collapse_metric(group, factors) > 3.0);
  }
  SUBCASE("non-overlapping ranges rejected") {
    std::vector<ObservableSeries> group{decay(100, 0.02), decay(100, 0.02)};
    for (auto& p : group[1].points) p.t += 100.0;
    const std::vector<double> factors{100.0, 100.0};
    CHECK_THROWS_AS(collapse_metric(group, factors), ParameterError);
  }
}
