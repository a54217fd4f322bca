#include "bilayer/dtwa.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "bilayer/rng.hpp"

namespace bilayer {

namespace {
constexpr std::size_t kBlock = 32;  // trajectories per work block
}

SpinEnsemble sample_initial(const SiteSet& sites, std::size_t trajectories, std::uint64_t seed) {
  if (trajectories < 1) throw ParameterError("need at least one trajectory");
  const std::size_t n_a = sites.occupied_count(Layer::A);
  const std::size_t n_b = sites.occupied_count(Layer::B);
  const std::size_t m = n_a + n_b;
  if (m == 0) throw DegenerateFillingError("no occupied sites");
  SpinEnsemble e;
  e.trajectories = trajectories;
  e.sites = m;
  e.n_a = n_a;
  e.master_seed = seed;
  const std::size_t R = trajectories;
  e.sx.resize(m * R);
  e.sy.resize(m * R);
  e.sz.resize(m * R);
  for (std::size_t r = 0; r < R; ++r) {
    auto rng = make_stream_rng(seed, r);
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint64_t u = rng();
      e.sx[i * R + r] = (u & 1u) ? 0.5 : -0.5;
      e.sy[i * R + r] = (u & 2u) ? 0.5 : -0.5;
      e.sz[i * R + r] = i < n_a ? -0.5 : 0.5;
    }
  }
  return e;
}

std::vector<Vec3> effective_field(const EffectiveModel& model, std::span<const Vec3> spins) {
  const std::size_t m = model.size();
  if (spins.size() != m) throw ParameterError("spin count does not match model");
  std::vector<Vec3> b(m);
  for (std::size_t i = 0; i < m; ++i) {
    double bx = model.field[i].x, by = model.field[i].y, bz = model.field[i].z;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const Tensor3 t = model.pair_tensor(i, j);
      const Vec3& s = spins[j];
      bx += t(0, 0) * s.x + t(0, 1) * s.y + t(0, 2) * s.z;
      by += t(1, 0) * s.x + t(1, 1) * s.y + t(1, 2) * s.z;
      bz += t(2, 0) * s.x + t(2, 1) * s.y + t(2, 2) * s.z;
    }
    b[i] = {bx, by, bz};
  }
  return b;
}

double classical_energy(const EffectiveModel& model, std::span<const Vec3> spins) {
  const std::size_t m = model.size();
  if (spins.size() != m) throw ParameterError("spin count does not match model");
  double e = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const Tensor3 t = model.pair_tensor(i, j);
      const Vec3 &a = spins[i], &b = spins[j];
      e += a.x * (t(0, 0) * b.x + t(0, 1) * b.y + t(0, 2) * b.z) +
           a.y * (t(1, 0) * b.x + t(1, 1) * b.y + t(1, 2) * b.z) +
           a.z * (t(2, 0) * b.x + t(2, 1) * b.y + t(2, 2) * b.z);
    }
    e += model.field[i].x * spins[i].x + model.field[i].y * spins[i].y +
         model.field[i].z * spins[i].z;
  }
  return e;
}

std::string ConservationReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "energy drift %.3e (tol %.1e), S^z drift %.3e (tol %.1e), spin-norm dev %.3e "
                "(tol %.1e)",
                max_energy_drift, energy_tol, max_sz_drift, sz_tol, max_norm_dev, norm_tol);
  return buf;
}

void IntegratorConfig::validate() const {
  if (sample_times.empty()) throw ParameterError("sample_times must not be empty");
  if (sample_times.front() < 0) throw ParameterError("sample_times must start at or after 0");
  for (std::size_t k = 1; k < sample_times.size(); ++k)
    if (!(sample_times[k] > sample_times[k - 1]))
      throw ParameterError("sample_times must be strictly increasing");
  if (dt < 0 || dt_safety <= 0) throw ParameterError("bad integrator step settings");
}

double default_time_step(const EffectiveModel& model, double dt_safety) {
  const double scale =
      std::max(static_cast<double>(model.n_a) * model.v_avg, model.field_bound());
  if (!(scale > 0)) return dt_safety;  // free spins: any step is exact
  return dt_safety / scale;
}

namespace {

// Precomputed step schedule, shared by every trajectory block so results do
// not depend on the thread partition. tensor[k] selects the active pair-class
// tensor set for step k (always 0 for plain integration).
struct StepPlan {
  std::vector<double> dts;
  std::vector<int> tensor;
  // sample k is taken after `position` steps (position 0 = initial state)
  std::vector<std::size_t> sample_position;
};

StepPlan build_plan(const std::vector<double>& sample_times, double dt,
                    const std::vector<double>& boundaries,
                    const std::vector<int>& boundary_tensor) {
  StepPlan plan;
  plan.sample_position.resize(sample_times.size());
  std::size_t si = 0;
  if (!sample_times.empty() && sample_times.front() == 0.0) plan.sample_position[si++] = 0;
  double t = 0.0;
  std::size_t bi = 0;
  int current_tensor = boundaries.empty() ? 0 : boundary_tensor[0];
  while (si < sample_times.size() || bi < boundaries.size()) {
    // next event: sample or segment boundary, whichever comes first
    double t_next;
    bool is_sample = false;
    const double ts = si < sample_times.size() ? sample_times[si] : 1e300;
    double tb = 1e300;
    while (bi < boundaries.size() && boundaries[bi] <= t + 1e-15 * std::max(1.0, t)) {
      current_tensor = boundary_tensor[bi];  // segment starting here
      ++bi;
    }
    if (bi < boundaries.size()) tb = boundaries[bi];
    if (ts <= tb) {
      t_next = ts;
      is_sample = true;
    } else {
      t_next = tb;
    }
    if (t_next > t + 1e-15 * std::max(1.0, t_next)) {
      const double span = t_next - t;
      const auto n = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
      const std::size_t steps = std::max<std::size_t>(1, n);
      const double h = span / static_cast<double>(steps);
      for (std::size_t k = 0; k < steps; ++k) {
        plan.dts.push_back(h);
        plan.tensor.push_back(current_tensor);
      }
      t = t_next;
    }
    if (is_sample) {
      plan.sample_position[si++] = plan.dts.size();
    }
  }
  return plan;
}

struct BlockKernel {
  const EffectiveModel* model = nullptr;
  std::size_t n_a = 0, n_b = 0, m = 0;
  std::vector<double> v_ba;  // transpose of v_ab for cache-friendly B rows
  // per-site uniform fields
  const std::vector<Vec3>* field = nullptr;
  // tensor sets (index selected per step)
  std::vector<std::array<Tensor3, 3>> tensors;  // [set] = {t_aa, t_bb, t_ab}

  void init(const EffectiveModel& mod) {
    model = &mod;
    n_a = mod.n_a;
    n_b = mod.n_b;
    m = mod.size();
    field = &mod.field;
    v_ba.resize(n_a * n_b);
    for (std::size_t i = 0; i < n_a; ++i)
      for (std::size_t j = 0; j < n_b; ++j) v_ba[j * n_a + i] = mod.v_ab[i * n_b + j];
    tensors.push_back({mod.t_aa, mod.t_bb, mod.t_ab});
  }

  // u^mu[i][:] = sum_j V[i][j] y^mu[j][:] accumulated over one (P, Q) pair,
  // then mixed into b through the 3x3 tensor. All lanes of the block are
  // processed; unused trailing lanes hold zero spins and stay zero.
  static void accumulate(const double* v, std::size_t rows, std::size_t cols,
                         const double* yx, const double* yy, const double* yz,
                         const Tensor3& t, double* bx, double* by, double* bz) {
    double ux[kBlock], uy[kBlock], uz[kBlock];
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t r = 0; r < kBlock; ++r) ux[r] = uy[r] = uz[r] = 0.0;
      const double* vrow = v + i * cols;
      for (std::size_t j = 0; j < cols; ++j) {
        const double vij = vrow[j];
        if (vij == 0.0) continue;
        const double* swx = yx + j * kBlock;
        const double* swy = yy + j * kBlock;
        const double* swz = yz + j * kBlock;
        for (std::size_t r = 0; r < kBlock; ++r) {
          ux[r] += vij * swx[r];
          uy[r] += vij * swy[r];
          uz[r] += vij * swz[r];
        }
      }
      double* tbx = bx + i * kBlock;
      double* tby = by + i * kBlock;
      double* tbz = bz + i * kBlock;
      for (std::size_t r = 0; r < kBlock; ++r) {
        tbx[r] += t(0, 0) * ux[r] + t(0, 1) * uy[r] + t(0, 2) * uz[r];
        tby[r] += t(1, 0) * ux[r] + t(1, 1) * uy[r] + t(1, 2) * uz[r];
        tbz[r] += t(2, 0) * ux[r] + t(2, 1) * uy[r] + t(2, 2) * uz[r];
      }
    }
  }

  // b = effective field of y (block layout: [comp][site][kBlock])
  void compute_field(const double* y, double* b, int tensor_set) const {
    const std::size_t plane = m * kBlock;
    const double* yx = y;
    const double* yy = y + plane;
    const double* yz = y + 2 * plane;
    double* bx = b;
    double* by = b + plane;
    double* bz = b + 2 * plane;
    const auto& ts = tensors[tensor_set];
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3& h = (*field)[i];
      for (std::size_t r = 0; r < kBlock; ++r) {
        bx[i * kBlock + r] = h.x;
        by[i * kBlock + r] = h.y;
        bz[i * kBlock + r] = h.z;
      }
    }
    const std::size_t ob = n_a * kBlock;
    if (n_a) {
      accumulate(model->v_aa.data(), n_a, n_a, yx, yy, yz, ts[0], bx, by, bz);
      if (n_b) accumulate(model->v_ab.data(), n_a, n_b, yx + ob, yy + ob, yz + ob, ts[2], bx, by, bz);
    }
    if (n_b) {
      accumulate(model->v_bb.data(), n_b, n_b, yx + ob, yy + ob, yz + ob, ts[1], bx + ob, by + ob,
                 bz + ob);
      if (n_a)
        accumulate(v_ba.data(), n_b, n_a, yx, yy, yz, ts[2].transposed(), bx + ob, by + ob,
                   bz + ob);
    }
  }

  // k = b(y) x y
  void deriv(const double* y, double* k, int tensor_set) const {
    compute_field(y, k, tensor_set);
    const std::size_t plane = m * kBlock;
    double* kx = k;
    double* ky = k + plane;
    double* kz = k + 2 * plane;
    const double* yx = y;
    const double* yy = y + plane;
    const double* yz = y + 2 * plane;
    for (std::size_t n = 0; n < plane; ++n) {
      const double bx = kx[n], by = ky[n], bz = kz[n];
      kx[n] = by * yz[n] - bz * yy[n];
      ky[n] = bz * yx[n] - bx * yz[n];
      kz[n] = bx * yy[n] - by * yx[n];
    }
  }
};

struct BlockDiagnostics {
  double max_energy = 0.0, max_sz = 0.0, max_norm = 0.0;
};

class Integrator {
 public:
  Integrator(const SpinEnsemble& initial, const EffectiveModel& model,
             const IntegratorConfig& cfg, StepPlan plan,
             std::vector<std::array<Tensor3, 3>> tensor_sets)
      : initial_(initial), model_(model), cfg_(cfg), plan_(std::move(plan)) {
    kernel_.init(model);
    if (!tensor_sets.empty()) kernel_.tensors = std::move(tensor_sets);
    if (initial.sites != model.size() || initial.n_a != model.n_a)
      throw ParameterError("ensemble does not match model site structure");
  }

  EnsembleSeries run() {
    const std::size_t R = initial_.trajectories;
    const std::size_t n_samples = cfg_.sample_times.size();
    EnsembleSeries out;
    out.times = cfg_.sample_times;
    out.trajectories = R;
    out.n_a = model_.n_a;
    out.n_b = model_.n_b;
    out.layer_sums.assign(n_samples * R * 6, 0.0);
    out.dt_used = dt_;
    if (cfg_.keep_snapshots) {
      out.snapshots.assign(n_samples, SpinEnsemble{});
      for (std::size_t s = 0; s < n_samples; ++s) {
        auto& snap = out.snapshots[s];
        snap.trajectories = R;
        snap.sites = model_.size();
        snap.n_a = model_.n_a;
        snap.time = cfg_.sample_times[s];
        snap.master_seed = initial_.master_seed;
        snap.sx.resize(snap.sites * R);
        snap.sy.resize(snap.sites * R);
        snap.sz.resize(snap.sites * R);
      }
    }

    const std::size_t n_blocks = (R + kBlock - 1) / kBlock;
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t n_threads = cfg_.threads > 0 ? static_cast<std::size_t>(cfg_.threads)
                                             : std::max(1u, hw);
    n_threads = std::min(n_threads, n_blocks);

    std::atomic<std::size_t> next_block{0};
    std::vector<BlockDiagnostics> diag(n_blocks);
    std::vector<std::thread> pool;
    auto worker = [&]() {
      std::vector<double> y0, yt, k, ks;
      for (;;) {
        const std::size_t blk = next_block.fetch_add(1);
        if (blk >= n_blocks) break;
        run_block(blk, out, diag[blk], y0, yt, k, ks);
      }
    };
    if (n_threads == 1) {
      worker();
    } else {
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    ConservationReport rep;
    rep.energy_tol = cfg_.energy_tol;
    rep.sz_tol = cfg_.sz_tol;
    const double tau_end = static_cast<double>(model_.n_a) * model_.v_avg *
                           cfg_.sample_times.back();
    rep.norm_tol = cfg_.norm_tol * std::max(1.0, tau_end);
    rep.checked = cfg_.check_conservation;
    for (const auto& d : diag) {
      rep.max_energy_drift = std::max(rep.max_energy_drift, d.max_energy);
      rep.max_sz_drift = std::max(rep.max_sz_drift, d.max_sz);
      rep.max_norm_dev = std::max(rep.max_norm_dev, d.max_norm);
    }
    out.conservation = rep;
    if (cfg_.check_conservation && !rep.pass())
      throw IntegrationQualityError("integration quality gate failed at dt=" +
                                    std::to_string(dt_) + ": " + rep.summary());
    return out;
  }

  double dt_ = 0.0;

 private:
  void run_block(std::size_t blk, EnsembleSeries& out, BlockDiagnostics& diag,
                 std::vector<double>& y0, std::vector<double>& yt, std::vector<double>& k,
                 std::vector<double>& ks) {
    const std::size_t R = initial_.trajectories;
    const std::size_t r0 = blk * kBlock;
    const std::size_t B = std::min(kBlock, R - r0);
    const std::size_t m = model_.size();
    const std::size_t plane = m * kBlock;
    y0.assign(3 * plane, 0.0);
    yt.assign(3 * plane, 0.0);
    k.assign(3 * plane, 0.0);
    ks.assign(3 * plane, 0.0);

    // gather block columns
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t r = 0; r < B; ++r) {
        y0[i * kBlock + r] = initial_.sx[i * R + r0 + r];
        y0[plane + i * kBlock + r] = initial_.sy[i * R + r0 + r];
        y0[2 * plane + i * kBlock + r] = initial_.sz[i * R + r0 + r];
      }

    std::vector<double> e0(B), sz0(B), ev(B), szv(B);
    measure_energy(y0.data(), plan_.tensor.empty() ? 0 : plan_.tensor.front(), B, k.data(),
                   e0.data(), sz0.data());
    const double e_scale = std::max(static_cast<double>(model_.n_a) * model_.v_avg, 1e-300);

    std::size_t sample_idx = 0;
    auto take_samples_at = [&](std::size_t position) {
      while (sample_idx < plan_.sample_position.size() &&
             plan_.sample_position[sample_idx] == position) {
        record_sample(sample_idx, r0, B, y0.data(), out);
        const int tset = position < plan_.tensor.size()
                             ? plan_.tensor[position == 0 ? 0 : position - 1]
                             : (plan_.tensor.empty() ? 0 : plan_.tensor.back());
        measure_energy(y0.data(), tset, B, k.data(), ev.data(), szv.data());
        for (std::size_t r = 0; r < B; ++r) {
          const double de = std::abs(ev[r] - e0[r]) / std::max(std::abs(e0[r]), e_scale);
          diag.max_energy = std::max(diag.max_energy, de);
          diag.max_sz = std::max(diag.max_sz, std::abs(szv[r] - sz0[r]));
        }
        diag.max_norm = std::max(diag.max_norm, norm_deviation(y0.data(), B));
        ++sample_idx;
      }
    };

    take_samples_at(0);
    for (std::size_t step = 0; step < plan_.dts.size(); ++step) {
      rk4_step(y0.data(), plan_.dts[step], plan_.tensor[step], B, yt.data(), k.data(), ks.data());
      take_samples_at(step + 1);
    }
  }

  void rk4_step(double* y0, double h, int tset, std::size_t B, double* yt, double* k,
                double* ks) {
    const std::size_t n = 3 * model_.size() * kBlock;
    kernel_.deriv(y0, k, tset);
    for (std::size_t i = 0; i < n; ++i) ks[i] = k[i];
    for (std::size_t i = 0; i < n; ++i) yt[i] = y0[i] + 0.5 * h * k[i];
    kernel_.deriv(yt, k, tset);
    for (std::size_t i = 0; i < n; ++i) ks[i] += 2.0 * k[i];
    for (std::size_t i = 0; i < n; ++i) yt[i] = y0[i] + 0.5 * h * k[i];
    kernel_.deriv(yt, k, tset);
    for (std::size_t i = 0; i < n; ++i) ks[i] += 2.0 * k[i];
    for (std::size_t i = 0; i < n; ++i) yt[i] = y0[i] + h * k[i];
    kernel_.deriv(yt, k, tset);
    for (std::size_t i = 0; i < n; ++i) y0[i] += (h / 6.0) * (ks[i] + k[i]);
  }

  void record_sample(std::size_t sample, std::size_t r0, std::size_t B, const double* y,
                     EnsembleSeries& out) {
    const std::size_t m = model_.size();
    const std::size_t plane = m * kBlock;
    const std::size_t R = initial_.trajectories;
    for (std::size_t r = 0; r < B; ++r) {
      double s[6] = {0, 0, 0, 0, 0, 0};
      for (std::size_t i = 0; i < m; ++i) {
        const int off = i < model_.n_a ? 0 : 3;
        s[off + 0] += y[i * kBlock + r];
        s[off + 1] += y[plane + i * kBlock + r];
        s[off + 2] += y[2 * plane + i * kBlock + r];
      }
      double* dst = out.layer_sums.data() + (sample * R + (r0 + r)) * 6;
      for (int c = 0; c < 6; ++c) dst[c] = s[c];
    }
    if (!out.snapshots.empty()) {
      auto& snap = out.snapshots[sample];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < B; ++r) {
          snap.sx[i * R + r0 + r] = y[i * kBlock + r];
          snap.sy[i * R + r0 + r] = y[plane + i * kBlock + r];
          snap.sz[i * R + r0 + r] = y[2 * plane + i * kBlock + r];
        }
    }
  }

  // E[r] = (s.b + s.h)/2, Sz[r] = sum_i s_i^z; scratch b reused from caller
  void measure_energy(const double* y, int tset, std::size_t B, double* b, double* e,
                      double* sz) {
    kernel_.compute_field(y, b, tset);
    const std::size_t m = model_.size();
    const std::size_t plane = m * kBlock;
    for (std::size_t r = 0; r < B; ++r) {
      e[r] = 0.0;
      sz[r] = 0.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const Vec3& h = model_.field[i];
      for (std::size_t r = 0; r < B; ++r) {
        const double sx = y[i * kBlock + r];
        const double sy = y[plane + i * kBlock + r];
        const double szi = y[2 * plane + i * kBlock + r];
        e[r] += 0.5 * (sx * (b[i * kBlock + r] + h.x) + sy * (b[plane + i * kBlock + r] + h.y) +
                       szi * (b[2 * plane + i * kBlock + r] + h.z));
        sz[r] += szi;
      }
    }
  }

  double norm_deviation(const double* y, std::size_t B) const {
    const std::size_t m = model_.size();
    const std::size_t plane = m * kBlock;
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t r = 0; r < B; ++r) {
        const double sx = y[i * kBlock + r];
        const double sy = y[plane + i * kBlock + r];
        const double sz = y[2 * plane + i * kBlock + r];
        worst = std::max(worst, std::abs(sx * sx + sy * sy + sz * sz - 0.75));
      }
    return worst;
  }

  const SpinEnsemble& initial_;
  const EffectiveModel& model_;
  const IntegratorConfig& cfg_;
  StepPlan plan_;
  BlockKernel kernel_;
};

}  // namespace

EnsembleSeries integrate(const SpinEnsemble& initial, const EffectiveModel& model,
                         const IntegratorConfig& config) {
  config.validate();
  const double dt = config.dt > 0 ? config.dt : default_time_step(model, config.dt_safety);
  StepPlan plan = build_plan(config.sample_times, dt, {}, {});
  Integrator integ(initial, model, config, std::move(plan), {});
  integ.dt_ = dt;
  return integ.run();
}

EnsembleSeries stroboscopic_integrate(const SpinEnsemble& initial, const EffectiveModel& ising,
                                      const ToggleSequence& seq, double cycle_period,
                                      const IntegratorConfig& config) {
  config.validate();
  if (ising.v_perp != 0.0 || ising.kind != ModelKind::RawXXZ)
    throw ParameterError("stroboscopic integration expects a raw Ising model (v_perp = 0)");
  if (!(cycle_period > 0)) throw ParameterError("cycle period must be positive");
  if (!validate_sequence(seq).pass()) throw ParameterError("invalid toggle sequence");

  // one tensor set per sequence step, scaled to the physical Ising strength
  std::vector<std::array<Tensor3, 3>> sets;
  std::vector<double> offsets;  // cumulative phase at step starts
  double acc = 0.0;
  for (std::size_t k = 0; k < seq.steps.size(); ++k) {
    offsets.push_back(acc);
    acc += seq.steps[k].duration.value();
    const PairClassTensor t = toggled_tensor_at(seq, offsets.back() + 1e-12);
    sets.push_back({t.aa.scaled(ising.v_z), t.bb.scaled(ising.v_z), t.ab.scaled(ising.v_z)});
  }

  const double t_end = config.sample_times.back();
  std::vector<double> boundaries;
  std::vector<int> boundary_tensor;
  const auto n_cycles = static_cast<std::size_t>(std::ceil(t_end / cycle_period - 1e-12));
  for (std::size_t c = 0; c <= n_cycles; ++c)
    for (std::size_t k = 0; k < seq.steps.size(); ++k) {
      const double tb = (static_cast<double>(c) + offsets[k]) * cycle_period;
      if (tb > t_end + 1e-12 * std::max(1.0, t_end)) break;
      boundaries.push_back(tb);
      boundary_tensor.push_back(static_cast<int>(k));
    }

  const double dt = config.dt > 0 ? config.dt : default_time_step(ising, config.dt_safety);
  StepPlan plan = build_plan(config.sample_times, dt, boundaries, boundary_tensor);

  // Toggled frames break the U(1) symmetry of the averaged model, and the
  // toggled Hamiltonian is time-dependent, so energy and S^z gates do not
  // apply; spin norms are still conserved.
  IntegratorConfig cfg = config;
  cfg.energy_tol = 1e300;
  cfg.sz_tol = 1e300;
  Integrator integ(initial, ising, cfg, std::move(plan), std::move(sets));
  integ.dt_ = dt;
  return integ.run();
}

}  // namespace bilayer
