#include "ncs/sim.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "ncs/channel.h"

namespace ncs {

void SystemConfig::Validate() const {
  limiter.Validate();
  if (k() > std::min(n_c, n_s)) throw DomainError("SystemConfig: K > min(Nc, Ns)");
  if (!(theta > 0.0) || !(tau > 0.0)) throw DomainError("SystemConfig: theta and tau must be > 0");
  if (!(initial_energy_fraction >= 0.0 && initial_energy_fraction <= 1.0)) {
    throw DomainError("SystemConfig: initial_energy_fraction must lie in [0, 1]");
  }
  if (!(divergence_guard > 0.0)) throw DomainError("SystemConfig: divergence_guard must be > 0");
}

PathState InitialState(const SystemConfig& cfg) {
  return PathState{VectorXd::Zero(cfg.k()), Estimator(cfg.k()),
                   EnergyQueue(cfg.theta, cfg.tau, cfg.initial_energy_fraction * cfg.theta), 0};
}

SlotTrace RunSlot(const SystemConfig& cfg, PathState& state, const Policy& policy, Rng& rng) {
  const PlantModel& model = cfg.model;
  const MatrixXd& Sigma = state.estimator.Sigma();
  SlotTrace t;
  t.n = state.n;
  t.E_before = state.queue.level();
  t.tr_sigma = Sigma.trace();
  t.sq_error = MseSample(state.x, state.estimator.x_hat());
  t.x_norm2 = state.x.squaredNorm();

  ChannelDraw draw = SampleChannel(rng, cfg.n_c, cfg.n_s, cfg.k());
  t.L = DynamicRange(model, cfg.limiter, Sigma);
  const double norm_aat = SpectralNorm(MatrixXd(model.A() * model.A().transpose()));
  const DriftContext ctx = MakeDriftContext(std::move(draw), Sigma, t.E_before, cfg.theta,
                                            cfg.tau, cfg.limiter.M, t.L, norm_aat);
  const PrecoderDecision decision = policy(ctx, state.n);
  if (!CheckFeasible(t.E_before, decision.F, cfg.limiter.M, cfg.tau)) {
    throw FeasibilityError("RunSlot: precoder reserves " + Fmt(decision.energy_used) +
                           " J with only " + Fmt(t.E_before) + " J stored");
  }
  t.mode = decision.mode;
  t.beta = decision.beta;
  t.energy_reserved = decision.energy_used;

  const LimiterOutput lim = Clip(state.x, t.L, cfg.limiter.M);
  t.gamma = lim.gamma();
  const VectorXcd y = Receive(ctx.channel, decision.F, lim.q, rng);
  const VectorXd u = Control(model, state.estimator.x_hat());
  const EffectiveChannel eff = EffectiveChannel::FromProduct(ctx.channel.H, decision.F, lim.g);
  state.estimator.Update(y, eff, t.gamma, model.A(), model.B(), model.W(), u);

  VectorXd w(cfg.k());
  for (int i = 0; i < cfg.k(); ++i) w(i) = StandardNormal(rng);
  state.x = Step(model, state.x, u, model.noise_factor() * w);

  t.energy_used = cfg.accounting == EnergyAccounting::kRealized
                      ? (decision.F * lim.q.cast<std::complex<double>>()).squaredNorm() * cfg.tau
                      : decision.energy_used;
  t.alpha = cfg.arrivals.Sample(rng);
  state.queue.SpendAndHarvest(t.energy_used, t.alpha);
  t.E_after = state.queue.level();
  ++state.n;
  return t;
}

Estimate MeanWithCi(const std::vector<double>& values) {
  Estimate e;
  e.count = values.size();
  if (values.empty()) return e;
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    e.half_width = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
  }
  return e;
}

namespace {

PathSummary RunPath(const SystemConfig& cfg, const Policy& policy, std::size_t n_slots,
                    Rng& rng, std::vector<SlotTrace>* trace) {
  PathState state = InitialState(cfg);
  PathSummary s;
  s.initial_energy = state.queue.level();
  double sum_sq = 0.0;
  double sum_tr = 0.0;
  bool prev_known = false;
  bool prev_active = false;
  for (std::size_t i = 0; i < n_slots; ++i) {
    const SlotTrace t = RunSlot(cfg, state, policy, rng);
    if (trace != nullptr) trace->push_back(t);
    ++s.slots;
    sum_sq += t.sq_error;
    sum_tr += t.tr_sigma;
    if (t.gamma == 0) ++s.saturated;
    const bool active = t.mode == Mode::kActive && t.energy_reserved > 0.0;
    if (active) ++s.active;
    if (t.energy_reserved > t.E_before + 1e-9) ++s.feasibility_violations;
    if (t.E_after < 0.0 || t.E_after > cfg.theta) ++s.queue_violations;
    s.total_spent += t.energy_used;
    s.total_harvest += t.alpha;
    if (prev_known) {
      if (prev_active) {
        s.post_active_sum += t.sq_error;
        ++s.post_active_count;
      } else {
        s.post_dormant_sum += t.sq_error;
        ++s.post_dormant_count;
      }
    }
    prev_known = true;
    prev_active = active;
    if (state.x.squaredNorm() > cfg.divergence_guard || !AllFinite(MatrixXd(state.x))) {
      s.diverged = true;
      break;
    }
  }
  s.overspend = state.queue.overspend_count();
  const double slack = 1e-9 * std::max(1.0, s.initial_energy + s.total_harvest);
  s.ledger_ok = s.total_spent <= s.initial_energy + s.total_harvest + slack;
  if (s.slots > 0) {
    s.mean_sq_error = sum_sq / static_cast<double>(s.slots);
    s.mean_tr_sigma = sum_tr / static_cast<double>(s.slots);
    s.nmse = s.mean_sq_error / cfg.k();
  }
  return s;
}

}  // namespace

RunResult RunMonteCarlo(const SystemConfig& cfg, const PolicySpec& policy_spec,
                        std::size_t n_paths, std::size_t n_slots, std::uint64_t seed,
                        const RunOptions& options) {
  cfg.Validate();
  PolicySpec spec = policy_spec;
  if (spec.mean_alpha <= 0.0) spec.mean_alpha = cfg.arrivals.mean();
  const Policy policy = MakePolicy(spec);

  RunResult r;
  r.policy = PolicyName(spec.kind);
  r.n_paths = n_paths;
  r.n_slots = n_slots;
  r.seed = seed;
  r.paths.resize(n_paths);
  const std::size_t n_traces = std::min<std::size_t>(n_paths, std::max(0, options.trace_paths));
  r.traces.resize(n_traces);

  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::size_t>(1, n_paths))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t p = next.fetch_add(1); p < n_paths; p = next.fetch_add(1)) {
      try {
        Rng rng = MakeStreamRng(seed, p);
        r.paths[p] = RunPath(cfg, policy, n_slots, rng, p < n_traces ? &r.traces[p] : nullptr);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_paths);
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> nmse, tr, sq, sat, duty, gap;
  for (const PathSummary& s : r.paths) {
    nmse.push_back(s.nmse);
    tr.push_back(s.mean_tr_sigma);
    sq.push_back(s.mean_sq_error);
    const double slots = static_cast<double>(std::max<std::size_t>(1, s.slots));
    sat.push_back(static_cast<double>(s.saturated) / slots);
    duty.push_back(static_cast<double>(s.active) / slots);
    if (s.post_active_count > 0 && s.post_dormant_count > 0) {
      gap.push_back(s.post_active_sum / static_cast<double>(s.post_active_count) -
                    s.post_dormant_sum / static_cast<double>(s.post_dormant_count));
    }
    if (s.diverged) ++r.divergent_paths;
    r.total_slots += s.slots;
    r.total_saturated += s.saturated;
    r.feasibility_violations += s.feasibility_violations;
    r.queue_violations += s.queue_violations;
    if (!s.ledger_ok) ++r.ledger_violations;
  }
  r.nmse = MeanWithCi(nmse);
  r.tr_sigma = MeanWithCi(tr);
  r.sq_error = MeanWithCi(sq);
  r.saturation_rate = MeanWithCi(sat);
  r.duty_cycle = MeanWithCi(duty);
  r.reset_gap = MeanWithCi(gap);
  return r;
}

std::vector<SweepRow> Sweep(const SystemConfig& cfg, const std::vector<PolicySpec>& policies,
                            SweepAxis axis, const std::vector<double>& values,
                            std::size_t n_paths, std::size_t n_slots, std::uint64_t seed,
                            const RunOptions& options) {
  if (!std::is_sorted(values.begin(), values.end())) {
    throw DomainError("Sweep: values must be ascending");
  }
  std::vector<SweepRow> rows;
  for (const PolicySpec& policy : policies) {
    for (double v : values) {
      SystemConfig c = cfg;
      PolicySpec spec = policy;
      if (axis == SweepAxis::kTheta) {
        c.theta = v;
      } else {
        c.arrivals = cfg.arrivals.kind() == ArrivalModel::Kind::kDeterministic
                         ? ArrivalModel::Deterministic(v)
                         : ArrivalModel::Poisson(v);
        spec.mean_alpha = v;
      }
      SweepRow row;
      row.policy = PolicyName(spec.kind);
      row.value = v;
      row.result = RunMonteCarlo(c, spec, n_paths, n_slots, seed, options);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

RegionMap DecisionRegionScan(const RegionScanSetup& setup, double E) {
  if (setup.grid < 1) throw DomainError("DecisionRegionScan: grid must be >= 1");
  RegionMap map;
  map.E = E;
  const double norm_aat =
      SpectralNorm(MatrixXd(setup.model.A() * setup.model.A().transpose()));
  for (int i = 1; i <= setup.grid; ++i) map.h2.push_back(setup.h2_max * i / setup.grid);
  for (int j = 1; j <= setup.grid; ++j) map.sigma2.push_back(setup.sigma2_max * j / setup.grid);
  map.active.assign(map.h2.size(), std::vector<int>(map.sigma2.size(), 0));
  for (std::size_t i = 0; i < map.h2.size(); ++i) {
    for (std::size_t j = 0; j < map.sigma2.size(); ++j) {
      VectorXcd h(2);
      h << setup.h1, map.h2[i];
      VectorXd sigma(2);
      sigma << setup.sigma1, map.sigma2[j];
      const MatrixXd Sigma = sigma.asDiagonal();
      const double L = DynamicRange(setup.model, setup.limiter, Sigma);
      const DriftContext ctx =
          setup.decoupled
              ? MakeDecoupledContext(h, sigma, E, setup.theta, setup.tau, setup.limiter.M, L,
                                     norm_aat)
              : MakeDriftContext(ChannelDraw::FromMatrix(MatrixXcd(h.asDiagonal()), 2), Sigma,
                                 E, setup.theta, setup.tau, setup.limiter.M, L, norm_aat);
      const PrecoderDecision d = SolveDriftMinimizing(ctx);
      map.active[i][j] = static_cast<int>((d.allocations.array() > 0.0).count());
    }
  }
  return map;
}

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void WriteRunCsvHeader(std::ostream& os) {
  os << "policy,paths,slots,nmse,nmse_ci,tr_sigma,tr_sigma_ci,sq_error,sq_error_ci,"
        "saturation_rate,saturation_rate_ci,duty_cycle,duty_cycle_ci,divergent_paths,"
        "feasibility_violations,queue_violations,ledger_violations,reset_gap,reset_gap_ci,"
        "reset_gap_paths\n";
}

void WriteRunCsv(std::ostream& os, const RunResult& r) {
  os << r.policy << "," << r.n_paths << "," << r.n_slots << "," << Fmt(r.nmse.mean) << ","
     << Fmt(r.nmse.half_width) << "," << Fmt(r.tr_sigma.mean) << ","
     << Fmt(r.tr_sigma.half_width) << "," << Fmt(r.sq_error.mean) << ","
     << Fmt(r.sq_error.half_width) << "," << Fmt(r.saturation_rate.mean) << ","
     << Fmt(r.saturation_rate.half_width) << "," << Fmt(r.duty_cycle.mean) << ","
     << Fmt(r.duty_cycle.half_width) << "," << r.divergent_paths << ","
     << r.feasibility_violations << "," << r.queue_violations << "," << r.ledger_violations
     << "," << Fmt(r.reset_gap.mean) << "," << Fmt(r.reset_gap.half_width) << ","
     << r.reset_gap.count << "\n";
}

void WriteSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows, SweepAxis axis) {
  os << "policy," << (axis == SweepAxis::kTheta ? "theta" : "mean_alpha")
     << ",nmse,nmse_ci,tr_sigma,tr_sigma_ci,saturation_rate,duty_cycle,divergent_paths\n";
  for (const SweepRow& row : rows) {
    const RunResult& r = row.result;
    os << row.policy << "," << Fmt(row.value) << "," << Fmt(r.nmse.mean) << ","
       << Fmt(r.nmse.half_width) << "," << Fmt(r.tr_sigma.mean) << ","
       << Fmt(r.tr_sigma.half_width) << "," << Fmt(r.saturation_rate.mean) << ","
       << Fmt(r.duty_cycle.mean) << "," << r.divergent_paths << "\n";
  }
}

void WriteTraceCsv(std::ostream& os, const std::vector<SlotTrace>& trace) {
  os << "n,E_before,L,mode,gamma,beta,energy_used,energy_reserved,alpha,E_after,tr_sigma,"
        "sq_error,x_norm2\n";
  for (const SlotTrace& t : trace) {
    os << t.n << "," << Fmt(t.E_before) << "," << Fmt(t.L) << ","
       << (t.mode == Mode::kActive ? "active" : "dormant") << "," << t.gamma << ","
       << Fmt(t.beta) << "," << Fmt(t.energy_used) << "," << Fmt(t.energy_reserved) << ","
       << Fmt(t.alpha) << "," << Fmt(t.E_after) << "," << Fmt(t.tr_sigma) << ","
       << Fmt(t.sq_error) << "," << Fmt(t.x_norm2) << "\n";
  }
}

void WriteRegionsCsv(std::ostream& os, const std::vector<RegionMap>& maps) {
  os << "E,h2,sigma2,active_streams\n";
  for (const RegionMap& m : maps) {
    for (std::size_t i = 0; i < m.h2.size(); ++i) {
      for (std::size_t j = 0; j < m.sigma2.size(); ++j) {
        os << Fmt(m.E) << "," << Fmt(m.h2[i]) << "," << Fmt(m.sigma2[j]) << ","
           << m.active[i][j] << "\n";
      }
    }
  }
}

}  // namespace ncs
