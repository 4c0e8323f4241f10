#include "css/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "css/gold.hpp"

namespace css {

namespace {

// Substream tags under the master seed. Data draws (support, bits, noise) are
// keyed by grid point and slot only, so every curve sees the same traffic.
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kOperatorStream = 2;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_random(OperatorKind k) { return k == OperatorKind::random_demodulator || k == OperatorKind::rademacher; }

bool per_slot_operator(const CurveSpec& c, bool ber) {
  if (!is_random(c.op)) return false;
  switch (c.refresh) {
    case OperatorRefresh::slot:
      return true;
    case OperatorRefresh::curve:
      return false;
    case OperatorRefresh::automatic:
      break;
  }
  return ber ? c.op == OperatorKind::rademacher : c.op == OperatorKind::random_demodulator;
}

// Operator with its prewhitener and the sensing matrix A = P Theta Psi.
struct Receiver {
  MeasurementOperator op;
  std::optional<Prewhitener> whitener;
  SensingMatrix a;
};

// `fast`, when given, supplies A^T v = Psi^T Theta^T v through the FFT
// correlator for the structured operators.
Receiver make_receiver(const CurveSpec& c, const RealMatrix& psi, MeasurementOperator op,
                       const std::shared_ptr<const GoldCorrelator>& fast) {
  RealMatrix a = op.apply(psi);
  std::optional<Prewhitener> whitener;
  if (c.op == OperatorKind::rademacher && c.prewhiten) {
    whitener = build_prewhitener(op);
    if (whitener) a = whitener->apply(a);
  }
  SensingMatrix::Adjoint adjoint;
  if (fast && op.kind() != OperatorKind::rademacher) {
    adjoint = [fast, op](const RealMatrix& v) { return fast->adjoint(op.apply_transpose(v)); };
  }
  return Receiver{std::move(op), std::move(whitener), SensingMatrix(std::move(a), std::move(adjoint))};
}

std::string seed_text(const ExperimentSpec& spec) { return std::to_string(*spec.seed); }

void report(const RunOptions& o, const std::string& msg) {
  if (o.progress) o.progress(msg);
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::phase:
      return "phase";
    case ExperimentKind::ber_discrete:
      return "ber_discrete";
    case ExperimentKind::ber_rf:
      return "ber_rf";
    case ExperimentKind::quantization:
      return "quantization";
    case ExperimentKind::complexity:
      return "complexity";
  }
  return "?";
}

std::string to_string(GridAxis axis) { return axis == GridAxis::snr_db ? "snr_db" : "ebn0_db"; }

std::string to_string(OperatorRefresh refresh) {
  switch (refresh) {
    case OperatorRefresh::automatic:
      return "auto";
    case OperatorRefresh::slot:
      return "slot";
    case OperatorRefresh::curve:
      return "curve";
  }
  return "?";
}

std::string to_string(TrialSymbols symbols) { return symbols == TrialSymbols::real ? "real" : "qpsk"; }

void ExperimentSpec::validate() const {
  if (!seed) throw ConfigError("a master seed is required (config 'seed', --seed or CSS_SEED)");
  if (!standard_pair(m)) throw ConfigError("no built-in preferred pair for m = " + std::to_string(m));
  if (curves.empty()) throw ConfigError("at least one curve is required");
  std::set<std::string> labels;
  const std::size_t n = (std::size_t{1} << m) - 1;
  for (const auto& c : curves) {
    if (c.label.empty()) throw ConfigError("curve label must not be empty");
    if (!labels.insert(c.label).second) throw ConfigError("duplicate curve label '" + c.label + "'");
    if (c.op == OperatorKind::identity && c.kappa != 1) throw ConfigError("identity curve '" + c.label + "' needs kappa 1");
    if (c.kappa < 1 || c.kappa > n) throw ConfigError("curve '" + c.label + "' has an invalid kappa");
    if (c.quantizer_bits && (*c.quantizer_bits < 1 || *c.quantizer_bits > 24)) {
      throw ConfigError("curve '" + c.label + "' quantizer bits must lie in [1, 24]");
    }
  }
  switch (kind) {
    case ExperimentKind::ber_discrete:
    case ExperimentKind::ber_rf:
    case ExperimentKind::quantization:
      if (grid.empty() && !noiseless) throw ConfigError("the SNR / Eb/N0 grid is empty");
      if (sparsity < 1) throw ConfigError("sparsity must be at least 1");
      for (const auto& c : curves) {
        if (measurement_count(n, c.kappa) < sparsity) {
          throw ConfigError("curve '" + c.label + "' has fewer measurements than the sparsity");
        }
      }
      if (stop.target_errors < 1 || stop.max_slots < 1) throw ConfigError("stop rule needs positive limits");
      if (kind != ExperimentKind::ber_discrete) chain.validate();
      break;
    case ExperimentKind::phase:
    case ExperimentKind::complexity: {
      if (phase.deltas.empty() || phase.rhos.empty()) throw ConfigError("phase grid needs deltas and rhos");
      for (double d : phase.deltas) {
        if (!(d > 0.0 && d <= 1.0)) throw ConfigError("delta values must lie in (0, 1]");
      }
      for (double r : phase.rhos) {
        if (!(r > 0.0 && r <= 1.0)) throw ConfigError("rho values must lie in (0, 1]");
      }
      if (phase.batch_trials < 1 || phase.max_trials < phase.batch_trials) {
        throw ConfigError("need 1 <= batch_trials <= max_trials");
      }
      if (kind == ExperimentKind::complexity) {
        if (complexity.sparsity_multipliers.empty() || complexity.trials < 1) {
          throw ConfigError("complexity grid needs multipliers and at least one trial");
        }
      }
      break;
    }
  }
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : curves) {
    nlohmann::json j{{"label", c.label},
                     {"operator", std::string(css::to_string(c.op))},
                     {"kappa", c.kappa},
                     {"prewhiten", c.prewhiten},
                     {"refresh", to_string(c.refresh)}};
    j["quantizer_bits"] = c.quantizer_bits ? nlohmann::json(*c.quantizer_bits) : nlohmann::json(nullptr);
    cs.push_back(std::move(j));
  }
  nlohmann::json j{
      {"kind", to_string(kind)},
      {"name", name},
      {"m", m},
      {"sparsity", sparsity},
      {"curves", std::move(cs)},
      {"axis", to_string(axis)},
      {"grid", grid},
      {"noiseless", noiseless},
      {"stop", {{"target_errors", stop.target_errors}, {"max_slots", stop.max_slots}, {"ber_floor", stop.ber_floor}}},
      {"seed", seed ? std::to_string(*seed) : std::string()},
      {"support_mode", support_mode == SupportMode::known ? "known" : "estimated"},
      {"spurious", spurious == SpuriousPolicy::ignore ? "ignore" : "penalize"},
      {"pursuit",
       {{"max_iterations", pursuit.max_iterations},
        {"pseudo_inverse_init", pursuit.pseudo_inverse_init},
        {"svd_condition_limit", pursuit.svd_condition_limit},
        {"allow_rank_deficient", pursuit.allow_rank_deficient}}},
      {"chain",
       {{"chip_rate", chain.chip_rate},
        {"baseband_oversampling", chain.baseband_oversampling},
        {"carrier", chain.carrier},
        {"rf_sample_rate", chain.rf_sample_rate},
        {"rrc_rolloff", chain.rrc_rolloff},
        {"rrc_span", chain.rrc_span}}},
      {"phase",
       {{"deltas", phase.deltas},
        {"rhos", phase.rhos},
        {"batch_trials", phase.batch_trials},
        {"max_trials", phase.max_trials},
        {"surface_tolerance", phase.surface_tolerance},
        {"success_mse", phase.success_mse},
        {"skip_after_failures", phase.skip_after_failures},
        {"symbols", to_string(phase.symbols)}}},
      {"complexity",
       {{"sparsity_multipliers", complexity.sparsity_multipliers},
        {"trials", complexity.trials},
        {"overhead", complexity.overhead}}},
      {"mfsk_reference", mfsk_reference},
  };
  return j;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  if (count == 0) return;
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double grid_to_snr(double value_db, GridAxis axis, std::size_t sparsity, std::size_t n) {
  const double v = db_to_linear(value_db);
  if (axis == GridAxis::snr_db) return v;
  return v * 2.0 * static_cast<double>(sparsity) / static_cast<double>(n);
}

ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  switch (spec.kind) {
    case ExperimentKind::phase:
      return run_phase_transition(spec, options);
    case ExperimentKind::ber_discrete:
      return run_ber_discrete(spec, options);
    case ExperimentKind::ber_rf:
    case ExperimentKind::quantization:
      return run_ber_rf(spec, options);
    case ExperimentKind::complexity:
      return run_complexity(spec, options);
  }
  throw ConfigError("unknown experiment kind");
}

// ---- BER ----

namespace {

struct SlotOutcome {
  std::size_t errors = 0;
  std::size_t iterations = 0;
  std::size_t missed = 0;
  std::size_t spurious = 0;
};

const std::vector<std::string> kBerColumns{
    "experiment", "curve",  "operator", "kappa",  "m",      "sparsity",        "quantizer_bits",
    "axis",       "x_db",   "slots",    "bits",   "errors", "ber",             "ber_stderr",
    "capped",     "mean_iterations",    "missed", "spurious", "seed",          "wall_s"};

ResultTable run_ber(const ExperimentSpec& spec, const RunOptions& opts, bool rf) {
  spec.validate();
  const GoldDictionary dict = build_gold_dictionary(spec.m);
  const RealMatrix& psi = dict.psi;
  const auto fast = std::make_shared<const GoldCorrelator>(dict);
  const auto n = static_cast<std::size_t>(psi.cols());
  const std::size_t s = spec.sparsity;
  const std::size_t bits_per_slot = 2 * s;
  const std::uint64_t seed = *spec.seed;
  const std::vector<double> grid =
      spec.noiseless ? std::vector<double>{std::numeric_limits<double>::infinity()} : spec.grid;
  const std::string kind = to_string(spec.kind);

  ResultTable table(kBerColumns, spec.to_json());

  for (std::size_t ci = 0; ci < spec.curves.size(); ++ci) {
    const CurveSpec& curve = spec.curves[ci];
    const bool fresh = per_slot_operator(curve, true);
    std::optional<Receiver> fixed;
    if (!fresh) {
      Rng op_rng(seed, {kOperatorStream, ci});
      fixed = make_receiver(curve, psi, build_operator(curve.op, n, curve.kappa, op_rng), fast);
      if (opts.dump_operator) opts.dump_operator(curve.label, fixed->op);
    }
    ChainConfig chain = spec.chain;
    chain.quantizer_bits = curve.quantizer_bits;

    auto simulate = [&](std::size_t point, double x_db, std::size_t slot, RfTrace* trace) {
      Rng data(seed, {kDataStream, point, slot});
      const Support support = random_support(n, s, data);
      const BitBlock bits = random_bits(bits_per_slot, data);
      const EncodedSlot enc = encode(bits, support, psi);

      std::optional<Receiver> local;
      if (fresh) {
        Rng op_rng(seed, {kOperatorStream, ci, point, slot});
        local = make_receiver(curve, psi, build_operator(curve.op, n, curve.kappa, op_rng), fast);
      }
      const Receiver& rx = fresh ? *local : *fixed;

      ComplexVector y;
      if (rf) {
        const double ebn0_db = spec.axis == GridAxis::ebn0_db || std::isinf(x_db)
                                   ? x_db
                                   : x_db + linear_to_db(static_cast<double>(n) / static_cast<double>(bits_per_slot));
        y = rf_receive(enc.x, rx.op, chain, ebn0_db, bits_per_slot, data, trace);
      } else {
        const double snr_db = std::isinf(x_db) ? x_db : linear_to_db(grid_to_snr(x_db, spec.axis, s, n));
        y = rx.op.apply(add_awgn(enc.x, snr_db, data).samples);
      }
      if (rx.whitener) y = rx.whitener->apply(y);
      const PursuitResult pr = subspace_pursuit(rx.a, y, s, spec.pursuit);
      const SlotDecision d = decode(pr.alpha_hat, enc.symbols.support, bits, spec.support_mode, spec.spurious);
      return SlotOutcome{d.bit_errors, pr.iterations, d.missed, d.spurious};
    };

    if (fresh && opts.dump_operator) {
      Rng op_rng(seed, {kOperatorStream, ci, 0, 0});
      opts.dump_operator(curve.label, build_operator(curve.op, n, curve.kappa, op_rng));
    }

    for (std::size_t p = 0; p < grid.size(); ++p) {
      const double x_db = grid[p];
      const auto t0 = Clock::now();
      if (rf && opts.tap && p == 0) {
        RfTrace trace;
        simulate(p, x_db, 0, &trace);
        opts.tap(curve.label, trace);
      }

      std::size_t slots = 0, errors = 0, iterations = 0, missed = 0, spurious = 0;
      bool capped = false;
      std::size_t chunk = 32;
      // Slots are simulated in chunks but scanned in order, so the stopping
      // slot (and every count) is the same for any worker count.
      while (true) {
        const std::size_t count = std::min(chunk, spec.stop.max_slots - slots);
        std::vector<SlotOutcome> out(count);
        const std::size_t base = slots;
        parallel_for(count, opts.threads, [&](std::size_t i) { out[i] = simulate(p, x_db, base + i, nullptr); });
        bool reached = false;
        for (const auto& o : out) {
          ++slots;
          errors += o.errors;
          iterations += o.iterations;
          missed += o.missed;
          spurious += o.spurious;
          if (errors >= spec.stop.target_errors) {
            reached = true;
            break;
          }
        }
        if (reached) break;
        if (slots >= spec.stop.max_slots) {
          capped = true;
          break;
        }
        chunk = std::min<std::size_t>(chunk * 2, 4096);
      }

      const double total_bits = static_cast<double>(slots * bits_per_slot);
      const double ber = static_cast<double>(errors) / total_bits;
      table.add_row({kind, curve.label, std::string(to_string(curve.op)), static_cast<std::int64_t>(curve.kappa),
                     static_cast<std::int64_t>(spec.m), static_cast<std::int64_t>(s),
                     static_cast<std::int64_t>(curve.quantizer_bits.value_or(0)), to_string(spec.axis), x_db,
                     static_cast<std::int64_t>(slots), static_cast<std::int64_t>(slots * bits_per_slot),
                     static_cast<std::int64_t>(errors), ber, std::sqrt(ber * (1.0 - ber) / total_bits),
                     static_cast<std::int64_t>(capped), static_cast<double>(iterations) / static_cast<double>(slots),
                     static_cast<std::int64_t>(missed), static_cast<std::int64_t>(spurious), seed_text(spec),
                     seconds_since(t0)});
      report(opts, curve.label + " @ " + fmt(x_db) + " dB: BER " + fmt(ber) + " (" + std::to_string(errors) +
                       " errors / " + std::to_string(slots) + " slots)");
      if (spec.stop.ber_floor > 0.0 && ber < spec.stop.ber_floor) break;
    }
  }

  if (spec.mfsk_reference && s == 1 && !spec.noiseless) {
    const bool ebn0 = rf || spec.axis == GridAxis::ebn0_db;
    for (double x_db : grid) {
      double value;
      if (ebn0) {
        const double e = spec.axis == GridAxis::ebn0_db || !rf
                             ? db_to_linear(x_db)
                             : db_to_linear(x_db) * static_cast<double>(n) / static_cast<double>(bits_per_slot);
        value = theoretical_ber_mfsk(n, e, MfskAxis::ebn0);
      } else {
        value = theoretical_ber_mfsk(n, db_to_linear(x_db), MfskAxis::snr);
      }
      table.add_row({kind, std::string("mfsk_theory"), std::string("theory"), std::int64_t{1},
                     static_cast<std::int64_t>(spec.m), static_cast<std::int64_t>(s), std::int64_t{0},
                     to_string(spec.axis), x_db, std::int64_t{0}, std::int64_t{0}, std::int64_t{0}, value, 0.0,
                     std::int64_t{0}, 0.0, std::int64_t{0}, std::int64_t{0}, seed_text(spec), 0.0});
    }
  }
  return table;
}

}  // namespace

ResultTable run_ber_discrete(const ExperimentSpec& spec, const RunOptions& options) {
  return run_ber(spec, options, false);
}

ResultTable run_ber_rf(const ExperimentSpec& spec, const RunOptions& options) { return run_ber(spec, options, true); }

// ---- phase transition and complexity ----

namespace {

std::size_t rows_for(double delta, std::size_t n) {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(delta * static_cast<double>(n))), 1, n);
}

std::size_t sparsity_for(double rho, std::size_t m) {
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(rho * static_cast<double>(m))), 1, m);
}

struct Trial {
  ComplexVector alpha;
  ComplexVector x;
};

Trial draw_trial(std::uint64_t seed, std::size_t i, std::size_t j, std::size_t t, std::size_t s,
                 const RealMatrix& psi, TrialSymbols symbols) {
  Rng data(seed, {kDataStream, i, j, t});
  const auto n = static_cast<std::size_t>(psi.cols());
  const Support support = random_support(n, s, data);
  if (symbols == TrialSymbols::qpsk) {
    EncodedSlot enc = encode(random_bits(2 * s, data), support, psi);
    return {std::move(enc.symbols.alpha), std::move(enc.x)};
  }
  Trial trial;
  trial.alpha = ComplexVector::Zero(static_cast<Eigen::Index>(n));
  for (auto k : support) trial.alpha[static_cast<Eigen::Index>(k)] = data.sign();
  trial.x = psi.cast<Complex>() * trial.alpha;
  return trial;
}

}  // namespace

ResultTable run_phase_transition(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  const GoldDictionary dict = build_gold_dictionary(spec.m);
  const RealMatrix& psi = dict.psi;
  const auto fast = std::make_shared<const GoldCorrelator>(dict);
  const auto n = static_cast<std::size_t>(psi.cols());
  const std::uint64_t seed = *spec.seed;
  const auto& g = spec.phase;
  const std::size_t nd = g.deltas.size();
  const std::size_t nr = g.rhos.size();

  ResultTable table({"experiment", "curve", "operator", "m", "delta_index", "rho_index", "delta_target",
                     "rho_target", "delta", "rho", "rows_m", "sparsity", "trials", "successes", "success_rate",
                     "mean_iterations", "skipped", "batches", "seed", "wall_s"},
                    spec.to_json());

  for (std::size_t ci = 0; ci < spec.curves.size(); ++ci) {
    const CurveSpec& curve = spec.curves[ci];
    const bool fresh = per_slot_operator(curve, false);
    const std::size_t cells = nd * nr;
    std::vector<std::size_t> trials(cells, 0), successes(cells, 0), iterations(cells, 0);
    std::vector<double> seconds(cells, 0.0);
    std::vector<bool> skipped(cells, false);
    std::vector<double> previous;
    std::size_t batches = 0;

    while (true) {
      for (std::size_t i = 0; i < nd; ++i) {
        const std::size_t m = rows_for(g.deltas[i], n);
        std::optional<Receiver> column;
        if (!fresh) {
          Rng op_rng(seed, {kOperatorStream, ci, i});
          column = make_receiver(curve, psi, build_operator_rows(curve.op, n, m, op_rng), fast);
          if (opts.dump_operator && batches == 0 && i == 0) opts.dump_operator(curve.label, column->op);
        }
        std::size_t consecutive_failures = 0;
        for (std::size_t j = 0; j < nr; ++j) {
          const std::size_t cell = i * nr + j;
          if (skipped[cell]) continue;
          const std::size_t s = sparsity_for(g.rhos[j], m);
          const std::size_t first = trials[cell];
          std::vector<std::uint8_t> ok(g.batch_trials);
          std::vector<std::size_t> k(g.batch_trials);
          std::vector<double> dt(g.batch_trials);
          parallel_for(g.batch_trials, opts.threads, [&](std::size_t b) {
            const std::size_t t = first + b;
            const Trial trial = draw_trial(seed, i, j, t, s, psi, g.symbols);
            std::optional<Receiver> local;
            if (fresh) {
              Rng op_rng(seed, {kOperatorStream, ci, i, j, t});
              local = make_receiver(curve, psi, build_operator_rows(curve.op, n, m, op_rng), fast);
            }
            const Receiver& rx = fresh ? *local : *column;
            ComplexVector y = rx.op.apply(trial.x);
            if (rx.whitener) y = rx.whitener->apply(y);
            const auto t0 = Clock::now();
            const PursuitResult pr = subspace_pursuit(rx.a, y, s, spec.pursuit);
            dt[b] = seconds_since(t0);
            const double err = (pr.alpha_hat - trial.alpha).squaredNorm() / trial.alpha.squaredNorm();
            ok[b] = err < g.success_mse;
            k[b] = pr.iterations;
          });
          std::size_t batch_successes = 0;
          for (std::size_t b = 0; b < g.batch_trials; ++b) {
            batch_successes += ok[b];
            iterations[cell] += k[b];
            seconds[cell] += dt[b];
          }
          successes[cell] += batch_successes;
          trials[cell] += g.batch_trials;

          if (batches == 0 && g.skip_after_failures > 0) {
            consecutive_failures = batch_successes == 0 ? consecutive_failures + 1 : 0;
            if (consecutive_failures >= g.skip_after_failures) {
              for (std::size_t r = j + 1; r < nr; ++r) skipped[i * nr + r] = true;
            }
          }
        }
        report(opts, curve.label + " delta " + fmt(g.deltas[i]) + " batch " + std::to_string(batches + 1));
      }
      ++batches;

      std::vector<double> surface(cells, 0.0);
      for (std::size_t c = 0; c < cells; ++c) {
        if (trials[c]) surface[c] = static_cast<double>(successes[c]) / static_cast<double>(trials[c]);
      }
      bool converged = false;
      if (!previous.empty()) {
        double msd = 0.0;
        for (std::size_t c = 0; c < cells; ++c) msd += (surface[c] - previous[c]) * (surface[c] - previous[c]);
        converged = msd / static_cast<double>(cells) < g.surface_tolerance;
      }
      previous = std::move(surface);
      if (converged || batches * g.batch_trials + g.batch_trials > g.max_trials) break;
    }

    for (std::size_t i = 0; i < nd; ++i) {
      const std::size_t m = rows_for(g.deltas[i], n);
      for (std::size_t j = 0; j < nr; ++j) {
        const std::size_t cell = i * nr + j;
        const std::size_t s = sparsity_for(g.rhos[j], m);
        const double tr = static_cast<double>(trials[cell]);
        table.add_row({std::string("phase"), curve.label, std::string(to_string(curve.op)),
                       static_cast<std::int64_t>(spec.m), static_cast<std::int64_t>(i), static_cast<std::int64_t>(j),
                       g.deltas[i], g.rhos[j], static_cast<double>(m) / static_cast<double>(n),
                       static_cast<double>(s) / static_cast<double>(m), static_cast<std::int64_t>(m),
                       static_cast<std::int64_t>(s), static_cast<std::int64_t>(trials[cell]),
                       static_cast<std::int64_t>(successes[cell]), tr > 0 ? successes[cell] / tr : 0.0,
                       tr > 0 ? static_cast<double>(iterations[cell]) / tr : 0.0,
                       static_cast<std::int64_t>(skipped[cell]), static_cast<std::int64_t>(batches), seed_text(spec),
                       seconds[cell]});
      }
    }
  }
  return table;
}

ResultTable run_complexity(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  const GoldDictionary dict = build_gold_dictionary(spec.m);
  const RealMatrix& psi = dict.psi;
  // Dense correlations here: the timings are compared with the operation-count
  // model, which assumes an explicit A^T v product.
  const std::shared_ptr<const GoldCorrelator> fast;
  const auto n = static_cast<std::size_t>(psi.cols());
  const std::uint64_t seed = *spec.seed;
  const auto& g = spec.phase;
  const CurveSpec& curve = spec.curves.front();
  const bool fresh = per_slot_operator(curve, false);
  const std::size_t trials = spec.complexity.trials;

  ResultTable table({"experiment", "curve", "multiplier", "delta_index", "rho_index", "delta_target", "rho_target",
                     "delta", "rho", "rows_m", "sparsity", "fed_sparsity", "trials", "mean_iterations",
                     "predicted_flops", "predicted_with_overhead", "seed", "mean_pursuit_s"},
                    spec.to_json());

  for (std::size_t mult : spec.complexity.sparsity_multipliers) {
    for (std::size_t i = 0; i < g.deltas.size(); ++i) {
      const std::size_t m = rows_for(g.deltas[i], n);
      std::optional<Receiver> column;
      if (!fresh) {
        Rng op_rng(seed, {kOperatorStream, 0, i});
        column = make_receiver(curve, psi, build_operator_rows(curve.op, n, m, op_rng), fast);
      }
      for (std::size_t j = 0; j < g.rhos.size(); ++j) {
        const std::size_t s = sparsity_for(g.rhos[j], m);
        const std::size_t fed = mult * s;
        if (fed > m) continue;
        std::vector<std::size_t> k(trials);
        std::vector<double> dt(trials), flops(trials);
        parallel_for(trials, opts.threads, [&](std::size_t t) {
          const Trial trial = draw_trial(seed, i, j, t, s, psi, g.symbols);
          std::optional<Receiver> local;
          if (fresh) {
            Rng op_rng(seed, {kOperatorStream, 0, i, j, t});
            local = make_receiver(curve, psi, build_operator_rows(curve.op, n, m, op_rng), fast);
          }
          const Receiver& rx = fresh ? *local : *column;
          ComplexVector y = rx.op.apply(trial.x);
          if (rx.whitener) y = rx.whitener->apply(y);
          const auto t0 = Clock::now();
          const PursuitResult pr = subspace_pursuit(rx.a, y, fed, spec.pursuit);
          dt[t] = seconds_since(t0);
          k[t] = pr.iterations;
          flops[t] = static_cast<double>(predicted_cost({pr.iterations, fed, m, n}).closed_form_total);
        });
        double mean_k = 0.0, mean_t = 0.0, mean_f = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
          mean_k += static_cast<double>(k[t]);
          mean_t += dt[t];
          mean_f += flops[t];
        }
        const double tr = static_cast<double>(trials);
        mean_k /= tr;
        mean_t /= tr;
        mean_f /= tr;
        table.add_row({std::string("complexity"), curve.label, static_cast<std::int64_t>(mult),
                       static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), g.deltas[i], g.rhos[j],
                       static_cast<double>(m) / static_cast<double>(n),
                       static_cast<double>(s) / static_cast<double>(m), static_cast<std::int64_t>(m),
                       static_cast<std::int64_t>(s), static_cast<std::int64_t>(fed), static_cast<std::int64_t>(trials),
                       mean_k, mean_f, mean_f + spec.complexity.overhead * mean_k, seed_text(spec), mean_t});
      }
      report(opts, "complexity x" + std::to_string(mult) + " delta " + fmt(g.deltas[i]));
    }
  }
  return table;
}

// ---- analysis ----

std::vector<std::string> curve_labels(const ResultTable& table) {
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const std::string l = table.text(r, "curve");
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  }
  return labels;
}

BerCurve extract_curve(const ResultTable& table, const std::string& label) {
  BerCurve c;
  c.label = label;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.text(r, "curve") != label) continue;
    c.x_db.push_back(table.number(r, "x_db"));
    c.ber.push_back(table.number(r, "ber"));
    c.errors.push_back(table.number(r, "errors"));
    c.capped.push_back(table.number(r, "capped") != 0.0);
  }
  if (c.x_db.empty()) throw ConfigError("no rows for curve '" + label + "'");
  return c;
}

std::optional<double> crossing_db(const BerCurve& curve, double target) {
  auto lg = [](double b) { return std::log10(std::max(b, 1e-300)); };
  const double lt = std::log10(target);
  for (std::size_t i = 0; i + 1 < curve.x_db.size(); ++i) {
    const double a = lg(curve.ber[i]);
    const double b = lg(curve.ber[i + 1]);
    if (a >= lt && b <= lt && a > b) {
      const double f = (a - lt) / (a - b);
      return curve.x_db[i] + f * (curve.x_db[i + 1] - curve.x_db[i]);
    }
  }
  return std::nullopt;
}

std::optional<double> horizontal_shift(const BerCurve& a, const BerCurve& b, double target) {
  const auto xa = crossing_db(a, target);
  const auto xb = crossing_db(b, target);
  if (!xa || !xb) return std::nullopt;
  return *xb - *xa;
}

std::vector<ContourPoint> phase_contour(const ResultTable& table, double level) {
  std::vector<ContourPoint> out;
  std::map<std::pair<std::string, std::int64_t>, std::vector<std::size_t>> columns;
  std::vector<std::pair<std::string, std::int64_t>> order;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto key = std::make_pair(table.text(r, "curve"), static_cast<std::int64_t>(table.number(r, "delta_index")));
    if (!columns.count(key)) order.push_back(key);
    columns[key].push_back(r);
  }
  for (const auto& key : order) {
    auto rows = columns[key];
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return table.number(a, "rho") < table.number(b, "rho"); });
    ContourPoint p{key.first, table.number(rows.front(), "delta_target"), std::nullopt};
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
      const double pa = table.number(rows[k], "success_rate");
      const double pb = table.number(rows[k + 1], "success_rate");
      if (pa >= level && pb < level) {
        const double ra = table.number(rows[k], "rho");
        const double rb = table.number(rows[k + 1], "rho");
        p.rho = ra + (pa - level) / (pa - pb) * (rb - ra);
        break;
      }
    }
    out.push_back(p);
  }
  return out;
}

ResultTable contour_table(const std::vector<ContourPoint>& contour, const nlohmann::json& spec) {
  ResultTable t({"curve", "delta", "rho_crossing", "found"}, spec);
  for (const auto& p : contour) {
    t.add_row({p.curve, p.delta, p.rho.value_or(std::nan("")), static_cast<std::int64_t>(p.rho.has_value())});
  }
  return t;
}

double ReferenceContour::at(double d) const {
  if (delta.empty()) throw ConfigError("reference contour is empty");
  if (d <= delta.front()) return rho.front();
  if (d >= delta.back()) return rho.back();
  const auto it = std::upper_bound(delta.begin(), delta.end(), d);
  const std::size_t k = static_cast<std::size_t>(it - delta.begin());
  const double f = (d - delta[k - 1]) / (delta[k] - delta[k - 1]);
  return rho[k - 1] + f * (rho[k] - rho[k - 1]);
}

ReferenceContour load_reference_contour(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference contour '" + path + "'");
  ReferenceContour c;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream s(line);
    double d, r;
    char comma;
    if (!(s >> d >> comma >> r)) throw ConfigError("malformed reference line '" + line + "'");
    c.delta.push_back(d);
    c.rho.push_back(r);
  }
  return c;
}

std::optional<IterationLine> iteration_ridge(const ResultTable& table, std::size_t multiplier, double min_delta) {
  std::map<std::int64_t, std::pair<double, std::size_t>> by_rho;
  std::map<std::int64_t, double> rho_value;
  std::size_t columns = 0;
  std::map<std::int64_t, bool> seen_delta;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (static_cast<std::size_t>(table.number(r, "multiplier")) != multiplier) continue;
    if (table.number(r, "delta_target") < min_delta) continue;
    const double k = table.number(r, "mean_iterations");
    if (!std::isfinite(k)) continue;
    const auto j = static_cast<std::int64_t>(table.number(r, "rho_index"));
    const auto d = static_cast<std::int64_t>(std::llround(table.number(r, "delta_target") * 1e6));
    if (!seen_delta[d]) {
      seen_delta[d] = true;
      ++columns;
    }
    by_rho[j].first += k;
    by_rho[j].second += 1;
    rho_value[j] = table.number(r, "rho_target");
  }
  std::map<std::int64_t, double> mean;
  for (const auto& [j, acc] : by_rho) {
    if (acc.second == columns) mean[j] = acc.first / static_cast<double>(acc.second);
  }
  std::optional<IterationLine> best;
  for (const auto& [j, k] : mean) {
    const auto lo = mean.find(j - 1), hi = mean.find(j + 1);
    if (lo == mean.end() || hi == mean.end()) continue;
    const double contrast = k - 0.5 * (lo->second + hi->second);
    if (!best || std::abs(contrast) > std::abs(best->contrast)) best = IterationLine{rho_value[j], contrast};
  }
  return best;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

CostFit fit_cost_model(const ResultTable& table, std::size_t multiplier) {
  std::vector<double> t, f, k;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (static_cast<std::size_t>(table.number(r, "multiplier")) != multiplier) continue;
    t.push_back(table.number(r, "mean_pursuit_s"));
    f.push_back(table.number(r, "predicted_flops"));
    k.push_back(table.number(r, "mean_iterations"));
  }
  CostFit fit;
  fit.points = t.size();
  if (t.size() < 2) return fit;

  Eigen::MatrixXd x(static_cast<Eigen::Index>(t.size()), 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = f[i];
    x(static_cast<Eigen::Index>(i), 1) = k[i];
    y[static_cast<Eigen::Index>(i)] = t[i];
  }
  // Two-variable NNLS: the unconstrained solution if it is non-negative,
  // otherwise the better of the two single-column fits.
  Eigen::Vector2d coef = x.colPivHouseholderQr().solve(y);
  if (coef[0] < 0.0 || coef[1] < 0.0) {
    Eigen::Vector2d best = Eigen::Vector2d::Zero();
    double best_res = y.squaredNorm();
    for (int c = 0; c < 2; ++c) {
      const double denom = x.col(c).squaredNorm();
      if (denom <= 0.0) continue;
      const double v = std::max(0.0, x.col(c).dot(y) / denom);
      Eigen::Vector2d cand = Eigen::Vector2d::Zero();
      cand[c] = v;
      const double res = (y - x * cand).squaredNorm();
      if (res < best_res) {
        best_res = res;
        best = cand;
      }
    }
    coef = best;
  }
  fit.scale = coef[0];
  fit.overhead_per_iteration = coef[1];
  fit.c = coef[0] > 0.0 ? coef[1] / coef[0] : std::numeric_limits<double>::infinity();
  const Eigen::VectorXd fitted = x * coef;
  fit.pearson = pearson(t, std::vector<double>(fitted.data(), fitted.data() + fitted.size()));
  return fit;
}

}  // namespace css
