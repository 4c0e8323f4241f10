#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "css/baseband.hpp"
#include "css/pursuit.hpp"
#include "css/results.hpp"
#include "css/rf_chain.hpp"
#include "css/sampling.hpp"

namespace css {

enum class ExperimentKind { phase, ber_discrete, ber_rf, quantization, complexity };
enum class GridAxis { snr_db, ebn0_db };

/// When a random operator (RD chipping, Rademacher entries) is redrawn.
enum class OperatorRefresh {
  /// BER runs: Rademacher per slot, RD per curve. Phase and complexity runs:
  /// RD per trial, Rademacher per delta column.
  automatic,
  /// Every slot or trial.
  slot,
  /// Once per curve (BER) or per delta column (phase, complexity).
  curve,
};

/// Nonzero coefficients of noiseless phase and complexity trials.
enum class TrialSymbols {
  /// Real +-1: one measurement vector.
  real,
  /// QPSK +-1+-j: real and imaginary parts share the support.
  qpsk,
};

std::string to_string(ExperimentKind kind);
std::string to_string(GridAxis axis);
std::string to_string(OperatorRefresh refresh);
std::string to_string(TrialSymbols symbols);

/// One receiver configuration; BER tables get one curve per entry.
struct CurveSpec {
  std::string label;
  OperatorKind op = OperatorKind::identity;
  std::size_t kappa = 1;
  /// Only meaningful for Rademacher operators.
  bool prewhiten = true;
  /// RF runs: bits per real sample after the measurement stage.
  std::optional<int> quantizer_bits;
  OperatorRefresh refresh = OperatorRefresh::automatic;
};

struct StopRule {
  std::size_t target_errors = 100;
  std::size_t max_slots = 1'000'000;
  /// Once a curve's BER drops below this value its remaining (higher SNR)
  /// points are not simulated. Zero disables.
  double ber_floor = 0.0;
};

struct PhaseGrid {
  std::vector<double> deltas;
  std::vector<double> rhos;
  std::size_t batch_trials = 20;
  std::size_t max_trials = 400;
  /// Stop adding batches when the mean squared change of the success
  /// surface between consecutive batches falls below this value.
  double surface_tolerance = 1e-5;
  /// A trial succeeds when ||alpha_hat - alpha||^2 / ||alpha||^2 is below this.
  double success_mse = 1e-6;
  /// After this many consecutive zero-success points in a delta column (first
  /// batch, ascending rho) the rest of the column is skipped and recorded as
  /// failures. Zero disables.
  std::size_t skip_after_failures = 0;
  TrialSymbols symbols = TrialSymbols::real;
};

struct ComplexityGrid {
  /// SP is fed multiplier * S for each entry; points with fed S > M are skipped.
  std::vector<std::size_t> sparsity_multipliers{1};
  std::size_t trials = 1;
  double overhead = 3e9;
};

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::ber_discrete;
  std::string name;
  int m = 10;
  std::size_t sparsity = 1;
  std::vector<CurveSpec> curves;
  GridAxis axis = GridAxis::snr_db;
  std::vector<double> grid;
  bool noiseless = false;
  StopRule stop;
  std::optional<std::uint64_t> seed;
  SupportMode support_mode = SupportMode::estimated;
  SpuriousPolicy spurious = SpuriousPolicy::ignore;
  /// Experiments default to allowing rank-deficient fits: a degenerate
  /// subset is a reconstruction failure, not a harness error.
  PursuitOptions pursuit{0, false, 1e12, true};
  ChainConfig chain;
  PhaseGrid phase;
  ComplexityGrid complexity;
  /// BER runs with S = 1 also emit the non-coherent MFSK curve.
  bool mfsk_reference = true;

  /// Throws ConfigError on a missing seed, empty grids or inconsistent fields.
  void validate() const;
  nlohmann::json to_json() const;
};

struct RunOptions {
  std::size_t threads = 1;
  std::function<void(const std::string&)> progress;
  /// Called once with the first slot's RF stages (ber_rf / quantization).
  std::function<void(const std::string& curve, const RfTrace&)> tap;
  /// Called once per curve with the first operator drawn for it.
  std::function<void(const std::string& curve, const MeasurementOperator&)> dump_operator;
};

/// Runs `count` independent jobs on up to `threads` workers. Job i must
/// write only to slot i of its output so the result does not depend on the
/// schedule. The first exception thrown by a job is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job);

ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});
ResultTable run_phase_transition(const ExperimentSpec& spec, const RunOptions& options = {});
ResultTable run_ber_discrete(const ExperimentSpec& spec, const RunOptions& options = {});
/// Also serves the quantization study (per-curve quantizer_bits).
ResultTable run_ber_rf(const ExperimentSpec& spec, const RunOptions& options = {});
ResultTable run_complexity(const ExperimentSpec& spec, const RunOptions& options = {});

/// Linear SNR per chip for a grid value on the given axis:
/// snr_db directly, or Eb/N0 * 2S / N.
double grid_to_snr(double value_db, GridAxis axis, std::size_t sparsity, std::size_t n);

// ---- analysis of result tables ----

struct BerCurve {
  std::string label;
  std::vector<double> x_db;
  std::vector<double> ber;
  std::vector<double> errors;
  std::vector<bool> capped;
};

/// Rows of `label` in grid order. Throws ConfigError when absent.
BerCurve extract_curve(const ResultTable& table, const std::string& label);
std::vector<std::string> curve_labels(const ResultTable& table);

/// x where the curve first falls through `target`, interpolating log10(BER)
/// linearly in dB between the bracketing points. nullopt when the curve
/// never brackets the target. Zero-BER points are treated as 1e-300.
std::optional<double> crossing_db(const BerCurve& curve, double target);

/// crossing(b) - crossing(a): positive when b needs more SNR.
std::optional<double> horizontal_shift(const BerCurve& a, const BerCurve& b, double target);

/// 0.5-success crossing in rho for each delta column of a phase table.
struct ContourPoint {
  std::string curve;
  double delta = 0.0;
  std::optional<double> rho;
};
std::vector<ContourPoint> phase_contour(const ResultTable& table, double level = 0.5);
ResultTable contour_table(const std::vector<ContourPoint>& contour, const nlohmann::json& spec);

/// Reference transition curve (delta, rho) read from a two-column CSV with
/// '#' comments; linear interpolation in delta.
struct ReferenceContour {
  std::vector<double> delta;
  std::vector<double> rho;
  double at(double d) const;
};
ReferenceContour load_reference_contour(const std::string& path);

struct IterationLine {
  /// True S / M of the row, not the fed sparsity.
  double rho = 0.0;
  /// Row mean K minus the mean of its two neighbouring rows.
  double contrast = 0.0;
};

/// The interior rho row whose mean K (over delta columns with delta >=
/// min_delta) stands out most from its neighbours, in either direction, for
/// one sparsity multiplier of a complexity table. Rows with a skipped cell
/// are ignored.
std::optional<IterationLine> iteration_ridge(const ResultTable& table, std::size_t multiplier,
                                             double min_delta = 0.0);

struct CostFit {
  /// measured ~ scale * flops + overhead_seconds_per_iteration * K
  double scale = 0.0;
  double overhead_per_iteration = 0.0;
  /// overhead expressed in flop units (overhead / scale), comparable to c.
  double c = 0.0;
  double pearson = 0.0;
  std::size_t points = 0;
};

/// Non-negative least-squares fit of measured time on [flops, K] for one
/// multiplier, and the Pearson correlation of measured vs fitted.
CostFit fit_cost_model(const ResultTable& table, std::size_t multiplier = 1);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace css
