#pragma once

#include <optional>
#include <string>
#include <vector>

#include "css/experiments.hpp"
#include "css/results.hpp"

namespace css {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string measured;
  std::string expected;
};

/// Label of the first curve whose rows carry this operator, kappa and
/// quantizer setting (0 = unquantized).
std::optional<std::string> find_curve(const ResultTable& table, OperatorKind op, std::size_t kappa,
                                      int quantizer_bits = 0);

/// Classic (identity) curve vs the MFSK reference rows: |shift| <= tolerance
/// at `target` BER.
std::optional<CheckResult> check_mfsk_shift(const ResultTable& table, double target = 1e-3, double tolerance = 0.5);

/// CSS kappa=2 vs classic and CSS kappa=4 vs CSS kappa=2: shift 3 +- 1 dB.
std::vector<CheckResult> check_noise_folding(const ResultTable& table, double target = 1e-3);

/// |shift(CSS kappa=2, RD kappa=2)| <= 0.5 dB.
std::optional<CheckResult> check_css_vs_rd(const ResultTable& table, double target = 1e-3, double tolerance = 0.5);

/// Every curve present in both tables (same operator, kappa, quantizer):
/// |shift| <= tolerance at `target`. Both tables must share the grid axis.
std::vector<CheckResult> check_rf_equivalence(const ResultTable& discrete, const ResultTable& rf, double target = 1e-2,
                                              double tolerance = 1.0);

/// At the highest grid point where classic@2, CSS2@4 and classic@4 all
/// reached the target error count: BER(CSS@4) < BER(classic@2) and
/// BER(classic@4) < BER(CSS@4).
std::vector<CheckResult> check_quantization(const ResultTable& table, std::size_t target_errors = 100);

/// At each delta in `deltas`: |rho(CSS) - rho(RD)| <= 0.05 and, given a
/// reference, |rho - reference| <= 0.1 for both.
std::vector<CheckResult> check_phase(const ResultTable& table, const std::vector<double>& deltas,
                                     const ReferenceContour* reference);

/// Ridge of mean K at rho ~ 0.5 for S and ~ 0.25 for 2S (+- 0.05), and the
/// fitted cost model correlating above 0.8.
std::vector<CheckResult> check_complexity(const ResultTable& table);

/// Runs every check applicable to the given tables.
std::vector<CheckResult> validate_tables(const std::vector<ResultTable>& tables, const ReferenceContour* reference);

}  // namespace css
