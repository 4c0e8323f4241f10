#include "css/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace css {

namespace {

std::string num(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::string opt_db(const std::optional<double>& v) { return v ? num(*v) + " dB" : "no crossing"; }

std::string kind_of(const ResultTable& t) {
  if (t.spec().contains("kind")) return t.spec()["kind"].get<std::string>();
  if (t.rows() && t.has_column("experiment")) return t.text(0, "experiment");
  return "";
}

std::string line_text(const std::optional<IterationLine>& line) {
  if (!line) return "none";
  return "rho " + num(line->rho) + " (K " + (line->contrast >= 0 ? "+" : "") + num(line->contrast) +
         " vs neighbours)";
}

}  // namespace

std::optional<std::string> find_curve(const ResultTable& table, OperatorKind op, std::size_t kappa,
                                      int quantizer_bits) {
  if (!table.has_column("operator") || !table.has_column("kappa")) return std::nullopt;
  const bool has_q = table.has_column("quantizer_bits");
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (table.text(r, "operator") != to_string(op)) continue;
    if (static_cast<std::size_t>(table.number(r, "kappa")) != kappa) continue;
    if (has_q && static_cast<int>(table.number(r, "quantizer_bits")) != quantizer_bits) continue;
    return table.text(r, "curve");
  }
  return std::nullopt;
}

std::optional<CheckResult> check_mfsk_shift(const ResultTable& table, double target, double tolerance) {
  const auto classic = find_curve(table, OperatorKind::identity, 1);
  bool has_theory = false;
  for (const auto& l : curve_labels(table)) has_theory |= l == "mfsk_theory";
  if (!classic || !has_theory) return std::nullopt;
  const auto shift = horizontal_shift(extract_curve(table, "mfsk_theory"), extract_curve(table, *classic), target);
  CheckResult r{"classic vs MFSK theory at BER " + num(target), shift && std::abs(*shift) <= tolerance,
                opt_db(shift), "|shift| <= " + num(tolerance) + " dB"};
  return r;
}

std::vector<CheckResult> check_noise_folding(const ResultTable& table, double target) {
  std::vector<CheckResult> out;
  const auto classic = find_curve(table, OperatorKind::identity, 1);
  const auto k2 = find_curve(table, OperatorKind::css, 2);
  const auto k4 = find_curve(table, OperatorKind::css, 4);
  if (classic && k2) {
    const auto s = horizontal_shift(extract_curve(table, *classic), extract_curve(table, *k2), target);
    out.push_back({"CSS kappa=2 vs classic", s && std::abs(*s - 3.0) <= 1.0, opt_db(s), "3 +- 1 dB"});
  }
  if (k2 && k4) {
    const auto s = horizontal_shift(extract_curve(table, *k2), extract_curve(table, *k4), target);
    out.push_back({"CSS kappa=4 vs CSS kappa=2", s && std::abs(*s - 3.0) <= 1.0, opt_db(s), "3 +- 1 dB"});
  }
  return out;
}

std::optional<CheckResult> check_css_vs_rd(const ResultTable& table, double target, double tolerance) {
  const auto css2 = find_curve(table, OperatorKind::css, 2);
  const auto rd2 = find_curve(table, OperatorKind::random_demodulator, 2);
  if (!css2 || !rd2) return std::nullopt;
  const auto s = horizontal_shift(extract_curve(table, *css2), extract_curve(table, *rd2), target);
  return CheckResult{"CSS vs RD at kappa=2", s && std::abs(*s) <= tolerance, opt_db(s),
                     "|shift| <= " + num(tolerance) + " dB"};
}

std::vector<CheckResult> check_rf_equivalence(const ResultTable& discrete, const ResultTable& rf, double target,
                                              double tolerance) {
  std::vector<CheckResult> out;
  for (const auto& label : curve_labels(rf)) {
    if (label == "mfsk_theory") continue;
    std::size_t row = 0;
    while (rf.text(row, "curve") != label) ++row;
    const OperatorKind op = parse_operator_kind(rf.text(row, "operator"));
    const auto kappa = static_cast<std::size_t>(rf.number(row, "kappa"));
    const int q = static_cast<int>(rf.number(row, "quantizer_bits"));
    if (q != 0) continue;
    const auto match = find_curve(discrete, op, kappa, 0);
    if (!match) continue;
    const auto s = horizontal_shift(extract_curve(discrete, *match), extract_curve(rf, label), target);
    out.push_back({"RF vs discrete (" + label + ", m=" + rf.text(row, "m") + ")", s && std::abs(*s) <= tolerance,
                   opt_db(s), "|shift| <= " + num(tolerance) + " dB at BER " + num(target)});
  }
  return out;
}

std::vector<CheckResult> check_quantization(const ResultTable& table, std::size_t target_errors) {
  std::vector<CheckResult> out;
  const auto c2 = find_curve(table, OperatorKind::identity, 1, 2);
  const auto s4 = find_curve(table, OperatorKind::css, 2, 4);
  const auto c4 = find_curve(table, OperatorKind::identity, 1, 4);
  if (!c2 || !s4 || !c4) return out;
  const BerCurve a = extract_curve(table, *c2), b = extract_curve(table, *s4), c = extract_curve(table, *c4);
  auto errors_at = [&](const BerCurve& k, double x) -> std::optional<std::pair<double, double>> {
    for (std::size_t i = 0; i < k.x_db.size(); ++i) {
      if (k.x_db[i] == x) return std::make_pair(k.errors[i], k.ber[i]);
    }
    return std::nullopt;
  };
  std::optional<double> best;
  std::pair<double, double> ea, eb, ec;
  for (double x : a.x_db) {
    const auto pa = errors_at(a, x), pb = errors_at(b, x), pc = errors_at(c, x);
    if (!pa || !pb || !pc) continue;
    const double t = static_cast<double>(target_errors);
    if (pa->first < t || pb->first < t || pc->first < t) continue;
    if (!best || x > *best) {
      best = x;
      ea = *pa;
      eb = *pb;
      ec = *pc;
    }
  }
  if (!best) {
    out.push_back({"quantization ordering", false, "no common point with enough errors", "one point"});
    return out;
  }
  const std::string at = " at " + num(*best) + " dB";
  out.push_back({"CSS@4-bit beats classic@2-bit" + at, eb.second < ea.second,
                 num(eb.second) + " vs " + num(ea.second), "BER(CSS@4) < BER(classic@2)"});
  out.push_back({"classic@4-bit beats CSS@4-bit" + at, ec.second < eb.second,
                 num(ec.second) + " vs " + num(eb.second), "BER(classic@4) < BER(CSS@4)"});
  return out;
}

std::vector<CheckResult> check_phase(const ResultTable& table, const std::vector<double>& deltas,
                                     const ReferenceContour* reference) {
  std::vector<CheckResult> out;
  const auto contour = phase_contour(table);
  std::map<std::string, std::string> by_op;
  for (std::size_t r = 0; r < table.rows(); ++r) by_op[table.text(r, "operator")] = table.text(r, "curve");
  auto rho_at = [&](const std::string& curve, double delta) -> std::optional<double> {
    for (const auto& p : contour) {
      if (p.curve == curve && std::abs(p.delta - delta) < 1e-9) return p.rho;
    }
    return std::nullopt;
  };
  const bool have_css = by_op.count("css") != 0, have_rd = by_op.count("rd") != 0;
  for (double d : deltas) {
    const auto rc = have_css ? rho_at(by_op["css"], d) : std::nullopt;
    const auto rr = have_rd ? rho_at(by_op["rd"], d) : std::nullopt;
    if (have_css && have_rd) {
      const bool ok = rc && rr && std::abs(*rc - *rr) <= 0.05;
      out.push_back({"CSS vs RD 0.5-crossing at delta " + num(d), ok,
                     (rc ? num(*rc) : std::string("none")) + " vs " + (rr ? num(*rr) : std::string("none")),
                     "|diff| <= 0.05"});
    }
    if (reference) {
      const double ref = reference->at(d);
      for (const auto& [name, rho] : {std::pair{"CSS", rc}, std::pair{"RD", rr}}) {
        if ((name == std::string("CSS") && !have_css) || (name == std::string("RD") && !have_rd)) continue;
        out.push_back({std::string(name) + " vs TST reference at delta " + num(d),
                       rho && std::abs(*rho - ref) <= 0.1, rho ? num(*rho) : std::string("none"),
                       num(ref) + " +- 0.1"});
      }
    }
  }
  return out;
}

std::vector<CheckResult> check_complexity(const ResultTable& table) {
  std::vector<CheckResult> out;
  std::map<std::size_t, bool> present;
  for (std::size_t r = 0; r < table.rows(); ++r) present[static_cast<std::size_t>(table.number(r, "multiplier"))] = true;
  if (present.count(1)) {
    const auto ridge = iteration_ridge(table, 1);
    out.push_back({"iteration line (fed S)", ridge && std::abs(ridge->rho - 0.5) <= 0.05, line_text(ridge),
                   "rho 0.5 +- 0.05"});
    const CostFit fit = fit_cost_model(table, 1);
    out.push_back({"measured vs predicted cost", fit.pearson > 0.8,
                   "r = " + num(fit.pearson) + ", c = " + num(fit.c), "r > 0.8"});
  }
  if (present.count(2)) {
    const auto ridge = iteration_ridge(table, 2);
    out.push_back({"iteration line (fed 2S)", ridge && std::abs(ridge->rho - 0.25) <= 0.05, line_text(ridge),
                   "rho 0.25 +- 0.05"});
  }
  return out;
}

std::vector<CheckResult> validate_tables(const std::vector<ResultTable>& tables, const ReferenceContour* reference) {
  std::vector<CheckResult> out;
  auto add = [&](auto&& v) { out.insert(out.end(), v.begin(), v.end()); };
  const ResultTable* discrete = nullptr;
  for (const auto& t : tables) {
    const std::string kind = kind_of(t);
    if (kind == "ber_discrete") {
      discrete = &t;
      if (auto r = check_mfsk_shift(t)) out.push_back(*r);
      add(check_noise_folding(t));
      if (auto r = check_css_vs_rd(t)) out.push_back(*r);
    } else if (kind == "quantization") {
      add(check_quantization(t));
    } else if (kind == "phase") {
      std::vector<double> deltas;
      for (std::size_t r = 0; r < t.rows(); ++r) {
        const double d = t.number(r, "delta_target");
        if (std::find(deltas.begin(), deltas.end(), d) == deltas.end()) deltas.push_back(d);
      }
      std::vector<double> wanted;
      for (double d : {0.3, 0.5, 0.7}) {
        for (double have : deltas) {
          if (std::abs(have - d) < 1e-9) wanted.push_back(have);
        }
      }
      add(check_phase(t, wanted.empty() ? deltas : wanted, reference));
    } else if (kind == "complexity") {
      add(check_complexity(t));
    }
  }
  for (const auto& t : tables) {
    if (discrete && kind_of(t) == "ber_rf") add(check_rf_equivalence(*discrete, t));
  }
  return out;
}

}  // namespace css
