#include "css/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace css {

namespace {

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

void check_keys(const YAML::Node& map, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!map.IsMap()) throw ConfigError(where + " must be a mapping", line_of(map));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where, line_of(kv.first));
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ConfigError("'" + key + "' must be a scalar", line_of(node));
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + key + "' has an invalid value '" + node.Scalar() + "'", line_of(node));
  }
}

template <typename T>
void read(const YAML::Node& map, const char* key, T& out) {
  if (const YAML::Node n = map[key]) out = scalar<T>(n, key);
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  std::vector<double> out;
  if (node.IsSequence()) {
    for (const auto& v : node) out.push_back(scalar<double>(v, key));
    return out;
  }
  if (node.IsMap()) {
    check_keys(node, {"start", "stop", "step"}, key);
    if (!node["start"] || !node["stop"] || !node["step"]) {
      throw ConfigError("'" + key + "' range needs start, stop and step", line_of(node));
    }
    const double start = scalar<double>(node["start"], "start");
    const double stop = scalar<double>(node["stop"], "stop");
    const double step = scalar<double>(node["step"], "step");
    if (!(step > 0.0) || stop < start) throw ConfigError("'" + key + "' range is empty", line_of(node));
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    // Rounded to 1e-9 so that e.g. 15 steps of 0.0666666666667 end at 1.
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
    return out;
  }
  throw ConfigError("'" + key + "' must be a list or a {start, stop, step} range", line_of(node));
}

template <typename E>
E parse_enum(const YAML::Node& node, const std::string& key, std::initializer_list<std::pair<const char*, E>> table) {
  const auto text = scalar<std::string>(node, key);
  for (const auto& [name, value] : table) {
    if (text == name) return value;
  }
  throw ConfigError("invalid value '" + text + "' for '" + key + "'", line_of(node));
}

CurveSpec parse_curve(const YAML::Node& node) {
  check_keys(node, {"label", "operator", "kappa", "prewhiten", "quantizer_bits", "refresh"}, "curve");
  CurveSpec c;
  if (const auto op = node["operator"]) {
    try {
      c.op = parse_operator_kind(scalar<std::string>(op, "operator"));
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_of(op));
    }
  }
  read(node, "kappa", c.kappa);
  read(node, "prewhiten", c.prewhiten);
  if (const auto q = node["quantizer_bits"]) {
    if (!q.IsNull()) c.quantizer_bits = scalar<int>(q, "quantizer_bits");
  }
  if (const auto r = node["refresh"]) {
    c.refresh = parse_enum<OperatorRefresh>(
        r, "refresh",
        {{"auto", OperatorRefresh::automatic}, {"slot", OperatorRefresh::slot}, {"curve", OperatorRefresh::curve}});
  }
  read(node, "label", c.label);
  if (c.label.empty()) {
    c.label = std::string(to_string(c.op));
    if (c.op != OperatorKind::identity) c.label += "_k" + std::to_string(c.kappa);
    if (c.quantizer_bits) c.label += "_q" + std::to_string(*c.quantizer_bits);
  }
  return c;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("config document is empty");
  check_keys(root,
             {"kind", "name", "m", "sparsity", "seed", "axis", "grid", "noiseless", "support_mode", "spurious",
              "mfsk_reference", "stop", "curves", "pursuit", "chain", "phase", "complexity", "output"},
             "top level");

  RunConfig cfg;
  ExperimentSpec& s = cfg.spec;
  if (!root["kind"]) throw ConfigError("missing required key 'kind'", line_of(root));
  s.kind = parse_enum<ExperimentKind>(root["kind"], "kind",
                                      {{"phase", ExperimentKind::phase},
                                       {"ber_discrete", ExperimentKind::ber_discrete},
                                       {"ber_rf", ExperimentKind::ber_rf},
                                       {"quantization", ExperimentKind::quantization},
                                       {"complexity", ExperimentKind::complexity}});
  if (s.kind == ExperimentKind::ber_rf || s.kind == ExperimentKind::quantization) s.axis = GridAxis::ebn0_db;
  read(root, "name", s.name);
  read(root, "m", s.m);
  read(root, "sparsity", s.sparsity);
  if (const auto n = root["seed"]) s.seed = scalar<std::uint64_t>(n, "seed");
  if (const auto n = root["axis"]) {
    s.axis = parse_enum<GridAxis>(n, "axis", {{"snr_db", GridAxis::snr_db}, {"ebn0_db", GridAxis::ebn0_db}});
  }
  if (const auto n = root["grid"]) s.grid = number_list(n, "grid");
  read(root, "noiseless", s.noiseless);
  read(root, "mfsk_reference", s.mfsk_reference);
  if (const auto n = root["support_mode"]) {
    s.support_mode = parse_enum<SupportMode>(n, "support_mode",
                                             {{"known", SupportMode::known}, {"estimated", SupportMode::estimated}});
  }
  if (const auto n = root["spurious"]) {
    s.spurious = parse_enum<SpuriousPolicy>(
        n, "spurious", {{"ignore", SpuriousPolicy::ignore}, {"penalize", SpuriousPolicy::penalize}});
  }
  if (const auto n = root["stop"]) {
    check_keys(n, {"target_errors", "max_slots", "ber_floor"}, "stop");
    read(n, "target_errors", s.stop.target_errors);
    read(n, "max_slots", s.stop.max_slots);
    read(n, "ber_floor", s.stop.ber_floor);
  }
  if (const auto n = root["curves"]) {
    if (!n.IsSequence()) throw ConfigError("'curves' must be a list", line_of(n));
    for (const auto& c : n) s.curves.push_back(parse_curve(c));
  }
  if (const auto n = root["pursuit"]) {
    check_keys(n, {"max_iterations", "pseudo_inverse_init", "svd_condition_limit", "allow_rank_deficient"}, "pursuit");
    read(n, "max_iterations", s.pursuit.max_iterations);
    read(n, "pseudo_inverse_init", s.pursuit.pseudo_inverse_init);
    read(n, "svd_condition_limit", s.pursuit.svd_condition_limit);
    read(n, "allow_rank_deficient", s.pursuit.allow_rank_deficient);
  }
  if (const auto n = root["chain"]) {
    check_keys(n, {"chip_rate", "baseband_oversampling", "carrier", "rf_sample_rate", "rrc_rolloff", "rrc_span"},
               "chain");
    read(n, "chip_rate", s.chain.chip_rate);
    read(n, "baseband_oversampling", s.chain.baseband_oversampling);
    read(n, "carrier", s.chain.carrier);
    read(n, "rf_sample_rate", s.chain.rf_sample_rate);
    read(n, "rrc_rolloff", s.chain.rrc_rolloff);
    read(n, "rrc_span", s.chain.rrc_span);
  }
  if (const auto n = root["phase"]) {
    check_keys(n,
               {"deltas", "rhos", "batch_trials", "max_trials", "surface_tolerance", "success_mse",
                "skip_after_failures", "symbols"},
               "phase");
    if (const auto d = n["deltas"]) s.phase.deltas = number_list(d, "deltas");
    if (const auto r = n["rhos"]) s.phase.rhos = number_list(r, "rhos");
    read(n, "batch_trials", s.phase.batch_trials);
    read(n, "max_trials", s.phase.max_trials);
    read(n, "surface_tolerance", s.phase.surface_tolerance);
    read(n, "success_mse", s.phase.success_mse);
    read(n, "skip_after_failures", s.phase.skip_after_failures);
    if (const auto sym = n["symbols"]) {
      s.phase.symbols =
          parse_enum<TrialSymbols>(sym, "symbols", {{"real", TrialSymbols::real}, {"qpsk", TrialSymbols::qpsk}});
    }
  }
  if (const auto n = root["complexity"]) {
    check_keys(n, {"sparsity_multipliers", "trials", "overhead"}, "complexity");
    if (const auto mlist = n["sparsity_multipliers"]) {
      s.complexity.sparsity_multipliers.clear();
      for (double v : number_list(mlist, "sparsity_multipliers")) {
        if (v < 1.0 || v != std::floor(v)) throw ConfigError("sparsity multipliers must be positive integers", line_of(mlist));
        s.complexity.sparsity_multipliers.push_back(static_cast<std::size_t>(v));
      }
    }
    read(n, "trials", s.complexity.trials);
    read(n, "overhead", s.complexity.overhead);
  }
  if (const auto n = root["output"]) {
    check_keys(n, {"directory", "verbosity", "plot"}, "output");
    read(n, "directory", cfg.output_dir);
    read(n, "verbosity", cfg.verbosity);
    read(n, "plot", cfg.plot);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

}  // namespace css
