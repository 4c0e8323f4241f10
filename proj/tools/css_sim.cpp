// Command-line front end: gen-gold, run, validate, plot.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "css/config.hpp"
#include "css/experiments.hpp"
#include "css/gold.hpp"
#include "css/svg.hpp"
#include "css/validation.hpp"

namespace fs = std::filesystem;
using namespace css;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDomain = 2;

std::vector<int> parse_exponents(const std::string& text) {
  std::vector<int> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("polynomial exponents must be comma-separated integers, got '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty polynomial");
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

ResultTable load_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open results '" + path.string() + "'");
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("results JSON is malformed: " + std::string(e.what()));
    }
    return ResultTable::from_json(j);
  }
  ResultTable t = ResultTable::read_csv(in);
  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  if (fs::exists(sidecar)) {
    std::ifstream js(sidecar);
    nlohmann::json j;
    js >> j;
    t.set_spec(j.value("spec", nlohmann::json::object()));
  }
  if (t.rows() == 0) throw ConfigError("results file '" + path.string() + "' has no rows");
  return t;
}

std::string kind_of(const ResultTable& t) {
  if (t.spec().contains("kind")) return t.spec()["kind"].get<std::string>();
  if (t.rows() && t.has_column("experiment")) return t.text(0, "experiment");
  return "";
}

template <typename Vec>
void write_vector_csv(const fs::path& path, const Vec& v) {
  std::ostringstream s;
  s << std::setprecision(17);
  if constexpr (std::is_same_v<typename Vec::Scalar, Complex>) {
    s << "index,re,im\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) s << i << ',' << v[i].real() << ',' << v[i].imag() << '\n';
  } else {
    s << "index,value\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) s << i << ',' << v[i] << '\n';
  }
  write_file(path, s.str());
}

std::string safe(const std::string& s) {
  std::string o;
  for (char c : s) o += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return o;
}

std::vector<std::string> plot_table(const ResultTable& t, const fs::path& stem, const ReferenceContour* reference) {
  std::vector<std::string> written;
  const std::string kind = kind_of(t);
  auto emit = [&](const fs::path& p, const std::string& svg) {
    write_file(p, svg);
    written.push_back(p.string());
  };
  if (kind == "phase") {
    for (const auto& label : curve_labels(t)) {
      emit(stem.string() + "_" + safe(label) + ".svg", phase_heatmap_svg(t, label, reference));
    }
  } else if (kind == "complexity") {
    std::set<std::size_t> mults;
    for (std::size_t r = 0; r < t.rows(); ++r) mults.insert(static_cast<std::size_t>(t.number(r, "multiplier")));
    for (std::size_t m : mults) {
      emit(stem.string() + "_iterations_x" + std::to_string(m) + ".svg", complexity_map_svg(t, m, "mean_iterations"));
      emit(stem.string() + "_time_x" + std::to_string(m) + ".svg", complexity_map_svg(t, m, "mean_pursuit_s"));
      emit(stem.string() + "_predicted_x" + std::to_string(m) + ".svg",
           complexity_map_svg(t, m, "predicted_with_overhead"));
    }
  } else {
    std::string title = t.spec().value("name", std::string());
    if (title.empty()) title = kind;
    emit(stem.string() + ".svg", ber_plot_svg(t, title));
  }
  return written;
}

std::optional<ReferenceContour> maybe_reference(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_reference_contour(path);
}

int cmd_gen_gold(int m, const std::string& poly1, const std::string& poly2, std::string out) {
  GoldDictionary dict = poly1.empty() && poly2.empty()
                            ? build_gold_dictionary(m)
                            : build_gold_dictionary(FeedbackPolynomial::from_exponents(parse_exponents(poly1)),
                                                    FeedbackPolynomial::from_exponents(parse_exponents(poly2)));
  if (poly1.empty() != poly2.empty()) throw ConfigError("--poly1 and --poly2 must be given together");
  if (out.empty()) out = "gold_m" + std::to_string(dict.m) + ".csv";
  fs::path path(out);
  std::ostringstream csv;
  write_dictionary_csv(dict, csv);
  write_file(path, csv.str());
  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  write_file(sidecar, dictionary_metadata(dict).dump(2) + "\n");
  std::cout << "wrote " << path.string() << " (" << dict.size() << "x" << dict.size() << ", t=" << dict.t << ") and "
            << sidecar.string() << "\n";
  return kOk;
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out_dir;
  std::string tap;
  bool dump_operator = false;
  bool no_plot = false;
  bool quiet = false;
  std::string reference;
};

int cmd_run(const RunArgs& a) {
  RunConfig cfg = load_run_config(a.config);
  ExperimentSpec& spec = cfg.spec;
  if (a.seed) {
    spec.seed = a.seed;
  } else if (!spec.seed) {
    if (const char* env = std::getenv("CSS_SEED")) {
      try {
        spec.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw ConfigError("CSS_SEED must be an unsigned integer");
      }
    }
  }
  if (spec.name.empty()) spec.name = fs::path(a.config).stem().string();
  const fs::path dir = a.out_dir.empty() ? fs::path(cfg.output_dir) : fs::path(a.out_dir);
  const fs::path stem = dir / safe(spec.name);
  const bool verbose = !a.quiet && cfg.verbosity > 0;

  static const std::set<std::string> stages{"tx_baseband", "rf", "rf_noisy", "rx_baseband", "chips", "measurements"};
  if (!a.tap.empty() && !stages.count(a.tap)) throw ConfigError("unknown tap stage '" + a.tap + "'");

  RunOptions opts;
  opts.threads = a.threads;
  if (verbose) opts.progress = [](const std::string& msg) { std::cerr << "[run] " << msg << "\n"; };
  if (!a.tap.empty()) {
    opts.tap = [&](const std::string& curve, const RfTrace& t) {
      const fs::path p = stem.string() + "_tap_" + safe(curve) + "_" + a.tap + ".csv";
      if (a.tap == "tx_baseband") write_vector_csv(p, t.tx_baseband.samples);
      if (a.tap == "rf") write_vector_csv(p, t.rf.samples);
      if (a.tap == "rf_noisy") write_vector_csv(p, t.rf_noisy.samples);
      if (a.tap == "rx_baseband") write_vector_csv(p, t.rx_baseband.samples);
      if (a.tap == "chips") write_vector_csv(p, t.chips);
      if (a.tap == "measurements") write_vector_csv(p, t.measurements);
    };
  }
  if (a.dump_operator) {
    opts.dump_operator = [&](const std::string& curve, const MeasurementOperator& op) {
      std::ostringstream s;
      write_operator_csv(op, s);
      write_file(stem.string() + "_operator_" + safe(curve) + ".csv", s.str());
    };
  }

  const ResultTable table = run_experiment(spec, opts);
  write_file(stem.string() + ".csv", table.csv());
  write_file(stem.string() + ".json", table.to_json().dump(2) + "\n");
  std::cout << "wrote " << stem.string() << ".csv and .json (" << table.rows() << " rows)\n";
  if (spec.kind == ExperimentKind::phase) {
    const ResultTable contour = contour_table(phase_contour(table), table.spec());
    write_file(stem.string() + "_contour.csv", contour.csv());
    std::cout << "wrote " << stem.string() << "_contour.csv\n";
  }
  if (cfg.plot && !a.no_plot) {
    const auto reference = maybe_reference(a.reference);
    for (const auto& f : plot_table(table, stem, reference ? &*reference : nullptr)) std::cout << "wrote " << f << "\n";
  }
  return kOk;
}

int cmd_validate(const std::vector<std::string>& files, const std::string& reference_path) {
  std::vector<ResultTable> tables;
  for (const auto& f : files) tables.push_back(load_table(f));
  const auto reference = maybe_reference(reference_path);
  const auto checks = validate_tables(tables, reference ? &*reference : nullptr);
  if (checks.empty()) {
    std::cerr << "no applicable checks for the given results\n";
    return kUsage;
  }
  bool all = true;
  std::cout << std::left << std::setw(6) << "result" << std::setw(52) << "check" << std::setw(40) << "measured"
            << "expected\n";
  for (const auto& c : checks) {
    all &= c.passed;
    std::cout << std::setw(6) << (c.passed ? "PASS" : "FAIL") << std::setw(52) << c.name << std::setw(40)
              << c.measured << c.expected << "\n";
  }
  return all ? kOk : kDomain;
}

int cmd_plot(const std::string& file, const std::string& out, const std::string& reference_path) {
  const ResultTable t = load_table(file);
  fs::path stem = out.empty() ? fs::path(file).replace_extension("") : fs::path(out).replace_extension("");
  const auto reference = maybe_reference(reference_path);
  for (const auto& f : plot_table(t, stem, reference ? &*reference : nullptr)) std::cout << "wrote " << f << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive spread-spectrum receiver simulator"};
  app.require_subcommand(1);

  int gold_m = 10;
  std::string poly1, poly2, gold_out;
  auto* gen = app.add_subcommand("gen-gold", "Write a Gold-code dictionary as CSV plus a JSON sidecar");
  gen->add_option("--m", gold_m, "LFSR degree (5, 7 or 10 without explicit polynomials)");
  gen->add_option("--poly1", poly1, "First feedback polynomial as exponents, e.g. 5,2");
  gen->add_option("--poly2", poly2, "Second feedback polynomial as exponents, e.g. 5,4,3,2");
  gen->add_option("--out", gold_out, "CSV path; the sidecar uses the same stem with .json");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", run_args.config, "YAML experiment file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", run_args.seed, "Master seed (overrides the config; CSS_SEED is the fallback)");
  run->add_option("--threads", run_args.threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out-dir", run_args.out_dir, "Output directory (overrides output.directory)");
  run->add_option("--tap", run_args.tap,
                  "Dump one RF stage of the first slot: tx_baseband, rf, rf_noisy, rx_baseband, chips, measurements");
  run->add_flag("--dump-operator", run_args.dump_operator, "Write each curve's first measurement operator as CSV");
  run->add_flag("--no-plot", run_args.no_plot, "Skip SVG output");
  run->add_flag("--quiet", run_args.quiet, "No progress lines");
  run->add_option("--reference", run_args.reference, "Reference contour CSV overlaid on phase heatmaps");

  std::vector<std::string> validate_files;
  std::string validate_reference;
  auto* validate = app.add_subcommand("validate", "Check result tables against the acceptance targets");
  validate->add_option("results", validate_files, "Result CSV or JSON files")->required();
  validate->add_option("--reference", validate_reference, "Reference contour CSV for phase checks");

  std::string plot_file, plot_out, plot_reference;
  auto* plot = app.add_subcommand("plot", "Render SVG plots from a result table");
  plot->add_option("results", plot_file, "Result CSV or JSON file")->required();
  plot->add_option("--out", plot_out, "Output path stem");
  plot->add_option("--reference", plot_reference, "Reference contour CSV for phase heatmaps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen_gold(gold_m, poly1, poly2, gold_out);
    if (*run) return cmd_run(run_args);
    if (*validate) return cmd_validate(validate_files, validate_reference);
    if (*plot) return cmd_plot(plot_file, plot_out, plot_reference);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
