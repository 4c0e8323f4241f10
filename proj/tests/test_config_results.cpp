#include <doctest.h>

#include <sstream>

#include "css/config.hpp"
#include "css/results.hpp"

using namespace css;

namespace {

int error_line(const std::string& yaml) {
  try {
    parse_run_config(yaml);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -2;
}

}  // namespace

TEST_CASE("minimal BER config parses with defaults") {
  const auto cfg = parse_run_config(R"(kind: ber_discrete
m: 7
seed: 5
grid: [-20, -18, -16]
curves:
  - operator: identity
  - operator: css
    kappa: 2
)");
  const auto& s = cfg.spec;
  CHECK(s.kind == ExperimentKind::ber_discrete);
  CHECK(s.m == 7);
  CHECK(*s.seed == 5);
  CHECK(s.grid == std::vector<double>{-20, -18, -16});
  REQUIRE(s.curves.size() == 2);
  CHECK(s.curves[0].label == "identity");
  CHECK(s.curves[1].label == "css_k2");
  CHECK(s.axis == GridAxis::snr_db);
  CHECK(s.pursuit.allow_rank_deficient);
}

TEST_CASE("range grids and RF defaults") {
  const auto cfg = parse_run_config(R"(kind: quantization
m: 7
sparsity: 10
seed: 1
grid: {start: 0, stop: 2, step: 0.5}
curves:
  - {operator: css, kappa: 2, quantizer_bits: 4}
)");
  CHECK(cfg.spec.grid == std::vector<double>{0, 0.5, 1, 1.5, 2});
  CHECK(cfg.spec.axis == GridAxis::ebn0_db);
  CHECK(cfg.spec.curves[0].label == "css_k2_q4");
  CHECK(*cfg.spec.curves[0].quantizer_bits == 4);
}

TEST_CASE("phase trial symbols") {
  const char* base = "kind: phase\nm: 5\nseed: 1\nnoiseless: true\ncurves:\n  - operator: css\n"
                     "phase:\n  deltas: [0.5]\n  rhos: [0.1]\n";
  CHECK(parse_run_config(base).spec.phase.symbols == TrialSymbols::real);
  CHECK(parse_run_config(std::string(base) + "  symbols: qpsk\n").spec.phase.symbols == TrialSymbols::qpsk);
  CHECK(parse_run_config(std::string(base) + "  symbols: qpsk\n").spec.to_json()["phase"]["symbols"] == "qpsk");
  CHECK_THROWS_AS(parse_run_config(std::string(base) + "  symbols: bpsk\n"), ConfigError);
}

TEST_CASE("unknown keys are reported with their line") {
  CHECK(error_line("kind: phase\nm: 10\nsed: 3\n") == 3);
  CHECK(error_line("kind: ber_discrete\ncurves:\n  - operator: css\n    kapa: 2\n") == 4);
  CHECK(error_line("kind: ber_discrete\nstop:\n  target: 3\n") == 3);
  CHECK(error_line("kind: nonsense\n") == 1);
  CHECK(error_line("m: 10\n") >= 0);
  CHECK_THROWS_AS(parse_run_config(""), ConfigError);
  CHECK_THROWS_AS(parse_run_config("kind: ber_discrete\ngrid: {start: 3, stop: 1, step: 1}\n"), ConfigError);
}

TEST_CASE("result table CSV and JSON round-trip") {
  ResultTable t({"name", "count", "value", "wall_s"}, {{"kind", "demo"}});
  t.add_row({std::string("a,b"), std::int64_t{3}, 0.1, 1.5});
  t.add_row({std::string("c"), std::int64_t{-4}, std::numeric_limits<double>::infinity(), 0.0});
  CHECK_THROWS_AS(t.add_row({std::string("x")}), DimensionMismatch);

  std::istringstream in(t.csv());
  const ResultTable back = ResultTable::read_csv(in);
  CHECK(back.columns() == t.columns());
  CHECK(back.text(0, "name") == "a,b");
  CHECK(back.number(0, "count") == 3);
  CHECK(back.number(0, "value") == 0.1);
  CHECK(std::isinf(back.number(1, "value")));

  const ResultTable j = ResultTable::from_json(t.to_json());
  CHECK(j.spec()["kind"] == "demo");
  CHECK(std::isinf(j.number(1, "value")));
  CHECK(j.csv() == t.csv());
  CHECK(t.to_json()["format_version"] == ResultTable::kFormatVersion);

  const std::string no_timing = t.csv(false);
  CHECK(no_timing.find("wall_s") == std::string::npos);
  CHECK(is_timing_column("mean_pursuit_s"));
  CHECK_FALSE(is_timing_column("seed"));
  std::istringstream empty("");
  CHECK_THROWS_AS(ResultTable::read_csv(empty), ConfigError);
}
