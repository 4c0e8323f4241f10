#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "css/baseband.hpp"
#include "css/config.hpp"
#include "css/experiments.hpp"
#include "css/gold.hpp"
#include "css/pursuit.hpp"
#include "css/sampling.hpp"

namespace py = pybind11;
using namespace css;

namespace {

FeedbackPolynomial polynomial(const std::vector<int>& exponents) { return FeedbackPolynomial::from_exponents(exponents); }

py::dict dictionary_dict(const GoldDictionary& d) {
  py::dict out;
  out["psi"] = d.psi;
  out["m"] = d.m;
  out["t"] = d.t;
  out["g1"] = d.g1.chips;
  out["g2"] = d.g2.chips;
  out["correlation_values"] = d.correlation_values;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Compressive spread-spectrum receiver core";

  // Translators are tried newest first, so the subclass goes last.
  const auto& base = py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(mod, "DomainError", base.ptr());

  mod.def("gold_t", &gold_t, py::arg("m"));
  mod.def(
      "gold_dictionary",
      [](int m, std::optional<std::vector<int>> poly1, std::optional<std::vector<int>> poly2) {
        if (poly1.has_value() != poly2.has_value()) throw py::value_error("give both polynomials or neither");
        return dictionary_dict(poly1 ? build_gold_dictionary(polynomial(*poly1), polynomial(*poly2))
                                     : build_gold_dictionary(m));
      },
      py::arg("m") = 10, py::arg("poly1") = py::none(), py::arg("poly2") = py::none());
  mod.def(
      "m_sequence", [](const std::vector<int>& exponents) { return generate_m_sequence(polynomial(exponents)).chips; },
      py::arg("exponents"));
  mod.def(
      "periodic_correlation",
      [](const std::vector<int>& a, const std::vector<int>& b) { return periodic_correlation(a, b); }, py::arg("a"),
      py::arg("b"));

  py::class_<MeasurementOperator>(mod, "MeasurementOperator")
      .def_static(
          "build",
          [](const std::string& kind, std::size_t n, std::size_t kappa, std::uint64_t seed) {
            Rng rng(seed);
            return build_operator(parse_operator_kind(kind), n, kappa, rng);
          },
          py::arg("kind"), py::arg("n"), py::arg("kappa"), py::arg("seed") = 0)
      .def_property_readonly("kind", [](const MeasurementOperator& op) { return std::string(to_string(op.kind())); })
      .def_property_readonly("rows", &MeasurementOperator::rows)
      .def_property_readonly("cols", &MeasurementOperator::cols)
      .def_property_readonly("kappa", &MeasurementOperator::kappa)
      .def("apply", py::overload_cast<const ComplexVector&>(&MeasurementOperator::apply, py::const_), py::arg("x"))
      .def("apply_matrix", py::overload_cast<const RealMatrix&>(&MeasurementOperator::apply, py::const_),
           py::arg("x"))
      .def("apply_transpose", &MeasurementOperator::apply_transpose, py::arg("v"))
      .def("dense", &MeasurementOperator::dense);

  mod.def("measurement_count", &measurement_count, py::arg("n"), py::arg("kappa"));

  mod.def(
      "subspace_pursuit",
      [](const RealMatrix& a, const ComplexVector& y, std::size_t sparsity, std::size_t max_iterations) {
        PursuitOptions opts;
        opts.max_iterations = max_iterations;
        const PursuitResult r = subspace_pursuit(a, y, sparsity, opts);
        py::dict out;
        out["alpha_hat"] = r.alpha_hat;
        out["support"] = r.support;
        out["iterations"] = r.iterations;
        out["residual_norms"] = r.residual_norms;
        out["hit_iteration_cap"] = r.hit_iteration_cap;
        return out;
      },
      py::arg("a"), py::arg("y"), py::arg("sparsity"), py::arg("max_iterations") = 0);

  mod.def(
      "mfsk_ber",
      [](std::size_t alphabet, double value_db, const std::string& axis) {
        if (axis != "snr" && axis != "ebn0") throw py::value_error("axis must be 'snr' or 'ebn0'");
        return theoretical_ber_mfsk(alphabet, db_to_linear(value_db), axis == "snr" ? MfskAxis::snr : MfskAxis::ebn0);
      },
      py::arg("alphabet"), py::arg("value_db"), py::arg("axis") = "snr");

  mod.def(
      "predicted_cost",
      [](std::size_t iterations, std::size_t sparsity, std::size_t rows, std::size_t cols) {
        ComplexityModel m;
        m.iterations = iterations;
        m.sparsity = sparsity;
        m.rows = rows;
        m.cols = cols;
        const CostBreakdown c = predicted_cost(m);
        py::dict out;
        out["line_item_sum"] = c.line_item_sum;
        out["closed_form_total"] = c.closed_form_total;
        return out;
      },
      py::arg("iterations"), py::arg("sparsity"), py::arg("rows"), py::arg("cols"));

  mod.def(
      "run_config_text",
      [](const std::string& text, std::size_t threads, std::optional<std::uint64_t> seed) {
        RunConfig cfg = parse_run_config(text);
        if (seed) cfg.spec.seed = *seed;
        RunOptions opts;
        opts.threads = threads;
        ResultTable t;
        {
          py::gil_scoped_release release;
          t = run_experiment(cfg.spec, opts);
        }
        return t.to_json().dump();
      },
      py::arg("text"), py::arg("threads") = 1, py::arg("seed") = py::none());
}
