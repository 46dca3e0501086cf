#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/experiment.hpp"

namespace py = pybind11;
using namespace heavytail;

namespace {

using Vec = std::vector<double>;

ExperimentReport run_json(const std::string& config_json, unsigned threads) {
  RunOptions opts;
  opts.threads = threads;
  py::gil_scoped_release release;
  return run_experiment(parse_config(config_json), opts);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Heavy-tailed weighted sums and linear processes";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConditionError>(m, "ConditionError", PyExc_ValueError);

  py::class_<TailModel>(m, "TailModel")
      .def_static("from_name", &TailModel::from_name, py::arg("name"))
      .def_property_readonly("name", [](const TailModel& t) { return std::string(t.name()); })
      .def_property_readonly("b_shift", &TailModel::b_shift)
      .def("H", &TailModel::H, py::arg("x"))
      .def("h_raw", &TailModel::h_raw, py::arg("x"))
      .def("magnitude", &TailModel::magnitude, py::arg("u"))
      .def("tail_prob", &TailModel::tail_prob, py::arg("x"))
      .def("eta", [](const TailModel& t, std::int64_t j) { return eval_eta(t, j); }, py::arg("j"))
      .def("__repr__", [](const TailModel& t) { return "TailModel('" + std::string(t.name()) + "')"; });

  py::class_<SlowlyVarying>(m, "SlowlyVarying")
      .def(py::init([](double c, double p) { return SlowlyVarying{c, p}; }),
           py::arg("constant") = 1.0, py::arg("log_power") = 0.0)
      .def_readonly("constant", &SlowlyVarying::constant)
      .def_readonly("log_power", &SlowlyVarying::log_power)
      .def("__call__", &SlowlyVarying::operator(), py::arg("x"));

  py::class_<CoefficientSpec>(m, "CoefficientSpec")
      .def_static("explicit", &CoefficientSpec::explicit_list, py::arg("values"),
                  py::arg("first_lag") = 1)
      .def_static("regvar", &CoefficientSpec::regvar, py::arg("alpha"),
                  py::arg("L") = SlowlyVarying{})
      .def_static("fractional", &CoefficientSpec::fractional, py::arg("d"))
      .def_static("from_json", &parse_coefficient_spec, py::arg("text"))
      .def_property_readonly("first_lag", &CoefficientSpec::first_lag)
      .def("coefficients", &CoefficientSpec::coefficients, py::arg("count"))
      .def("coefficient", &CoefficientSpec::coefficient, py::arg("lag"))
      .def("__repr__", &CoefficientSpec::describe);

  py::class_<WindowOptions>(m, "WindowOptions")
      .def(py::init([](double eps, std::int64_t cap) { return WindowOptions{eps, cap}; }),
           py::arg("eps_tail") = 1e-6, py::arg("max_window") = 100'000'000)
      .def_readwrite("eps_tail", &WindowOptions::eps_tail)
      .def_readwrite("max_window", &WindowOptions::max_window);

  py::class_<WeightArray>(m, "WeightArray")
      .def_readonly("entries", &WeightArray::entries)
      .def_readonly("origin", &WeightArray::origin)
      .def_readonly("truncation_tail_bound", &WeightArray::truncation_tail_bound)
      .def_readonly("meta", &WeightArray::meta)
      .def("__len__", &WeightArray::size)
      .def("at", &WeightArray::at, py::arg("j"));

  m.def("fractional_coeffs", &fractional_coeffs, py::arg("d"), py::arg("count"));
  m.def("window_sums", &window_sums, py::arg("spec"), py::arg("n"), py::arg("model"),
        py::arg("opts") = WindowOptions{});

  py::class_<NormalizerReport>(m, "NormalizerReport")
      .def_readonly("D", &NormalizerReport::D)
      .def_readonly("residual", &NormalizerReport::residual)
      .def_readonly("lower_bound_check", &NormalizerReport::lower_bound_check)
      .def_property_readonly("method",
                             [](const NormalizerReport& r) { return std::string(to_string(r.method)); });
  m.def("solve_Dn", [](const Vec& w, const TailModel& model) { return solve_Dn(w, model); },
        py::arg("weights"), py::arg("model"));
  m.def("condition_sum", [](const Vec& w, const TailModel& model, double s) {
    return ConditionSum(w, model)(s);
  }, py::arg("weights"), py::arg("model"), py::arg("s"));
  m.def("calpha", &calpha, py::arg("alpha"));
  m.def("check_gen", [](const Vec& w, const TailModel& model) {
    const auto g = check_gen(w, model);
    return py::dict(py::arg("sum_cond") = g.sum_cond, py::arg("max_cond") = g.max_cond);
  }, py::arg("weights"), py::arg("model"));
  m.def("check_coeffD", [](const Vec& w, const TailModel& model, double D) {
    return check_coeffD(w, model, D);
  }, py::arg("weights"), py::arg("model"), py::arg("D"));

  py::class_<InnovationStream>(m, "InnovationStream")
      .def(py::init([](const TailModel& model, const std::string& flavor, int mdep,
                       std::uint64_t seed, std::uint64_t stream_id) {
             return InnovationStream(model, {flavor_from_string(flavor), mdep}, seed, stream_id);
           }),
           py::arg("model"), py::arg("flavor") = "iid", py::arg("m") = 2, py::arg("seed") = 1,
           py::arg("stream_id") = 0)
      .def("draw", [](InnovationStream& s, std::size_t count) {
        Vec out(count);
        s.fill(out);
        return out;
      }, py::arg("count"));

  py::class_<PathStatistics>(m, "PathStatistics")
      .def_readonly("S", &PathStatistics::S)
      .def_readonly("V_raikov", &PathStatistics::V_raikov)
      .def_readonly("V_path", &PathStatistics::V_path)
      .def_readonly("T_D", &PathStatistics::T_D)
      .def_readonly("T_self", &PathStatistics::T_self)
      .def_readonly("ratio_LLN", &PathStatistics::ratio_LLN)
      .def_readonly("n", &PathStatistics::n)
      .def_readonly("representation_gap", &PathStatistics::representation_gap);

  m.def("weighted_sum", [](const Vec& w, const Vec& xi, std::optional<double> D) {
    WeightArray arr;
    arr.entries = w;
    arr.origin = 1;
    return weighted_sum(arr, xi, D);
  }, py::arg("weights"), py::arg("innovations"), py::arg("D") = py::none());

  py::class_<LinearProcessPlan>(m, "LinearProcessPlan")
      .def(py::init([](const CoefficientSpec& spec, std::int64_t n, const TailModel& model,
                       WindowOptions opts) { return LinearProcessPlan(spec, n, model, opts); }),
           py::arg("spec"), py::arg("n"), py::arg("model"), py::arg("opts") = WindowOptions{})
      .def_property_readonly("window", &LinearProcessPlan::window)
      .def_property_readonly("method",
                             [](const LinearProcessPlan& p) { return std::string(to_string(p.method())); })
      .def("path", [](const LinearProcessPlan& p, const Vec& z) { return p.path(z); },
           py::arg("innovations"))
      .def("statistics", [](const LinearProcessPlan& p, const Vec& z, std::optional<double> D) {
        return linear_process_path(p, z, D);
      }, py::arg("innovations"), py::arg("D") = py::none());

  m.def("ks_normal", [](const Vec& x) { return ks_normal(x); }, py::arg("sample"));
  m.def("cvm_normal", [](const Vec& x) { return cvm_normal(x); }, py::arg("sample"));
  m.def("ks_critical_95", &ks_critical_95, py::arg("count"));

  m.def("canonical_config", [](const std::string& text) { return parse_config(text).canonical_json(); },
        py::arg("config_json"));
  m.def("run_experiment_json", [](const std::string& text, unsigned threads) {
    return report_json(run_json(text, threads));
  }, py::arg("config_json"), py::arg("threads") = 0);
  m.def("run_and_write", [](const std::string& text, unsigned threads) {
    return write_outputs(run_json(text, threads));
  }, py::arg("config_json"), py::arg("threads") = 0);
}
