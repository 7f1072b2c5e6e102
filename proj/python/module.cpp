#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "lifshitz/io.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace lifshitz;

namespace {

json to_json(const py::object& obj) {
  // a plain string is a preset name or file path, not serialized JSON
  if (py::isinstance<py::str>(obj)) return json(obj.cast<std::string>());
  const py::object dumps = py::module_::import("json").attr("dumps");
  return json::parse(dumps(obj).cast<std::string>());
}

py::object from_json(const json& j) {
  const py::object loads = py::module_::import("json").attr("loads");
  return loads(py::str(j.dump()));
}

py::dict result_dict(const LifshitzResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["unit"] = r.unit;
  d["l_max"] = r.l_max;
  d["remainder_est"] = r.remainder_estimate;
  d["evals"] = r.evals;
  return d;
}

QuadratureSpec make_spec(double tolerance) {
  QuadratureSpec spec;
  if (tolerance > 0.0) {
    spec.integral_rel_tol = tolerance;
    spec.matsubara_rel_tol = tolerance;
  }
  return spec;
}

}  // namespace

PYBIND11_MODULE(pylifshitz, m) {
  m.doc() = "Lifshitz-theory dispersion force calculations";

  py::class_<MaterialModel>(m, "Material")
      .def_static(
          "from_json",
          [](const py::object& spec, const std::string& base_dir) {
            return io::material_from_json(to_json(spec), base_dir);
          },
          py::arg("spec"), py::arg("base_dir") = ".")
      .def("to_json", [](const MaterialModel& m_) {
        return from_json(io::material_to_json(m_));
      })
      .def_property_readonly("name",
                             [](const MaterialModel& m_) { return m_.name; })
      .def("permittivity",
           [](const MaterialModel& m_, double xi, double temperature) {
             return eval_permittivity(m_, xi, temperature);
           },
           py::arg("xi"), py::arg("temperature") = 300.0);

  py::class_<Body>(m, "Body").def_static(
      "from_json",
      [](const py::object& spec, const std::string& base_dir) {
        return io::body_from_json(to_json(spec), base_dir);
      },
      py::arg("spec"), py::arg("base_dir") = ".");

  m.def(
      "free_energy",
      [](const Body& b1, const Body& b2, double a, double t, double tol) {
        return result_dict(free_energy(b1, b2, {a, t}, make_spec(tol)));
      },
      py::arg("body1"), py::arg("body2"), py::arg("separation"),
      py::arg("temperature"), py::arg("tolerance") = 0.0);

  m.def(
      "pressure",
      [](const Body& b1, const Body& b2, double a, double t, double tol) {
        return result_dict(casimir_pressure(b1, b2, {a, t}, make_spec(tol)));
      },
      py::arg("body1"), py::arg("body2"), py::arg("separation"),
      py::arg("temperature"), py::arg("tolerance") = 0.0);

  m.def(
      "force_gradient",
      [](const Body& sphere, const Body& plate, double radius, double a,
         double t, double tol) {
        return result_dict(force_gradient_sphere_plate(sphere, plate, radius,
                                                       {a, t}, make_spec(tol)));
      },
      py::arg("sphere"), py::arg("plate"), py::arg("radius"),
      py::arg("separation"), py::arg("temperature"), py::arg("tolerance") = 0.0);

  m.def(
      "entropy",
      [](const Body& b1, const Body& b2, double a, double t, double delta_t,
         double tol) {
        return result_dict(
            casimir_entropy(b1, b2, {a, t}, make_spec(tol), delta_t));
      },
      py::arg("body1"), py::arg("body2"), py::arg("separation"),
      py::arg("temperature"), py::arg("delta_t") = 0.0,
      py::arg("tolerance") = 0.0);

  m.def(
      "nernst_scan",
      [](const Body& b1, const Body& b2, double a,
         const std::vector<double>& temperatures, double tol) {
        const NernstScan scan =
            nernst_entropy_scan(b1, b2, a, temperatures, make_spec(tol));
        py::dict d;
        d["temperatures"] = scan.temperatures;
        d["entropies"] = scan.entropies;
        d["s0_estimate"] = scan.s0_estimate;
        d["classification"] = std::string(to_string(scan.classification));
        return d;
      },
      py::arg("body1"), py::arg("body2"), py::arg("separation"),
      py::arg("temperatures"), py::arg("tolerance") = 0.0);

  m.def(
      "run_sweep",
      [](const py::object& config, int threads, const std::string& base_dir) {
        const io::RunConfig cfg =
            io::parse_run_config(to_json(config), base_dir);
        const io::RunOutput out = io::run_sweep(cfg, threads);
        py::dict d;
        d["csv"] = out.csv();
        d["provenance"] = from_json(out.provenance);
        return d;
      },
      py::arg("config"), py::arg("threads") = 1, py::arg("base_dir") = ".");

  m.def(
      "ingest_optical_data",
      [](const std::string& csv_path, const py::object& extrapolation,
         const std::string& out_path, const std::string& name, int cache_l_max,
         double cache_temperature) {
        io::ingest_optical_data(csv_path, to_json(extrapolation), out_path,
                                name, cache_l_max, cache_temperature);
      },
      py::arg("csv_path"), py::arg("extrapolation"), py::arg("out_path"),
      py::arg("name") = "tabulated", py::arg("cache_l_max") = 1000,
      py::arg("cache_temperature") = 300.0);

  py::register_exception<io::ConfigError>(m, "ConfigError", PyExc_ValueError);
}
