// Python bindings for the main operations: germ construction, sampling,
// density profiles, separation verdicts, tangent cones and the scenario
// runner. Reports cross the boundary as JSON-shaped dicts.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "germlab/experiments.hpp"
#include "germlab/io.hpp"

namespace py = pybind11;
using namespace germlab;

namespace {

using SpecPtr = std::shared_ptr<VarietySpec>;
using ConstSpecPtr = std::shared_ptr<const VarietySpec>;

SpecPtr spec_from_config(const std::string& text) {
    return std::make_shared<VarietySpec>(parse_variety_config(text));
}

py::array_t<double> cloud_points(const SampleCloud& cloud) {
    py::array_t<double> arr({cloud.n(), cloud.dim});
    std::copy(cloud.coords.begin(), cloud.coords.end(), arr.mutable_data());
    return arr;
}

py::dict json_to_dict(const Json& j) {
    py::module_ json_mod = py::module_::import("json");
    return json_mod.attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "numerical laboratory for metric invariants of algebraic germs";

    py::class_<VarietySpec, SpecPtr>(m, "VarietySpec")
        .def_property_readonly("name", [](const VarietySpec& s) { return s.name; })
        .def_property_readonly("ambient_real_dim", &VarietySpec::ambient_real_dim)
        .def_property_readonly("germ_real_dim", &VarietySpec::germ_real_dim)
        .def("is_weighted_homogeneous", &VarietySpec::is_weighted_homogeneous)
        .def("eval",
             [](const VarietySpec& s, const std::vector<double>& p) {
                 auto vals = s.eval(p);
                 std::vector<std::pair<double, double>> out;
                 for (auto v : vals) out.emplace_back(v.real(), v.imag());
                 return out;
             })
        .def("scaled_residual",
             [](const VarietySpec& s, const std::vector<double>& p) {
                 return s.scaled_residual(p);
             });

    py::class_<SampleCloud>(m, "SampleCloud")
        .def_property_readonly("n", &SampleCloud::n)
        .def_property_readonly("dim", [](const SampleCloud& c) { return c.dim; })
        .def_property_readonly("points", &cloud_points)
        .def_property_readonly("radii",
                               [](const SampleCloud& c) {
                                   return py::array_t<double>(c.radius.size(),
                                                              c.radius.data());
                               })
        .def_property_readonly("residuals", [](const SampleCloud& c) {
            return py::array_t<double>(c.residual.size(), c.residual.data());
        });

    m.def("parse_variety_config", &spec_from_config, py::arg("text"));
    m.def("make_ak", [](int k) { return std::make_shared<VarietySpec>(make_ak(k)); });
    m.def("make_brieskorn", [](int p, int q, int r) {
        return std::make_shared<VarietySpec>(make_brieskorn(p, q, r));
    });
    m.def("make_briancon_speder", [](double t) {
        return std::make_shared<VarietySpec>(make_briancon_speder(t));
    });

    m.def("unit_ball_volume", &unit_ball_volume, py::arg("k"));

    m.def(
        "sample_sphere_slice",
        [](const SpecPtr& spec, double r, int n, uint64_t seed) {
            return sample_sphere_slice(ConstSpecPtr(spec), r, n, seed);
        },
        py::arg("spec"), py::arg("r"), py::arg("n"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());

    m.def(
        "weighted_scale",
        [](const SpecPtr& spec, const std::vector<double>& p, double t) {
            require(spec->weights.has_value(), ErrorCode::InputError, "spec has no weights");
            return weighted_scale(p, *spec->weights, t);
        },
        py::arg("spec"), py::arg("point"), py::arg("t"));

    m.def(
        "density_profile",
        [](const SpecPtr& spec, int k, double eps_hi, double eps_lo, int points, int n_per_eps,
           uint64_t seed) {
            DensityEstimate est;
            {
                py::gil_scoped_release release;
                est = density_profile(ConstSpecPtr(spec), k,
                                      geometric_grid(eps_hi, eps_lo, points), n_per_eps, seed);
            }
            return json_to_dict(to_json(est));
        },
        py::arg("spec"), py::arg("k"), py::arg("eps_hi") = 1e-1, py::arg("eps_lo") = 1e-3,
        py::arg("points") = 9, py::arg("n_per_eps") = 1500, py::arg("seed") = 1);

    m.def(
        "separation_verdict",
        [](const SpecPtr& spec, int link_n, int slice_n, uint64_t seed) {
            SeparationReport rep;
            {
                py::gil_scoped_release release;
                SeparationParams params;
                params.link_n = link_n;
                params.slice_n = slice_n;
                params.seed = seed;
                rep = separation_verdict(ConstSpecPtr(spec), spec->nvars() - 1, params);
            }
            return json_to_dict(to_json(rep));
        },
        py::arg("spec"), py::arg("link_n") = 20000, py::arg("slice_n") = 1500,
        py::arg("seed") = 1);

    m.def(
        "tangent_cone_sample",
        [](const SpecPtr& spec, double t_hi, double t_lo, int points, int n_per_t,
           uint64_t seed) {
            TangentConeSample tc;
            {
                py::gil_scoped_release release;
                TangentConeOptions opts;
                opts.n_per_t = n_per_t;
                opts.seed = seed;
                tc = tangent_cone_sample(ConstSpecPtr(spec), geometric_grid(t_hi, t_lo, points),
                                         opts);
            }
            return json_to_dict(to_json(tc));
        },
        py::arg("spec"), py::arg("t_hi") = 0.5, py::arg("t_lo") = 4e-3, py::arg("points") = 10,
        py::arg("n_per_t") = 4000, py::arg("seed") = 1);

    m.def("catalog_names", &catalog_names);

    m.def(
        "run_scenario",
        [](const std::string& name_or_config, uint64_t seed) {
            Scenario s;
            if (name_or_config.find('=') != std::string::npos)
                s = parse_scenario_config(name_or_config);
            else
                s = catalog_scenario(name_or_config);
            if (seed) s.seed = seed;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(s);
            }
            py::dict out;
            out["report"] = json_to_dict(r.report);
            out["exit_code"] = r.exit_code;
            return out;
        },
        py::arg("name_or_config"), py::arg("seed") = 0);

    py::register_exception<Error>(m, "GermlabError");
}
