#include "ptqm/adiabatic.hpp"
#include "ptqm/errors.hpp"
#include "ptqm/frames.hpp"
#include "ptqm/linalg.hpp"
#include "ptqm/models.hpp"
#include "ptqm/scenario.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

namespace py = pybind11;
using namespace ptqm;

namespace
{

py::object to_python(const nlohmann::json& j)
{
	return py::module_::import("json").attr("loads")(j.dump());
}

// A dict or JSON text.
ScenarioConfig load(const py::object& config)
{
	if(py::isinstance<py::str>(config))
		return parse_config(config.cast<std::string>());
	return parse_config(py::module_::import("json").attr("dumps")(config).cast<std::string>());
}

} // namespace

PYBIND11_MODULE(ptqm, m)
{
	m.doc() = "PT-symmetric quantum dynamics: CPT frames, evolution and adiabatic analysis";

	auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
	py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
	py::register_exception<FrameAxiomError>(m, "FrameAxiomError", error.ptr());
	py::register_exception<NumericalError>(m, "NumericalError", error.ptr());

	py::class_<CPTFrame>(m, "CPTFrame")
		.def_property_readonly("C", &CPTFrame::C)
		.def_property_readonly("P", &CPTFrame::P)
		.def_property_readonly("K", [](const CPTFrame& f) { return f.T().matrix(); })
		.def_property_readonly("PC", &CPTFrame::PC)
		.def_property_readonly("pc_eigenvalues", &CPTFrame::pc_eigenvalues)
		.def_property_readonly("dim", &CPTFrame::dim)
		.def("inner", [](const CPTFrame& f, const ComplexVector& x, const ComplexVector& y) { return cpt_inner(f, x, y); })
		.def("norm", [](const CPTFrame& f, const ComplexVector& x) { return cpt_norm(f, x); })
		.def("adjoint", [](const CPTFrame& f, const ComplexMatrix& a) { return cpt_adjoint(f, a); })
		.def("norm_bounds", [](const CPTFrame& f) {
			const auto b = norm_equivalence_bounds(f);
			return std::make_tuple(b.lower, b.upper);
		});

	m.def(
		"validate_frames",
		[](const ComplexMatrix& C, const ComplexMatrix& P, const ComplexMatrix& K, double tol) {
			return validate_frames(C, P, AntilinearOperator(K), tol);
		},
		py::arg("C"), py::arg("P"), py::arg("K"), py::arg("tol") = default_frame_tol,
		"Validate a CPT frame; T acts as x -> K conj(x).");

	m.def(
		"symmetry_report",
		[](const CPTFrame& f, const ComplexMatrix& H, double tol) {
			const auto r = symmetry_report(f, H, tol);
			py::dict d;
			d["pt_symmetric"] = r.pt_symmetric;
			d["cpt_hermitian"] = r.cpt_hermitian;
			d["unbroken"] = r.unbroken;
			d["eigen_realness"] = r.eigen_realness;
			d["pt_residual"] = r.pt_residual;
			d["cpt_residual"] = r.cpt_residual;
			return d;
		},
		py::arg("frame"), py::arg("H"), py::arg("tol") = default_frame_tol);

	m.def(
		"eigenpairs",
		[](const ComplexMatrix& a) {
			const auto pairs = eigenpairs(a);
			ComplexVector values(static_cast<Eigen::Index>(pairs.size()));
			ComplexMatrix vectors(a.rows(), values.size());
			for(Eigen::Index i = 0; i < values.size(); ++i)
			{
				values(i) = pairs[i].value;
				vectors.col(i) = pairs[i].vector;
			}
			return std::make_tuple(values, vectors);
		},
		py::arg("matrix"), "Eigenvalues sorted ascending and unit eigenvectors as columns.");
	m.def("matrix_exp", &matrix_exp, py::arg("matrix"));

	auto tl = m.def_submodule("two_level", "Two-level model with P = swap and T = conjugation");
	tl.def("parity", &two_level::parity);
	tl.def("hamiltonian", &two_level::hamiltonian, py::arg("s"), py::arg("alpha"));
	tl.def("c_operator", &two_level::c_operator, py::arg("alpha"));
	tl.def("eigenvalues", &two_level::eigenvalues, py::arg("s"), py::arg("alpha"));
	tl.def("eigenvectors", &two_level::eigenvectors, py::arg("alpha"));
	tl.def("frame", [](double alpha) {
		return validate_frames(two_level::c_operator(alpha), two_level::parity(), AntilinearOperator::conjugation(2));
	});

	m.def(
		"normalize_config", [](const py::object& config) { return to_python(config_to_json(load(config))); },
		py::arg("config"), "Parse a scenario config (dict or JSON text) and return it with defaults filled in.");
	m.def(
		"run",
		[](const py::object& config, const std::string& out_dir) {
			const auto c = load(config);
			RunOutcome outcome;
			{
				py::gil_scoped_release release;
				outcome = run_scenario(c, out_dir);
			}
			return std::make_tuple(outcome.exit_code, to_python(outcome.summary));
		},
		py::arg("config"), py::arg("out_dir") = ".",
		"Run a scenario; returns (exit_code, summary). Writes trajectory, report and summary files.");
	m.def(
		"validate",
		[](const py::object& config, const std::string& out_dir) {
			const auto c = load(config);
			const auto outcome = validate_scenario(c, out_dir);
			return std::make_tuple(outcome.exit_code, to_python(outcome.summary));
		},
		py::arg("config"), py::arg("out_dir") = ".");
}
