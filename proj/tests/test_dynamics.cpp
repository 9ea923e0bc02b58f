#include "support.hpp"

#include "ptqm/dynamics.hpp"
#include "ptqm/errors.hpp"
#include "ptqm/grid.hpp"
#include "ptqm/models.hpp"

#include <catch2/catch.hpp>

#include <cmath>
#include <random>

using namespace ptqm;

namespace
{

EvolutionProblem constant_hermitian_problem(const ComplexMatrix& h, double t_end, std::size_t points)
{
	const Eigen::Index n = h.rows();
	EvolutionProblem pr;
	pr.H = OperatorFamily::constant(h, 0.0, t_end);
	pr.frames.P = ComplexMatrix::Identity(n, n);
	pr.frames.T = AntilinearOperator::conjugation(n);
	pr.frames.C = OperatorFamily::constant(ComplexMatrix::Identity(n, n), 0.0, t_end);
	pr.equation = Equation::Schrodinger;
	pr.grid = uniform_grid(0.0, t_end, points);
	pr.initial_state = ComplexVector::Unit(n, 0);
	return pr;
}

TwoLevelModel ramp_model(double t_end, std::size_t points, double alpha_end = 0.6)
{
	const auto grid = uniform_grid(0.0, t_end, points);
	return build_two_level(ScalarFunction::sinusoid(1.0, 0.3, 1.3), ScalarFunction::linear(0.0, alpha_end, 0.0, t_end),
	                       grid);
}

} // namespace

TEST_CASE("equation names", "[dynamics]")
{
	CHECK(parse_equation("schrodinger") == Equation::Schrodinger);
	CHECK(parse_equation("with_gain") == Equation::WithGain);
	CHECK(parse_equation("metric_compensated") == Equation::MetricCompensated);
	for(auto eq : {Equation::Schrodinger, Equation::WithGain, Equation::MetricCompensated})
		CHECK(parse_equation(equation_name(eq)) == eq);
	CHECK_THROWS_AS(parse_equation("heat"), std::invalid_argument);
}

TEST_CASE("problem validation", "[dynamics]")
{
	auto pr = constant_hermitian_problem(ComplexMatrix::Identity(2, 2), 1.0, 11);
	CHECK_NOTHROW(pr.validate());

	auto with_g = pr;
	with_g.G = OperatorFamily::constant(ComplexMatrix::Zero(2, 2), 0.0, 1.0);
	CHECK_THROWS_AS(with_g.validate(), std::invalid_argument);

	auto gain = pr;
	gain.equation = Equation::WithGain;
	CHECK_THROWS_AS(gain.validate(), std::invalid_argument);

	auto long_grid = pr;
	long_grid.grid = uniform_grid(0.0, 2.0, 11);
	CHECK_THROWS_AS(long_grid.validate(), std::invalid_argument);

	auto bad_state = pr;
	bad_state.initial_state = ComplexVector::Zero(3);
	CHECK_THROWS_AS(bad_state.validate(), std::invalid_argument);
}

TEST_CASE("automatic substep rule", "[dynamics]")
{
	ComplexMatrix h = ComplexMatrix::Zero(2, 2);
	h(0, 0) = 3.0;
	auto pr = constant_hermitian_problem(h, 1.0, 11);
	for(int s : substep_plan(pr))
		CHECK(s == 30);
	pr.hbar = 2.0;
	for(int s : substep_plan(pr))
		CHECK(s == 15);
	pr.substeps = 7;
	for(int s : substep_plan(pr))
		CHECK(s == 7);
	auto zero = constant_hermitian_problem(ComplexMatrix::Zero(2, 2), 1.0, 3);
	for(int s : substep_plan(zero))
		CHECK(s == 1);
}

TEST_CASE("constant Hermitian evolution matches the exponential", "[dynamics]")
{
	std::mt19937 rng{42U};
	const ComplexMatrix h = test::random_hermitian(3, rng);
	auto pr = constant_hermitian_problem(h, 2.0, 21);
	pr.hbar = 0.7;
	const auto traj = evolve_state(pr);
	REQUIRE(traj.points.size() == 21);
	for(const auto& p : traj.points)
	{
		const ComplexVector exact = matrix_exp(-I_unit * p.t / pr.hbar * h) * pr.initial_state;
		CHECK((p.state - exact).norm() < 1e-9);
		CHECK(std::abs(p.cpt_norm - 1.0) < 1e-9);
		CHECK(p.drift_rate == 0.0);
	}
}

TEST_CASE("RK4 global error is fourth order", "[dynamics]")
{
	std::mt19937 rng{8U};
	const ComplexMatrix h = test::random_hermitian(2, rng, 2.0);
	auto error = [&](int substeps) {
		auto pr = constant_hermitian_problem(h, 1.0, 2);
		pr.substeps = substeps;
		const auto traj = evolve_state(pr);
		const ComplexVector exact = matrix_exp(-I_unit * h) * pr.initial_state;
		return (traj.points.back().state - exact).norm();
	};
	const double ratio = error(20) / error(40);
	CHECK(ratio > 14.0);
	CHECK(ratio < 18.0);
}

TEST_CASE("constant-metric evolution conserves the CPT norm", "[dynamics]")
{
	std::mt19937 rng{77U};
	const auto frame = test::random_frame(4, rng, 0.5);
	const auto grid = uniform_grid(0.0, 3.0, 61);
	auto pr = build_scalar_family(ScalarFunction::sinusoid(0.2, 1.0, 2.0), ScalarFunction::linear(0.5, -1.5, 0.0, 3.0),
	                              frame, grid);
	pr.initial_state = test::random_vector(4, rng);
	pr.initial_state /= cpt_norm(frame, pr.initial_state);
	const auto traj = evolve_state(pr);
	CHECK(traj.max_norm_drift() < 1e-9);
	CHECK(traj.max_abs_drift_rate() == 0.0);
	// the Euclidean norm is not conserved in general
	double euclid_spread = 0.0;
	for(const auto& p : traj.points)
		euclid_spread = std::max(euclid_spread, std::abs(p.state.norm() - traj.points.front().state.norm()));
	CHECK(euclid_spread > 1e-3);
}

TEST_CASE("drift rate predicts the norm change", "[dynamics][property]")
{
	auto model = ramp_model(2.0, 201);
	SECTION("Schrodinger equation with a moving metric drifts")
	{
		auto pr = model.problem;
		pr.equation = Equation::Schrodinger;
		const auto traj = evolve_state(pr);
		std::vector<double> sq;
		for(const auto& p : traj.points)
			sq.push_back(p.cpt_norm * p.cpt_norm);
		const auto t = traj.times();
		const auto d = grid_derivatives<double>(t, sq);
		double worst = 0.0;
		for(std::size_t k = 0; k < t.size(); ++k)
		{
			worst = std::max(worst, std::abs(d[k] - traj.points[k].drift_rate));
			CHECK(std::abs(traj.points[k].drift_imag) < 1e-10);
		}
		CHECK(worst < 1e-4);
		CHECK(traj.max_abs_drift_rate() > 1e-2);
	}

	SECTION("gain equation: constant G adds 2 Re<phi|PC G phi>/hbar")
	{
		auto pr = model.problem;
		pr.equation = Equation::WithGain;
		ComplexMatrix g(2, 2);
		g << 0.3, 0.1, 0.1, -0.2;
		pr.G = OperatorFamily::constant(g, 0.0, 2.0);
		const auto traj = evolve_state(pr);
		std::vector<double> sq;
		for(const auto& p : traj.points)
			sq.push_back(p.cpt_norm * p.cpt_norm);
		const auto t = traj.times();
		const auto d = grid_derivatives<double>(t, sq);
		for(std::size_t k = 0; k < t.size(); ++k)
			CHECK(std::abs(d[k] - traj.points[k].drift_rate) < 1e-3 * std::max(1.0, std::abs(d[k])));
	}

	SECTION("compensating gain reproduces the metric-compensated equation")
	{
		auto compensated = model.problem;
		auto gained = model.problem;
		gained.equation = Equation::WithGain;
		const FrameFamily frames = gained.frames;
		OperatorFamily g;
		g.t_start = 0.0;
		g.t_end = 2.0;
		g.evaluate = [frames](double t) { return (-0.5 * frames.C(t) * frames.C_dot(t)).eval(); };
		gained.G = g;
		const auto a = evolve_state(compensated), b = evolve_state(gained);
		for(std::size_t k = 0; k < a.points.size(); ++k)
		{
			CHECK((a.points[k].state - b.points[k].state).norm() < 1e-12);
			CHECK(std::abs(b.points[k].drift_rate) < 1e-12);
		}
	}
}

TEST_CASE("metric-compensated propagator", "[dynamics]")
{
	auto model = ramp_model(3.0, 61);
	const auto& pr = model.problem;
	const auto props = evolve_propagator(pr);
	const auto pc0 = pr.frames.at(0.0).PC();
	std::mt19937 rng{4U};
	auto pr2 = pr;
	pr2.initial_state = test::random_vector(2, rng);
	const auto traj = evolve_state(pr2);
	for(std::size_t k = 0; k < props.size(); ++k)
	{
		const auto& U = props[k].U;
		const auto pc = pr.frames.at(props[k].t).PC();
		CHECK((U.adjoint() * pc * U - pc0).norm() < 1e-9);
		CHECK((U * pr2.initial_state - traj.points[k].state).norm() < 1e-12 * pr2.initial_state.norm());
	}

	auto plain = pr;
	plain.equation = Equation::Schrodinger;
	CHECK_THROWS_AS(evolve_propagator(plain), std::invalid_argument);
}

TEST_CASE("non-finite states abort with the last good time", "[dynamics]")
{
	auto pr = constant_hermitian_problem(ComplexMatrix::Identity(2, 2), 1.0, 11);
	pr.H.evaluate = [](double t) {
		ComplexMatrix h = ComplexMatrix::Identity(2, 2);
		if(t > 0.55)
			h(0, 0) = NAN;
		return h;
	};
	try
	{
		evolve_state(pr);
		FAIL("expected NumericalError");
	}
	catch(const NumericalError& e)
	{
		CHECK(e.last_good_time() >= 0.5);
		CHECK(e.last_good_time() <= 0.55);
	}
}

TEST_CASE("substitution residual vanishes on the exact solution", "[dynamics]")
{
	std::mt19937 rng{12U};
	const ComplexMatrix h = test::random_hermitian(2, rng);
	auto residual = [&](std::size_t points) {
		auto pr = constant_hermitian_problem(h, 1.0, points);
		std::vector<ComplexVector> states;
		for(double t : pr.grid)
			states.push_back(matrix_exp(-I_unit * t * h) * pr.initial_state);
		const auto r = substitution_residual(pr, states);
		return *std::max_element(r.begin(), r.end());
	};
	const double coarse = residual(101), fine = residual(201);
	CHECK(fine < 1e-3);
	CHECK(coarse / fine > 3.5);
}
