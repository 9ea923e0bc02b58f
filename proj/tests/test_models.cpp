#include "support.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/grid.hpp"
#include "ptqm/models.hpp"

#include <catch2/catch.hpp>

#include <cmath>

using namespace ptqm;

TEST_CASE("scalar function presets", "[models]")
{
	const auto c = ScalarFunction::constant(2.5);
	CHECK(c(7.0) == 2.5);
	CHECK(c.rate(7.0) == 0.0);

	const auto l = ScalarFunction::linear(1.0, 3.0, 0.0, 4.0);
	CHECK(l(2.0) == Approx(2.0));
	CHECK(l.rate(1.0) == Approx(0.5));
	CHECK_THROWS_AS(ScalarFunction::linear(0.0, 1.0, 1.0, 1.0), std::invalid_argument);

	const auto s = ScalarFunction::sinusoid(1.0, 0.5, 2.0, 0.1);
	CHECK(s(0.3) == Approx(1.0 + 0.5 * std::sin(0.7)));
	CHECK(s.rate(0.3) == Approx(std::cos(0.7)));

	const auto p = ScalarFunction::samples({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0});
	CHECK(p(-1.0) == 0.0);
	CHECK(p(0.5) == Approx(1.0));
	CHECK(p(2.0) == Approx(1.0));
	CHECK(p(5.0) == 0.0);
	CHECK(p.rate(0.5) == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("two-level model closed forms", "[models]")
{
	SECTION("alpha = 0 is standard quantum mechanics")
	{
		CHECK((two_level::c_operator(0.0) - two_level::parity()).norm() == 0.0);
		const ComplexMatrix h = two_level::hamiltonian(1.0, 0.0);
		CHECK(hermiticity_residual(h) == 0.0);
		const auto ev = eigenpairs(h);
		CHECK(std::abs(ev[0].value) < 1e-15);
		CHECK(std::abs(ev[1].value - 2.0) < 1e-15);
	}

	SECTION("alpha = pi/3")
	{
		const auto ev = eigenpairs(two_level::hamiltonian(1.0, M_PI / 3));
		CHECK(std::abs(ev[0].value) < 1e-14);
		CHECK(std::abs(ev[1].value - 1.0) < 1e-14);
	}

	SECTION("C eigenvectors and CPT normalisation")
	{
		for(double a : {-1.0, -0.3, 0.0, 0.4, M_PI / 3})
		{
			const auto f = validate_frames(two_level::c_operator(a), two_level::parity(), AntilinearOperator::conjugation(2));
			const ComplexMatrix v = two_level::eigenvectors(a);
			const ComplexMatrix raw = two_level::eigenvectors_unnormalized(a);
			CHECK((f.C() * v.col(0) + v.col(0)).norm() < 1e-12);
			CHECK((f.C() * v.col(1) - v.col(1)).norm() < 1e-12);
			for(int i = 0; i < 2; ++i)
			{
				CHECK(std::abs(cpt_inner(f, raw.col(i), raw.col(i)) - std::cos(a)) < 1e-12);
				for(int j = 0; j < 2; ++j)
					CHECK(std::abs(cpt_inner(f, v.col(i), v.col(j)) - (i == j ? 1.0 : 0.0)) < 1e-12);
			}
			const ComplexMatrix h = two_level::hamiltonian(1.7, a);
			const auto e = two_level::eigenvalues(1.7, a);
			for(int i = 0; i < 2; ++i)
				CHECK((h * v.col(i) - e(i) * v.col(i)).norm() < 1e-12);
		}
	}

	SECTION("dC/dalpha against finite differences")
	{
		for(double a : {-0.8, 0.0, 0.5})
		{
			const double h = 1e-6;
			const ComplexMatrix fd = (two_level::c_operator(a + h) - two_level::c_operator(a - h)) / (2 * h);
			CHECK((fd - two_level::c_operator_dalpha(a)).norm() < 1e-8);
		}
	}
}

TEST_CASE("two-level builder", "[models]")
{
	const auto grid = uniform_grid(0.0, 1.0, 101);
	const auto s = ScalarFunction::linear(1.0, 1.5, 0.0, 1.0);
	const auto alpha = ScalarFunction::sinusoid(0.0, M_PI / 6, 1.0);
	const auto model = build_two_level(s, alpha, grid);
	REQUIRE(model.frames.size() == grid.size());
	for(std::size_t k = 0; k < grid.size(); ++k)
	{
		const double t = grid[k];
		const auto& f = model.frames[k];
		CHECK(f.residuals().c_squared <= 1e-12);
		CHECK(f.residuals().cpt_tpc <= 1e-12);
		const ComplexMatrix h = model.problem.H(t);
		CHECK((h.adjoint() * f.PC() - f.PC() * h).norm() <= 1e-12);

		const auto ev = eigenpairs(h);
		const auto exact = model.analytic_eigenvalues(t);
		const ComplexMatrix vecs = model.analytic_eigenvectors(t);
		for(int i = 0; i < 2; ++i)
		{
			CHECK(std::abs(ev[i].value - exact(i)) <= 1e-10);
			CHECK(test::phase_distance(ev[i].vector, vecs.col(i)) <= 1e-8);
		}
		const ComplexMatrix analytic = model.problem.frames.C_dot(t);
		const ComplexMatrix numeric = family_derivative(OperatorFamily{0.0, 1.0, model.problem.frames.C.evaluate, {}}, t);
		CHECK((analytic - numeric).norm() < 1e-7);
	}
	CHECK((model.problem.initial_state - two_level::eigenvectors(0.0).col(0)).norm() == 0.0);
	CHECK(model.problem.equation == Equation::MetricCompensated);
}

TEST_CASE("two-level builder rejects cos(alpha) < 1/2", "[models]")
{
	const auto grid = uniform_grid(0.0, 1.0, 11);
	CHECK_NOTHROW(build_two_level(ScalarFunction::constant(1.0), ScalarFunction::constant(M_PI / 3), grid));
	try
	{
		build_two_level(ScalarFunction::constant(1.0), ScalarFunction::linear(0.0, 1.2, 0.0, 1.0), grid);
		FAIL("expected rejection");
	}
	catch(const std::invalid_argument& e)
	{
		// 1.2 t > pi/3 first at t = 0.9
		CHECK(std::string(e.what()).find("t=0.9") != std::string::npos);
	}
}

TEST_CASE("scalar family a I + b C", "[models]")
{
	const auto frame = validate_frames(two_level::c_operator(M_PI / 3), two_level::parity(), AntilinearOperator::conjugation(2));
	const auto grid = uniform_grid(0.0, 2.0, 21);

	SECTION("zero Hamiltonian")
	{
		const auto pr = build_scalar_family(ScalarFunction::constant(0.0), ScalarFunction::constant(0.0), frame, grid);
		CHECK(pr.H(1.0).norm() == 0.0);
		const auto traj = evolve_state(pr);
		CHECK((traj.points.back().state - pr.initial_state).norm() == 0.0);
	}

	SECTION("spectral mapping a +- b")
	{
		const auto a = ScalarFunction::sinusoid(0.0, 1.0, 1.0, M_PI / 2);
		const auto b = ScalarFunction::linear(1.0, 2.0, 0.0, 2.0);
		const auto pr = build_scalar_family(a, b, frame, grid);
		for(double t : grid)
		{
			const auto ev = eigenpairs(pr.H(t));
			CHECK(std::abs(ev[0].value - (a(t) - b(t))) < 1e-12);
			CHECK(std::abs(ev[1].value - (a(t) + b(t))) < 1e-12);
			CHECK((pr.H.derivative(t) - (a.rate(t) * ComplexMatrix::Identity(2, 2) + b.rate(t) * frame.C())).norm() <
			      1e-12);
		}
		CHECK(std::abs(cpt_norm(frame, pr.initial_state) - 1.0) < 1e-12);
		CHECK(pr.equation == Equation::Schrodinger);
	}

	SECTION("complex coefficients are rejected")
	{
		std::function<cplx(double)> a = [](double t) { return cplx(t, 0.0); };
		std::function<cplx(double)> b = [](double t) { return cplx(1.0, t > 1.5 ? 0.1 : 0.0); };
		CHECK_THROWS_AS(build_scalar_family(a, b, frame, grid), std::invalid_argument);
		std::function<cplx(double)> real_b = [](double) { return cplx(1.0, 0.0); };
		CHECK_NOTHROW(build_scalar_family(a, real_b, frame, grid));
	}
}
