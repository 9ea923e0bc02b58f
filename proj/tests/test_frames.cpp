#include "support.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/frames.hpp"
#include "ptqm/models.hpp"

#include <catch2/catch.hpp>

#include <cmath>
#include <random>

using namespace ptqm;

namespace
{

CPTFrame two_level_frame(double alpha)
{
	return validate_frames(two_level::c_operator(alpha), two_level::parity(), AntilinearOperator::conjugation(2));
}

FrameAxiom violated(const ComplexMatrix& c, const ComplexMatrix& p, const AntilinearOperator& t)
{
	try
	{
		validate_frames(c, p, t);
	}
	catch(const FrameAxiomError& e)
	{
		return e.axiom();
	}
	FAIL("frame unexpectedly valid");
	return FrameAxiom::DimensionMismatch;
}

} // namespace

TEST_CASE("two-level frame at pi/3", "[frames]")
{
	const double a = M_PI / 3;
	const auto f = two_level_frame(a);
	const auto& ev = f.pc_eigenvalues();
	CHECK(ev(0) == Approx(2.0 - std::sqrt(3.0)).epsilon(1e-13));
	CHECK(ev(1) == Approx(2.0 + std::sqrt(3.0)).epsilon(1e-13));
	CHECK(operator_norm(f.PC_sqrt()) == Approx(std::sqrt(2.0 + std::sqrt(3.0))).epsilon(1e-13));
	CHECK((f.PC_inv() * f.PC() - ComplexMatrix::Identity(2, 2)).norm() < 1e-13);
	CHECK(f.residuals().c_squared < 1e-12);
	CHECK(f.residuals().cpt_tpc < 1e-12);

	const auto b = norm_equivalence_bounds(f);
	CHECK(b.upper == Approx(std::sqrt(2.0 + std::sqrt(3.0))).epsilon(1e-13));
	CHECK(b.lower == Approx(1.0 / std::sqrt(2.0 + std::sqrt(3.0))).epsilon(1e-13));
}

TEST_CASE("alpha = 0 collapses to the standard inner product", "[frames]")
{
	const auto f = two_level_frame(0.0);
	CHECK((f.C() - f.P()).norm() == 0.0);
	CHECK((f.PC() - ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
	std::mt19937 rng{5U};
	const ComplexVector x = test::random_vector(2, rng), y = test::random_vector(2, rng);
	CHECK(std::abs(cpt_inner(f, x, y) - x.dot(y)) < 1e-14);
}

TEST_CASE("each violated axiom is named", "[frames]")
{
	const ComplexMatrix p = two_level::parity();
	const ComplexMatrix c = two_level::c_operator(0.4);
	const auto k = AntilinearOperator::conjugation(2);
	const ComplexMatrix id = ComplexMatrix::Identity(2, 2);

	CHECK(violated(c, ComplexMatrix::Identity(3, 3), k) == FrameAxiom::DimensionMismatch);
	CHECK(violated(c, 2.0 * p, k) == FrameAxiom::PSquared);
	CHECK(violated(c, p, AntilinearOperator(2.0 * id)) == FrameAxiom::TSquared);

	// T = i * diag(1, -1) K is an involution but does not commute with the swap
	ComplexMatrix tk = ComplexMatrix::Zero(2, 2);
	tk(0, 0) = 1.0;
	tk(1, 1) = -1.0;
	CHECK(violated(c, p, AntilinearOperator(tk)) == FrameAxiom::PTCommute);

	CHECK(violated(1.1 * c, p, k) == FrameAxiom::CSquared);

	ComplexMatrix z = ComplexMatrix::Zero(2, 2);
	z(0, 0) = 1.0;
	z(1, 1) = -1.0;
	CHECK(violated(z, p, k) == FrameAxiom::CPTEqualsTPC);

	ComplexMatrix skew(2, 2);
	skew << 0.0, I_unit, -I_unit, 0.0; // involution with PC = diag(-i, i)
	CHECK(violated(skew, p, k) == FrameAxiom::PCHermitian);

	CHECK(violated(-c, p, k) == FrameAxiom::PCPositive);

	try
	{
		validate_frames(1.1 * c, p, k);
	}
	catch(const FrameAxiomError& e)
	{
		CHECK(e.residual() > 0.1);
		CHECK(std::string(e.what()).find("C^2") != std::string::npos);
	}
}

TEST_CASE("random frames satisfy the inner-product properties", "[frames][property]")
{
	std::mt19937 rng{1234U};
	for(Eigen::Index n : {2, 3, 4, 5})
	{
		for(int rep = 0; rep < 10; ++rep)
		{
			const auto f = test::random_frame(n, rng, 0.6);
			const auto bounds = norm_equivalence_bounds(f);
			const ComplexMatrix a = test::random_matrix(n, rng);
			CHECK((cpt_adjoint(f, cpt_adjoint(f, a)) - a).norm() < 1e-10 * a.norm());

			for(int s = 0; s < 50; ++s)
			{
				const ComplexVector x = test::random_vector(n, rng), y = test::random_vector(n, rng);
				const cplx xx = cpt_inner(f, x, x);
				CHECK(xx.real() > 0.0);
				CHECK(std::abs(xx.imag()) < 1e-12 * xx.real());
				CHECK(std::abs(cpt_inner(f, x, y) - std::conj(cpt_inner(f, y, x))) < 1e-12 * x.norm() * y.norm() *
				                                                                         operator_norm(f.PC()));
				const cplx lhs = cpt_inner(f, a * x, y), rhs = cpt_inner(f, x, cpt_adjoint(f, a) * y);
				CHECK(std::abs(lhs - rhs) <= 1e-10 * operator_norm(a) * x.norm() * y.norm() * operator_norm(f.PC()));

				const double nx = cpt_norm(f, x), e = x.norm();
				CHECK(bounds.lower * e <= nx * (1 + 1e-12));
				CHECK(nx <= bounds.upper * e * (1 + 1e-12));
			}
		}
	}
}

TEST_CASE("symmetry report", "[frames]")
{
	SECTION("two-level Hamiltonian is PT-symmetric, CPT-Hermitian and unbroken")
	{
		for(double a : {0.0, 0.3, -0.9, M_PI / 3})
		{
			const auto f = two_level_frame(a);
			const auto rep = symmetry_report(f, two_level::hamiltonian(1.3, a));
			CHECK(rep.pt_symmetric);
			CHECK(rep.cpt_hermitian);
			CHECK(rep.unbroken);
			CHECK(rep.eigen_realness < 1e-12);
			CHECK(rep.cpt_residual < 1e-12);
		}
	}

	SECTION("broken phase is detected")
	{
		const auto f = two_level_frame(0.2);
		ComplexMatrix h(2, 2);
		h << 2.0 * I_unit, 1.0, 1.0, -2.0 * I_unit;
		const auto rep = symmetry_report(f, h);
		CHECK(rep.pt_symmetric);
		CHECK_FALSE(rep.unbroken);
		CHECK_FALSE(rep.cpt_hermitian);
		CHECK(rep.eigen_realness == Approx(std::sqrt(3.0)).epsilon(1e-12));
	}

	SECTION("degenerate spectrum")
	{
		const auto f = two_level_frame(0.5);
		const auto rep = symmetry_report(f, 2.0 * ComplexMatrix::Identity(2, 2));
		CHECK(rep.degenerate);
		CHECK(rep.unbroken);
		CHECK(rep.cpt_hermitian);
	}

	SECTION("non-PT-symmetric operator")
	{
		const auto f = two_level_frame(0.0);
		ComplexMatrix h(2, 2);
		h << 1.0, I_unit, -I_unit, 3.0;
		const auto rep = symmetry_report(f, h);
		CHECK_FALSE(rep.pt_symmetric);
	}

	SECTION("random frames: a I + b C is CPT-Hermitian")
	{
		std::mt19937 rng{99U};
		for(int rep = 0; rep < 10; ++rep)
		{
			const auto f = test::random_frame(4, rng);
			const ComplexMatrix h = (0.7 * ComplexMatrix::Identity(4, 4) - 1.3 * f.C()).eval();
			const auto r = symmetry_report(f, h);
			CHECK(r.pt_symmetric);
			CHECK(r.cpt_hermitian);
			CHECK(r.unbroken);
		}
	}
}
