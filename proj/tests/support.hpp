#pragma once

#include "ptqm/dynamics.hpp"
#include "ptqm/frames.hpp"
#include "ptqm/grid.hpp"
#include "ptqm/linalg.hpp"

#include <random>

namespace ptqm::test
{

inline ComplexMatrix random_matrix(Eigen::Index n, std::mt19937& rng, double scale = 1.0)
{
	std::normal_distribution<double> g(0.0, scale);
	ComplexMatrix m(n, n);
	for(Eigen::Index i = 0; i < n; ++i)
		for(Eigen::Index j = 0; j < n; ++j)
			m(i, j) = cplx(g(rng), g(rng));
	return m;
}

inline ComplexVector random_vector(Eigen::Index n, std::mt19937& rng)
{
	std::normal_distribution<double> g;
	ComplexVector v(n);
	for(Eigen::Index i = 0; i < n; ++i)
		v(i) = cplx(g(rng), g(rng));
	return v;
}

inline ComplexMatrix random_hermitian(Eigen::Index n, std::mt19937& rng, double scale = 1.0)
{
	ComplexMatrix m = random_matrix(n, rng, scale);
	return (0.5 * (m + m.adjoint())).eval();
}

inline ComplexMatrix random_unitary(Eigen::Index n, std::mt19937& rng)
{
	Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(n, rng));
	return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

// P = U D U^dagger, C = U D e^{iY} U^dagger, K = U U^T with D = diag(+-1)
// and Y real antisymmetric coupling only the +1 and -1 blocks of D.
struct RawFrame
{
	ComplexMatrix C, P;
	AntilinearOperator T;
};

inline RawFrame random_raw_frame(Eigen::Index n, std::mt19937& rng, double strength = 0.5)
{
	const Eigen::Index plus = (n + 1) / 2;
	Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
	d.tail(n - plus).setConstant(-1.0);

	std::normal_distribution<double> g(0.0, strength);
	Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, n);
	for(Eigen::Index i = 0; i < plus; ++i)
		for(Eigen::Index j = plus; j < n; ++j)
		{
			y(i, j) = g(rng);
			y(j, i) = -y(i, j);
		}

	const ComplexMatrix u = random_unitary(n, rng);
	const ComplexMatrix D = d.cast<cplx>().asDiagonal();
	const ComplexMatrix metric = matrix_exp(I_unit * y.cast<cplx>());
	RawFrame f;
	f.P = u * D * u.adjoint();
	f.C = u * D * metric * u.adjoint();
	f.T = AntilinearOperator(u * u.transpose());
	return f;
}

inline CPTFrame random_frame(Eigen::Index n, std::mt19937& rng, double strength = 0.5)
{
	const auto raw = random_raw_frame(n, rng, strength);
	return validate_frames(raw.C, raw.P, raw.T, 1e-9);
}

// |<u|v>| / (|u| |v|) distance from 1: zero iff equal up to phase and scale.
inline double phase_distance(const ComplexVector& u, const ComplexVector& v)
{
	return 1.0 - std::abs(u.dot(v)) / (u.norm() * v.norm());
}

// H(t) = U0 O(t) D O(t)^T U0^dagger with O(t) = exp(t X / T), X real antisymmetric,
// D = diag(1, 2, ..., n). Frame C = P = I, K = U0 U0^T, so PC = I and H is PT-symmetric.
inline EvolutionProblem rotating_problem(Eigen::Index n, double t_end, std::size_t points, std::mt19937& rng,
                                         double angle = 1.0)
{
	const ComplexMatrix u0 = random_unitary(n, rng);
	std::normal_distribution<double> g;
	Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
	for(Eigen::Index i = 0; i < n; ++i)
		for(Eigen::Index j = i + 1; j < n; ++j)
		{
			x(i, j) = angle * g(rng);
			x(j, i) = -x(i, j);
		}
	const ComplexMatrix gen = x.cast<cplx>() / t_end;
	Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n));
	const ComplexMatrix D = d.cast<cplx>().asDiagonal();

	EvolutionProblem pr;
	pr.H.t_start = 0.0;
	pr.H.t_end = t_end;
	pr.H.evaluate = [u0, gen, D](double t) {
		const ComplexMatrix o = matrix_exp(t * gen);
		return (u0 * o * D * o.transpose() * u0.adjoint()).eval();
	};
	pr.frames.P = ComplexMatrix::Identity(n, n);
	pr.frames.T = AntilinearOperator(u0 * u0.transpose());
	pr.frames.C = OperatorFamily::constant(ComplexMatrix::Identity(n, n), 0.0, t_end);
	pr.equation = Equation::MetricCompensated;
	pr.grid = uniform_grid(0.0, t_end, points);
	pr.initial_state = u0.col(0);
	return pr;
}

} // namespace ptqm::test
