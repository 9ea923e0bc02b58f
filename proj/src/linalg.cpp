#include "ptqm/linalg.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptqm
{

AntilinearOperator::AntilinearOperator(ComplexMatrix conj_matrix)
	: k_{std::move(conj_matrix)}
{
	if(k_.rows() != k_.cols())
		throw std::invalid_argument("antilinear operator needs a square matrix");
}

AntilinearOperator AntilinearOperator::conjugation(Eigen::Index dim)
{
	return AntilinearOperator(ComplexMatrix::Identity(dim, dim));
}

AntilinearOperator AntilinearOperator::composed_after(const ComplexMatrix& linear) const
{
	return AntilinearOperator(linear * k_);
}

AntilinearOperator AntilinearOperator::composed_before(const ComplexMatrix& linear) const
{
	return AntilinearOperator(k_ * linear.conjugate());
}

void gauge_fix_phase(ComplexVector& v)
{
	Eigen::Index best = 0;
	double best_abs = -1.0;
	for(Eigen::Index i = 0; i < v.size(); ++i)
	{
		// 1e-12 relative slack so that the "first" of two equal-modulus
		// components wins consistently despite rounding
		double a = std::abs(v(i));
		if(a > best_abs * (1.0 + 1e-12))
		{
			best_abs = a;
			best = i;
		}
	}
	if(best_abs > 0.0)
		v *= std::conj(v(best)) / best_abs;
}

namespace
{

void require_square(const ComplexMatrix& m, const char* op)
{
	if(m.rows() != m.cols() || m.rows() < 1)
		throw std::invalid_argument(fmt::format("{}: matrix must be square with dim >= 1, got {}x{}", op, m.rows(), m.cols()));
	if(!m.allFinite())
		throw std::invalid_argument(fmt::format("{}: matrix has non-finite entries", op));
}

bool eigen_order(const EigenPair& x, const EigenPair& y)
{
	if(x.value.real() != y.value.real())
		return x.value.real() < y.value.real();
	return x.value.imag() < y.value.imag();
}

std::vector<EigenPair> eigenpairs_2x2(const ComplexMatrix& m)
{
	const cplx a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
	const cplx mean = 0.5 * (a + d);
	const cplx half = 0.5 * (a - d);
	cplx disc = std::sqrt(half * half + b * c);
	if((std::conj(mean) * disc).real() < 0.0)
		disc = -disc;
	const cplx big = mean + disc;
	const cplx det = a * d - b * c;
	const cplx small = (big != cplx{0.0}) ? det / big : mean - disc;

	const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
	std::vector<EigenPair> out;
	const cplx values[2] = {big, small};
	for(int i = 0; i < 2; ++i)
	{
		const cplx lambda = values[i];
		ComplexVector v1(2), v2(2);
		v1 << b, lambda - a;
		v2 << lambda - d, c;
		ComplexVector v = (v1.norm() >= v2.norm()) ? v1 : v2;
		if(v.norm() <= 64 * std::numeric_limits<double>::epsilon() * scale)
		{
			// scalar matrix: any basis works
			v = ComplexVector::Zero(2);
			v(i) = 1.0;
		}
		out.push_back({lambda, v});
	}
	return out;
}

} // namespace

std::vector<EigenPair> eigenpairs(const ComplexMatrix& m, double tol)
{
	require_square(m, "eigenpairs");
	if(!(tol > 0.0))
		throw std::invalid_argument("eigenpairs: tol must be positive");

	const Eigen::Index n = m.rows();
	std::vector<EigenPair> pairs;
	pairs.reserve(n);

	if(n == 1)
	{
		pairs.push_back({m(0, 0), ComplexVector::Ones(1)});
	}
	else if(n == 2)
	{
		pairs = eigenpairs_2x2(m);
	}
	else if(hermiticity_residual(m) <= tol * operator_norm(m))
	{
		auto he = hermitian_eigen(m);
		for(Eigen::Index i = 0; i < n; ++i)
			pairs.push_back({cplx{he.values(i), 0.0}, he.vectors.col(i)});
	}
	else
	{
		Eigen::ComplexEigenSolver<ComplexMatrix> solver;
		solver.setMaxIterations(10 * n * n);
		solver.compute(m);
		if(solver.info() != Eigen::Success)
			throw ConvergenceError(fmt::format("eigenpairs: QR iteration did not converge within {} iterations "
			                                   "for {}x{} matrix with norm {:.6g}",
			                                   10 * n * n, n, n, operator_norm(m)));
		for(Eigen::Index i = 0; i < n; ++i)
			pairs.push_back({solver.eigenvalues()(i), solver.eigenvectors().col(i)});
	}

	for(auto& p : pairs)
	{
		double nv = p.vector.norm();
		if(nv > 0.0)
			p.vector /= nv;
		gauge_fix_phase(p.vector);
	}
	std::stable_sort(pairs.begin(), pairs.end(), eigen_order);
	return pairs;
}

double hermiticity_residual(const ComplexMatrix& m)
{
	return operator_norm(m - m.adjoint());
}

HermitianEigen hermitian_eigen(const ComplexMatrix& m)
{
	require_square(m, "hermitian_eigen");
	ComplexMatrix h = 0.5 * (m + m.adjoint());
	Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
	if(solver.info() != Eigen::Success)
		throw ConvergenceError("hermitian_eigen: tridiagonal QR did not converge");
	return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix hermitian_sqrt(const ComplexMatrix& m, double tol)
{
	require_square(m, "hermitian_sqrt");
	const double norm = operator_norm(m);
	const double herm = hermiticity_residual(m);
	if(herm > tol * std::max(norm, 1.0))
		throw NumericalError(fmt::format("not a valid metric: matrix is not Hermitian (residual {:.3g})", herm));
	auto he = hermitian_eigen(m);
	if(he.values(0) <= tol)
		throw NumericalError(fmt::format("not a valid metric: eigenvalue {:.6g} is not positive", he.values(0)));
	Eigen::VectorXd roots = he.values.cwiseSqrt();
	return he.vectors * roots.asDiagonal() * he.vectors.adjoint();
}

double operator_norm(const ComplexMatrix& m)
{
	if(m.size() == 0)
		return 0.0;
	Eigen::JacobiSVD<ComplexMatrix> svd(m);
	return svd.singularValues()(0);
}

ComplexMatrix matrix_exp(const ComplexMatrix& m)
{
	require_square(m, "matrix_exp");
	const Eigen::Index n = m.rows();
	const double norm = operator_norm(m);
	// e^{700} is near the double overflow limit
	if(!std::isfinite(norm) || norm > 700.0)
		throw NumericalError(fmt::format("matrix_exp: overflow risk, operator norm {:.6g}", norm));

	int squarings = 0;
	if(norm > exp_scaling_threshold)
		squarings = static_cast<int>(std::ceil(std::log2(norm / exp_scaling_threshold)));
	const ComplexMatrix a = m / std::ldexp(1.0, squarings);

	// Horner form of sum_{k<=18} a^k / k!
	const ComplexMatrix id = ComplexMatrix::Identity(n, n);
	ComplexMatrix result = id;
	for(int k = exp_series_order; k >= 1; --k)
		result = id + (a * result) / static_cast<double>(k);

	for(int i = 0; i < squarings; ++i)
		result = result * result;

	if(!result.allFinite())
		throw NumericalError(fmt::format("matrix_exp: overflow, operator norm {:.6g}", norm));
	return result;
}

OperatorFamily OperatorFamily::constant(const ComplexMatrix& m, double t_start, double t_end)
{
	OperatorFamily f;
	f.t_start = t_start;
	f.t_end = t_end;
	f.evaluate = [m](double) { return m; };
	f.derivative = [z = ComplexMatrix::Zero(m.rows(), m.cols()).eval()](double) { return z; };
	return f;
}

double default_fd_step(double t)
{
	return 1e-5 * std::max(1.0, std::abs(t));
}

ComplexMatrix family_derivative(const OperatorFamily& family, double t, double h)
{
	if(family.has_derivative())
		return family.derivative(t);
	if(!(h > 0.0))
		throw std::invalid_argument("family_derivative: step must be positive");

	// small slack so grid endpoints are not downgraded by rounding
	const double slack = 1e-12 * std::max(1.0, std::abs(t));
	if(t - h < family.t_start - slack)
	{
		log().debug("family_derivative: t={} within h of domain start, using forward stencil", t);
		return (-3.0 * family(t) + 4.0 * family(t + h) - family(t + 2 * h)) / (2 * h);
	}
	if(t + h > family.t_end + slack)
	{
		log().debug("family_derivative: t={} within h of domain end, using backward stencil", t);
		return (3.0 * family(t) - 4.0 * family(t - h) + family(t - 2 * h)) / (2 * h);
	}
	return (family(t + h) - family(t - h)) / (2 * h);
}

ComplexMatrix family_derivative(const OperatorFamily& family, double t)
{
	return family_derivative(family, t, default_fd_step(t));
}

} // namespace ptqm
