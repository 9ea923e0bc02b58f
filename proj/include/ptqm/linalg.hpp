#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace ptqm
{

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr cplx I_unit{0.0, 1.0};

// Conjugate-linear map x -> K * conj(x).
class AntilinearOperator
{
public:
	AntilinearOperator() = default;
	explicit AntilinearOperator(ComplexMatrix conj_matrix);

	static AntilinearOperator conjugation(Eigen::Index dim);

	const ComplexMatrix& matrix() const { return k_; }
	Eigen::Index dim() const { return k_.rows(); }

	template <class Derived>
	typename Derived::PlainObject apply(const Eigen::MatrixBase<Derived>& x) const
	{
		return k_ * x.conjugate();
	}

	// T∘T is linear: K * conj(K).
	ComplexMatrix squared() const { return k_ * k_.conjugate(); }

	// L∘T for a linear L, i.e. matrix L * K.
	AntilinearOperator composed_after(const ComplexMatrix& linear) const;
	// T∘L, i.e. matrix K * conj(L).
	AntilinearOperator composed_before(const ComplexMatrix& linear) const;

private:
	ComplexMatrix k_;
};

struct EigenPair
{
	cplx value;
	ComplexVector vector;
};

inline constexpr double default_eigen_tol = 1e-12;

// Eigenvalues sorted by (real, imag) ascending. Vectors have unit Euclidean
// norm; the first component of largest modulus is real and positive.
// dim 2 is solved in closed form; larger matrices use a dense QR iteration
// capped at 10*dim^2 sweeps.
std::vector<EigenPair> eigenpairs(const ComplexMatrix& m, double tol = default_eigen_tol);

// Real spectrum and unitary eigenbasis of the Hermitian part of `m`,
// eigenvalues ascending.
struct HermitianEigen
{
	Eigen::VectorXd values;
	ComplexMatrix vectors;
};
HermitianEigen hermitian_eigen(const ComplexMatrix& m);

double hermiticity_residual(const ComplexMatrix& m);

// Positive square root of a Hermitian positive-definite matrix.
ComplexMatrix hermitian_sqrt(const ComplexMatrix& m, double tol = default_eigen_tol);

// Largest singular value.
double operator_norm(const ComplexMatrix& m);

inline constexpr double exp_scaling_threshold = 0.5;
inline constexpr int exp_series_order = 18;

// Scaling and squaring with a truncated Taylor series.
ComplexMatrix matrix_exp(const ComplexMatrix& m);

void gauge_fix_phase(ComplexVector& v);

// Time-parametrized matrix t -> M(t) on [t_start, t_end].
struct OperatorFamily
{
	double t_start = 0.0;
	double t_end = 0.0;
	std::function<ComplexMatrix(double)> evaluate;
	std::function<ComplexMatrix(double)> derivative; // may be empty

	ComplexMatrix operator()(double t) const { return evaluate(t); }
	bool has_derivative() const { return static_cast<bool>(derivative); }

	static OperatorFamily constant(const ComplexMatrix& m, double t_start, double t_end);
};

double default_fd_step(double t);

// Analytic derivative when the family carries one; otherwise a central
// difference, downgraded to a second-order one-sided stencil at the domain edges.
ComplexMatrix family_derivative(const OperatorFamily& family, double t, double h);
ComplexMatrix family_derivative(const OperatorFamily& family, double t);

} // namespace ptqm
