#pragma once

#include "ptqm/dynamics.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ptqm
{

// Real scalar function of time with an optional analytic derivative.
struct ScalarFunction
{
	std::function<double(double)> value;
	std::function<double(double)> derivative; // empty: finite differences

	double operator()(double t) const { return value(t); }
	double rate(double t) const;

	static ScalarFunction constant(double c);
	// v(t) = start + (end - start) * (t - t0) / (t1 - t0)
	static ScalarFunction linear(double start, double end, double t0, double t1);
	// v(t) = offset + amplitude * sin(omega t + phase)
	static ScalarFunction sinusoid(double offset, double amplitude, double omega, double phase = 0.0);
	// Piecewise-linear interpolation through (t_i, v_i); clamped outside.
	static ScalarFunction samples(std::vector<double> t, std::vector<double> v);
};

// Two-level model with P = swap, T = plain conjugation,
// H(t) = [[s e^{ia}, s], [s, s e^{-ia}]] and
// C(t) = (1/cos a) [[i sin a, 1], [1, -i sin a]], cos a(t) >= 1/2.
namespace two_level
{

ComplexMatrix parity();
ComplexMatrix hamiltonian(double s, double alpha);
ComplexMatrix c_operator(double alpha);
ComplexMatrix c_operator_dalpha(double alpha);

// Closed-form eigenvalues (0, 2 s cos a).
Eigen::Vector2d eigenvalues(double s, double alpha);
// Closed-form eigenvectors as columns, unnormalized:
// (e^{-ia/2}, -e^{ia/2})/sqrt2 and (e^{ia/2}, e^{-ia/2})/sqrt2. Their CPT-norm squared is cos a.
ComplexMatrix eigenvectors_unnormalized(double alpha);
// Same columns divided by sqrt(cos a): unit CPT-norm.
ComplexMatrix eigenvectors(double alpha);

} // namespace two_level

struct TwoLevelModel
{
	ScalarFunction s;
	ScalarFunction alpha;
	EvolutionProblem problem; // metric-compensated equation, starts in level 0
	std::vector<CPTFrame> frames;

	Eigen::Vector2d analytic_eigenvalues(double t) const { return two_level::eigenvalues(s(t), alpha(t)); }
	ComplexMatrix analytic_eigenvectors(double t) const { return two_level::eigenvectors(alpha(t)); }
};

// Rejects any grid point with cos a(t) < 1/2.
TwoLevelModel build_two_level(const ScalarFunction& s, const ScalarFunction& alpha, std::span<const double> grid,
                              double tol = default_frame_tol);

// H(t) = a(t) I + b(t) C with a constant validated frame.
EvolutionProblem build_scalar_family(const ScalarFunction& a, const ScalarFunction& b, const CPTFrame& frame,
                                     std::span<const double> grid, double tol = default_frame_tol);

// Complex-valued coefficients are accepted only if real on the grid.
EvolutionProblem build_scalar_family(const std::function<cplx(double)>& a, const std::function<cplx(double)>& b,
                                     const CPTFrame& frame, std::span<const double> grid,
                                     double tol = default_frame_tol);

} // namespace ptqm
