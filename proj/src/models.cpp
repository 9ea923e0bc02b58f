#include "ptqm/models.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/grid.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ptqm
{

double ScalarFunction::rate(double t) const
{
	if(derivative)
		return derivative(t);
	const double h = default_fd_step(t);
	return (value(t + h) - value(t - h)) / (2 * h);
}

ScalarFunction ScalarFunction::constant(double c)
{
	return {[c](double) { return c; }, [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::linear(double start, double end, double t0, double t1)
{
	if(!(t1 > t0))
		throw std::invalid_argument("linear ramp needs t1 > t0");
	const double slope = (end - start) / (t1 - t0);
	return {[=](double t) { return start + slope * (t - t0); }, [slope](double) { return slope; }};
}

ScalarFunction ScalarFunction::sinusoid(double offset, double amplitude, double omega, double phase)
{
	return {[=](double t) { return offset + amplitude * std::sin(omega * t + phase); },
	        [=](double t) { return amplitude * omega * std::cos(omega * t + phase); }};
}

ScalarFunction ScalarFunction::samples(std::vector<double> t, std::vector<double> v)
{
	if(t.size() != v.size() || t.empty())
		throw std::invalid_argument("sampled function needs equally many times and values");
	if(t.size() > 1)
		check_grid(t);
	return {[t = std::move(t), v = std::move(v)](double x) {
		        if(t.size() == 1 || x <= t.front())
			        return v.front();
		        if(x >= t.back())
			        return v.back();
		        const auto k = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
		        const double w = (x - t[k - 1]) / (t[k] - t[k - 1]);
		        return v[k - 1] + w * (v[k] - v[k - 1]);
	        },
	        {}};
}

namespace two_level
{

ComplexMatrix parity()
{
	ComplexMatrix p(2, 2);
	p << 0.0, 1.0, 1.0, 0.0;
	return p;
}

ComplexMatrix hamiltonian(double s, double alpha)
{
	ComplexMatrix h(2, 2);
	h << s * std::exp(I_unit * alpha), s, s, s * std::exp(-I_unit * alpha);
	return h;
}

ComplexMatrix c_operator(double alpha)
{
	const double c = std::cos(alpha), sn = std::sin(alpha);
	ComplexMatrix m(2, 2);
	m << I_unit * sn, 1.0, 1.0, -I_unit * sn;
	return m / c;
}

ComplexMatrix c_operator_dalpha(double alpha)
{
	// d/da [i tan a, sec a; sec a, -i tan a]
	const double sec = 1.0 / std::cos(alpha), tn = std::tan(alpha);
	ComplexMatrix m(2, 2);
	m << I_unit * sec * sec, sec * tn, sec * tn, -I_unit * sec * sec;
	return m;
}

Eigen::Vector2d eigenvalues(double s, double alpha)
{
	return {0.0, 2.0 * s * std::cos(alpha)};
}

ComplexMatrix eigenvectors_unnormalized(double alpha)
{
	const cplx half = std::exp(I_unit * (0.5 * alpha));
	ComplexMatrix v(2, 2);
	v << std::conj(half), half, -half, std::conj(half);
	return v / std::sqrt(2.0);
}

ComplexMatrix eigenvectors(double alpha)
{
	return eigenvectors_unnormalized(alpha) / std::sqrt(std::cos(alpha));
}

} // namespace two_level

TwoLevelModel build_two_level(const ScalarFunction& s, const ScalarFunction& alpha, std::span<const double> grid,
                              double tol)
{
	check_grid(grid);
	for(double t : grid)
	{
		const double a = alpha(t);
		// cos a >= 1/2 up to rounding of a = +-pi/3
		if(!std::isfinite(a) || std::cos(a) < 0.5 - 1e-12)
			throw std::invalid_argument(
				fmt::format("two-level model needs cos(alpha) >= 1/2, violated at t={} (alpha={})", t, a));
		if(!std::isfinite(s(t)))
			throw std::invalid_argument(fmt::format("two-level model: s is not finite at t={}", t));
	}

	TwoLevelModel model;
	model.s = s;
	model.alpha = alpha;

	const double t0 = grid.front(), t1 = grid.back();
	auto& pr = model.problem;
	pr.H.t_start = t0;
	pr.H.t_end = t1;
	pr.H.evaluate = [s, alpha](double t) { return two_level::hamiltonian(s(t), alpha(t)); };

	pr.frames.P = two_level::parity();
	pr.frames.T = AntilinearOperator::conjugation(2);
	pr.frames.tol = tol;
	pr.frames.C.t_start = t0;
	pr.frames.C.t_end = t1;
	pr.frames.C.evaluate = [alpha](double t) { return two_level::c_operator(alpha(t)); };
	if(alpha.derivative)
		pr.frames.C.derivative = [alpha](double t) {
			return (two_level::c_operator_dalpha(alpha(t)) * alpha.derivative(t)).eval();
		};

	pr.equation = Equation::MetricCompensated;
	pr.grid.assign(grid.begin(), grid.end());
	pr.initial_state = two_level::eigenvectors(alpha(t0)).col(0);

	model.frames.reserve(grid.size());
	for(double t : grid)
		model.frames.push_back(pr.frames.at(t));
	return model;
}

EvolutionProblem build_scalar_family(const ScalarFunction& a, const ScalarFunction& b, const CPTFrame& frame,
                                     std::span<const double> grid, double tol)
{
	check_grid(grid);
	EvolutionProblem pr;
	const double t0 = grid.front(), t1 = grid.back();
	const ComplexMatrix c = frame.C();
	const Eigen::Index n = c.rows();
	const ComplexMatrix id = ComplexMatrix::Identity(n, n);

	pr.H.t_start = t0;
	pr.H.t_end = t1;
	pr.H.evaluate = [a, b, c, id](double t) { return (a(t) * id + b(t) * c).eval(); };
	pr.H.derivative = [a, b, c, id](double t) { return (a.rate(t) * id + b.rate(t) * c).eval(); };

	pr.frames.P = frame.P();
	pr.frames.T = frame.T();
	pr.frames.C = OperatorFamily::constant(c, t0, t1);
	pr.frames.tol = tol;
	pr.equation = Equation::Schrodinger;
	pr.grid.assign(grid.begin(), grid.end());

	for(double t : grid)
	{
		const auto rep = symmetry_report(frame, pr.H(t), tol);
		if(!(rep.pt_symmetric && rep.cpt_hermitian && rep.unbroken))
			throw NumericalError(fmt::format("a I + b C fails the symmetry checks at t={} (pt {}, cpt {}, unbroken {})",
			                                 t, rep.pt_symmetric, rep.cpt_hermitian, rep.unbroken),
			                     t);
	}

	auto pairs = eigenpairs(pr.H(t0));
	pr.initial_state = pairs.front().vector / cpt_norm(frame, pairs.front().vector);
	return pr;
}

EvolutionProblem build_scalar_family(const std::function<cplx(double)>& a, const std::function<cplx(double)>& b,
                                     const CPTFrame& frame, std::span<const double> grid, double tol)
{
	check_grid(grid);
	for(double t : grid)
	{
		const cplx av = a(t), bv = b(t);
		if(av.imag() != 0.0 || bv.imag() != 0.0)
			throw std::invalid_argument(
				fmt::format("scalar family coefficients must be real; at t={} a={}{:+}i, b={}{:+}i", t, av.real(),
				            av.imag(), bv.real(), bv.imag()));
	}
	ScalarFunction ra{[a](double t) { return a(t).real(); }, {}};
	ScalarFunction rb{[b](double t) { return b(t).real(); }, {}};
	return build_scalar_family(ra, rb, frame, grid, tol);
}

} // namespace ptqm
