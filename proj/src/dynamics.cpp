#include "ptqm/dynamics.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/grid.hpp"
#include "ptqm/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ptqm
{

bool FrameFamily::constant_on(std::span<const double> grid, double rel_tol) const
{
	if(grid.empty())
		return true;
	const ComplexMatrix c0 = C(grid.front());
	const double scale = std::max(1.0, operator_norm(c0));
	for(double t : grid)
		if(operator_norm(C(t) - c0) > rel_tol * scale)
			return false;
	return true;
}

const char* equation_name(Equation eq)
{
	switch(eq)
	{
	case Equation::Schrodinger: return "schrodinger";
	case Equation::WithGain: return "with_gain";
	case Equation::MetricCompensated: return "metric_compensated";
	}
	return "unknown";
}

Equation parse_equation(const std::string& name)
{
	if(name == "schrodinger")
		return Equation::Schrodinger;
	if(name == "with_gain")
		return Equation::WithGain;
	if(name == "metric_compensated")
		return Equation::MetricCompensated;
	throw std::invalid_argument("unknown equation '" + name + "'");
}

void EvolutionProblem::validate() const
{
	const Eigen::Index n = dim();
	if(n < 1 || frames.P.cols() != n || frames.T.dim() != n)
		throw std::invalid_argument("evolution problem: P and T must share a square dimension");
	if(!H.evaluate || !frames.C.evaluate)
		throw std::invalid_argument("evolution problem: H and C families must be set");
	if(!(hbar > 0.0) || !std::isfinite(hbar))
		throw std::invalid_argument("evolution problem: hbar must be positive");
	if(substeps < 0)
		throw std::invalid_argument("evolution problem: substeps must be >= 0");
	check_grid(grid);
	const double slack = 1e-12 * std::max(1.0, std::abs(grid.back()));
	if(grid.front() < H.t_start - slack || grid.back() > H.t_end + slack)
		throw std::invalid_argument(fmt::format("evolution problem: grid [{}, {}] leaves the H domain [{}, {}]",
		                                        grid.front(), grid.back(), H.t_start, H.t_end));
	const ComplexMatrix h0 = H(grid.front());
	if(h0.rows() != n || h0.cols() != n)
		throw std::invalid_argument("evolution problem: H dimension differs from the frame");
	if(initial_state.size() != n)
		throw std::invalid_argument("evolution problem: initial state dimension differs from the frame");
	if(equation == Equation::WithGain && !G)
		throw std::invalid_argument("evolution problem: the gain equation needs G");
	if(equation != Equation::WithGain && G)
		throw std::invalid_argument("evolution problem: G is only allowed with the gain equation");
}

std::vector<double> Trajectory::times() const
{
	std::vector<double> out;
	out.reserve(points.size());
	for(const auto& p : points)
		out.push_back(p.t);
	return out;
}

std::vector<ComplexVector> Trajectory::states() const
{
	std::vector<ComplexVector> out;
	out.reserve(points.size());
	for(const auto& p : points)
		out.push_back(p.state);
	return out;
}

double Trajectory::max_norm_drift() const
{
	double worst = 0.0;
	for(const auto& p : points)
		worst = std::max(worst, std::abs(p.cpt_norm - points.front().cpt_norm));
	return worst;
}

double Trajectory::max_abs_drift_rate() const
{
	double worst = 0.0;
	for(const auto& p : points)
		worst = std::max(worst, std::abs(p.drift_rate));
	return worst;
}

ComplexMatrix effective_generator(const EvolutionProblem& problem, double t)
{
	switch(problem.equation)
	{
	case Equation::Schrodinger:
		return problem.H(t);
	case Equation::WithGain:
		return problem.H(t) + I_unit * (*problem.G)(t);
	case Equation::MetricCompensated:
		return problem.H(t) -
		       (I_unit * (0.5 * problem.hbar)) * (problem.frames.C(t) * problem.frames.C_dot(t));
	}
	throw std::logic_error("effective_generator: unknown equation");
}

std::vector<int> substep_plan(const EvolutionProblem& problem)
{
	const auto& grid = problem.grid;
	std::vector<int> plan(grid.size() - 1);
	if(problem.substeps > 0)
	{
		std::fill(plan.begin(), plan.end(), problem.substeps);
		return plan;
	}
	double prev = operator_norm(effective_generator(problem, grid[0]));
	for(std::size_t k = 0; k + 1 < grid.size(); ++k)
	{
		double next = operator_norm(effective_generator(problem, grid[k + 1]));
		double load = 100.0 * std::max(prev, next) * (grid[k + 1] - grid[k]) / problem.hbar;
		// rounding noise must not add a substep
		plan[k] = std::max(1, static_cast<int>(std::ceil(load * (1.0 - 1e-9))));
		prev = next;
	}
	return plan;
}

namespace
{

struct IntervalStats
{
	int substeps;
	double max_load;
};

// Advance y over [t0, t1] with n RK4 substeps of i hbar y' = gen(t) y.
IntervalStats rk4_interval(const EvolutionProblem& problem, ComplexMatrix& y, double t0, double t1, int n,
                           double& last_good_t)
{
	const cplx factor = -I_unit / problem.hbar;
	const double h = (t1 - t0) / n;
	double max_load = 0.0;
	for(int j = 0; j < n; ++j)
	{
		const double ta = t0 + (t1 - t0) * j / n;
		const double tb = (j + 1 == n) ? t1 : t0 + (t1 - t0) * (j + 1) / n;
		const double tm = ta + 0.5 * (tb - ta);
		const double step = tb - ta;

		const ComplexMatrix ga = factor * effective_generator(problem, ta);
		const ComplexMatrix gm = factor * effective_generator(problem, tm);
		const ComplexMatrix gb = factor * effective_generator(problem, tb);
		max_load = std::max(max_load, operator_norm(gm) * h);

		const ComplexMatrix k1 = ga * y;
		const ComplexMatrix k2 = gm * (y + (0.5 * step) * k1);
		const ComplexMatrix k3 = gm * (y + (0.5 * step) * k2);
		const ComplexMatrix k4 = gb * (y + step * k3);
		y += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

		if(!y.allFinite())
			throw NumericalError(fmt::format("integration produced NaN/Inf after t={:.17g}", last_good_t), last_good_t);
		last_good_t = tb;
	}
	return {n, max_load};
}

template <class OnGrid>
void integrate(const EvolutionProblem& problem, ComplexMatrix y, OnGrid&& on_grid)
{
	const auto& grid = problem.grid;
	const auto plan = substep_plan(problem);
	double last_good_t = grid.front();
	bool warned = false;

	on_grid(std::size_t{0}, y, IntervalStats{0, 0.0});
	for(std::size_t k = 0; k + 1 < grid.size(); ++k)
	{
		auto stats = rk4_interval(problem, y, grid[k], grid[k + 1], plan[k], last_good_t);
		if(stats.max_load > 0.5 && !warned)
		{
			log().warn("RK4 step load ||gen|| h / hbar = {:.3g} exceeds 0.5 on [{}, {}]; increase substeps",
			           stats.max_load, grid[k], grid[k + 1]);
			warned = true;
		}
		on_grid(k + 1, y, stats);
	}
}

} // namespace

Trajectory evolve_state(const EvolutionProblem& problem)
{
	problem.validate();
	Trajectory traj;
	traj.points.reserve(problem.grid.size());
	integrate(problem, problem.initial_state, [&](std::size_t k, const ComplexMatrix& y, IntervalStats stats) {
		const double t = problem.grid[k];
		TrajectoryPoint p;
		p.t = t;
		p.state = y.col(0);
		p.cpt_norm = cpt_norm(problem.frames.at(t), p.state);
		const cplx drift = drift_rate_complex(problem, p.state, t);
		p.drift_rate = drift.real();
		p.drift_imag = drift.imag();
		p.substeps = stats.substeps;
		p.max_step_load = stats.max_load;
		if(std::abs(drift.imag()) > 1e-8 * std::max(1.0, std::abs(drift.real())))
			log().debug("drift rate at t={} has imaginary residual {:.3g}", t, drift.imag());
		traj.points.push_back(std::move(p));
	});
	return traj;
}

std::vector<PropagatorPoint> evolve_propagator(const EvolutionProblem& problem)
{
	if(problem.equation != Equation::MetricCompensated)
		throw std::invalid_argument("evolve_propagator: only the metric-compensated equation has a unitary propagator");
	problem.validate();
	const Eigen::Index n = problem.dim();
	std::vector<PropagatorPoint> out;
	out.reserve(problem.grid.size());
	integrate(problem, ComplexMatrix::Identity(n, n), [&](std::size_t k, const ComplexMatrix& y, IntervalStats) {
		out.push_back({problem.grid[k], y});
	});
	return out;
}

cplx drift_rate_complex(const EvolutionProblem& problem, const ComplexVector& phi, double t)
{
	const auto& P = problem.frames.P;
	const ComplexMatrix c = problem.frames.C(t);
	const ComplexMatrix c_dot = problem.frames.C_dot(t);
	ComplexMatrix op = P * c_dot;
	switch(problem.equation)
	{
	case Equation::Schrodinger:
		break;
	case Equation::WithGain:
		op += (2.0 / problem.hbar) * (P * c * (*problem.G)(t));
		break;
	case Equation::MetricCompensated:
		// G = -(hbar/2) C C'; cancels analytically because C^2 = I
		op -= P * c * c * c_dot;
		break;
	}
	return phi.dot(op * phi);
}

double drift_rate(const EvolutionProblem& problem, const ComplexVector& phi, double t)
{
	return drift_rate_complex(problem, phi, t).real();
}

std::vector<double> substitution_residual(const EvolutionProblem& problem, std::span<const ComplexVector> states)
{
	const auto& grid = problem.grid;
	if(states.size() != grid.size())
		throw std::invalid_argument("substitution_residual: one state per grid point required");
	std::vector<double> out;
	out.reserve(grid.size());
	for(std::size_t k = 0; k < grid.size(); ++k)
	{
		ComplexVector d = grid_derivative4(std::span<const double>(grid), states, k);
		ComplexVector r = (I_unit * problem.hbar) * d - effective_generator(problem, grid[k]) * states[k];
		out.push_back(r.norm());
	}
	return out;
}

} // namespace ptqm
