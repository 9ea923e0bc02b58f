#pragma once

#include "ptqm/frames.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ptqm
{

// Fixed P, T and a time-dependent C(t).
struct FrameFamily
{
	ComplexMatrix P;
	AntilinearOperator T;
	OperatorFamily C;
	double tol = default_frame_tol;

	CPTFrame at(double t) const { return validate_frames(C(t), P, T, tol); }
	ComplexMatrix C_dot(double t) const { return family_derivative(C, t); }
	bool constant_on(std::span<const double> grid, double rel_tol = 1e-12) const;
};

enum class Equation
{
	Schrodinger,       // i hbar phi' = H phi
	WithGain,          // i hbar phi' = (H + i G) phi
	MetricCompensated, // i hbar phi' = (H - (i hbar / 2) C C') phi
};

const char* equation_name(Equation eq);
Equation parse_equation(const std::string& name);

struct EvolutionProblem
{
	OperatorFamily H;
	FrameFamily frames;
	std::optional<OperatorFamily> G; // WithGain only
	double hbar = 1.0;
	Equation equation = Equation::MetricCompensated;
	ComplexVector initial_state;
	std::vector<double> grid;
	int substeps = 0; // RK4 substeps per grid interval; 0 picks ceil(100 ||gen|| dt / hbar)

	Eigen::Index dim() const { return frames.P.rows(); }
	// Structural checks (dims, grid, G presence). Frames are validated lazily per grid point.
	void validate() const;
};

struct TrajectoryPoint
{
	double t = 0.0;
	ComplexVector state;
	double cpt_norm = 0.0;
	double drift_rate = 0.0;
	double drift_imag = 0.0; // imaginary residual of the drift integrand; health check
	int substeps = 0;        // substeps used on the interval ending here
	double max_step_load = 0.0; // max ||gen|| * h / hbar on that interval
};

struct Trajectory
{
	std::vector<TrajectoryPoint> points;

	std::vector<double> times() const;
	std::vector<ComplexVector> states() const;
	// max_t | ||phi(t)||_t - ||phi(0)||_0 |
	double max_norm_drift() const;
	double max_abs_drift_rate() const;
};

ComplexMatrix effective_generator(const EvolutionProblem& problem, double t);

std::vector<int> substep_plan(const EvolutionProblem& problem);

// Classical fixed-step RK4 between grid points; records the CPT norm and
// the norm drift rate at every grid point.
Trajectory evolve_state(const EvolutionProblem& problem);

struct PropagatorPoint
{
	double t;
	ComplexMatrix U;
};

// Propagator of the metric-compensated equation with U(0) = I.
std::vector<PropagatorPoint> evolve_propagator(const EvolutionProblem& problem);

// d/dt (phi|phi)_t predicted from the instantaneous operators; complex value
// whose imaginary part is numerical noise.
cplx drift_rate_complex(const EvolutionProblem& problem, const ComplexVector& phi, double t);
double drift_rate(const EvolutionProblem& problem, const ComplexVector& phi, double t);

// || i hbar psi'(t_k) - gen(t_k) psi(t_k) || for a sampled curve on the problem grid,
// with psi' from fourth-order differences.
std::vector<double> substitution_residual(const EvolutionProblem& problem, std::span<const ComplexVector> states);

} // namespace ptqm
