#pragma once

#include "ptqm/dynamics.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ptqm
{

// Instantaneous eigenbasis of H(t) on a grid. Columns of states[k] are the
// eigenvectors at grid[k], unit CPT-norm, labelled continuously in t.
struct EigenFrame
{
	std::vector<double> grid;
	std::vector<Eigen::VectorXd> energies;
	std::vector<ComplexMatrix> states;

	std::size_t size() const { return grid.size(); }
	Eigen::Index levels() const { return states.empty() ? 0 : states.front().cols(); }

	std::vector<ComplexVector> level_states(Eigen::Index m) const;
	std::vector<double> level_energies(Eigen::Index m) const;
};

inline constexpr double level_overlap_threshold = 0.9;

// Eigenpairs per grid point, rescaled to unit CPT-norm, labels matched by
// maximum overlap between neighbours and phases chosen so that
// (psi_n(t_{k+1}) | psi_n(t_k)) is real and positive.
EigenFrame instantaneous_eigenframe(const OperatorFamily& H, const FrameFamily& frames, std::span<const double> grid,
                                    double tol = default_frame_tol);

// <psi_m(t) | PC(t) psi_m'(t)> along the grid (five-point differences).
std::vector<cplx> connection(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m);

// theta(t) = -int_0^t (E_m/hbar + Im <psi_m|PC psi_m'>) ds, theta(0) = 0.
std::vector<double> dynamical_phase(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m, double hbar = 1.0);

// | <psi_n|PC psi_m'> + 1/2 <psi_n|P C' psi_m> | per grid point, n != m.
std::vector<double> coupling_residual(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m, Eigen::Index n);

struct OperatorPhase
{
	std::vector<ComplexMatrix> A;
	std::vector<double> commutator_norm; // ||[A(t), H(t)]||
};

// A(t) = int_0^t ((H - E_m I)/hbar + (i/2) C C') ds by cumulative trapezoid.
OperatorPhase operator_phase(const OperatorFamily& H, const FrameFamily& frames, const EigenFrame& ef, Eigen::Index m,
                             double hbar = 1.0);

// Running V(t) = int_0^t ||(PC)^(1/2)|| (||psi_m'|| + 1/2 ||C C' psi_m||) ds, all norms Euclidean.
std::vector<double> adiabatic_bound_series(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m);
double adiabatic_bound(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m, double T);

// 1 - |(psi_m(t) | phi(t))_t| per grid point, clamped below at 0.
std::vector<double> fidelity_loss(const Trajectory& trajectory, const EigenFrame& ef, const FrameFamily& frames,
                                  Eigen::Index m);

// Rephase every level so that its connection vanishes. Requires C constant on the grid.
EigenFrame gauge_fix(const EigenFrame& ef, const FrameFamily& frames, double tol = 1e-12);

struct AdiabaticReport
{
	std::vector<double> grid;
	std::vector<double> theta;
	std::vector<double> fidelity_loss;
	std::vector<double> coupling_residual; // max over n != m
	std::vector<double> bound;        // running V(t)
	double V_T = 0.0;
	double max_loss = 0.0;
	double epsilon = 0.5;
	bool bound_applies = false;   // V(T) < epsilon
	bool bound_satisfied = false; // V(T) < epsilon implies max loss < epsilon
};

AdiabaticReport adiabatic_report(const EvolutionProblem& problem, const Trajectory& trajectory, const EigenFrame& ef,
                                 Eigen::Index m, double epsilon);

} // namespace ptqm
