#pragma once

#include "ptqm/linalg.hpp"

namespace ptqm
{

inline constexpr double default_frame_tol = 1e-10;

// Linear P and antilinear T with P^2 = T^2 = I and PT = TP.
struct PTFrame
{
	ComplexMatrix P;
	AntilinearOperator T;

	// The antilinear map PT as a single operator (matrix P*K).
	AntilinearOperator pt() const { return T.composed_after(P); }
};

// Absolute residual norms of every axiom, as measured during validation.
struct FrameResiduals
{
	double p_squared = 0.0;
	double t_squared = 0.0;
	double pt_commute = 0.0;
	double c_squared = 0.0;
	double cpt_tpc = 0.0;
	double pc_hermitian = 0.0;
	double pc_min_eigenvalue = 0.0;
};

// Validated (C, P, T). Immutable; build with validate_frames.
class CPTFrame
{
public:
	const ComplexMatrix& C() const { return c_; }
	const ComplexMatrix& P() const { return base_.P; }
	const AntilinearOperator& T() const { return base_.T; }
	const PTFrame& base() const { return base_; }
	Eigen::Index dim() const { return c_.rows(); }

	// Metric operator PC and derived caches.
	const ComplexMatrix& PC() const { return pc_; }
	const ComplexMatrix& PC_sqrt() const { return pc_sqrt_; }
	const ComplexMatrix& PC_inv() const { return pc_inv_; }

	const Eigen::VectorXd& pc_eigenvalues() const { return pc_eigenvalues_; }
	const FrameResiduals& residuals() const { return residuals_; }

private:
	friend CPTFrame validate_frames(const ComplexMatrix&, const ComplexMatrix&, const AntilinearOperator&, double);

	ComplexMatrix c_;
	PTFrame base_;
	ComplexMatrix pc_;
	ComplexMatrix pc_sqrt_;
	ComplexMatrix pc_inv_;
	Eigen::VectorXd pc_eigenvalues_;
	FrameResiduals residuals_;
};

// Checks every PT/CPT axiom to relative tolerance `tol` and throws
// FrameAxiomError naming the first violated axiom and its residual.
CPTFrame validate_frames(const ComplexMatrix& C, const ComplexMatrix& P, const AntilinearOperator& T,
                         double tol = default_frame_tol);

// (x|y) = <x|PC y>
cplx cpt_inner(const CPTFrame& frame, const ComplexVector& x, const ComplexVector& y);
double cpt_norm(const CPTFrame& frame, const ComplexVector& x);

// A^CPT = (PC)^-1 A^dagger (PC)
ComplexMatrix cpt_adjoint(const CPTFrame& frame, const ComplexMatrix& a);

struct SymmetryReport
{
	bool pt_symmetric = false;
	bool cpt_hermitian = false;
	bool unbroken = false;
	double eigen_realness = 0.0; // max |Im lambda|

	double pt_residual = 0.0;     // ||H PK - PK conj(H)||
	double cpt_residual = 0.0;    // ||H^dagger PC - PC H||
	double unbroken_residual = 0.0; // worst eigenvector / eigenspace PT-invariance defect
	bool degenerate = false;      // some eigenvalues clustered within tol
};

SymmetryReport symmetry_report(const CPTFrame& frame, const ComplexMatrix& H, double tol = default_frame_tol);

struct NormBounds
{
	double lower;
	double upper;
};

// lower = ||CP||^(-1/2), upper = ||PC||^(1/2); lower*||x|| <= ||x||_CPT <= upper*||x||.
NormBounds norm_equivalence_bounds(const CPTFrame& frame);

} // namespace ptqm
