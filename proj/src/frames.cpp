#include "ptqm/frames.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ptqm
{

const char* axiom_name(FrameAxiom axiom)
{
	switch(axiom)
	{
	case FrameAxiom::DimensionMismatch: return "dimension mismatch";
	case FrameAxiom::PSquared: return "P^2 - I";
	case FrameAxiom::TSquared: return "T^2 - I";
	case FrameAxiom::PTCommute: return "PT - TP";
	case FrameAxiom::CSquared: return "C^2 - I";
	case FrameAxiom::CPTEqualsTPC: return "CPT - TPC";
	case FrameAxiom::PCHermitian: return "PC - (PC)^dagger";
	case FrameAxiom::PCPositive: return "PC positive definite";
	}
	return "unknown axiom";
}

namespace
{

void check_axiom(FrameAxiom axiom, double residual, double bound)
{
	if(!(residual <= bound))
		throw FrameAxiomError(axiom, residual,
		                      fmt::format("{} residual {:.3g} exceeds {:.3g}", axiom_name(axiom), residual, bound));
}

} // namespace

CPTFrame validate_frames(const ComplexMatrix& C, const ComplexMatrix& P, const AntilinearOperator& T, double tol)
{
	if(!(tol > 0.0))
		throw std::invalid_argument("validate_frames: tol must be positive");
	const Eigen::Index n = C.rows();
	if(n < 1 || C.cols() != n || P.rows() != n || P.cols() != n || T.dim() != n)
		throw FrameAxiomError(FrameAxiom::DimensionMismatch, 0.0,
		                      fmt::format("frame dimension mismatch: C {}x{}, P {}x{}, T {}x{}", C.rows(), C.cols(),
		                                  P.rows(), P.cols(), T.dim(), T.dim()));
	if(!C.allFinite() || !P.allFinite() || !T.matrix().allFinite())
		throw std::invalid_argument("validate_frames: non-finite matrix entries");

	const ComplexMatrix id = ComplexMatrix::Identity(n, n);
	const ComplexMatrix& K = T.matrix();
	const double nc = operator_norm(C), np = operator_norm(P), nk = operator_norm(K);

	CPTFrame frame;
	FrameResiduals& r = frame.residuals_;

	r.p_squared = operator_norm(P * P - id);
	check_axiom(FrameAxiom::PSquared, r.p_squared, tol * std::max(1.0, np * np));

	r.t_squared = operator_norm(T.squared() - id);
	check_axiom(FrameAxiom::TSquared, r.t_squared, tol * std::max(1.0, nk * nk));

	// PT x = P K conj(x), TP x = K conj(P) conj(x)
	r.pt_commute = operator_norm(P * K - K * P.conjugate());
	check_axiom(FrameAxiom::PTCommute, r.pt_commute, tol * std::max(1.0, np * nk));

	r.c_squared = operator_norm(C * C - id);
	check_axiom(FrameAxiom::CSquared, r.c_squared, tol * std::max(1.0, nc * nc));

	r.cpt_tpc = operator_norm(C * P * K - K * P.conjugate() * C.conjugate());
	check_axiom(FrameAxiom::CPTEqualsTPC, r.cpt_tpc, tol * std::max(1.0, nc * np * nk));

	ComplexMatrix pc = P * C;
	const double npc = operator_norm(pc);
	r.pc_hermitian = hermiticity_residual(pc);
	check_axiom(FrameAxiom::PCHermitian, r.pc_hermitian, tol * std::max(1.0, npc));

	auto he = hermitian_eigen(pc);
	r.pc_min_eigenvalue = he.values(0);
	if(!(he.values(0) > tol * npc))
		throw FrameAxiomError(FrameAxiom::PCPositive, he.values(0),
		                      fmt::format("PC is not positive definite: minimum eigenvalue {:.6g}", he.values(0)));

	// Use the exact Hermitian part so that the inner product is conjugate-symmetric.
	pc = 0.5 * (pc + pc.adjoint());
	Eigen::VectorXd roots = he.values.cwiseSqrt();
	Eigen::VectorXd inv = he.values.cwiseInverse();

	frame.c_ = C;
	frame.base_ = PTFrame{P, T};
	frame.pc_ = pc;
	frame.pc_sqrt_ = he.vectors * roots.asDiagonal() * he.vectors.adjoint();
	frame.pc_inv_ = he.vectors * inv.asDiagonal() * he.vectors.adjoint();
	frame.pc_eigenvalues_ = he.values;
	return frame;
}

cplx cpt_inner(const CPTFrame& frame, const ComplexVector& x, const ComplexVector& y)
{
	if(x.size() != frame.dim() || y.size() != frame.dim())
		throw std::invalid_argument(
			fmt::format("cpt_inner: dimension mismatch ({}, {}) vs frame {}", x.size(), y.size(), frame.dim()));
	return x.dot(frame.PC() * y);
}

double cpt_norm(const CPTFrame& frame, const ComplexVector& x)
{
	return std::sqrt(std::max(0.0, cpt_inner(frame, x, x).real()));
}

ComplexMatrix cpt_adjoint(const CPTFrame& frame, const ComplexMatrix& a)
{
	if(a.rows() != frame.dim() || a.cols() != frame.dim())
		throw std::invalid_argument("cpt_adjoint: dimension mismatch");
	return frame.PC_inv() * a.adjoint() * frame.PC();
}

namespace
{

// Orthonormal basis (Euclidean) of the span of the given columns.
ComplexMatrix span_basis(const ComplexMatrix& cols)
{
	Eigen::ColPivHouseholderQR<ComplexMatrix> qr(cols);
	qr.setThreshold(1e-8);
	const Eigen::Index rank = std::max<Eigen::Index>(qr.rank(), 1);
	ComplexMatrix q = qr.householderQ();
	return q.leftCols(rank);
}

} // namespace

SymmetryReport symmetry_report(const CPTFrame& frame, const ComplexMatrix& H, double tol)
{
	if(H.rows() != frame.dim() || H.cols() != frame.dim())
		throw std::invalid_argument("symmetry_report: dimension mismatch");
	if(!(tol > 0.0))
		throw std::invalid_argument("symmetry_report: tol must be positive");

	SymmetryReport rep;
	const Eigen::Index n = H.rows();
	const ComplexMatrix pk = frame.base().pt().matrix();
	const double nh = operator_norm(H);

	rep.pt_residual = operator_norm(H * pk - pk * H.conjugate());
	rep.pt_symmetric = rep.pt_residual <= tol * nh;

	rep.cpt_residual = operator_norm(H.adjoint() * frame.PC() - frame.PC() * H);
	rep.cpt_hermitian = rep.cpt_residual <= tol * nh * operator_norm(frame.PC());

	auto pairs = eigenpairs(H);
	for(const auto& p : pairs)
		rep.eigen_realness = std::max(rep.eigen_realness, std::abs(p.value.imag()));

	// group numerically equal eigenvalues
	const double cluster_tol = tol * std::max(1.0, nh);
	std::vector<int> cluster(n, -1);
	int clusters = 0;
	for(Eigen::Index i = 0; i < n; ++i)
	{
		if(cluster[i] >= 0)
			continue;
		cluster[i] = clusters;
		for(Eigen::Index j = i + 1; j < n; ++j)
			if(cluster[j] < 0 && std::abs(pairs[i].value - pairs[j].value) <= cluster_tol)
				cluster[j] = clusters;
		++clusters;
	}

	double worst = 0.0;
	for(int c = 0; c < clusters; ++c)
	{
		std::vector<Eigen::Index> members;
		for(Eigen::Index i = 0; i < n; ++i)
			if(cluster[i] == c)
				members.push_back(i);

		if(members.size() == 1)
		{
			const ComplexVector& v = pairs[members[0]].vector;
			ComplexVector w = pk * v.conjugate();
			cplx mu = v.dot(w) / v.squaredNorm();
			double res = (w - mu * v).norm() / v.norm() + std::abs(std::abs(mu) - 1.0);
			worst = std::max(worst, res);
			continue;
		}

		// degenerate eigenspace: PT must map the space into itself
		rep.degenerate = true;
		log().info("symmetry_report: {} eigenvalues clustered near {:.6g}{:+.6g}i, checking eigenspace invariance",
		           members.size(), pairs[members[0]].value.real(), pairs[members[0]].value.imag());
		ComplexMatrix cols(n, static_cast<Eigen::Index>(members.size()));
		for(std::size_t k = 0; k < members.size(); ++k)
			cols.col(static_cast<Eigen::Index>(k)) = pairs[members[k]].vector;
		ComplexMatrix q = span_basis(cols);
		ComplexMatrix image = pk * q.conjugate();
		double res = (image - q * (q.adjoint() * image)).norm();
		worst = std::max(worst, res);
	}
	rep.unbroken_residual = worst;
	rep.unbroken = rep.pt_symmetric && worst <= tol;
	return rep;
}

NormBounds norm_equivalence_bounds(const CPTFrame& frame)
{
	return {1.0 / std::sqrt(operator_norm(frame.C() * frame.P())), std::sqrt(operator_norm(frame.PC()))};
}

} // namespace ptqm
