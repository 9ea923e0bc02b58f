#include "ptqm/adiabatic.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/grid.hpp"
#include "ptqm/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace ptqm
{

std::vector<ComplexVector> EigenFrame::level_states(Eigen::Index m) const
{
	if(m < 0 || m >= levels())
		throw std::out_of_range(fmt::format("eigenframe: level {} out of range [0, {})", m, levels()));
	std::vector<ComplexVector> out;
	out.reserve(states.size());
	for(const auto& s : states)
		out.push_back(s.col(m));
	return out;
}

std::vector<double> EigenFrame::level_energies(Eigen::Index m) const
{
	if(m < 0 || m >= levels())
		throw std::out_of_range(fmt::format("eigenframe: level {} out of range [0, {})", m, levels()));
	std::vector<double> out;
	out.reserve(energies.size());
	for(const auto& e : energies)
		out.push_back(e(m));
	return out;
}

namespace
{

// CPT Gram-Schmidt on columns [first, last).
void cpt_orthonormalize(const CPTFrame& frame, ComplexMatrix& v, Eigen::Index first, Eigen::Index last)
{
	for(Eigen::Index j = first; j < last; ++j)
	{
		for(Eigen::Index i = first; i < j; ++i)
			v.col(j) -= cpt_inner(frame, v.col(i), v.col(j)) * v.col(i);
		v.col(j) /= cpt_norm(frame, v.col(j));
	}
}

void check_level_continuity(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m)
{
	for(std::size_t k = 1; k < ef.size(); ++k)
	{
		const auto frame = frames.at(ef.grid[k]);
		double ov = std::abs(cpt_inner(frame, ef.states[k].col(m), ef.states[k - 1].col(m)));
		if(!(ov > level_overlap_threshold))
			throw NumericalError(fmt::format("level {} swaps or jumps between t={} and t={} (overlap {:.3g})", m,
			                                 ef.grid[k - 1], ef.grid[k], ov),
			                     ef.grid[k - 1]);
	}
}

void check_level(const EigenFrame& ef, Eigen::Index m)
{
	if(m < 0 || m >= ef.levels())
		throw std::out_of_range(fmt::format("level {} out of range [0, {})", m, ef.levels()));
	if(ef.size() < 2)
		throw std::invalid_argument("eigenframe needs at least 2 grid points");
}

} // namespace

EigenFrame instantaneous_eigenframe(const OperatorFamily& H, const FrameFamily& frames, std::span<const double> grid,
                                    double tol)
{
	check_grid(grid);
	EigenFrame ef;
	ef.grid.assign(grid.begin(), grid.end());

	for(std::size_t k = 0; k < grid.size(); ++k)
	{
		const double t = grid[k];
		const CPTFrame frame = frames.at(t);
		const ComplexMatrix h = H(t);
		const auto rep = symmetry_report(frame, h, tol);
		const double scale = std::max(1.0, operator_norm(h));
		if(rep.eigen_realness > tol * scale)
			throw NumericalError(fmt::format("broken PT-symmetry at t={}: eigenvalue with |Im| = {:.3g}", t,
			                                 rep.eigen_realness),
			                     k > 0 ? grid[k - 1] : t);
		if(!rep.unbroken)
			throw NumericalError(fmt::format("broken PT-symmetry at t={}: PT residual {:.3g}, eigenvector defect {:.3g}",
			                                 t, rep.pt_residual, rep.unbroken_residual),
			                     k > 0 ? grid[k - 1] : t);
		if(!rep.cpt_hermitian)
			throw NumericalError(
				fmt::format("H is not C(t)PT-Hermitian at t={}: residual {:.3g}", t, rep.cpt_residual),
				k > 0 ? grid[k - 1] : t);

		const auto pairs = eigenpairs(h);
		const Eigen::Index n = h.rows();
		Eigen::VectorXd e(n);
		ComplexMatrix v(n, n);
		for(Eigen::Index i = 0; i < n; ++i)
		{
			e(i) = pairs[i].value.real();
			v.col(i) = pairs[i].vector / cpt_norm(frame, pairs[i].vector);
		}
		// degenerate runs (sorted, so contiguous for a real spectrum)
		for(Eigen::Index i = 0; i < n;)
		{
			Eigen::Index j = i + 1;
			while(j < n && std::abs(e(j) - e(i)) <= tol * scale)
				++j;
			if(j - i > 1)
				cpt_orthonormalize(frame, v, i, j);
			i = j;
		}

		if(k > 0)
		{
			const ComplexMatrix& prev = ef.states.back();
			ComplexMatrix overlap(n, n); // overlap(i, j) = (v_j | prev_i)
			for(Eigen::Index i = 0; i < n; ++i)
				for(Eigen::Index j = 0; j < n; ++j)
					overlap(i, j) = cpt_inner(frame, v.col(j), prev.col(i));

			std::vector<Eigen::Index> assign(n, -1);
			std::vector<Eigen::Index> owner(n, -1);
			for(Eigen::Index i = 0; i < n; ++i)
			{
				Eigen::Index best;
				double best_ov = overlap.row(i).cwiseAbs().maxCoeff(&best);
				if(!(best_ov > level_overlap_threshold))
					throw NumericalError(fmt::format("ambiguous level tracking at t={}: level {} has best overlap {:.3g}",
					                                 t, i, best_ov),
					                     grid[k - 1]);
				if(owner[best] >= 0)
					throw NumericalError(fmt::format("ambiguous level tracking at t={}: levels {} and {} collide", t,
					                                 owner[best], i),
					                     grid[k - 1]);
				owner[best] = i;
				assign[i] = best;
			}
			ComplexMatrix vs(n, n);
			Eigen::VectorXd es(n);
			for(Eigen::Index i = 0; i < n; ++i)
			{
				const cplx z = overlap(i, assign[i]);
				vs.col(i) = v.col(assign[i]) * (z / std::abs(z));
				es(i) = e(assign[i]);
			}
			v = std::move(vs);
			e = std::move(es);
		}
		ef.energies.push_back(std::move(e));
		ef.states.push_back(std::move(v));
	}
	return ef;
}

std::vector<cplx> connection(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m)
{
	check_level(ef, m);
	const auto psi = ef.level_states(m);
	std::vector<cplx> out;
	out.reserve(ef.size());
	for(std::size_t k = 0; k < ef.size(); ++k)
	{
		ComplexVector d = grid_derivative4(std::span<const double>(ef.grid), std::span<const ComplexVector>(psi), k);
		const ComplexMatrix pc = frames.P * frames.C(ef.grid[k]);
		out.push_back(psi[k].dot(pc * d));
	}
	return out;
}

std::vector<double> dynamical_phase(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m, double hbar)
{
	check_level(ef, m);
	check_level_continuity(ef, frames, m);
	const auto conn = connection(ef, frames, m);
	std::vector<double> integrand(ef.size());
	for(std::size_t k = 0; k < ef.size(); ++k)
		integrand[k] = ef.energies[k](m) / hbar + conn[k].imag();
	auto theta = cumulative_corrected_trapezoid(std::span<const double>(ef.grid), std::span<const double>(integrand));
	for(auto& x : theta)
		x = -x;
	return theta;
}

std::vector<double> coupling_residual(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m, Eigen::Index n)
{
	check_level(ef, m);
	check_level(ef, n);
	if(m == n)
		throw std::invalid_argument("coupling_residual: levels must differ");
	const auto psi_m = ef.level_states(m);
	std::vector<double> out;
	out.reserve(ef.size());
	for(std::size_t k = 0; k < ef.size(); ++k)
	{
		const double t = ef.grid[k];
		ComplexVector d = grid_derivative4(std::span<const double>(ef.grid), std::span<const ComplexVector>(psi_m), k);
		const ComplexVector psi_n = ef.states[k].col(n);
		const ComplexMatrix pc = frames.P * frames.C(t);
		const ComplexMatrix pcd = frames.P * frames.C_dot(t);
		const cplx lhs = psi_n.dot(pc * d);
		const cplx rhs = -0.5 * psi_n.dot(pcd * psi_m[k]);
		out.push_back(std::abs(lhs - rhs));
	}
	return out;
}

OperatorPhase operator_phase(const OperatorFamily& H, const FrameFamily& frames, const EigenFrame& ef, Eigen::Index m,
                             double hbar)
{
	check_level(ef, m);
	std::vector<ComplexMatrix> integrand;
	integrand.reserve(ef.size());
	for(std::size_t k = 0; k < ef.size(); ++k)
	{
		const double t = ef.grid[k];
		const ComplexMatrix h = H(t);
		const Eigen::Index n = h.rows();
		integrand.push_back((h - ef.energies[k](m) * ComplexMatrix::Identity(n, n)) / hbar +
		                    (0.5 * I_unit) * (frames.C(t) * frames.C_dot(t)));
	}
	OperatorPhase out;
	out.A = cumulative_trapezoid(std::span<const double>(ef.grid), std::span<const ComplexMatrix>(integrand));
	out.commutator_norm.reserve(ef.size());
	for(std::size_t k = 0; k < ef.size(); ++k)
	{
		const ComplexMatrix h = H(ef.grid[k]);
		out.commutator_norm.push_back(operator_norm(out.A[k] * h - h * out.A[k]));
	}
	return out;
}

namespace
{

std::vector<double> bound_integrand(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m)
{
	check_level(ef, m);
	check_level_continuity(ef, frames, m);
	const auto psi = ef.level_states(m);
	std::vector<double> integrand(ef.size());
	for(std::size_t k = 0; k < ef.size(); ++k)
	{
		const double t = ef.grid[k];
		const CPTFrame frame = frames.at(t);
		ComplexVector d = grid_derivative4(std::span<const double>(ef.grid), std::span<const ComplexVector>(psi), k);
		const double metric = operator_norm(frame.PC_sqrt());
		const double drive = (frames.C(t) * frames.C_dot(t) * psi[k]).norm();
		integrand[k] = metric * (d.norm() + 0.5 * drive);
	}
	return integrand;
}

} // namespace

std::vector<double> adiabatic_bound_series(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m)
{
	const auto integrand = bound_integrand(ef, frames, m);
	return cumulative_trapezoid(std::span<const double>(ef.grid), std::span<const double>(integrand));
}

double adiabatic_bound(const EigenFrame& ef, const FrameFamily& frames, Eigen::Index m, double T)
{
	const auto& g = ef.grid;
	if(g.empty() || T < g.front() || T > g.back())
		throw std::out_of_range(fmt::format("adiabatic_bound: T={} outside the grid", T));
	const auto f = bound_integrand(ef, frames, m);
	const auto running = cumulative_trapezoid(std::span<const double>(g), std::span<const double>(f));
	const std::size_t k = static_cast<std::size_t>(std::lower_bound(g.begin(), g.end(), T) - g.begin());
	if(g[k] == T)
		return running[k];
	// partial last panel with the integrand interpolated linearly
	const double w = (T - g[k - 1]) / (g[k] - g[k - 1]);
	const double fT = f[k - 1] + w * (f[k] - f[k - 1]);
	return running[k - 1] + 0.5 * (T - g[k - 1]) * (f[k - 1] + fT);
}

std::vector<double> fidelity_loss(const Trajectory& trajectory, const EigenFrame& ef, const FrameFamily& frames,
                                  Eigen::Index m)
{
	check_level(ef, m);
	if(trajectory.points.size() != ef.size())
		throw std::invalid_argument("fidelity_loss: trajectory and eigenframe grids differ");
	std::vector<double> out;
	out.reserve(ef.size());
	for(std::size_t k = 0; k < ef.size(); ++k)
	{
		const auto& p = trajectory.points[k];
		if(p.t != ef.grid[k])
			throw std::invalid_argument(fmt::format("fidelity_loss: grid mismatch at index {}", k));
		const CPTFrame frame = frames.at(p.t);
		const double overlap = std::abs(cpt_inner(frame, ef.states[k].col(m), p.state));
		out.push_back(std::max(0.0, 1.0 - overlap));
	}
	return out;
}

EigenFrame gauge_fix(const EigenFrame& ef, const FrameFamily& frames, double tol)
{
	if(!frames.constant_on(ef.grid, tol))
		throw std::invalid_argument("gauge_fix: C(t) must be constant on the grid");
	EigenFrame out = ef;
	for(Eigen::Index m = 0; m < ef.levels(); ++m)
	{
		const auto conn = connection(ef, frames, m);
		std::vector<double> im(conn.size());
		for(std::size_t k = 0; k < conn.size(); ++k)
			im[k] = conn[k].imag();
		const auto chi = cumulative_corrected_trapezoid(std::span<const double>(ef.grid), std::span<const double>(im));
		for(std::size_t k = 0; k < ef.size(); ++k)
			out.states[k].col(m) *= std::exp(-I_unit * chi[k]);
	}
	return out;
}

AdiabaticReport adiabatic_report(const EvolutionProblem& problem, const Trajectory& trajectory, const EigenFrame& ef,
                                 Eigen::Index m, double epsilon)
{
	AdiabaticReport rep;
	rep.grid = ef.grid;
	rep.epsilon = epsilon;
	rep.theta = dynamical_phase(ef, problem.frames, m, problem.hbar);
	rep.fidelity_loss = fidelity_loss(trajectory, ef, problem.frames, m);
	rep.bound = adiabatic_bound_series(ef, problem.frames, m);
	rep.coupling_residual.assign(ef.size(), 0.0);
	for(Eigen::Index n = 0; n < ef.levels(); ++n)
	{
		if(n == m)
			continue;
		const auto r = coupling_residual(ef, problem.frames, m, n);
		for(std::size_t k = 0; k < r.size(); ++k)
			rep.coupling_residual[k] = std::max(rep.coupling_residual[k], r[k]);
	}
	rep.V_T = rep.bound.back();
	rep.max_loss = *std::max_element(rep.fidelity_loss.begin(), rep.fidelity_loss.end());
	rep.bound_applies = rep.V_T < epsilon;
	rep.bound_satisfied = !rep.bound_applies || rep.max_loss < epsilon;
	return rep;
}

} // namespace ptqm
