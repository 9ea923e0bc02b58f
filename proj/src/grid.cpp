#include "ptqm/grid.hpp"

#include <array>
#include <cmath>

namespace ptqm
{

void check_grid(std::span<const double> grid)
{
	if(grid.size() < 2)
		throw std::invalid_argument("time grid needs at least 2 points");
	for(std::size_t k = 0; k < grid.size(); ++k)
	{
		if(!std::isfinite(grid[k]))
			throw std::invalid_argument("time grid has a non-finite point");
		if(k > 0 && !(grid[k] > grid[k - 1]))
			throw std::invalid_argument("time grid must be strictly increasing");
	}
}

std::vector<double> uniform_grid(double t_start, double t_end, std::size_t points)
{
	if(points < 2 || !(t_end > t_start))
		throw std::invalid_argument("uniform_grid: need points >= 2 and t_end > t_start");
	std::vector<double> grid(points);
	const double step = (t_end - t_start) / static_cast<double>(points - 1);
	for(std::size_t k = 0; k < points; ++k)
		grid[k] = t_start + step * static_cast<double>(k);
	grid.back() = t_end;
	return grid;
}

std::vector<double> first_derivative_weights(double x0, std::span<const double> nodes)
{
	const std::size_t n = nodes.size();
	if(n < 2)
		throw std::invalid_argument("first_derivative_weights: need at least 2 nodes");
	// c[i][d]: weight of node i for derivative order d (d = 0, 1)
	std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
	c[0][0] = 1.0;
	double c1 = 1.0, c4 = nodes[0] - x0;
	for(std::size_t i = 1; i < n; ++i)
	{
		const int mn = std::min<int>(static_cast<int>(i), 1);
		double c2 = 1.0;
		const double c5 = c4;
		c4 = nodes[i] - x0;
		for(std::size_t j = 0; j < i; ++j)
		{
			const double c3 = nodes[i] - nodes[j];
			c2 *= c3;
			if(j == i - 1)
			{
				for(int d = mn; d >= 1; --d)
					c[i][d] = c1 * (d * c[i - 1][d - 1] - c5 * c[i - 1][d]) / c2;
				c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
			}
			for(int d = mn; d >= 1; --d)
				c[j][d] = (c4 * c[j][d] - d * c[j][d - 1]) / c3;
			c[j][0] = c4 * c[j][0] / c3;
		}
		c1 = c2;
	}
	std::vector<double> w(n);
	for(std::size_t i = 0; i < n; ++i)
		w[i] = c[i][1];
	return w;
}

} // namespace ptqm
