#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ptqm
{

// Throws std::invalid_argument unless the grid has >= 2 finite, strictly increasing points.
void check_grid(std::span<const double> grid);

std::vector<double> uniform_grid(double t_start, double t_end, std::size_t points);

// Second-order three-point derivative of samples f on a (possibly non-uniform)
// grid at index k; one-sided stencils at the ends.
template <class T>
T grid_derivative(std::span<const double> t, std::span<const T> f, std::size_t k)
{
	const std::size_t n = t.size();
	if(n < 2 || f.size() != n || k >= n)
		throw std::invalid_argument("grid_derivative: bad sizes");
	if(n == 2)
		return T((f[1] - f[0]) / (t[1] - t[0]));

	if(k == 0)
	{
		const double h1 = t[1] - t[0], h2 = t[2] - t[1];
		return T(-(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2]);
	}
	if(k == n - 1)
	{
		const double h1 = t[n - 2] - t[n - 3], h2 = t[n - 1] - t[n - 2];
		return T(h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
		         (2 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1]);
	}
	const double h1 = t[k] - t[k - 1], h2 = t[k + 1] - t[k];
	return T(-h2 / (h1 * (h1 + h2)) * f[k - 1] + (h2 - h1) / (h1 * h2) * f[k] + h1 / (h2 * (h1 + h2)) * f[k + 1]);
}

template <class T>
std::vector<T> grid_derivatives(std::span<const double> t, std::span<const T> f)
{
	std::vector<T> out;
	out.reserve(t.size());
	for(std::size_t k = 0; k < t.size(); ++k)
		out.push_back(grid_derivative(t, f, k));
	return out;
}

// Fornberg weights for the first derivative at x0 from samples at `nodes`.
std::vector<double> first_derivative_weights(double x0, std::span<const double> nodes);

// Fourth-order derivative at index k from the five nearest samples (window
// shifted inward at the ends); falls back to grid_derivative below five points.
template <class T>
T grid_derivative4(std::span<const double> t, std::span<const T> f, std::size_t k)
{
	const std::size_t n = t.size();
	if(n < 5)
		return grid_derivative(t, f, k);
	if(f.size() != n || k >= n)
		throw std::invalid_argument("grid_derivative4: bad sizes");
	const std::size_t first = std::min(k < 2 ? 0 : k - 2, n - 5);
	const auto w = first_derivative_weights(t[k], t.subspan(first, 5));
	T out = T(w[0] * f[first]);
	for(std::size_t i = 1; i < 5; ++i)
		out = T(out + w[i] * f[first + i]);
	return out;
}

template <class T>
std::vector<T> grid_derivatives4(std::span<const double> t, std::span<const T> f)
{
	std::vector<T> out;
	out.reserve(t.size());
	for(std::size_t k = 0; k < t.size(); ++k)
		out.push_back(grid_derivative4(t, f, k));
	return out;
}

// Running composite-trapezoid integral; out[0] = 0 * f[0].
template <class T>
std::vector<T> cumulative_trapezoid(std::span<const double> t, std::span<const T> f)
{
	if(f.size() != t.size() || t.empty())
		throw std::invalid_argument("cumulative_trapezoid: bad sizes");
	std::vector<T> out;
	out.reserve(t.size());
	out.push_back(T(0.0 * f[0]));
	for(std::size_t k = 1; k < t.size(); ++k)
		out.push_back(T(out.back() + 0.5 * (t[k] - t[k - 1]) * (f[k - 1] + f[k])));
	return out;
}

// Trapezoid with the Euler-Maclaurin end correction -h^2/12 (f'_{k+1} - f'_k)
// per panel, f' from grid_derivative4: fourth order on smooth samples.
template <class T>
std::vector<T> cumulative_corrected_trapezoid(std::span<const double> t, std::span<const T> f)
{
	if(f.size() != t.size() || t.empty())
		throw std::invalid_argument("cumulative_corrected_trapezoid: bad sizes");
	if(t.size() < 5)
		return cumulative_trapezoid(t, f);
	const auto df = grid_derivatives4(t, f);
	std::vector<T> out;
	out.reserve(t.size());
	out.push_back(T(0.0 * f[0]));
	for(std::size_t k = 1; k < t.size(); ++k)
	{
		const double h = t[k] - t[k - 1];
		out.push_back(T(out.back() + 0.5 * h * (f[k - 1] + f[k]) - h * h / 12.0 * (df[k] - df[k - 1])));
	}
	return out;
}

} // namespace ptqm
