#pragma once

#include <stdexcept>
#include <string>

namespace ptqm
{

class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

// Iterative eigensolver hit its iteration cap.
class ConvergenceError : public Error
{
public:
	using Error::Error;
};

// Overflow, NaN/Inf state, broken symmetry along a run, and similar.
class NumericalError : public Error
{
public:
	NumericalError(const std::string& what, double last_good_time)
		: Error(what), last_good_time_{last_good_time}
	{}
	explicit NumericalError(const std::string& what)
		: Error(what)
	{}

	double last_good_time() const { return last_good_time_; }

private:
	double last_good_time_ = 0.0;
};

enum class FrameAxiom
{
	DimensionMismatch,
	PSquared,
	TSquared,
	PTCommute,
	CSquared,
	CPTEqualsTPC,
	PCHermitian,
	PCPositive,
};

const char* axiom_name(FrameAxiom axiom);

// One violated CPT-frame axiom and the residual norm that violated it.
class FrameAxiomError : public Error
{
public:
	FrameAxiomError(FrameAxiom axiom, double residual, const std::string& what)
		: Error(what), axiom_{axiom}, residual_{residual}
	{}

	FrameAxiom axiom() const { return axiom_; }
	double residual() const { return residual_; }

private:
	FrameAxiom axiom_;
	double residual_;
};

// Bad scenario configuration. `field` is a JSON pointer into the config.
class ConfigError : public Error
{
public:
	ConfigError(const std::string& field, const std::string& message)
		: Error(field.empty() ? message : field + ": " + message), field_{field}
	{}

	const std::string& field() const { return field_; }

private:
	std::string field_;
};

} // namespace ptqm
