#pragma once

#include "ptqm/adiabatic.hpp"
#include "ptqm/models.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ptqm
{

using MatrixSpec = std::vector<std::vector<cplx>>;

ComplexMatrix to_matrix(const MatrixSpec& spec);
MatrixSpec to_spec(const ComplexMatrix& m);

struct FunctionSpec
{
	enum class Kind
	{
		Constant,
		Linear,
		Sinusoid,
		Samples,
	};
	Kind kind = Kind::Constant;
	double value = 0.0;                 // constant
	double start = 0.0, end = 0.0;      // linear
	std::optional<double> t0, t1;       // linear; default to the grid ends
	double offset = 0.0, amplitude = 0.0, omega = 0.0, phase = 0.0; // sinusoid
	std::vector<double> t, values;      // samples

	ScalarFunction build(double grid_start, double grid_end) const;
	bool operator==(const FunctionSpec&) const = default;
};

struct FrameSpec
{
	bool two_level = true; // the two-level model's frame frozen at `alpha`
	double alpha = 0.0;
	MatrixSpec C, P, K;
	bool operator==(const FrameSpec&) const = default;
};

struct ModelSpec
{
	std::string preset = "two_level"; // two_level | scalar_family | inline
	FunctionSpec s, alpha;            // two_level
	FunctionSpec a, b;                // scalar_family
	FrameSpec frame;                  // scalar_family
	// inline, constant frame: H(t) = H + t H_rate, or with H_end the straight
	// path from H at t_start to H_end at t_end
	MatrixSpec H, H_rate, H_end, C, P, K;
	bool operator==(const ModelSpec&) const = default;
};

struct GainSpec
{
	enum class Kind
	{
		None,
		Compensating, // G = -(hbar/2) C C'
		Constant,
	};
	Kind kind = Kind::None;
	MatrixSpec matrix;
	bool operator==(const GainSpec&) const = default;
};

struct GridSpec
{
	double t_start = 0.0;
	double t_end = 1.0;
	int points = 101;
	bool operator==(const GridSpec&) const = default;
};

struct Tolerances
{
	double frame = default_frame_tol;
	double symmetry = default_frame_tol;
	double norm_drift = 1e-6;
	double drift_rate = 1e-8;
	bool operator==(const Tolerances&) const = default;
};

struct CheckSwitches
{
	bool frames = true;
	bool symmetry = true;
	bool unitarity = true;
	bool adiabatic_bound = true;
	bool operator==(const CheckSwitches&) const = default;
};

struct OutputSpec
{
	std::string trajectory = "trajectory.csv";
	std::string report = "adiabatic.csv";
	std::string summary = "summary.json";
	bool operator==(const OutputSpec&) const = default;
};

struct ScenarioConfig
{
	ModelSpec model;
	Equation equation = Equation::MetricCompensated;
	GainSpec gain;
	double hbar = 1.0;
	GridSpec grid;
	int level = 0;
	double epsilon = 0.5;
	int substeps = 0;
	std::optional<std::vector<cplx>> initial_state;
	OutputSpec output;
	Tolerances tol;
	CheckSwitches checks;

	bool operator==(const ScenarioConfig&) const = default;
};

// Parsing reports the offending field as a JSON pointer (ConfigError::field).
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);
// Text parse errors carry "line L, column C".
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

std::vector<double> scenario_grid(const ScenarioConfig& config);
EvolutionProblem build_problem(const ScenarioConfig& config);

enum ExitCode : int
{
	exit_ok = 0,
	exit_check_failed = 1,
	exit_config = 2,
	exit_numeric = 3,
};

struct RunOutcome
{
	int exit_code = exit_ok;
	std::string message;
	nlohmann::json summary;
};

// Full run: frames, symmetry, evolution, adiabatic analysis; writes the
// trajectory CSV, adiabatic CSV and summary JSON into out_dir.
RunOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

// Frame and symmetry checks only; writes the summary JSON.
RunOutcome validate_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

struct SweepRow
{
	double value = 0.0;
	int exit_code = exit_ok;
	double V_T = 0.0;
	double max_loss = 0.0;
	bool bound_satisfied = false;
	std::string error;
};

// One independent run per value of the numeric field at `axis`
// (dotted path, e.g. "grid.t_end"). Rows go to out_dir/row_<i>/, the table to out_dir/sweep.csv.
std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& axis, const std::vector<double>& values,
                            const std::filesystem::path& out_dir);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
void write_report_csv(const std::filesystem::path& path, const AdiabaticReport& report);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

} // namespace ptqm
