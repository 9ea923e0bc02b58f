#include "ptqm/errors.hpp"
#include "ptqm/log.hpp"
#include "ptqm/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <optional>

namespace
{

struct Overrides
{
	std::string out_dir = ".";
	std::optional<int> substeps;
	std::optional<double> tol;
};

ptqm::ScenarioConfig load(const std::string& path, const Overrides& o)
{
	auto config = ptqm::load_config(path);
	if(o.substeps)
	{
		if(*o.substeps < 0)
			throw ptqm::ConfigError("--substeps", "must be >= 0");
		config.substeps = *o.substeps;
	}
	if(o.tol)
	{
		if(!(*o.tol > 0.0))
			throw ptqm::ConfigError("--tol", "must be positive");
		config.tol.frame = *o.tol;
		config.tol.symmetry = *o.tol;
	}
	return config;
}

int report(const ptqm::RunOutcome& outcome)
{
	if(outcome.exit_code == ptqm::exit_ok)
		std::cout << outcome.message << "\n";
	else
		std::cerr << "error: " << outcome.message << "\n";
	return outcome.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Time evolution and adiabatic analysis for PT-symmetric quantum systems"};
	app.require_subcommand(1);
	app.fallthrough();

	Overrides o;
	bool verbose = false;
	app.add_option("--out-dir", o.out_dir, "Directory for output files")->capture_default_str();
	app.add_option("--substeps", o.substeps, "RK4 substeps per grid interval (0 = automatic)");
	app.add_option("--tol", o.tol, "Frame and symmetry tolerance");
	app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

	std::string config_path;
	auto* run = app.add_subcommand("run", "Evolve a scenario and write trajectory, report and summary");
	run->add_option("config", config_path, "Scenario config (JSON)")->required();

	auto* validate = app.add_subcommand("validate", "Check frame axioms and symmetry only");
	validate->add_option("config", config_path, "Scenario config (JSON)")->required();

	std::string axis;
	std::vector<double> values;
	auto* sweep = app.add_subcommand("sweep", "Run one scenario per value of a numeric field");
	sweep->add_option("config", config_path, "Scenario config (JSON)")->required();
	sweep->add_option("--axis", axis, "Dotted field path, e.g. grid.t_end")->required();
	sweep->add_option("--values", values, "Values (space or comma separated)")->delimiter(',');

	try
	{
		app.parse(argc, argv);
	}
	catch(const CLI::ParseError& e)
	{
		const int code = app.exit(e);
		return code == 0 ? 0 : ptqm::exit_config;
	}

	if(verbose)
		ptqm::log().set_level(spdlog::level::debug);

	try
	{
		const auto config = load(config_path, o);
		if(*run)
			return report(ptqm::run_scenario(config, o.out_dir));
		if(*validate)
			return report(ptqm::validate_scenario(config, o.out_dir));

		const auto rows = ptqm::sweep(config, axis, values, o.out_dir);
		int failed = 0;
		for(const auto& r : rows)
		{
			std::cout << fmt::format("{:.6g}\texit={}\tV_T={:.6g}\tmax_loss={:.6g}\tbound_satisfied={}\n", r.value,
			                         r.exit_code, r.V_T, r.max_loss, r.bound_satisfied);
			failed += r.exit_code != ptqm::exit_ok;
		}
		if(failed)
			std::cerr << failed << " of " << rows.size() << " rows failed; see sweep.csv\n";
		return failed ? ptqm::exit_check_failed : ptqm::exit_ok;
	}
	catch(const ptqm::ConfigError& e)
	{
		std::cerr << "config error: " << e.what() << "\n";
		return ptqm::exit_config;
	}
	catch(const ptqm::NumericalError& e)
	{
		std::cerr << fmt::format("numerical error: {} (last good t={:.17g})\n", e.what(), e.last_good_time());
		return ptqm::exit_numeric;
	}
	catch(const std::exception& e)
	{
		std::cerr << "error: " << e.what() << "\n";
		return ptqm::exit_numeric;
	}
}
