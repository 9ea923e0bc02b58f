#include "ptqm/scenario.hpp"

#include "ptqm/errors.hpp"
#include "ptqm/grid.hpp"
#include "ptqm/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

namespace ptqm
{

using nlohmann::json;

ComplexMatrix to_matrix(const MatrixSpec& spec)
{
	const auto n = static_cast<Eigen::Index>(spec.size());
	ComplexMatrix m(n, n);
	for(Eigen::Index i = 0; i < n; ++i)
	{
		if(static_cast<Eigen::Index>(spec[i].size()) != n)
			throw std::invalid_argument("matrix spec is not square");
		for(Eigen::Index j = 0; j < n; ++j)
			m(i, j) = spec[i][j];
	}
	return m;
}

MatrixSpec to_spec(const ComplexMatrix& m)
{
	MatrixSpec spec(m.rows(), std::vector<cplx>(m.cols()));
	for(Eigen::Index i = 0; i < m.rows(); ++i)
		for(Eigen::Index j = 0; j < m.cols(); ++j)
			spec[i][j] = m(i, j);
	return spec;
}

ScalarFunction FunctionSpec::build(double grid_start, double grid_end) const
{
	switch(kind)
	{
	case Kind::Constant: return ScalarFunction::constant(value);
	case Kind::Linear: return ScalarFunction::linear(start, end, t0.value_or(grid_start), t1.value_or(grid_end));
	case Kind::Sinusoid: return ScalarFunction::sinusoid(offset, amplitude, omega, phase);
	case Kind::Samples: return ScalarFunction::samples(t, values);
	}
	throw std::logic_error("unknown function kind");
}

// ---------------------------------------------------------------- parsing

namespace
{

std::string child(const std::string& path, const std::string& key)
{
	return path + "/" + key;
}

const json* find(const json& j, const std::string& key)
{
	auto it = j.find(key);
	return it == j.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path)
{
	if(!j.is_number())
		throw ConfigError(path, "expected a number");
	double v = j.get<double>();
	if(!std::isfinite(v))
		throw ConfigError(path, "must be finite");
	return v;
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback)
{
	const json* v = find(obj, key);
	return v ? as_number(*v, child(path, key)) : fallback;
}

int int_or(const json& obj, const std::string& key, const std::string& path, int fallback)
{
	const json* v = find(obj, key);
	if(!v)
		return fallback;
	if(!v->is_number_integer())
		throw ConfigError(child(path, key), "expected an integer");
	return v->get<int>();
}

bool bool_or(const json& obj, const std::string& key, const std::string& path, bool fallback)
{
	const json* v = find(obj, key);
	if(!v)
		return fallback;
	if(!v->is_boolean())
		throw ConfigError(child(path, key), "expected true or false");
	return v->get<bool>();
}

std::string string_or(const json& obj, const std::string& key, const std::string& path, const std::string& fallback)
{
	const json* v = find(obj, key);
	if(!v)
		return fallback;
	if(!v->is_string())
		throw ConfigError(child(path, key), "expected a string");
	return v->get<std::string>();
}

void require_object(const json& j, const std::string& path)
{
	if(!j.is_object())
		throw ConfigError(path.empty() ? "/" : path, "expected an object");
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known)
{
	for(auto it = obj.begin(); it != obj.end(); ++it)
	{
		if(std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }))
			throw ConfigError(child(path, it.key()), "unknown field");
	}
}

cplx parse_complex(const json& j, const std::string& path)
{
	if(j.is_number())
		return {as_number(j, path), 0.0};
	if(j.is_array() && j.size() == 2)
		return {as_number(j[0], path + "/0"), as_number(j[1], path + "/1")};
	throw ConfigError(path, "expected a number or an [re, im] pair");
}

json complex_to_json(cplx z)
{
	return json::array({z.real(), z.imag()});
}

MatrixSpec parse_matrix(const json& j, const std::string& path)
{
	if(!j.is_array() || j.empty())
		throw ConfigError(path, "expected a non-empty list of rows");
	MatrixSpec m;
	for(std::size_t i = 0; i < j.size(); ++i)
	{
		const std::string rp = path + "/" + std::to_string(i);
		if(!j[i].is_array() || j[i].size() != j.size())
			throw ConfigError(rp, fmt::format("expected a row of {} entries (matrix must be square)", j.size()));
		std::vector<cplx> row;
		for(std::size_t k = 0; k < j[i].size(); ++k)
			row.push_back(parse_complex(j[i][k], rp + "/" + std::to_string(k)));
		m.push_back(std::move(row));
	}
	return m;
}

json matrix_to_json(const MatrixSpec& m)
{
	json rows = json::array();
	for(const auto& r : m)
	{
		json row = json::array();
		for(cplx z : r)
			row.push_back(complex_to_json(z));
		rows.push_back(std::move(row));
	}
	return rows;
}

std::vector<double> parse_number_list(const json& j, const std::string& path)
{
	if(!j.is_array())
		throw ConfigError(path, "expected a list of numbers");
	std::vector<double> out;
	for(std::size_t i = 0; i < j.size(); ++i)
		out.push_back(as_number(j[i], path + "/" + std::to_string(i)));
	return out;
}

FunctionSpec constant_spec(double v)
{
	FunctionSpec f;
	f.value = v;
	return f;
}

FunctionSpec parse_function(const json& j, const std::string& path)
{
	FunctionSpec f;
	if(j.is_number())
	{
		f.value = as_number(j, path);
		return f;
	}
	require_object(j, path);
	const std::string kind = string_or(j, "kind", path, "");
	if(kind == "constant")
	{
		reject_unknown(j, path, {"kind", "value"});
		f.kind = FunctionSpec::Kind::Constant;
		f.value = number_or(j, "value", path, 0.0);
	}
	else if(kind == "linear")
	{
		reject_unknown(j, path, {"kind", "start", "end", "t0", "t1"});
		f.kind = FunctionSpec::Kind::Linear;
		f.start = number_or(j, "start", path, 0.0);
		f.end = number_or(j, "end", path, 0.0);
		if(find(j, "t0"))
			f.t0 = as_number(j["t0"], child(path, "t0"));
		if(find(j, "t1"))
			f.t1 = as_number(j["t1"], child(path, "t1"));
		if(f.t0 && f.t1 && !(*f.t1 > *f.t0))
			throw ConfigError(child(path, "t1"), "must exceed t0");
	}
	else if(kind == "sinusoid")
	{
		reject_unknown(j, path, {"kind", "offset", "amplitude", "omega", "phase"});
		f.kind = FunctionSpec::Kind::Sinusoid;
		f.offset = number_or(j, "offset", path, 0.0);
		f.amplitude = number_or(j, "amplitude", path, 0.0);
		f.omega = number_or(j, "omega", path, 0.0);
		f.phase = number_or(j, "phase", path, 0.0);
	}
	else if(kind == "samples")
	{
		reject_unknown(j, path, {"kind", "t", "values"});
		f.kind = FunctionSpec::Kind::Samples;
		if(!find(j, "t") || !find(j, "values"))
			throw ConfigError(path, "samples need 't' and 'values'");
		f.t = parse_number_list(j["t"], child(path, "t"));
		f.values = parse_number_list(j["values"], child(path, "values"));
		if(f.t.size() != f.values.size() || f.t.empty())
			throw ConfigError(child(path, "values"), "must have as many entries as 't' (at least one)");
		for(std::size_t i = 1; i < f.t.size(); ++i)
			if(!(f.t[i] > f.t[i - 1]))
				throw ConfigError(child(path, "t"), "sample times must be strictly increasing");
	}
	else
	{
		throw ConfigError(child(path, "kind"), "expected one of constant, linear, sinusoid, samples");
	}
	return f;
}

json function_to_json(const FunctionSpec& f)
{
	switch(f.kind)
	{
	case FunctionSpec::Kind::Constant: return {{"kind", "constant"}, {"value", f.value}};
	case FunctionSpec::Kind::Linear:
	{
		json j = {{"kind", "linear"}, {"start", f.start}, {"end", f.end}};
		if(f.t0)
			j["t0"] = *f.t0;
		if(f.t1)
			j["t1"] = *f.t1;
		return j;
	}
	case FunctionSpec::Kind::Sinusoid:
		return {{"kind", "sinusoid"}, {"offset", f.offset}, {"amplitude", f.amplitude}, {"omega", f.omega},
		        {"phase", f.phase}};
	case FunctionSpec::Kind::Samples: return {{"kind", "samples"}, {"t", f.t}, {"values", f.values}};
	}
	return {};
}

void require_same_dim(const MatrixSpec& m, std::size_t n, const std::string& path)
{
	if(m.size() != n)
		throw ConfigError(path, fmt::format("expected a {}x{} matrix", n, n));
}

FrameSpec parse_frame(const json& j, const std::string& path)
{
	require_object(j, path);
	FrameSpec f;
	const std::string preset = string_or(j, "preset", path, "");
	if(preset == "two_level")
	{
		reject_unknown(j, path, {"preset", "alpha"});
		f.two_level = true;
		f.alpha = number_or(j, "alpha", path, 0.0);
		return f;
	}
	if(!preset.empty())
		throw ConfigError(child(path, "preset"), "unknown frame preset '" + preset + "'");
	reject_unknown(j, path, {"C", "P", "K"});
	f.two_level = false;
	for(const char* key : {"C", "P", "K"})
		if(!find(j, key))
			throw ConfigError(child(path, key), "missing");
	f.C = parse_matrix(j["C"], child(path, "C"));
	f.P = parse_matrix(j["P"], child(path, "P"));
	f.K = parse_matrix(j["K"], child(path, "K"));
	require_same_dim(f.P, f.C.size(), child(path, "P"));
	require_same_dim(f.K, f.C.size(), child(path, "K"));
	return f;
}

json frame_to_json(const FrameSpec& f)
{
	if(f.two_level)
		return {{"preset", "two_level"}, {"alpha", f.alpha}};
	return {{"C", matrix_to_json(f.C)}, {"P", matrix_to_json(f.P)}, {"K", matrix_to_json(f.K)}};
}

ModelSpec parse_model(const json& j, const std::string& path)
{
	require_object(j, path);
	ModelSpec m;
	m.preset = string_or(j, "preset", path, "two_level");

	if(m.preset == "two_level")
	{
		reject_unknown(j, path, {"preset", "s", "alpha"});
		m.s = find(j, "s") ? parse_function(j["s"], child(path, "s")) : constant_spec(1.0);
		m.alpha = find(j, "alpha") ? parse_function(j["alpha"], child(path, "alpha")) : FunctionSpec{};
	}
	else if(m.preset == "scalar_family")
	{
		reject_unknown(j, path, {"preset", "a", "b", "frame"});
		auto coefficient = [&](const char* key) {
			if(!find(j, key))
				return FunctionSpec{};
			const json& v = j[key];
			// complex [re, im] coefficients are rejected unless real
			if(v.is_array())
			{
				cplx z = parse_complex(v, child(path, key));
				if(z.imag() != 0.0)
					throw ConfigError(child(path, key), "coefficients must be real-valued");
				return constant_spec(z.real());
			}
			return parse_function(v, child(path, key));
		};
		m.a = coefficient("a");
		m.b = coefficient("b");
		if(find(j, "frame"))
			m.frame = parse_frame(j["frame"], child(path, "frame"));
		else
			m.frame.alpha = 0.0;
	}
	else if(m.preset == "inline")
	{
		reject_unknown(j, path, {"preset", "H", "H_rate", "H_end", "C", "P", "K"});
		for(const char* key : {"H", "C", "P", "K"})
			if(!find(j, key))
				throw ConfigError(child(path, key), "missing");
		m.H = parse_matrix(j["H"], child(path, "H"));
		const std::size_t n = m.H.size();
		if(find(j, "H_rate"))
		{
			m.H_rate = parse_matrix(j["H_rate"], child(path, "H_rate"));
			require_same_dim(m.H_rate, n, child(path, "H_rate"));
		}
		if(find(j, "H_end"))
		{
			if(!m.H_rate.empty())
				throw ConfigError(child(path, "H_end"), "give either H_rate or H_end, not both");
			m.H_end = parse_matrix(j["H_end"], child(path, "H_end"));
			require_same_dim(m.H_end, n, child(path, "H_end"));
		}
		m.C = parse_matrix(j["C"], child(path, "C"));
		m.P = parse_matrix(j["P"], child(path, "P"));
		m.K = parse_matrix(j["K"], child(path, "K"));
		require_same_dim(m.C, n, child(path, "C"));
		require_same_dim(m.P, n, child(path, "P"));
		require_same_dim(m.K, n, child(path, "K"));
	}
	else
	{
		throw ConfigError(child(path, "preset"), "unknown model preset '" + m.preset + "'");
	}
	return m;
}

json model_to_json(const ModelSpec& m)
{
	if(m.preset == "two_level")
		return {{"preset", m.preset}, {"s", function_to_json(m.s)}, {"alpha", function_to_json(m.alpha)}};
	if(m.preset == "scalar_family")
		return {{"preset", m.preset},
		        {"a", function_to_json(m.a)},
		        {"b", function_to_json(m.b)},
		        {"frame", frame_to_json(m.frame)}};
	json j = {{"preset", m.preset},
	          {"H", matrix_to_json(m.H)},
	          {"C", matrix_to_json(m.C)},
	          {"P", matrix_to_json(m.P)},
	          {"K", matrix_to_json(m.K)}};
	if(!m.H_rate.empty())
		j["H_rate"] = matrix_to_json(m.H_rate);
	if(!m.H_end.empty())
		j["H_end"] = matrix_to_json(m.H_end);
	return j;
}

std::size_t model_dim(const ModelSpec& m)
{
	if(m.preset == "two_level")
		return 2;
	if(m.preset == "scalar_family")
		return m.frame.two_level ? 2 : m.frame.C.size();
	return m.H.size();
}

} // namespace

ScenarioConfig config_from_json(const json& j)
{
	require_object(j, "");
	reject_unknown(j, "", {"model", "equation", "gain", "hbar", "grid", "level", "epsilon", "substeps",
	                       "initial_state", "output", "tolerances", "checks"});
	ScenarioConfig c;
	if(!find(j, "model"))
		throw ConfigError("/model", "missing");
	c.model = parse_model(j["model"], "/model");

	const std::string eq = string_or(j, "equation", "", "metric_compensated");
	try
	{
		c.equation = parse_equation(eq);
	}
	catch(const std::invalid_argument&)
	{
		throw ConfigError("/equation", "expected schrodinger, with_gain or metric_compensated");
	}

	if(const json* g = find(j, "gain"); g && !g->is_null())
	{
		if(g->is_string())
		{
			if(g->get<std::string>() != "compensating")
				throw ConfigError("/gain", "expected \"compensating\" or a matrix");
			c.gain.kind = GainSpec::Kind::Compensating;
		}
		else
		{
			c.gain.kind = GainSpec::Kind::Constant;
			c.gain.matrix = parse_matrix(*g, "/gain");
			require_same_dim(c.gain.matrix, model_dim(c.model), "/gain");
		}
	}
	if(c.equation == Equation::WithGain && c.gain.kind == GainSpec::Kind::None)
		throw ConfigError("/gain", "with_gain requires a gain operator");
	if(c.equation != Equation::WithGain && c.gain.kind != GainSpec::Kind::None)
		throw ConfigError("/gain", "a gain operator is only allowed with with_gain");

	c.hbar = number_or(j, "hbar", "", 1.0);
	if(!(c.hbar > 0.0))
		throw ConfigError("/hbar", "must be positive");

	if(const json* g = find(j, "grid"))
	{
		require_object(*g, "/grid");
		reject_unknown(*g, "/grid", {"t_start", "t_end", "points"});
		c.grid.t_start = number_or(*g, "t_start", "/grid", 0.0);
		c.grid.t_end = number_or(*g, "t_end", "/grid", 1.0);
		c.grid.points = int_or(*g, "points", "/grid", 101);
	}
	if(c.grid.points < 2)
		throw ConfigError("/grid/points", "must be at least 2");
	if(!(c.grid.t_end > c.grid.t_start))
		throw ConfigError("/grid/t_end", "must exceed t_start");

	c.level = int_or(j, "level", "", 0);
	if(c.level < 0 || static_cast<std::size_t>(c.level) >= model_dim(c.model))
		throw ConfigError("/level", fmt::format("must be in [0, {})", model_dim(c.model)));

	c.epsilon = number_or(j, "epsilon", "", 0.5);
	if(!(c.epsilon > 0.0 && c.epsilon < 1.0))
		throw ConfigError("/epsilon", "epsilon out of (0,1)");

	c.substeps = int_or(j, "substeps", "", 0);
	if(c.substeps < 0)
		throw ConfigError("/substeps", "must be >= 0 (0 = automatic)");

	if(const json* s = find(j, "initial_state"); s && !s->is_null())
	{
		if(!s->is_array() || s->size() != model_dim(c.model))
			throw ConfigError("/initial_state", fmt::format("expected {} entries", model_dim(c.model)));
		std::vector<cplx> v;
		for(std::size_t i = 0; i < s->size(); ++i)
			v.push_back(parse_complex((*s)[i], "/initial_state/" + std::to_string(i)));
		c.initial_state = std::move(v);
	}

	if(const json* o = find(j, "output"))
	{
		require_object(*o, "/output");
		reject_unknown(*o, "/output", {"trajectory", "report", "summary"});
		c.output.trajectory = string_or(*o, "trajectory", "/output", c.output.trajectory);
		c.output.report = string_or(*o, "report", "/output", c.output.report);
		c.output.summary = string_or(*o, "summary", "/output", c.output.summary);
	}

	if(const json* t = find(j, "tolerances"))
	{
		require_object(*t, "/tolerances");
		reject_unknown(*t, "/tolerances", {"frame", "symmetry", "norm_drift", "drift_rate"});
		c.tol.frame = number_or(*t, "frame", "/tolerances", c.tol.frame);
		c.tol.symmetry = number_or(*t, "symmetry", "/tolerances", c.tol.symmetry);
		c.tol.norm_drift = number_or(*t, "norm_drift", "/tolerances", c.tol.norm_drift);
		c.tol.drift_rate = number_or(*t, "drift_rate", "/tolerances", c.tol.drift_rate);
		for(auto [key, v] : {std::pair{"frame", c.tol.frame}, std::pair{"symmetry", c.tol.symmetry},
		                     std::pair{"norm_drift", c.tol.norm_drift}, std::pair{"drift_rate", c.tol.drift_rate}})
			if(!(v > 0.0))
				throw ConfigError(std::string("/tolerances/") + key, "must be positive");
	}

	if(const json* k = find(j, "checks"))
	{
		require_object(*k, "/checks");
		reject_unknown(*k, "/checks", {"frames", "symmetry", "unitarity", "adiabatic_bound"});
		c.checks.frames = bool_or(*k, "frames", "/checks", true);
		c.checks.symmetry = bool_or(*k, "symmetry", "/checks", true);
		c.checks.unitarity = bool_or(*k, "unitarity", "/checks", true);
		c.checks.adiabatic_bound = bool_or(*k, "adiabatic_bound", "/checks", true);
	}
	return c;
}

json config_to_json(const ScenarioConfig& c)
{
	json j;
	j["model"] = model_to_json(c.model);
	j["equation"] = equation_name(c.equation);
	switch(c.gain.kind)
	{
	case GainSpec::Kind::None: j["gain"] = nullptr; break;
	case GainSpec::Kind::Compensating: j["gain"] = "compensating"; break;
	case GainSpec::Kind::Constant: j["gain"] = matrix_to_json(c.gain.matrix); break;
	}
	j["hbar"] = c.hbar;
	j["grid"] = {{"t_start", c.grid.t_start}, {"t_end", c.grid.t_end}, {"points", c.grid.points}};
	j["level"] = c.level;
	j["epsilon"] = c.epsilon;
	j["substeps"] = c.substeps;
	if(c.initial_state)
	{
		json s = json::array();
		for(cplx z : *c.initial_state)
			s.push_back(complex_to_json(z));
		j["initial_state"] = s;
	}
	else
	{
		j["initial_state"] = nullptr;
	}
	j["output"] = {{"trajectory", c.output.trajectory}, {"report", c.output.report}, {"summary", c.output.summary}};
	j["tolerances"] = {{"frame", c.tol.frame},
	                   {"symmetry", c.tol.symmetry},
	                   {"norm_drift", c.tol.norm_drift},
	                   {"drift_rate", c.tol.drift_rate}};
	j["checks"] = {{"frames", c.checks.frames},
	               {"symmetry", c.checks.symmetry},
	               {"unitarity", c.checks.unitarity},
	               {"adiabatic_bound", c.checks.adiabatic_bound}};
	return j;
}

ScenarioConfig parse_config(const std::string& text)
{
	json j;
	try
	{
		j = json::parse(text);
	}
	catch(const json::parse_error& e)
	{
		std::size_t line = 1, col = 1;
		const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
		for(std::size_t i = 0; i < limit; ++i)
		{
			if(text[i] == '\n')
			{
				++line;
				col = 1;
			}
			else
			{
				++col;
			}
		}
		throw ConfigError("", fmt::format("parse error at line {}, column {}: {}", line, col, e.what()));
	}
	return config_from_json(j);
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if(!in)
		throw ConfigError("", "cannot open config file " + path.string());
	std::stringstream buf;
	buf << in.rdbuf();
	return parse_config(buf.str());
}

// ---------------------------------------------------------------- building

std::vector<double> scenario_grid(const ScenarioConfig& config)
{
	return uniform_grid(config.grid.t_start, config.grid.t_end, static_cast<std::size_t>(config.grid.points));
}

namespace
{

CPTFrame build_frame(const FrameSpec& f, double tol)
{
	if(f.two_level)
		return validate_frames(two_level::c_operator(f.alpha), two_level::parity(), AntilinearOperator::conjugation(2),
		                       tol);
	return validate_frames(to_matrix(f.C), to_matrix(f.P), AntilinearOperator(to_matrix(f.K)), tol);
}

} // namespace

EvolutionProblem build_problem(const ScenarioConfig& config)
{
	const auto grid = scenario_grid(config);
	const double t0 = grid.front(), t1 = grid.back();
	EvolutionProblem pr;
	try
	{
		const auto& m = config.model;
		if(m.preset == "two_level")
		{
			pr = build_two_level(m.s.build(t0, t1), m.alpha.build(t0, t1), grid, config.tol.frame).problem;
		}
		else if(m.preset == "scalar_family")
		{
			CPTFrame frame = build_frame(m.frame, config.tol.frame);
			pr = build_scalar_family(m.a.build(t0, t1), m.b.build(t0, t1), frame, grid, config.tol.symmetry);
		}
		else
		{
			validate_frames(to_matrix(m.C), to_matrix(m.P), AntilinearOperator(to_matrix(m.K)), config.tol.frame);
			const ComplexMatrix h = to_matrix(m.H);
			ComplexMatrix rate = ComplexMatrix::Zero(h.rows(), h.cols());
			double origin = 0.0;
			if(!m.H_rate.empty())
				rate = to_matrix(m.H_rate);
			if(!m.H_end.empty())
			{
				rate = (to_matrix(m.H_end) - h) / (t1 - t0);
				origin = t0;
			}
			pr.H.t_start = t0;
			pr.H.t_end = t1;
			pr.H.evaluate = [h, rate, origin](double t) { return (h + (t - origin) * rate).eval(); };
			pr.H.derivative = [rate](double) { return rate; };
			pr.frames.P = to_matrix(m.P);
			pr.frames.T = AntilinearOperator(to_matrix(m.K));
			pr.frames.C = OperatorFamily::constant(to_matrix(m.C), t0, t1);
			pr.initial_state = ComplexVector::Zero(h.rows());
			pr.initial_state(0) = 1.0;
		}
	}
	catch(const FrameAxiomError& e)
	{
		throw ConfigError("/model", std::string("invalid frame: ") + e.what());
	}
	catch(const std::invalid_argument& e)
	{
		throw ConfigError("/model", e.what());
	}

	pr.frames.tol = config.tol.frame;
	pr.grid = grid;
	pr.hbar = config.hbar;
	pr.equation = config.equation;
	pr.substeps = config.substeps;
	pr.G.reset();
	if(config.gain.kind == GainSpec::Kind::Compensating)
	{
		const FrameFamily frames = pr.frames;
		const double hbar = config.hbar;
		OperatorFamily g;
		g.t_start = t0;
		g.t_end = t1;
		g.evaluate = [frames, hbar](double t) {
			return (-(0.5 * hbar) * (frames.C(t) * frames.C_dot(t))).eval();
		};
		pr.G = g;
	}
	else if(config.gain.kind == GainSpec::Kind::Constant)
	{
		pr.G = OperatorFamily::constant(to_matrix(config.gain.matrix), t0, t1);
	}
	if(config.initial_state)
	{
		pr.initial_state = ComplexVector(static_cast<Eigen::Index>(config.initial_state->size()));
		for(std::size_t i = 0; i < config.initial_state->size(); ++i)
			pr.initial_state(static_cast<Eigen::Index>(i)) = (*config.initial_state)[i];
	}
	return pr;
}

// ---------------------------------------------------------------- output

namespace
{

std::string num(double x)
{
	return fmt::format("{:.17g}", x);
}

void write_atomically(const std::filesystem::path& path, const std::string& content)
{
	if(path.has_parent_path())
		std::filesystem::create_directories(path.parent_path());
	auto tmp = path;
	tmp += ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if(!out)
			throw std::runtime_error("cannot write " + tmp.string());
		out << content;
		if(!out)
			throw std::runtime_error("write failed for " + tmp.string());
	}
	std::filesystem::rename(tmp, path);
}

} // namespace

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory)
{
	std::string s = "t";
	const Eigen::Index n = trajectory.points.empty() ? 0 : trajectory.points.front().state.size();
	for(Eigen::Index i = 0; i < n; ++i)
		s += fmt::format(",re_{0},im_{0}", i);
	s += ",cpt_norm,drift_rate\n";
	for(const auto& p : trajectory.points)
	{
		s += num(p.t);
		for(Eigen::Index i = 0; i < n; ++i)
			s += "," + num(p.state(i).real()) + "," + num(p.state(i).imag());
		s += "," + num(p.cpt_norm) + "," + num(p.drift_rate) + "\n";
	}
	write_atomically(path, s);
}

void write_report_csv(const std::filesystem::path& path, const AdiabaticReport& report)
{
	std::string s = "t,theta,fidelity_loss,coupling_residual,V\n";
	for(std::size_t k = 0; k < report.grid.size(); ++k)
		s += num(report.grid[k]) + "," + num(report.theta[k]) + "," + num(report.fidelity_loss[k]) + "," +
		     num(report.coupling_residual[k]) + "," + num(report.bound[k]) + "\n";
	s += "# V_T=" + num(report.V_T) + ",max_loss=" + num(report.max_loss) +
	     ",bound_satisfied=" + (report.bound_satisfied ? "true" : "false") + "\n";
	write_atomically(path, s);
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows)
{
	std::string s = "value,exit_code,V_T,max_loss,bound_satisfied,error\n";
	for(const auto& r : rows)
	{
		std::string err = r.error;
		std::replace(err.begin(), err.end(), '"', '\'');
		std::replace(err.begin(), err.end(), '\n', ' ');
		s += num(r.value) + "," + std::to_string(r.exit_code) + "," + num(r.V_T) + "," + num(r.max_loss) + "," +
		     (r.bound_satisfied ? "true" : "false") + ",\"" + err + "\"\n";
	}
	write_atomically(path, s);
}

// ---------------------------------------------------------------- running

namespace
{

struct FrameAndSymmetry
{
	bool frames_ok = true;
	bool symmetry_ok = true;
	json frames;
	json symmetry;
};

FrameAndSymmetry check_frames_and_symmetry(const ScenarioConfig& config, const EvolutionProblem& pr)
{
	FrameAndSymmetry out;
	FrameResiduals worst;
	double min_pc = std::numeric_limits<double>::infinity();
	bool pt = true, cpt = true, unbroken = true;
	double realness = 0.0, pt_res = 0.0, cpt_res = 0.0;
	json frame_failure = nullptr;
	json symmetry_failure = nullptr;

	for(double t : pr.grid)
	{
		CPTFrame frame;
		try
		{
			frame = pr.frames.at(t);
		}
		catch(const FrameAxiomError& e)
		{
			out.frames_ok = false;
			frame_failure = {{"t", t}, {"axiom", axiom_name(e.axiom())}, {"residual", e.residual()}, {"message", e.what()}};
			break;
		}
		const auto& r = frame.residuals();
		worst.p_squared = std::max(worst.p_squared, r.p_squared);
		worst.t_squared = std::max(worst.t_squared, r.t_squared);
		worst.pt_commute = std::max(worst.pt_commute, r.pt_commute);
		worst.c_squared = std::max(worst.c_squared, r.c_squared);
		worst.cpt_tpc = std::max(worst.cpt_tpc, r.cpt_tpc);
		worst.pc_hermitian = std::max(worst.pc_hermitian, r.pc_hermitian);
		min_pc = std::min(min_pc, r.pc_min_eigenvalue);

		const auto rep = symmetry_report(frame, pr.H(t), config.tol.symmetry);
		pt_res = std::max(pt_res, rep.pt_residual);
		cpt_res = std::max(cpt_res, rep.cpt_residual);
		realness = std::max(realness, rep.eigen_realness);
		if((!rep.pt_symmetric || !rep.cpt_hermitian || !rep.unbroken) && symmetry_failure.is_null())
			symmetry_failure = {{"t", t},
			                    {"pt_symmetric", rep.pt_symmetric},
			                    {"cpt_hermitian", rep.cpt_hermitian},
			                    {"unbroken", rep.unbroken}};
		pt = pt && rep.pt_symmetric;
		cpt = cpt && rep.cpt_hermitian;
		unbroken = unbroken && rep.unbroken;
	}
	out.symmetry_ok = out.frames_ok && pt && cpt && unbroken;
	out.frames = {{"valid", out.frames_ok},
	              {"max_residuals",
	               {{"P2_minus_I", worst.p_squared},
	                {"T2_minus_I", worst.t_squared},
	                {"PT_minus_TP", worst.pt_commute},
	                {"C2_minus_I", worst.c_squared},
	                {"CPT_minus_TPC", worst.cpt_tpc},
	                {"PC_hermiticity", worst.pc_hermitian}}},
	              {"min_pc_eigenvalue", std::isfinite(min_pc) ? json(min_pc) : json(nullptr)},
	              {"failure", frame_failure}};
	out.symmetry = {{"pt_symmetric", pt},
	                {"cpt_hermitian", cpt},
	                {"unbroken", unbroken},
	                {"max_eigen_realness", realness},
	                {"max_pt_residual", pt_res},
	                {"max_cpt_residual", cpt_res},
	                {"failure", symmetry_failure}};
	return out;
}

json check_entry(bool enabled, bool passed)
{
	return {{"enabled", enabled}, {"passed", passed}};
}

int finish(json& summary, const CheckSwitches& sw, bool frames, bool symmetry, bool unitarity, bool bound)
{
	summary["checks"] = {{"frames", check_entry(sw.frames, frames)},
	                     {"symmetry", check_entry(sw.symmetry, symmetry)},
	                     {"unitarity", check_entry(sw.unitarity, unitarity)},
	                     {"adiabatic_bound", check_entry(sw.adiabatic_bound, bound)}};
	bool ok = (!sw.frames || frames) && (!sw.symmetry || symmetry) && (!sw.unitarity || unitarity) &&
	          (!sw.adiabatic_bound || bound);
	int code = ok ? exit_ok : exit_check_failed;
	summary["exit_code"] = code;
	return code;
}

json summary_header(const ScenarioConfig& config)
{
	return {{"model", config.model.preset},
	        {"equation", equation_name(config.equation)},
	        {"hbar", config.hbar},
	        {"grid", {{"t_start", config.grid.t_start}, {"t_end", config.grid.t_end}, {"points", config.grid.points}}},
	        {"level", config.level},
	        {"epsilon", config.epsilon}};
}

} // namespace

RunOutcome validate_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir)
{
	RunOutcome outcome;
	EvolutionProblem pr;
	try
	{
		pr = build_problem(config);
		pr.validate();
	}
	catch(const ConfigError& e)
	{
		return {exit_config, e.what(), {}};
	}
	catch(const std::invalid_argument& e)
	{
		return {exit_config, e.what(), {}};
	}

	json summary = summary_header(config);
	const auto fs = check_frames_and_symmetry(config, pr);
	summary["frames"] = fs.frames;
	summary["symmetry"] = fs.symmetry;
	CheckSwitches sw = config.checks;
	sw.unitarity = false;
	sw.adiabatic_bound = false;
	outcome.exit_code = finish(summary, sw, fs.frames_ok, fs.symmetry_ok, false, false);
	outcome.message = outcome.exit_code == exit_ok ? "frame and symmetry checks passed" : "frame or symmetry checks failed";
	outcome.summary = summary;
	write_atomically(out_dir / config.output.summary, summary.dump(2) + "\n");
	return outcome;
}

RunOutcome run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir)
{
	RunOutcome outcome;
	EvolutionProblem pr;
	try
	{
		pr = build_problem(config);
		pr.validate();
	}
	catch(const ConfigError& e)
	{
		return {exit_config, e.what(), {}};
	}
	catch(const std::invalid_argument& e)
	{
		return {exit_config, e.what(), {}};
	}

	json summary = summary_header(config);
	const auto fs = check_frames_and_symmetry(config, pr);
	summary["frames"] = fs.frames;
	summary["symmetry"] = fs.symmetry;

	auto write_summary = [&] { write_atomically(out_dir / config.output.summary, summary.dump(2) + "\n"); };

	if(!fs.frames_ok || !fs.symmetry_ok)
	{
		// no instantaneous eigenbasis without a valid metric and unbroken symmetry
		outcome.exit_code = finish(summary, config.checks, fs.frames_ok, fs.symmetry_ok, false, false);
		outcome.message = "frame or symmetry checks failed; evolution skipped";
		summary["message"] = outcome.message;
		outcome.summary = summary;
		write_summary();
		return outcome;
	}

	try
	{
		const EigenFrame ef = instantaneous_eigenframe(pr.H, pr.frames, pr.grid, config.tol.symmetry);
		if(!config.initial_state)
			pr.initial_state = ef.states.front().col(config.level);

		const Trajectory traj = evolve_state(pr);
		write_trajectory_csv(out_dir / config.output.trajectory, traj);

		const AdiabaticReport rep = adiabatic_report(pr, traj, ef, config.level, config.epsilon);
		write_report_csv(out_dir / config.output.report, rep);

		const double norm_drift = traj.max_norm_drift();
		const double max_drift = traj.max_abs_drift_rate();
		const bool expect_unitary = max_drift <= config.tol.drift_rate;
		const bool unitary_ok = !expect_unitary || norm_drift <= config.tol.norm_drift;
		const bool compensated_ok = config.equation != Equation::MetricCompensated || expect_unitary;

		int total_substeps = 0;
		for(const auto& p : traj.points)
			total_substeps += p.substeps;

		summary["evolution"] = {{"norm_drift", norm_drift},
		                        {"initial_cpt_norm", traj.points.front().cpt_norm},
		                        {"final_cpt_norm", traj.points.back().cpt_norm},
		                        {"max_abs_drift_rate", max_drift},
		                        {"expected_unitary", expect_unitary},
		                        {"total_substeps", total_substeps}};
		summary["adiabatic"] = {{"level", config.level},
		                        {"epsilon", config.epsilon},
		                        {"V_T", rep.V_T},
		                        {"max_loss", rep.max_loss},
		                        {"max_coupling_residual", *std::max_element(rep.coupling_residual.begin(), rep.coupling_residual.end())},
		                        {"bound_applies", rep.bound_applies},
		                        {"bound_satisfied", rep.bound_satisfied}};
		outcome.exit_code = finish(summary, config.checks, true, true, unitary_ok && compensated_ok, rep.bound_satisfied);
		outcome.message = outcome.exit_code == exit_ok ? "all enabled checks passed" : "some checks failed";
	}
	catch(const NumericalError& e)
	{
		outcome.exit_code = exit_numeric;
		outcome.message = fmt::format("{} (last good t={:.17g})", e.what(), e.last_good_time());
		summary["exit_code"] = exit_numeric;
	}
	catch(const FrameAxiomError& e)
	{
		outcome.exit_code = exit_numeric;
		outcome.message = e.what();
		summary["exit_code"] = exit_numeric;
	}
	summary["message"] = outcome.message;
	outcome.summary = summary;
	write_summary();
	return outcome;
}

std::vector<SweepRow> sweep(const ScenarioConfig& base, const std::string& axis, const std::vector<double>& values,
                            const std::filesystem::path& out_dir)
{
	const json base_json = config_to_json(base);
	std::string pointer_text = "/" + axis;
	std::replace(pointer_text.begin(), pointer_text.end(), '.', '/');
	json::json_pointer pointer(pointer_text);
	if(!base_json.contains(pointer) || !base_json.at(pointer).is_number())
		throw ConfigError(pointer_text, "sweep axis must name a numeric config field");
	const bool integral = base_json.at(pointer).is_number_integer();

	std::vector<SweepRow> rows(values.size());
	auto run_row = [&](std::size_t i) {
		SweepRow row;
		row.value = values[i];
		try
		{
			json j = base_json;
			if(integral)
			{
				if(values[i] != std::floor(values[i]))
					throw ConfigError(pointer_text, "integer field needs integral sweep values");
				j[pointer] = static_cast<int>(values[i]);
			}
			else
			{
				j[pointer] = values[i];
			}
			const ScenarioConfig cfg = config_from_json(j);
			const auto outcome = run_scenario(cfg, out_dir / fmt::format("row_{}", i));
			row.exit_code = outcome.exit_code;
			if(outcome.summary.contains("adiabatic"))
			{
				const auto& a = outcome.summary.at("adiabatic");
				row.V_T = a.at("V_T").get<double>();
				row.max_loss = a.at("max_loss").get<double>();
				row.bound_satisfied = a.at("bound_satisfied").get<bool>();
			}
			if(outcome.exit_code != exit_ok)
				row.error = outcome.message;
		}
		catch(const ConfigError& e)
		{
			row.exit_code = exit_config;
			row.error = e.what();
		}
		catch(const std::exception& e)
		{
			row.exit_code = exit_numeric;
			row.error = e.what();
		}
		rows[i] = row;
	};

	const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
	for(std::size_t first = 0; first < values.size(); first += workers)
	{
		std::vector<std::future<void>> batch;
		for(std::size_t i = first; i < std::min(values.size(), first + workers); ++i)
			batch.push_back(std::async(std::launch::async, run_row, i));
		for(auto& f : batch)
			f.get();
	}
	write_sweep_csv(out_dir / "sweep.csv", rows);
	return rows;
}

} // namespace ptqm
