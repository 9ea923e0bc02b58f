#include "ptqm/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

namespace ptqm
{

spdlog::logger& log()
{
	static std::shared_ptr<spdlog::logger> logger = [] {
		auto existing = spdlog::get("ptqm");
		if(existing)
			return existing;
		auto created = spdlog::stderr_color_mt("ptqm");
		created->set_level(spdlog::level::warn);
		return created;
	}();
	return *logger;
}

} // namespace ptqm
