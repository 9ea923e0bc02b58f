#pragma once

#include <spdlog/spdlog.h>

namespace ptqm
{

// Library-wide logger ("ptqm", stderr). Defaults to warnings and above.
spdlog::logger& log();

} // namespace ptqm
