#pragma once

#include <spdlog/spdlog.h>

namespace automsc {

/// Installs a stdout logger whose level comes from the AUTOMSC_LOG
/// environment variable (trace, debug, info, warn, error, off). Defaults to
/// info. Safe to call more than once.
void init_logging();

}  // namespace automsc
