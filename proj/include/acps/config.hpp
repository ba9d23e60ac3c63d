#pragma once

#include "acps/backtest.hpp"

#include <string>

namespace acps {

/// Backtest configuration from JSON text. Every schema violation (unknown
/// key, wrong type, out-of-range value) is collected and reported together
/// in a ConfigError. The series-dependent checks of
/// BacktestConfig::validate are left to the caller.
BacktestConfig parse_backtest_config(const std::string &json_text);

/// Reads and parses a configuration file; an unreadable file is an InputError.
BacktestConfig load_backtest_config(const std::string &path);

} // namespace acps
