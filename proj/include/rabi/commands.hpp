#pragma once

#include "rabi/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rabi {

struct CommandOptions {
    std::filesystem::path out;  // output directory
    bool emit_plots = false;
};

// Each command writes its data files plus manifest.json into options.out and
// returns the written paths (relative to options.out) in writing order.
std::vector<std::string> cmd_spectrum(const RunConfig& config, const CommandOptions& options);
std::vector<std::string> cmd_scan(const RunConfig& config, const CommandOptions& options);
std::vector<std::string> cmd_average(const RunConfig& config, const CommandOptions& options);
std::vector<std::string> cmd_oracle(const RunConfig& config, const CommandOptions& options);
std::vector<std::string> cmd_deconvolve(const RunConfig& config, const CommandOptions& options);

std::vector<std::string> run_command(const std::string& name, const RunConfig& config,
                                     const CommandOptions& options);

// Library version recorded in manifests.
inline constexpr const char* library_version = "1.0.0";

} // namespace rabi
