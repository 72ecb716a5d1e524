#pragma once

#include <string>
#include <vector>

namespace possim {

struct RunResult {
    int status = 0;  // 0 ok, 2 bad config, 3 fixture mismatch, 4 numeric failure
    std::string message;
    std::vector<std::string> artifacts;
};

/// Executes one JSON-configured command and writes its CSV artifacts.
/// out_path overrides the config's "out"; seed_override (decimal string)
/// overrides the config seed; threads <= 0 keeps the default.
RunResult run_config_json(const std::string& config_text, const std::string& out_path,
                          int threads, bool verbose,
                          const std::string* seed_override);

} // namespace possim
