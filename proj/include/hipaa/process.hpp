#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hipaa {

struct ProcessResult {
    // Exit status when the child exited normally.
    std::optional<int> exit_status;
    // Terminating signal otherwise.
    std::optional<int> signal;
    bool timed_out = false;
};

// Runs argv[0] (searched on PATH) with stdin from /dev/null and stdout/stderr
// redirected to the given files. The child runs in its own process group,
// which is killed when `timeout` elapses. Throws std::system_error when the
// process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& stdout_path,
                          const std::filesystem::path& stderr_path, std::chrono::milliseconds timeout);

} // namespace hipaa
