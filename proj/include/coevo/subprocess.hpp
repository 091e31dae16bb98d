#pragma once

#include <string>

namespace coevo {

struct ProcessResult {
    int exit_status = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

// runs `/bin/sh -c command`, feeding input on stdin; timeout_ms <= 0 waits forever
ProcessResult run_process(const std::string& command, const std::string& input, int timeout_ms);

// kills every live child; safe to call from a signal handler
void kill_children();
void install_child_cleanup();

}  // namespace coevo
