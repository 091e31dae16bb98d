#pragma once

#include <map>
#include <string>

#include "coevo/solver.hpp"

namespace coevo {

struct Config {
    SolverConfig solver;
    std::string synth_cmd;
    std::string synth_builtin;
    int synth_timeout_ms = 60000;
};

// key = value lines, '#' starts a comment
std::map<std::string, std::string> parse_kv(const std::string& text);
void apply_config(Config& c, const std::map<std::string, std::string>& kv);
Config load_config(const std::string& path);

}  // namespace coevo
