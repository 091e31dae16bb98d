#include "coevo/config.hpp"

#include <fstream>
#include <sstream>

#include "coevo/errors.hpp"

namespace coevo {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw Error("config: " + key + " expects an integer, got '" + v + "'");
}

}  // namespace

std::map<std::string, std::string> parse_kv(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line " + std::to_string(n) + ": expected key = value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

void apply_config(Config& c, const std::map<std::string, std::string>& kv) {
    for (auto& [k, v] : kv) {
        if (k == "solver.cmd") {
            c.solver.smt_cmd = v;
            c.solver.backend = Backend::Smt;
        } else if (k == "solver.backend") {
            if (v == "bounded") c.solver.backend = Backend::Bounded;
            else if (v == "smt") c.solver.backend = Backend::Smt;
            else throw Error("config: solver.backend must be bounded or smt");
        } else if (k == "solver.timeout_ms") {
            c.solver.timeout_ms = static_cast<int>(to_int(k, v));
        } else if (k == "synth.cmd") {
            c.synth_cmd = v;
        } else if (k == "synth.builtin") {
            c.synth_builtin = v;
        } else if (k == "synth.timeout_ms") {
            c.synth_timeout_ms = static_cast<int>(to_int(k, v));
        } else if (k == "domain.int_lo") {
            c.solver.domain.int_lo = to_int(k, v);
        } else if (k == "domain.int_hi") {
            c.solver.domain.int_hi = to_int(k, v);
        } else if (k == "domain.max_array_len") {
            c.solver.domain.max_array_len = static_cast<int>(to_int(k, v));
        } else {
            throw Error("config: unknown key " + k);
        }
    }
    if (c.solver.domain.int_lo > c.solver.domain.int_hi) throw Error("config: empty integer domain");
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    Config c;
    apply_config(c, parse_kv(ss.str()));
    return c;
}

}  // namespace coevo
