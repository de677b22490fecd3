#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "horotree/core.hpp"

namespace horotree {

// End-to-end run parameters. Key = value config files use the field names
// below; command-line flags override file values.
struct RunConfig {
    std::string source = "tiling:4,5";
    int radius = 11;
    int depth = 5;        // tree depth N
    int horizon = 4;      // infinitude horizon H
    int delta = -1;       // hyperbolicity constant override (-1: per-source default)
    int cone_depth = 3;   // truncation depth for cone comparisons
    int equiv_depth = 10; // bounded-equivalence test depth
    int state_bound = 512;
    int level = 1;        // atoms subcommand level
    std::string element;  // generator word for transducer/encode
    std::string out_dir;  // artifact directory (empty: stdout only)
    bool dump = false;    // atoms subcommand: full membership dump

    void set(const std::string& key, const std::string& value) {
        auto as_int = [&](int& field) {
            try {
                field = std::stoi(value);
            } catch (...) {
                fail_input("config: bad integer for key '" + key + "'");
            }
        };
        if (key == "source") source = value;
        else if (key == "radius") as_int(radius);
        else if (key == "depth") as_int(depth);
        else if (key == "horizon") as_int(horizon);
        else if (key == "delta") as_int(delta);
        else if (key == "cone_depth") as_int(cone_depth);
        else if (key == "equiv_depth") as_int(equiv_depth);
        else if (key == "state_bound") as_int(state_bound);
        else if (key == "level") as_int(level);
        else if (key == "element") element = value;
        else if (key == "out_dir") out_dir = value;
        else if (key == "dump") dump = (value == "1" || value == "true");
        else fail_input("config: unknown key '" + key + "'");
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) fail_input("config: cannot open '" + path + "'");
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) {
                std::istringstream probe(line);
                std::string tok;
                if (probe >> tok)
                    fail_input("config: line " + std::to_string(lineno) + " is not key = value");
                continue;
            }
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }

    void validate() const {
        if (radius < 0 || depth < 0 || horizon < 1 || cone_depth < 1 || equiv_depth < 1 ||
            state_bound < 1)
            fail_input("config: all depths must be positive");
        if (depth + horizon + 1 > radius)
            fail_radius("config: need radius >= depth + horizon + 1 + margin");
    }
};

}  // namespace horotree
