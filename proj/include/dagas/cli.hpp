#pragma once

// Command-line surface: one binary with subcommands, JSON by default.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dagas {

struct RunConfig {
    std::string command;
    std::string lattice = "LR:0,1";
    std::string other_lattice; // distance; defaults to `lattice`
    std::string source = "0,0";
    std::string other_source;  // distance; defaults to `source`
    std::string family = "LR:0,1";
    std::string chain = "TriLine";
    std::string positions = "0";
    std::string entry;
    std::string method = "augment";
    std::string exact_p;       // rational p for the characteristic polynomial
    std::string trajectory;    // cyclic: states x_0..x_{N-1}
    std::optional<double> p;
    std::vector<double> p_grid;
    int N = 6;
    int k_max = 10;
    int r_max = 12;
    int area = 10;
    int sum_terms = 0;
    double tolerance = 1e-6;
    std::uint64_t n_samples = 100000;
    std::uint64_t seed = 1;
    bool override_bound = false;
    unsigned threads = 0;      // execution detail, not echoed in the output
    std::string format = "json";
};

// Exit status: 0 success, 2 validation error, 3 budget exhausted.
int run(const RunConfig &config, std::ostream &out, std::ostream &err);

// Parses the arguments (argv[0] is the program name) and runs.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace dagas
