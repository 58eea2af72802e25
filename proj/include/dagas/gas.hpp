#pragma once

// Seeded random colorings, the hard-particle gas they induce, the random
// animal of a coloring and Monte Carlo estimates of occupation probabilities.

#include "dagas/lattice.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace dagas {

enum class Color : std::uint8_t { a, b };

std::uint64_t mix64(std::uint64_t x) noexcept;

// A lazily realized i.i.d. coloring: color(v) depends only on (seed, p, v).
struct Coloring {
    std::uint64_t seed = 0;
    double p = 0.0;

    Color color(const Vertex &v) const noexcept;
    bool is_a(const Vertex &v) const noexcept { return color(v) == Color::a; }
};

inline constexpr std::size_t default_cell_budget = 1'000'000;

// Rejects p outside [0, 1], and p at or above 1/outdegree unless `override_bound`.
void check_subcritical(const Lattice &lattice, double p, bool override_bound);

// Evaluates the gas occupation of one coloring, memoizing every vertex it touches.
class GasEvaluator {
public:
    GasEvaluator(const Lattice &lattice, const Coloring &coloring, std::size_t cell_budget = default_cell_budget);

    int value(const Vertex &v);

    // Occupied vertices with an occupied evaluated child.
    std::size_t hard_particle_violations() const;

    const std::unordered_map<Vertex, std::int8_t, VertexHash> &memo() const noexcept { return memo_; }

    // Forget everything and continue with another coloring.
    void reset(const Coloring &coloring);

private:
    void remember(const Vertex &v, std::int8_t x);

    const Lattice &lattice_;
    Coloring coloring_;
    std::size_t cell_budget_;
    std::unordered_map<Vertex, std::int8_t, VertexHash> memo_;
};

int gas_value(const Lattice &lattice, const Coloring &coloring, const Vertex &v,
              std::size_t cell_budget = default_cell_budget);

struct Animal {
    std::vector<Vertex> source;
    std::vector<Vertex> cells; // sorted
};

Animal random_animal(const Lattice &lattice, const Coloring &coloring, std::span<const Vertex> source,
                     std::size_t cell_budget = default_cell_budget);

struct OccupationOptions {
    std::size_t cell_budget = default_cell_budget;
    bool override_bound = false;
    unsigned threads = 0; // 0: DAGAS_THREADS or hardware concurrency
};

struct OccupationEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t hits = 0;
    std::uint64_t failures = 0;
    std::uint64_t violations = 0;
};

// Sample k uses the coloring seeded with seed ^ mix64(k), so the result does
// not depend on the number of workers.
OccupationEstimate estimate_occupation(const Lattice &lattice, std::span<const Vertex> source, double p,
                                       std::uint64_t n_samples, std::uint64_t seed,
                                       const OccupationOptions &options = {});

} // namespace dagas
