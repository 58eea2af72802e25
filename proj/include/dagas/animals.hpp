#pragma once

// Exhaustive enumeration of directed animals with a prescribed source.

#include "dagas/lattice.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <span>
#include <vector>

namespace dagas {

using BigInt = boost::multiprecision::cpp_int;

// a_k for k = |S| .. k_max: the number of directed animals with source
// exactly S and area k.
struct CountSeries {
    Lattice lattice = Lattice::lr({0, 1});
    std::vector<Vertex> source;
    int k_max = 0;
    std::vector<BigInt> coeffs;

    int s0() const noexcept { return static_cast<int>(source.size()); }
    const BigInt &at(int k) const { return coeffs.at(static_cast<std::size_t>(k - s0())); }
};

enum class Enumerator {
    // Growth from the source where each untried frontier cell is either
    // added or permanently excluded; every animal is reached once.
    canonical_augmentation,
    // Level-by-level growth with explicit deduplication of vertex sets.
    naive,
};

struct EnumerationLimits {
    int max_added_cells = 16;            // k_max - |S|
    std::uint64_t max_animals = 4'000'000'000ull;
    unsigned threads = 0;                // 0: DAGAS_THREADS or hardware concurrency
};

CountSeries enumerate_counts(const Lattice &lattice, std::span<const Vertex> source, int k_max,
                             Enumerator strategy = Enumerator::canonical_augmentation,
                             const EnumerationLimits &limits = {});

struct AlternatingValue {
    double value = 0.0;
    double truncation_bound = 0.0;
    double growth_ratio = 0.0;
};

// Partial evaluation of (-1)^{|S|} G_S(-p) with a geometric majorant of the
// neglected tail built from the largest observed coefficient ratio.
AlternatingValue series_eval_alternating(const CountSeries &series, double p);

// Largest ratio a_{k+1} / a_k over the enumerated range (0 when undefined).
double growth_ratio(const CountSeries &series);

unsigned default_thread_count();

} // namespace dagas
