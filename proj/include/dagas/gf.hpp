#pragma once

// Occupation probabilities and generating-function values for sources on a
// line, computed from the limit chains, and a registry of closed forms that
// are checked against brute-force series and chain values.

#include "dagas/animals.hpp"
#include "dagas/cyclic_mc.hpp"
#include "dagas/series.hpp"
#include "dagas/transfer.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dagas {

// A source read along one of the line chains. Positions are chain
// coordinates:
//   lr_line    position c -> (c, 0)
//   tri_mixed  position x -> (x, x mod 2), the zigzag over two lines
//   tri_line   position c -> (2c, 0)
//   tn_line    position c -> (c, 0) for odd n, (2c, 0) for even n
struct LineSource {
    enum class Chain { lr_line, tri_mixed, tri_line, tn_line };

    Chain chain = Chain::lr_line;
    std::vector<int> offsets; // lr_line only
    int n = 0;                // tn_line only
    std::vector<int> positions;

    static LineSource lr(std::vector<int> offsets, std::vector<int> positions);
    static LineSource tri_mixed(std::vector<int> positions);
    static LineSource tri_line(std::vector<int> positions);
    static LineSource tn(int n, std::vector<int> positions);
    // Chain names: "LR:0,1", "TriMixed", "TriLine", "Tn:3".
    static LineSource parse(std::string_view chain, std::vector<int> positions);

    TransferFamily family() const;
    Lattice lattice() const;
    Vertex vertex_at(int position) const;
    std::vector<Vertex> vertices() const;
    std::string chain_name() const;

    // Positions strictly increasing, the vertex set free, and the LR offsets
    // symmetric (R = max(R) - R); the line law is not a chain otherwise.
    void validate() const;
};

// P(every source position is occupied) under a stationary chain over
// window states {0,1}^window whose newest cell is the least significant bit.
double line_source_prob(const ChainSpec &chain, int window, std::span<const int> positions);
// Same, with the limit chain of the source's family at p.
double line_source_prob(const LineSource &source, double p);
// G_S(-p) = (-1)^{|S|} P(S occupied).
double gf_value(const LineSource &source, double p);

// Partial sum of G_{S_n}(-p) over compact sources S_n = {0, .., n-1} of a
// triangular line, with the geometric bound on the neglected terms.
struct CompactSum {
    double p = 0.0;
    int terms = 0;
    double partial = 0.0;
    double tail_bound = 0.0;
    double rounding_bound = 0.0; // floating-point error of the partial sum
    double ratio = 0.0;          // P(next cell occupied | cell occupied)
};
CompactSum compact_source_sum(double p, int terms);

// Brute-force oracles. `gf_series` is sum_k a_k t^k through t^area;
// `occupation_series` is P(U occupied) as a series in p (exactly zero when
// U contains an edge).
Series gf_series(const Lattice &lattice, std::span<const Vertex> source, int area);
Series occupation_series(const Lattice &lattice, std::span<const Vertex> cells, int area);

enum class Status { untested, pass, corrected, fail };
std::string_view to_string(Status s) noexcept;

struct FormulaVariant {
    std::string name;
    std::string description;
    bool printed = false;
    // Series that must vanish; `area` is the brute-force enumeration bound.
    std::function<std::vector<Series>(int area)> series_residual;
    // Differences from chain-based values at p.
    std::function<std::vector<double>(double p)> chain_residual;
};

struct FormulaEntry {
    std::string id;
    std::string title;
    std::string applicability;
    std::string variable; // expansion variable of the series check
    std::vector<FormulaVariant> variants;
};

struct AdjudicationOptions {
    std::vector<double> p_grid{0.1, 0.2};
    int area = 10;
    double tolerance = 1e-6;
    int min_trusted_order = 6;
};

struct SeriesCheck {
    int trusted_order = -1;             // highest order known exactly
    std::optional<int> first_mismatch;  // lowest order with a nonzero residual
    std::string leading_residual;       // that coefficient, as a rational
    bool agrees = false;
};

struct PointCheck {
    double p = 0.0;
    double residual = 0.0; // max over components
    bool agrees = false;
};

struct VariantReport {
    std::string name;
    std::string description;
    bool printed = false;
    SeriesCheck series;
    std::vector<PointCheck> chain;
    std::string error; // set if a check raised
    bool agrees = false;
};

struct AdjudicationReport {
    std::string id;
    std::string title;
    std::string applicability;
    std::string variable;
    AdjudicationOptions options;
    std::vector<VariantReport> variants;
    Status status = Status::untested;
};

const std::vector<FormulaEntry> &formula_registry();
// Accepts registry ids and the alias "prop1ii-sum".
const FormulaEntry &find_formula(std::string_view id);
AdjudicationReport adjudicate(const FormulaEntry &entry, const AdjudicationOptions &options = {});
// Every registry entry, in registry order, spread over `threads` workers.
std::vector<AdjudicationReport> adjudicate_all(const AdjudicationOptions &options = {}, unsigned threads = 0);

} // namespace dagas
