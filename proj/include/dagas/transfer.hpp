#pragma once

// Transfer matrices of the LR, triangular and Tn lattices, the stationary
// laws of the gas on a cylinder line, and exact characteristic polynomials.

#include "dagas/cyclic_mc.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace dagas {

using Rational = boost::multiprecision::cpp_rational;

struct TransferFamily {
    enum class Kind {
        lr,       // line of an LR lattice, window max(R)
        tri_pair, // two consecutive triangular lines read as one zigzag sequence
        tri_line, // one triangular line
        tn,       // one line of Tn, window n - 1
    };
    Kind kind = Kind::lr;
    std::vector<int> offsets; // R for lr
    int n = 0;                // for tn

    static TransferFamily lr(std::vector<int> offsets);
    static TransferFamily tri_pair() { return {Kind::tri_pair, {}, 2}; }
    static TransferFamily tri_line() { return {Kind::tri_line, {}, 2}; }
    static TransferFamily tn(int n);
    // "LR:0,1", "TriPair", "TriLine", "Tn:3"
    static TransferFamily parse(std::string_view text);

    int window() const noexcept;
    std::string to_string() const;
};

// How the clause "s_r = 1 and max(R) - r in R" indexes the window bits.
enum class IndexConvention { zero_based, one_based };
std::string_view to_string(IndexConvention c) noexcept;

TransferMatrix build_transfer(const TransferFamily &family, double p,
                              IndexConvention convention = IndexConvention::zero_based);
std::vector<std::vector<Rational>> build_transfer_exact(const TransferFamily &family, const Rational &p,
                                                        IndexConvention convention = IndexConvention::zero_based);

// Literal neighborhoods on Z/NZ: LR {i + r}, {i - r}; triangular {i - 1, i + 1};
// Tn {i + r : |r| <= k} (odd n) or {i + 2r + 1 : -k <= r < k} (even n).
struct Neighborhoods {
    std::vector<int> forward;
    std::vector<int> backward;
};
Neighborhoods neighborhoods(const TransferFamily &family, const std::vector<int> &c, int width);

// Subsets of [N] are bit masks (bit c set iff c is occupied). Pair laws use
// index C | D << N, with D the occupied vertices of the next line in its
// own local numbering.
struct LineLaw {
    TransferFamily family;
    int width = 0;
    double p = 0.0;
    bool pair = false;
    std::vector<double> closed;  // product formula over subsets
    std::vector<double> product; // transfer-matrix product / trace
    double subset_normalizer = 0.0;
    double trace = 0.0;
    double max_difference = 0.0;
    IndexConvention convention = IndexConvention::zero_based;

    double at(unsigned mask) const { return closed.at(mask); }
};

// TriPair gives the pair law of two triangular lines; every other family a
// single line. Triangular and Tn lines have N vertices each.
LineLaw stationary_line_law(const TransferFamily &family, int width, double p);
// The two-line law of the triangular or Tn lattice in closed form.
std::vector<double> pair_law(const TransferFamily &family, int width, double p);

struct RecurrenceReport {
    double residual = 0.0;          // layer recurrence, closed form plugged in
    double product_residual = 0.0;  // same with the transfer product form
    double marginal_residual = 0.0; // sum_D F_{C,D} - F_C (pair families)
    double trace_residual = 0.0;    // |trace(V^N) - Z_N| / Z_N
    IndexConvention convention = IndexConvention::zero_based;
};

RecurrenceReport recurrence_residual(const TransferFamily &family, int width, double p);
// Residual of an arbitrary law: a line law for LR, a pair law otherwise.
double recurrence_residual(const TransferFamily &family, int width, double p, const std::vector<double> &law);

// Coefficients c_0..c_d of det(x I - V), lowest degree first.
std::vector<Rational> characteristic_polynomial(const std::vector<std::vector<Rational>> &v);

struct CharPolyReport {
    TransferFamily family;
    Rational p;
    std::vector<Rational> computed;
    std::vector<Rational> printed;   // printed chi for Tn, empty otherwise
    bool printed_matches = false;
    bool rewrite_matches = false;    // (1 - x) chi(x) against its printed rewrite
    double lambda = 0.0;
    // Named residuals at the dominant eigenvalue.
    std::vector<std::pair<std::string, double>> residuals;
};

CharPolyReport char_poly_check(const TransferFamily &family, const Rational &p);

} // namespace dagas
