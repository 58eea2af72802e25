#pragma once

// Directed lattices of the LR, triangular and Tn families, their cylinders,
// oriented balls around marked vertices and the induced marked-graph distance.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dagas {

struct Vertex {
    std::int64_t i = 0;
    std::int64_t j = 0;

    friend bool operator==(const Vertex &, const Vertex &) = default;
    // Canonical order: by line first, then abscissa.
    friend std::strong_ordering operator<=>(const Vertex &a, const Vertex &b)
    {
        if (auto c = a.j <=> b.j; c != 0) {
            return c;
        }
        return a.i <=> b.i;
    }
};

struct VertexHash {
    std::size_t operator()(const Vertex &v) const noexcept
    {
        auto x = static_cast<std::uint64_t>(v.i) * 0x9E3779B97F4A7C15ull;
        x ^= static_cast<std::uint64_t>(v.j) + 0x7F4A7C159E3779B9ull + (x << 6) + (x >> 2);
        return static_cast<std::size_t>(x);
    }
};

std::string to_string(const Vertex &v);

enum class Family { lr, triangular, tn };

// One edge rule: (i, j) -> (i + di, j + dj).
struct Step {
    int di = 0;
    int dj = 0;
    friend bool operator==(const Step &, const Step &) = default;
};

class Lattice {
public:
    // LR lattice; `offsets` must contain 0 and at least one positive value.
    static Lattice lr(std::vector<int> offsets);
    static Lattice triangular();
    static Lattice tn(int n);

    // Parses "LR:0,1,4", "LR:0,1,4@N=12", "Tri", "Tri@N=8", "Tn:3", "Tn:4@N=10".
    static Lattice parse(std::string_view text);

    // Cylindric version of width `width`.
    Lattice cyclic(int width) const;

    Family family() const noexcept { return family_; }
    const std::vector<int> &offsets() const noexcept { return offsets_; }
    int n() const noexcept { return n_; }
    std::optional<int> width() const noexcept { return width_; }
    bool is_cylinder() const noexcept { return width_.has_value(); }
    int max_offset() const noexcept;
    std::size_t outdegree() const noexcept { return steps_.size(); }
    std::span<const Step> steps() const noexcept { return steps_; }

    bool is_valid(const Vertex &v) const noexcept;
    void require_valid(const Vertex &v, std::string_view field = "vertex") const;

    // Reduces the abscissa modulo the width on a cylinder; identity otherwise.
    Vertex normalize(Vertex v) const noexcept;

    // Vertex shifted by a lattice translation (di, dj); parity-preserving
    // translations only on the triangular and even Tn families.
    Vertex translate(const Vertex &v, std::int64_t di, std::int64_t dj) const;

    std::vector<Vertex> children(const Vertex &v) const;
    std::vector<Vertex> parents(const Vertex &v) const;

    template <typename F>
    void for_each_child(const Vertex &v, F &&f) const
    {
        for (const Step &s : steps_) {
            f(normalize(Vertex{v.i + s.di, v.j + s.dj}));
        }
    }

    std::string to_string() const;

    friend bool operator==(const Lattice &a, const Lattice &b)
    {
        return a.family_ == b.family_ && a.offsets_ == b.offsets_ && a.n_ == b.n_ && a.width_ == b.width_;
    }

private:
    Lattice(Family family, std::vector<int> offsets, int n, std::vector<Step> steps);

    bool parity_constrained() const noexcept;

    Family family_;
    std::vector<int> offsets_;
    int n_ = 0;
    std::optional<int> width_;
    std::vector<Step> steps_;
};

// Parses "i,j" and lists of vertices separated by ';' or whitespace.
Vertex parse_vertex(std::string_view text);
std::vector<Vertex> parse_vertices(std::string_view text);

struct MarkedGraph {
    Lattice lattice;
    std::vector<Vertex> marks;
};

// Oriented ball of radius r around the marks. `children[k]` lists, in
// edge-rule order, the indices of the children of `vertices[k]` that lie in
// the ball. Vertices are numbered in BFS order from the marks, so the pair
// (marks, children) is a label-free canonical form.
struct Ball {
    int radius = 0;
    std::size_t mark_count = 0;
    std::vector<Vertex> vertices;
    std::vector<int> depth;
    std::vector<std::vector<int>> children;

    bool same_shape(const Ball &other) const noexcept
    {
        return mark_count == other.mark_count && children == other.children;
    }
    std::size_t edge_count() const noexcept;
};

Ball ball(const MarkedGraph &g, int radius);

struct MarkedDistance {
    enum class Kind {
        differs_at_root, // even B_0 differs; distance 1
        exact,           // first difference observed at radius agreeing_radius + 1
        unresolved,      // equal through r_max; distance <= value
    };
    Kind kind = Kind::unresolved;
    double value = 0.0;
    int agreeing_radius = -1;
};

MarkedDistance marked_distance(const MarkedGraph &a, const MarkedGraph &b, int r_max);

// True iff no vertex of `s` is an ancestor of another one.
bool is_free_set(const Lattice &lattice, std::span<const Vertex> s);

} // namespace dagas
