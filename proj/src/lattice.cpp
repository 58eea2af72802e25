#include "dagas/lattice.hpp"

#include "dagas/error.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace dagas {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::parse_error: return "parse-error";
    case Errc::invalid_vertex: return "invalid-vertex";
    case Errc::width_too_small: return "width-too-small";
    case Errc::parity_mismatch: return "parity-mismatch";
    case Errc::not_a_free_set: return "not-a-free-set";
    case Errc::budget_exceeded: return "budget-exceeded";
    case Errc::divergent_bound: return "divergent-bound";
    case Errc::zero_normalizer: return "zero-normalizer";
    case Errc::zero_trace: return "zero-trace";
    case Errc::dominance_violation: return "dominance-violation";
    case Errc::complex_dominant: return "complex-dominant";
    case Errc::invalid_family_parameter: return "invalid-family-parameter";
    case Errc::width_too_large: return "width-too-large";
    case Errc::inconsistent_source: return "inconsistent-source";
    }
    return "unknown";
}

std::string to_string(const Vertex &v)
{
    return "(" + std::to_string(v.i) + "," + std::to_string(v.j) + ")";
}

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m)
{
    auto r = a % m;
    return r < 0 ? r + m : r;
}

int parse_int(std::string_view text, std::string_view field)
{
    while (!text.empty() && text.front() == ' ') {
        text.remove_prefix(1);
    }
    while (!text.empty() && text.back() == ' ') {
        text.remove_suffix(1);
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw Error(Errc::parse_error, std::string(field), "expected an integer, got '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = text.find(sep, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

} // namespace

Lattice::Lattice(Family family, std::vector<int> offsets, int n, std::vector<Step> steps)
    : family_(family), offsets_(std::move(offsets)), n_(n), steps_(std::move(steps))
{
}

Lattice Lattice::lr(std::vector<int> offsets)
{
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    if (offsets.size() < 2) {
        throw Error(Errc::invalid_family_parameter, "R", "LR needs at least two offsets");
    }
    if (offsets.front() != 0) {
        throw Error(Errc::invalid_family_parameter, "R", "LR offsets must be nonnegative with minimum 0");
    }
    std::vector<Step> steps;
    for (int r : offsets) {
        steps.push_back({r, 1});
    }
    const int n = static_cast<int>(offsets.size());
    return Lattice(Family::lr, std::move(offsets), n, std::move(steps));
}

Lattice Lattice::triangular()
{
    return Lattice(Family::triangular, {}, 2, {{-1, 1}, {1, 1}, {0, 2}});
}

Lattice Lattice::tn(int n)
{
    if (n < 2) {
        throw Error(Errc::invalid_family_parameter, "n", "Tn needs n >= 2");
    }
    std::vector<Step> steps;
    const int k = n / 2;
    if (n % 2 == 1) {
        for (int r = -k; r <= k; ++r) {
            steps.push_back({r, 1});
        }
    } else {
        for (int r = -k; r <= k - 1; ++r) {
            steps.push_back({2 * r + 1, 1});
        }
    }
    steps.push_back({0, 2});
    return Lattice(Family::tn, {}, n, std::move(steps));
}

Lattice Lattice::parse(std::string_view text)
{
    std::string_view family = text;
    std::optional<int> width;
    if (auto at = text.find('@'); at != std::string_view::npos) {
        family = text.substr(0, at);
        auto rest = text.substr(at + 1);
        if (!rest.starts_with("N=")) {
            throw Error(Errc::parse_error, "lattice", "expected '@N=<width>' in '" + std::string(text) + "'");
        }
        width = parse_int(rest.substr(2), "lattice");
    }
    std::optional<Lattice> lattice;
    if (family == "Tri") {
        lattice = triangular();
    } else if (family.starts_with("LR:")) {
        std::vector<int> offsets;
        for (auto part : split(family.substr(3), ',')) {
            offsets.push_back(parse_int(part, "lattice"));
        }
        lattice = lr(std::move(offsets));
    } else if (family.starts_with("Tn:")) {
        lattice = tn(parse_int(family.substr(3), "lattice"));
    } else {
        throw Error(Errc::parse_error, "lattice", "unknown lattice '" + std::string(text) + "'");
    }
    return width ? lattice->cyclic(*width) : *lattice;
}

int Lattice::max_offset() const noexcept
{
    if (family_ == Family::lr) {
        return offsets_.back();
    }
    int m = 0;
    for (const Step &s : steps_) {
        m = std::max(m, std::abs(s.di));
    }
    return m;
}

bool Lattice::parity_constrained() const noexcept
{
    return family_ == Family::triangular || (family_ == Family::tn && n_ % 2 == 0);
}

Lattice Lattice::cyclic(int width) const
{
    if (width_) {
        throw Error(Errc::invalid_argument, "lattice", "lattice is already cylindric");
    }
    if (width < 1) {
        throw Error(Errc::width_too_small, "N", "width must be positive");
    }
    if (parity_constrained() && width % 2 != 0) {
        throw Error(Errc::parity_mismatch, "N", "odd width breaks the same-parity labeling of " + to_string());
    }
    if (family_ == Family::lr && width <= max_offset()) {
        throw Error(Errc::width_too_small, "N", "width must exceed max(R) = " + std::to_string(max_offset()));
    }
    // Children of a vertex must stay distinct after wrapping.
    for (std::size_t a = 0; a < steps_.size(); ++a) {
        for (std::size_t b = a + 1; b < steps_.size(); ++b) {
            if (steps_[a].dj == steps_[b].dj && floor_mod(steps_[a].di - steps_[b].di, width) == 0) {
                throw Error(Errc::width_too_small, "N", "width " + std::to_string(width) + " merges two children");
            }
        }
    }
    Lattice out = *this;
    out.width_ = width;
    return out;
}

bool Lattice::is_valid(const Vertex &v) const noexcept
{
    if (width_ && (v.i < 0 || v.i >= *width_)) {
        return false;
    }
    if (parity_constrained() && floor_mod(v.i + v.j, 2) != 0) {
        return false;
    }
    return true;
}

void Lattice::require_valid(const Vertex &v, std::string_view field) const
{
    if (!is_valid(v)) {
        throw Error(Errc::invalid_vertex, std::string(field),
                    dagas::to_string(v) + " is not a vertex of " + to_string());
    }
}

Vertex Lattice::normalize(Vertex v) const noexcept
{
    if (width_) {
        v.i = floor_mod(v.i, *width_);
    }
    return v;
}

Vertex Lattice::translate(const Vertex &v, std::int64_t di, std::int64_t dj) const
{
    if (parity_constrained() && floor_mod(di + dj, 2) != 0) {
        throw Error(Errc::invalid_argument, "translation", "translation does not preserve parity");
    }
    return normalize(Vertex{v.i + di, v.j + dj});
}

std::vector<Vertex> Lattice::children(const Vertex &v) const
{
    require_valid(v);
    std::vector<Vertex> out;
    out.reserve(steps_.size());
    for_each_child(v, [&](const Vertex &c) { out.push_back(c); });
    return out;
}

std::vector<Vertex> Lattice::parents(const Vertex &v) const
{
    require_valid(v);
    std::vector<Vertex> out;
    out.reserve(steps_.size());
    for (const Step &s : steps_) {
        out.push_back(normalize(Vertex{v.i - s.di, v.j - s.dj}));
    }
    return out;
}

std::string Lattice::to_string() const
{
    std::ostringstream os;
    switch (family_) {
    case Family::lr:
        os << "LR:";
        for (std::size_t k = 0; k < offsets_.size(); ++k) {
            os << (k ? "," : "") << offsets_[k];
        }
        break;
    case Family::triangular: os << "Tri"; break;
    case Family::tn: os << "Tn:" << n_; break;
    }
    if (width_) {
        os << "@N=" << *width_;
    }
    return os.str();
}

Vertex parse_vertex(std::string_view text)
{
    auto parts = split(text, ',');
    if (parts.size() != 2) {
        throw Error(Errc::parse_error, "source", "expected 'i,j', got '" + std::string(text) + "'");
    }
    return Vertex{parse_int(parts[0], "source"), parse_int(parts[1], "source")};
}

std::vector<Vertex> parse_vertices(std::string_view text)
{
    std::vector<Vertex> out;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            out.push_back(parse_vertex(token));
            token.clear();
        }
    };
    for (char c : text) {
        if (c == ';' || c == ' ' || c == '\t') {
            flush();
        } else {
            token.push_back(c);
        }
    }
    flush();
    return out;
}

std::size_t Ball::edge_count() const noexcept
{
    std::size_t e = 0;
    for (const auto &c : children) {
        e += c.size();
    }
    return e;
}

Ball ball(const MarkedGraph &g, int radius)
{
    if (radius < 0) {
        throw Error(Errc::invalid_argument, "r", "radius must be nonnegative");
    }
    Ball out;
    out.radius = radius;
    std::unordered_map<Vertex, int, VertexHash> index;
    std::deque<int> queue;
    for (const Vertex &m : g.marks) {
        g.lattice.require_valid(m, "marks");
        const Vertex v = g.lattice.normalize(m);
        if (index.emplace(v, static_cast<int>(out.vertices.size())).second) {
            queue.push_back(static_cast<int>(out.vertices.size()));
            out.vertices.push_back(v);
            out.depth.push_back(0);
        }
    }
    out.mark_count = out.vertices.size();
    while (!queue.empty()) {
        const int k = queue.front();
        queue.pop_front();
        if (out.depth[k] >= radius) {
            continue;
        }
        const Vertex v = out.vertices[k];
        const int d = out.depth[k];
        g.lattice.for_each_child(v, [&](const Vertex &c) {
            if (index.emplace(c, static_cast<int>(out.vertices.size())).second) {
                queue.push_back(static_cast<int>(out.vertices.size()));
                out.vertices.push_back(c);
                out.depth.push_back(d + 1);
            }
        });
    }
    out.children.resize(out.vertices.size());
    for (std::size_t k = 0; k < out.vertices.size(); ++k) {
        g.lattice.for_each_child(out.vertices[k], [&](const Vertex &c) {
            if (auto it = index.find(c); it != index.end()) {
                out.children[k].push_back(it->second);
            }
        });
    }
    return out;
}

MarkedDistance marked_distance(const MarkedGraph &a, const MarkedGraph &b, int r_max)
{
    if (r_max < 0) {
        throw Error(Errc::invalid_argument, "r_max", "search cutoff must be nonnegative");
    }
    for (int r = 0; r <= r_max; ++r) {
        if (!ball(a, r).same_shape(ball(b, r))) {
            if (r == 0) {
                return {MarkedDistance::Kind::differs_at_root, 1.0, -1};
            }
            return {MarkedDistance::Kind::exact, 1.0 / r, r - 1};
        }
    }
    return {MarkedDistance::Kind::unresolved, 1.0 / (r_max + 2), r_max};
}

bool is_free_set(const Lattice &lattice, std::span<const Vertex> s)
{
    std::unordered_set<Vertex, VertexHash> targets;
    std::int64_t top = 0;
    for (const Vertex &v : s) {
        lattice.require_valid(v, "source");
        if (!targets.insert(lattice.normalize(v)).second) {
            throw Error(Errc::invalid_argument, "source", "duplicate vertex " + to_string(v));
        }
        top = targets.size() == 1 ? v.j : std::max(top, v.j);
    }
    // Every edge increases j, so a search from x never needs to pass line `top`.
    for (const Vertex &x0 : targets) {
        std::unordered_set<Vertex, VertexHash> seen{x0};
        std::vector<Vertex> stack{x0};
        while (!stack.empty()) {
            const Vertex v = stack.back();
            stack.pop_back();
            bool hit = false;
            lattice.for_each_child(v, [&](const Vertex &c) {
                if (hit || c.j > top) {
                    return;
                }
                if (targets.contains(c)) {
                    hit = true;
                    return;
                }
                if (seen.insert(c).second) {
                    stack.push_back(c);
                }
            });
            if (hit) {
                return false;
            }
        }
    }
    return true;
}

} // namespace dagas
