#include "dagas/gas.hpp"

#include "dagas/animals.hpp"
#include "dagas/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <thread>
#include <unordered_set>

namespace dagas {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Color Coloring::color(const Vertex &v) const noexcept
{
    const std::uint64_t h =
        mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(v.i))) ^ static_cast<std::uint64_t>(v.j));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return u < p ? Color::a : Color::b;
}

void check_subcritical(const Lattice &lattice, double p, bool override_bound)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(Errc::invalid_argument, "p", "p must lie in [0, 1]");
    }
    const double bound = 1.0 / static_cast<double>(lattice.outdegree());
    if (!override_bound && p >= bound) {
        throw Error(Errc::invalid_argument, "p",
                    "p must stay below 1/outdegree = " + std::to_string(bound) + " (pass an override to force)");
    }
}

GasEvaluator::GasEvaluator(const Lattice &lattice, const Coloring &coloring, std::size_t cell_budget)
    : lattice_(lattice), coloring_(coloring), cell_budget_(cell_budget)
{
    if (cell_budget == 0) {
        throw Error(Errc::invalid_argument, "cell_budget", "cell budget must be positive");
    }
}

void GasEvaluator::reset(const Coloring &coloring)
{
    coloring_ = coloring;
    if (memo_.bucket_count() > 4096) {
        memo_ = {};
    } else {
        memo_.clear();
    }
}

void GasEvaluator::remember(const Vertex &v, std::int8_t x)
{
    memo_.emplace(v, x);
    if (memo_.size() > cell_budget_) {
        throw Error(Errc::budget_exceeded, "cell_budget",
                    "gas recursion visited more than " + std::to_string(cell_budget_) + " vertices");
    }
}

int GasEvaluator::value(const Vertex &v0)
{
    const Vertex root = lattice_.normalize(v0);
    if (auto it = memo_.find(root); it != memo_.end()) {
        return it->second;
    }
    if (!coloring_.is_a(root)) {
        remember(root, 0);
        return 0;
    }
    struct Frame {
        Vertex v;
        std::size_t next;
    };
    const auto steps = lattice_.steps();
    std::vector<Frame> stack{{root, 0}};
    while (!stack.empty()) {
        Frame &f = stack.back();
        if (f.next == steps.size()) {
            // Every child is empty.
            const Vertex done = f.v;
            stack.pop_back();
            remember(done, 1);
            continue;
        }
        const Vertex c = lattice_.normalize(Vertex{f.v.i + steps[f.next].di, f.v.j + steps[f.next].dj});
        auto it = memo_.find(c);
        if (it == memo_.end() && !coloring_.is_a(c)) {
            remember(c, 0);
            ++f.next;
            continue;
        }
        if (it == memo_.end()) {
            stack.push_back({c, 0});
            continue;
        }
        if (it->second == 1) {
            const Vertex done = f.v;
            stack.pop_back();
            remember(done, 0);
            continue;
        }
        ++f.next;
    }
    return memo_.at(root);
}

std::size_t GasEvaluator::hard_particle_violations() const
{
    std::size_t bad = 0;
    for (const auto &[v, x] : memo_) {
        if (x != 1) {
            continue;
        }
        lattice_.for_each_child(v, [&](const Vertex &c) {
            auto it = memo_.find(c);
            if (it != memo_.end() && it->second == 1) {
                ++bad;
            }
        });
    }
    return bad;
}

int gas_value(const Lattice &lattice, const Coloring &coloring, const Vertex &v, std::size_t cell_budget)
{
    lattice.require_valid(lattice.normalize(v), "vertex");
    GasEvaluator eval(lattice, coloring, cell_budget);
    return eval.value(v);
}

Animal random_animal(const Lattice &lattice, const Coloring &coloring, std::span<const Vertex> source,
                     std::size_t cell_budget)
{
    Animal out;
    std::unordered_set<Vertex, VertexHash> cells;
    std::deque<Vertex> queue;
    for (const Vertex &s : source) {
        lattice.require_valid(s, "source");
        const Vertex v = lattice.normalize(s);
        if (coloring.is_a(v) && cells.insert(v).second) {
            out.source.push_back(v);
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        const Vertex v = queue.front();
        queue.pop_front();
        lattice.for_each_child(v, [&](const Vertex &c) {
            if (coloring.is_a(c) && cells.insert(c).second) {
                if (cells.size() > cell_budget) {
                    throw Error(Errc::budget_exceeded, "cell_budget",
                                "random animal exceeds " + std::to_string(cell_budget) + " cells");
                }
                queue.push_back(c);
            }
        });
    }
    out.cells.assign(cells.begin(), cells.end());
    std::sort(out.cells.begin(), out.cells.end());
    return out;
}

OccupationEstimate estimate_occupation(const Lattice &lattice, std::span<const Vertex> source, double p,
                                       std::uint64_t n_samples, std::uint64_t seed, const OccupationOptions &options)
{
    check_subcritical(lattice, p, options.override_bound);
    if (n_samples == 0) {
        throw Error(Errc::invalid_argument, "n", "at least one sample is required");
    }
    std::vector<Vertex> s;
    for (const Vertex &v : source) {
        lattice.require_valid(v, "source");
        s.push_back(lattice.normalize(v));
    }
    if (!is_free_set(lattice, s)) {
        throw Error(Errc::not_a_free_set, "source", "source contains an ancestor of another source vertex");
    }

    struct Tally {
        std::uint64_t hits = 0, failures = 0, violations = 0;
    };
    const unsigned workers = static_cast<unsigned>(
        std::min<std::uint64_t>(options.threads ? options.threads : default_thread_count(), n_samples));
    std::vector<Tally> tallies(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
        try {
            GasEvaluator eval(lattice, Coloring{seed, p}, options.cell_budget);
            Tally &t = tallies[w];
            for (std::uint64_t k = w; k < n_samples; k += workers) {
                eval.reset(Coloring{seed ^ mix64(k), p});
                try {
                    bool all = true;
                    for (const Vertex &v : s) {
                        if (eval.value(v) == 0) {
                            all = false;
                            break;
                        }
                    }
                    t.hits += all ? 1 : 0;
                    t.violations += eval.hard_particle_violations();
                } catch (const Error &e) {
                    if (e.code() != Errc::budget_exceeded) {
                        throw;
                    }
                    ++t.failures;
                }
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    OccupationEstimate out;
    out.samples = n_samples;
    for (unsigned w = 0; w < workers; ++w) {
        if (errors[w]) {
            std::rethrow_exception(errors[w]);
        }
        out.hits += tallies[w].hits;
        out.failures += tallies[w].failures;
        out.violations += tallies[w].violations;
    }
    if (static_cast<double>(out.failures) > 1e-3 * static_cast<double>(n_samples)) {
        throw Error(Errc::budget_exceeded, "cell_budget",
                    std::to_string(out.failures) + " of " + std::to_string(n_samples) +
                        " samples exceeded the cell budget");
    }
    const double used = static_cast<double>(n_samples - out.failures);
    if (used > 0) {
        out.estimate = static_cast<double>(out.hits) / used;
        out.stderr_ = std::sqrt(out.estimate * (1.0 - out.estimate) / used);
    }
    return out;
}

} // namespace dagas
