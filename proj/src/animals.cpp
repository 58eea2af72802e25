#include "dagas/animals.hpp"

#include "dagas/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

namespace dagas {

unsigned default_thread_count()
{
    if (const char *env = std::getenv("DAGAS_THREADS"); env != nullptr) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::vector<Vertex> checked_source(const Lattice &lattice, std::span<const Vertex> source, int k_max,
                                   const EnumerationLimits &limits)
{
    std::vector<Vertex> s;
    for (const Vertex &v : source) {
        lattice.require_valid(v, "source");
        s.push_back(lattice.normalize(v));
    }
    if (k_max < static_cast<int>(s.size())) {
        throw Error(Errc::invalid_argument, "k_max", "k_max must be at least |S|");
    }
    if (!is_free_set(lattice, s)) {
        throw Error(Errc::not_a_free_set, "source", "source contains an ancestor of another source vertex");
    }
    if (k_max - static_cast<int>(s.size()) > limits.max_added_cells) {
        throw Error(Errc::budget_exceeded, "k_max",
                    "exhaustive search limited to " + std::to_string(limits.max_added_cells) + " cells beyond the source");
    }
    return s;
}

// Frontier-exclusion search over the ball of radius k_max - |S| around the
// source. `buffer[begin, end)` holds the untried cells of the current branch.
class Augmenter {
public:
    Augmenter(const Ball &ball, int s0, int k_max, std::uint64_t max_animals, std::atomic<std::uint64_t> &total)
        : ball_(ball), s0_(s0), k_max_(k_max), max_animals_(max_animals), total_(total),
          seen_(ball.vertices.size(), 0), buffer_(ball.vertices.size() + 1), counts_(k_max + 1, 0)
    {
    }

    void mark_seen(int id) { seen_[id] = 1; }
    int &slot(std::size_t k) { return buffer_[k]; }

    // Top-level branch: add buffer_[idx] with buffer_[idx + 1, end) still untried.
    void branch(int idx, int end)
    {
        expand(idx, end, s0_);
    }

    const std::vector<std::uint64_t> &counts() const noexcept { return counts_; }

private:
    void expand(int idx, int end, int size)
    {
        const int cell = buffer_[idx];
        int new_end = end;
        for (int c : ball_.children[cell]) {
            if (!seen_[c]) {
                seen_[c] = 1;
                buffer_[new_end++] = c;
            }
        }
        visit(idx + 1, new_end, size + 1);
        for (int k = end; k < new_end; ++k) {
            seen_[buffer_[k]] = 0;
        }
    }

    void visit(int begin, int end, int size)
    {
        ++counts_[size];
        if (++since_flush_ == 1u << 16) {
            flush();
        }
        if (size == k_max_) {
            return;
        }
        for (int idx = begin; idx < end; ++idx) {
            expand(idx, end, size);
        }
    }

    void flush()
    {
        if (total_.fetch_add(since_flush_) + since_flush_ > max_animals_) {
            throw Error(Errc::budget_exceeded, "k_max", "animal budget exhausted");
        }
        since_flush_ = 0;
    }

    const Ball &ball_;
    int s0_;
    int k_max_;
    std::uint64_t max_animals_;
    std::atomic<std::uint64_t> &total_;
    std::uint64_t since_flush_ = 0;
    std::vector<char> seen_;
    std::vector<int> buffer_;
    std::vector<std::uint64_t> counts_;
};

std::vector<BigInt> count_by_augmentation(const Lattice &lattice, const std::vector<Vertex> &s, int k_max,
                                          const EnumerationLimits &limits)
{
    const int s0 = static_cast<int>(s.size());
    const Ball region = ball(MarkedGraph{lattice, s}, k_max - s0);

    // Initial frontier: children of the source in source order, edge-rule order.
    std::vector<char> seen(region.vertices.size(), 0);
    std::vector<int> frontier;
    for (int id = 0; id < s0; ++id) {
        seen[id] = 1;
    }
    for (int id = 0; id < s0; ++id) {
        for (int c : region.children[id]) {
            if (!seen[c]) {
                seen[c] = 1;
                frontier.push_back(c);
            }
        }
    }

    std::vector<std::uint64_t> counts(k_max + 1, 0);
    counts[s0] = 1;
    if (s0 < k_max && !frontier.empty()) {
        std::atomic<std::uint64_t> total{1};
        std::atomic<int> next{0};
        const int branches = static_cast<int>(frontier.size());
        const unsigned workers =
            std::min<unsigned>(limits.threads ? limits.threads : default_thread_count(), branches);
        std::vector<std::vector<std::uint64_t>> partial(workers);
        std::vector<std::exception_ptr> failures(workers);
        auto work = [&](unsigned w) {
            try {
                Augmenter aug(region, s0, k_max, limits.max_animals, total);
                for (std::size_t id = 0; id < seen.size(); ++id) {
                    if (seen[id]) {
                        aug.mark_seen(static_cast<int>(id));
                    }
                }
                for (int k = 0; k < branches; ++k) {
                    aug.slot(k) = frontier[k];
                }
                for (int idx = next++; idx < branches; idx = next++) {
                    aug.branch(idx, branches);
                }
                partial[w] = aug.counts();
            } catch (...) {
                failures[w] = std::current_exception();
                next = branches;
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
        for (unsigned w = 0; w < workers; ++w) {
            if (failures[w]) {
                std::rethrow_exception(failures[w]);
            }
            for (int k = 0; k <= k_max; ++k) {
                counts[k] += partial[w][k];
            }
        }
    }
    return {counts.begin() + s0, counts.end()};
}

std::vector<BigInt> count_by_deduplication(const Lattice &lattice, const std::vector<Vertex> &s, int k_max,
                                           const EnumerationLimits &limits)
{
    std::vector<BigInt> out;
    std::set<std::vector<Vertex>> level;
    std::vector<Vertex> root = s;
    std::sort(root.begin(), root.end());
    level.insert(root);
    std::uint64_t total = 0;
    for (int k = static_cast<int>(s.size());; ++k) {
        out.emplace_back(level.size());
        total += level.size();
        if (total > limits.max_animals) {
            throw Error(Errc::budget_exceeded, "k_max", "animal budget exhausted");
        }
        if (k == k_max) {
            break;
        }
        std::set<std::vector<Vertex>> next;
        for (const auto &animal : level) {
            for (const Vertex &cell : animal) {
                lattice.for_each_child(cell, [&](const Vertex &c) {
                    if (std::binary_search(animal.begin(), animal.end(), c)) {
                        return;
                    }
                    std::vector<Vertex> grown;
                    grown.reserve(animal.size() + 1);
                    auto pos = std::lower_bound(animal.begin(), animal.end(), c);
                    grown.insert(grown.end(), animal.begin(), pos);
                    grown.push_back(c);
                    grown.insert(grown.end(), pos, animal.end());
                    next.insert(std::move(grown));
                });
            }
        }
        level = std::move(next);
    }
    return out;
}

} // namespace

CountSeries enumerate_counts(const Lattice &lattice, std::span<const Vertex> source, int k_max, Enumerator strategy,
                             const EnumerationLimits &limits)
{
    CountSeries out;
    out.lattice = lattice;
    out.k_max = k_max;
    out.source = checked_source(lattice, source, k_max, limits);
    if (out.source.empty()) {
        // Only the empty animal has an empty source.
        out.coeffs.assign(static_cast<std::size_t>(k_max) + 1, BigInt(0));
        out.coeffs[0] = 1;
        return out;
    }
    out.coeffs = strategy == Enumerator::canonical_augmentation
                     ? count_by_augmentation(lattice, out.source, k_max, limits)
                     : count_by_deduplication(lattice, out.source, k_max, limits);
    return out;
}

double growth_ratio(const CountSeries &series)
{
    double rho = 0.0;
    for (std::size_t k = 0; k + 1 < series.coeffs.size(); ++k) {
        if (series.coeffs[k] != 0) {
            rho = std::max(rho, series.coeffs[k + 1].convert_to<double>() / series.coeffs[k].convert_to<double>());
        }
    }
    return rho;
}

AlternatingValue series_eval_alternating(const CountSeries &series, double p)
{
    if (series.coeffs.empty()) {
        throw Error(Errc::invalid_argument, "series", "empty series");
    }
    if (!(p >= 0.0 && p < 1.0)) {
        throw Error(Errc::invalid_argument, "p", "p must lie in [0, 1)");
    }
    AlternatingValue out;
    const int s0 = series.s0();
    for (std::size_t idx = 0; idx < series.coeffs.size(); ++idx) {
        const int k = s0 + static_cast<int>(idx);
        const double term = series.coeffs[idx].convert_to<double>() * std::pow(p, k);
        out.value += (idx % 2 == 0) ? term : -term;
    }
    out.growth_ratio = growth_ratio(series);
    if (out.growth_ratio * p >= 1.0) {
        throw Error(Errc::divergent_bound, "p",
                    "observed growth ratio " + std::to_string(out.growth_ratio) + " makes the tail unbounded");
    }
    const double last = series.coeffs.back().convert_to<double>();
    out.truncation_bound = last * out.growth_ratio * std::pow(p, series.k_max + 1) / (1.0 - out.growth_ratio * p);
    return out;
}

} // namespace dagas
