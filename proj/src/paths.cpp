#include "mlv/paths.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <unordered_map>
#include <utility>

namespace mlv {

namespace {

/// Index of the single differing coordinate block; -1 when equal,
/// -2 when several blocks differ.
int differing_axis(const SpaceSignature& sig, const Point& a, const Point& b) {
    int axis = -1;
    for (std::size_t c = 0; c < sig.k(); ++c) {
        for (unsigned j = 0; j < sig.dim(c); ++j) {
            if (a.flat[sig.offset(c) + j] != b.flat[sig.offset(c) + j]) {
                if (axis >= 0 && axis != static_cast<int>(c)) return -2;
                axis = static_cast<int>(c);
                break;
            }
        }
    }
    return axis;
}

/// Neighbour ranks of x in canonical order: ascending coordinate block,
/// replacement block values in ascending rank.  Only members of the set
/// are emitted.
std::vector<std::uint64_t> neighbours(const RestrictedSet& set, const Point& x) {
    const SpaceSignature& sig = set.sig();
    std::vector<std::uint64_t> out;
    Point probe = x;
    for (std::size_t c = 0; c < sig.k(); ++c) {
        const unsigned off = sig.offset(c);
        const unsigned n = sig.dim(c);
        std::vector<std::uint8_t> value(n, 0);
        bool more = true;
        while (more) {
            bool same = true;
            for (unsigned j = 0; j < n; ++j) same = same && value[j] == x.flat[off + j];
            if (!same) {
                for (unsigned j = 0; j < n; ++j) probe.flat[off + j] = value[j];
                if (set.contains(probe)) out.push_back(point_rank(sig, probe));
            }
            more = false;
            for (unsigned j = 0; j < n; ++j) {
                if (++value[j] < sig.p()) {
                    more = true;
                    break;
                }
                value[j] = 0;
            }
        }
        for (unsigned j = 0; j < n; ++j) probe.flat[off + j] = x.flat[off + j];
    }
    return out;
}

struct BfsOutcome {
    bool found = false;
    std::unordered_map<std::uint64_t, std::uint64_t> parent;  // child rank -> parent rank
    std::vector<std::uint64_t> visited;                       // in visit order
};

/// Breadth-first search over the point graph from `start`.  When `target`
/// is non-null the search stops as soon as it is reached.  A nonzero seed
/// shuffles the push order of each node's neighbour list.
BfsOutcome point_bfs(const RestrictedSet& set, const Point& start, const std::uint64_t* target,
                     std::uint64_t seed) {
    const SpaceSignature& sig = set.sig();
    check_cap(sig.total_points());
    std::vector<bool> visited(sig.total_points(), false);

    BfsOutcome out;
    const std::uint64_t start_rank = point_rank(sig, start);
    visited[start_rank] = true;
    out.visited.push_back(start_rank);
    if (target != nullptr && start_rank == *target) {
        out.found = true;
        return out;
    }

    std::deque<std::uint64_t> queue{start_rank};
    while (!queue.empty()) {
        const std::uint64_t cur = queue.front();
        queue.pop_front();
        std::vector<std::uint64_t> next = neighbours(set, unrank_point(sig, cur));
        if (seed != 0) {
            std::mt19937_64 rng(seed ^ cur);
            for (std::size_t i = next.size(); i > 1; --i)
                std::swap(next[i - 1], next[rng() % i]);
        }
        for (std::uint64_t nb : next) {
            if (visited[nb]) continue;
            visited[nb] = true;
            out.parent.emplace(nb, cur);
            out.visited.push_back(nb);
            if (target != nullptr && nb == *target) {
                out.found = true;
                return out;
            }
            queue.push_back(nb);
        }
    }
    return out;
}

std::uint64_t least_rank(const std::vector<std::uint64_t>& ranks) {
    return *std::min_element(ranks.begin(), ranks.end());
}

}  // namespace

RestrictedSet::RestrictedSet(SpaceSignature sig, std::vector<MultilinearForm> zero_constraints,
                             MultilinearForm rho)
    : sig_(std::move(sig)), zero_constraints_(std::move(zero_constraints)), rho_(std::move(rho)) {
    if (sig_.k() == 0) throw PreconditionFailed("restricted set needs at least one coordinate");
    for (const auto& f : zero_constraints_)
        if (f.sig() != sig_) throw MismatchError("constraint signature mismatch");
    if (rho_.sig() != sig_) throw MismatchError("rho signature mismatch");
}

bool RestrictedSet::contains(const Point& x) const {
    for (const auto& f : zero_constraints_)
        if (!f.evaluate(x).is_zero()) return false;
    return !rho_.evaluate(x).is_zero();
}

std::size_t diameter_bound(unsigned k) {
    return static_cast<std::size_t>(2 * k + 1) * ((std::size_t{1} << k) - 1);
}

std::size_t default_s_bound(unsigned k) { return diameter_bound(k) + 1; }

ComponentSummary connected_component(const RestrictedSet& set, const Point& start) {
    check_point(set.sig(), start);
    if (!set.contains(start)) throw PreconditionFailed("start point is outside the set");
    BfsOutcome bfs = point_bfs(set, start, nullptr, 0);
    ComponentSummary summary{std::move(bfs.visited)};
    std::sort(summary.ranks.begin(), summary.ranks.end());
    return summary;
}

BfsTree bfs_tree(const RestrictedSet& set, const Point& start, std::uint64_t seed) {
    check_point(set.sig(), start);
    if (!set.contains(start)) throw PreconditionFailed("start point is outside the set");
    BfsOutcome bfs = point_bfs(set, start, nullptr, seed);
    BfsTree tree;
    tree.start_rank = point_rank(set.sig(), start);
    tree.visit_order = std::move(bfs.visited);
    tree.parents = std::move(bfs.parent);
    return tree;
}

std::size_t exact_diameter(const RestrictedSet& set, std::size_t max_points) {
    const SpaceSignature& sig = set.sig();
    std::vector<std::uint64_t> members;
    for_each_point(sig, [&](const Point& x) {
        if (set.contains(x)) members.push_back(point_rank(sig, x));
    });
    if (members.empty()) throw PreconditionFailed("restricted set is empty");
    if (members.size() > max_points) throw CapExceeded(members.size(), max_points);

    std::unordered_map<std::uint64_t, std::size_t> index;
    for (std::size_t i = 0; i < members.size(); ++i) index.emplace(members[i], i);
    std::vector<std::vector<std::size_t>> adj(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::uint64_t nb : neighbours(set, unrank_point(sig, members[i])))
            adj[i].push_back(index.at(nb));

    std::size_t diameter = 0;
    std::vector<int> dist(members.size());
    for (std::size_t s = 0; s < members.size(); ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        std::deque<std::size_t> queue{s};
        while (!queue.empty()) {
            std::size_t cur = queue.front();
            queue.pop_front();
            for (std::size_t nb : adj[cur]) {
                if (dist[nb] >= 0) continue;
                dist[nb] = dist[cur] + 1;
                queue.push_back(nb);
            }
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (dist[i] < 0) {
                // two components: report the least-rank member of each
                std::vector<std::uint64_t> reached, missed;
                for (std::size_t j = 0; j < members.size(); ++j)
                    (dist[j] >= 0 ? reached : missed).push_back(members[j]);
                throw NotConnected("point graph is disconnected",
                                   point_str(sig, unrank_point(sig, least_rank(reached))),
                                   point_str(sig, unrank_point(sig, least_rank(missed))));
            }
            diameter = std::max(diameter, static_cast<std::size_t>(dist[i]));
        }
    }
    return diameter;
}

GoodSequence good_sequence(const RestrictedSet& set, const Point& z, const Point& y,
                           const PathOptions& opts) {
    const SpaceSignature& sig = set.sig();
    check_point(sig, z);
    check_point(sig, y);
    if (!set.contains(z)) throw PreconditionFailed("start point is outside the set");
    if (!set.contains(y)) throw PreconditionFailed("target point is outside the set");
    const std::size_t s_bound = opts.s_bound != 0 ? opts.s_bound : default_s_bound(sig.k());

    const std::uint64_t target = point_rank(sig, y);
    BfsOutcome bfs = point_bfs(set, z, &target, opts.seed);
    if (!bfs.found) {
        BfsOutcome other = point_bfs(set, y, nullptr, 0);
        throw NotConnected("no walk joins the points",
                           point_str(sig, unrank_point(sig, least_rank(bfs.visited))),
                           point_str(sig, unrank_point(sig, least_rank(other.visited))));
    }

    std::vector<Point> path;
    for (std::uint64_t r = target;;) {
        path.push_back(unrank_point(sig, r));
        auto it = bfs.parent.find(r);
        if (it == bfs.parent.end()) break;
        r = it->second;
    }
    std::reverse(path.begin(), path.end());

    // Make rho constant: whenever a step changes its value, rescale the
    // changed block of every later point.  The change always involves an
    // axis rho depends on, the rescaled points keep satisfying every
    // constraint, and consecutive points still differ in at most one block.
    GoodSequence seq;
    seq.s_bound = s_bound;
    seq.lambdas.assign(sig.k(), Fp(1, sig.p()));
    for (std::size_t t = 0; t + 1 < path.size(); ++t) {
        const Fp cur = set.rho().evaluate(path[t]);
        const Fp next = set.rho().evaluate(path[t + 1]);
        if (cur == next) continue;
        const int axis = differing_axis(sig, path[t], path[t + 1]);
        if (axis < 0) throw MismatchError("internal: walk step is not a one-block move");
        const Fp mu = cur * next.inv();
        for (std::size_t u = t + 1; u < path.size(); ++u)
            path[u] = scale_coord(sig, path[u], axis, mu);
        seq.lambdas[axis] = seq.lambdas[axis] * mu;
    }
    for (const Point& q : path)
        if (seq.points.empty() || seq.points.back() != q) seq.points.push_back(q);

    if (seq.points.size() > s_bound)
        throw NotFound("every walk between the points exceeds the step bound");
    return seq;
}

void verify_good_sequence(const RestrictedSet& set, const GoodSequence& seq, const Point& z,
                          const Point& y) {
    const SpaceSignature& sig = set.sig();
    if (seq.points.empty()) throw MismatchError("sequence is empty");
    if (seq.points.size() > seq.s_bound) throw MismatchError("sequence exceeds its step bound");
    if (seq.lambdas.size() != sig.k()) throw MismatchError("one scalar per coordinate required");
    for (const Fp& l : seq.lambdas)
        if (l.is_zero() || l.modulus() != sig.p()) throw MismatchError("scalars must be nonzero");

    if (seq.points.front() != z) throw MismatchError("sequence does not start at z");
    Point scaled = y;
    for (std::size_t c = 0; c < sig.k(); ++c)
        scaled = scale_coord(sig, scaled, c, seq.lambdas[c]);
    if (seq.points.back() != scaled)
        throw MismatchError("sequence does not end at the rescaled target");

    const Fp value = set.rho().evaluate(z);
    for (const Point& q : seq.points) {
        check_point(sig, q);
        if (!set.contains(q)) throw MismatchError("sequence leaves the set");
        if (set.rho().evaluate(q) != value) throw MismatchError("rho is not constant");
    }
    for (std::size_t t = 0; t + 1 < seq.points.size(); ++t)
        if (differing_axis(sig, seq.points[t], seq.points[t + 1]) < 0)
            throw MismatchError("consecutive points must differ in exactly one block");
}

}  // namespace mlv
