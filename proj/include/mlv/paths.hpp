#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mlv/errors.hpp"
#include "mlv/forms.hpp"

namespace mlv {

/// A subset of a product space cut out by vanishing constraints together with
/// one distinguished form required to be nonzero.  Points of the set are the
/// vertices of a graph whose edges join points differing in exactly one
/// coordinate block.
class RestrictedSet {
  public:
    RestrictedSet(SpaceSignature sig, std::vector<MultilinearForm> zero_constraints,
                  MultilinearForm rho);

    const SpaceSignature& sig() const { return sig_; }
    const std::vector<MultilinearForm>& zero_constraints() const { return zero_constraints_; }
    const MultilinearForm& rho() const { return rho_; }

    bool contains(const Point& x) const;

  private:
    SpaceSignature sig_;
    std::vector<MultilinearForm> zero_constraints_;
    MultilinearForm rho_;
};

/// Worst-case graph diameter guarantee for a k-fold product: (2k+1)(2^k - 1).
std::size_t diameter_bound(unsigned k);

/// Default cap on sequence length: diameter_bound(k) + 1 points.
std::size_t default_s_bound(unsigned k);

struct PathOptions {
    std::uint64_t seed = 0;   ///< 0 keeps the canonical neighbour order
    std::size_t s_bound = 0;  ///< 0 selects default_s_bound(k)
};

struct ComponentSummary {
    std::vector<std::uint64_t> ranks;  ///< members of the component, ascending
};

/// Component of the point graph containing `start`.
/// Throws PreconditionFailed when `start` is not in the set.
ComponentSummary connected_component(const RestrictedSet& set, const Point& start);

/// Breadth-first spanning data for the component of `start`: the reached
/// ranks in visit order (beginning with `start`), and each later rank's
/// tree parent.  A nonzero seed shuffles every node's neighbour order.
struct BfsTree {
    std::uint64_t start_rank = 0;
    std::vector<std::uint64_t> visit_order;
    std::unordered_map<std::uint64_t, std::uint64_t> parents;
};

/// Throws PreconditionFailed when `start` is not in the set.
BfsTree bfs_tree(const RestrictedSet& set, const Point& start, std::uint64_t seed = 0);

/// Exact diameter of the point graph by all-pairs breadth-first search.
/// Throws CapExceeded when the set has more than `max_points` members,
/// NotConnected when the graph splits, PreconditionFailed when it is empty.
std::size_t exact_diameter(const RestrictedSet& set, std::size_t max_points = 4096);

/// A walk q^1..q^s inside a restricted set along which the distinguished form
/// is constant, ending at a blockwise rescaling of the requested target.
struct GoodSequence {
    std::vector<Point> points;  ///< q^1 .. q^s
    std::vector<Fp> lambdas;    ///< one nonzero scalar per coordinate block
    std::size_t s_bound = 0;    ///< bound the sequence was built against
};

/// Builds a sequence q^1 = z, ..., q^s = (lambda_1 y_1, ..., lambda_k y_k)
/// with s <= s_bound such that consecutive points differ in exactly one
/// coordinate block, every point lies in the set, and rho takes the single
/// value rho(z) along the whole sequence.
///
/// Throws PreconditionFailed when z or y is outside the set, NotConnected
/// (with least-rank representatives of the two components) when no walk
/// exists, and NotFound when every walk exceeds the bound.
GoodSequence good_sequence(const RestrictedSet& set, const Point& z, const Point& y,
                           const PathOptions& opts = {});

/// Re-checks every defining property of a good sequence from scratch.
/// Throws MismatchError describing the first violated property.
void verify_good_sequence(const RestrictedSet& set, const GoodSequence& seq, const Point& z,
                          const Point& y);

}  // namespace mlv
