#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlv/errors.hpp"
#include "mlv/forms.hpp"
#include "mlv/paths.hpp"
#include "mlv/rank.hpp"
#include "mlv/variety.hpp"

namespace mlv {

/// Map from the points of a variety into F_p^c, stored as an explicit
/// table keyed by point rank.  The table must cover the variety exactly.
class PartialMultilinearMap {
public:
    PartialMultilinearMap(Variety domain, unsigned codim_h,
                          std::map<std::uint64_t, std::vector<std::uint8_t>> table);

    /// Table of `global` sampled at every point of `domain`.
    static PartialMultilinearMap restriction(const Variety& domain,
                                             const MultilinearMapH& global);

    const Variety& domain() const { return domain_; }
    unsigned codim_h() const { return codim_h_; }
    const std::map<std::uint64_t, std::vector<std::uint8_t>>& table() const { return table_; }

    bool defined_at(const Point& x) const;
    /// Value at x; NotFound when x is outside the domain.
    std::vector<std::uint8_t> value_at(const Point& x) const;

private:
    Variety domain_;
    unsigned codim_h_;
    std::map<std::uint64_t, std::vector<std::uint8_t>> table_;
};

/// Outcome of the multilinearity audit of a partial map.
struct MultilinearCheck {
    bool ok = true;
    /// Human-readable first counterexample when !ok.
    std::string witness;
};

/// Checks the two laws a restriction of a multilinear map must satisfy
/// whenever all points involved lie in the domain: the difference law
/// phi(x) - phi(y) = phi(x (-) y) for one-block moves, and the scaling law
/// phi(x with block c scaled by s) = s * phi(x).
MultilinearCheck check_multilinear(const PartialMultilinearMap& phi);

/// First point in rank order with rho = 1 and every listed form = 0.
/// Throws NotFound when the whole space is exhausted.
Point find_point_with_value_one(const SpaceSignature& sig, const MultilinearForm& rho,
                                const std::vector<MultilinearForm>& betas,
                                const std::vector<MultilinearForm>& gammas);

/// A point orthogonal to given walks, together with the condition names
/// that were enforced while selecting it.
struct OrthogonalPoint {
    Point e;
    std::vector<std::string> checked_conditions;
};

/// First point e in rank order with rho(e) = -1 whose mixed evaluations
/// against every anchor point vanish: rho on every proper mixed block
/// pattern, and each constraint on every nonempty pattern inside its
/// support.  Anchors are all points of the given walks plus z when
/// present.  With `strong` set, e must additionally admit, for every
/// coordinate pair and every unit scaling of the remaining blocks, a
/// companion pair (u, v) completing a splitting grid; z is then required.
/// Throws NotFound when no candidate qualifies.
OrthogonalPoint find_orthogonal_point(const SpaceSignature& sig, const MultilinearForm& rho,
                                      const std::vector<MultilinearForm>& betas,
                                      const std::vector<GoodSequence>& sequences,
                                      const std::optional<Point>& z, bool strong);

/// Six blocks naming a 3 x 3 splitting configuration on a two-coordinate
/// space: rows {x, z, u} in the first block, columns {y, w, v} in the
/// second.
struct SplittingConfig {
    std::vector<std::uint8_t> x, z, u;
    std::vector<std::uint8_t> y, w, v;
};

/// Verifies both splitting identities for the configuration at scalar l:
/// the grid must satisfy rho = 1 on the diagonal pairs and rho = 0 off it,
/// and every evaluation point must lie in dom phi (PreconditionFailed
/// naming the offender otherwise).  Returns whether both identities hold.
bool verify_splitting_identity(const PartialMultilinearMap& phi, const MultilinearForm& rho,
                               const SplittingConfig& cfg, Fp l);

/// Verifies the telescoping identity for a walk: the sum of phi over the
/// consecutive differences of `seq` equals the four-term combination of
/// phi-values at points built from x, z, e and the scalings nu.  Requires
/// rho(z) = 1, prod(nu) * prod(lambda) = 1, and e orthogonal to the walk;
/// throws PreconditionFailed when a hypothesis fails and MismatchError
/// when the two sides differ.
void verify_telescoping_identity(const PartialMultilinearMap& phi, const RestrictedSet& set,
                                 const GoodSequence& seq, const Point& z, const Point& x,
                                 const Point& e, const std::vector<Fp>& nus);

/// Verifies that phi(z + t.e) - sum over proper patterns of phi(t.e | z)
/// takes one value over all unit-product scalings t of e's blocks.
/// Throws PreconditionFailed when an evaluation point leaves the domain
/// and MismatchError when two scalings disagree.
void verify_unit_rescaling_invariance(const PartialMultilinearMap& phi, const Point& z,
                                      const Point& e);

/// Knobs for extending over one low-bias form.
struct QrOptions {
    std::uint64_t seed = 0;        // walk tie-breaking; 0 keeps canonical order
    std::uint64_t audit_seed = 1;  // independent recomputation order
    bool audit = true;
};

/// Extends phi from B^0 = B  n  {rho = 0} to all of B: the value at x is
/// rho(x) times (h0 plus the phi-sum along a walk from the scaled base
/// point to a scaling of x inside {rho != 0}).  rho must read every
/// coordinate, z must lie in B with rho(z) != 0, and phi must be defined
/// exactly on B^0.  The audit recomputes every new value along
/// independently chosen walks and compares.  Throws NotConnected when
/// some point with rho != 0 cannot be reached, AuditFailed when two walks
/// disagree or the base value is not reproduced, and
/// MultilinearityViolation when the result fails the multilinearity laws.
PartialMultilinearMap qr_extend(const Variety& b, const MultilinearForm& rho,
                                const PartialMultilinearMap& phi, const Point& z,
                                const std::vector<std::uint8_t>& h0, const QrOptions& opts = {});

/// Knobs for one removal stage.
struct StepOptions {
    /// A combination is kept as high-bias when its bias is >= p^-t.
    unsigned bias_exponent_t = 1;
    QrOptions qr;
};

/// What one removal stage did: the split of the exactly-S constraints,
/// the base points and adjoined constraints of each extension round, and
/// the factors that replaced the high-bias combinations.
struct StageRecord {
    std::vector<std::uint32_t> down_set;  // admissible support masks at entry
    std::uint32_t removed_mask = 0;       // the support S this stage clears
    std::vector<std::vector<std::uint8_t>> alpha_combos;  // picked high-bias combinations
    std::vector<std::vector<std::uint8_t>> rho_combos;    // completion combinations
    std::vector<MultilinearForm> alphas;       // high-bias exactly-S forms
    std::vector<MultilinearForm> rhos;         // low-bias exactly-S forms extended over
    std::vector<bool> rho_degenerate;          // rho vanished identically; dropped outright
    std::vector<Point> z_points;               // base points in the S-space (reduced)
    std::vector<MultilinearForm> substituted;  // constraints adjoined during the rounds
    std::vector<MultilinearForm> gammas;       // factors replacing the alphas
    std::size_t codim_in = 0;
    std::size_t codim_out = 0;
};

struct StepResult {
    StageRecord record;
    PartialMultilinearMap psi;
};

/// One stage of the removal pipeline: splits the constraints supported
/// exactly on the axes of `removed_mask` into high-bias combinations
/// (replaced by smaller-support factors) and a complement (extended over,
/// slice by slice, with adjoined substituted constraints), returning a map
/// on a domain free of exactly-S constraints.  Every constraint support
/// must lie in `down_set` and `removed_mask` must be maximal in it.
StepResult extend_step(const PartialMultilinearMap& phi,
                       const std::vector<std::uint32_t>& down_set, std::uint32_t removed_mask,
                       const StepOptions& opts = {});

struct PipelineOptions {
    StepOptions step;
};

/// Full run of the removal pipeline plus the evidence to audit it.
struct ExtensionCertificate {
    std::vector<StageRecord> stages;
    bool completed = false;
    /// "extended", or a description of the failure.
    std::string status;
    /// "", or one of "search", "audit", "cap", "input" for exit-code mapping.
    std::string failure_kind;
    /// Stage index that failed (stages.size() when all ran).
    std::size_t failed_stage = 0;
    /// Global multilinear map agreeing with phi on `agreement` (on success).
    std::optional<MultilinearMapH> global_map;
    /// Subvariety of the original domain where agreement was verified.
    std::optional<Variety> agreement;
};

/// Runs extend_step over every nonempty axis set, largest first, then
/// extracts the resulting everywhere-defined table as a global multilinear
/// map and verifies it against phi on the intersection of the original
/// domain with every stage's output domain.
ExtensionCertificate run_pipeline(const PartialMultilinearMap& phi,
                                  const PipelineOptions& opts = {});

}  // namespace mlv
