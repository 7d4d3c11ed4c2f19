#include "mlv/extend.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

#include "mlv/linalg.hpp"

namespace mlv {

namespace {

std::vector<std::uint8_t> vals_add(const std::vector<std::uint8_t>& a,
                                   const std::vector<std::uint8_t>& b, unsigned p) {
    std::vector<std::uint8_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = static_cast<std::uint8_t>((a[i] + b[i]) % p);
    return out;
}

std::vector<std::uint8_t> vals_sub(const std::vector<std::uint8_t>& a,
                                   const std::vector<std::uint8_t>& b, unsigned p) {
    std::vector<std::uint8_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = static_cast<std::uint8_t>((a[i] + p - b[i]) % p);
    return out;
}

std::vector<std::uint8_t> vals_scale(const std::vector<std::uint8_t>& a, unsigned c, unsigned p) {
    std::vector<std::uint8_t> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = static_cast<std::uint8_t>(a[i] * c % p);
    return out;
}

std::string vals_str(const std::vector<std::uint8_t>& v) {
    std::string out = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out + ")";
}

/// Little-endian odometer over one coordinate block; false after wrap.
bool next_block(std::vector<std::uint8_t>& b, unsigned p) {
    for (auto& d : b) {
        if (++d < p) return true;
        d = 0;
    }
    return false;
}

/// Point taking e's blocks on the axes of `mask` and q's elsewhere.
Point mixed_point(const SpaceSignature& sig, std::uint32_t mask, const Point& e, const Point& q) {
    Point out = q;
    for (std::size_t c = 0; c < sig.k(); ++c)
        if (mask & (1u << c)) set_coord(sig, out, c, get_coord(sig, e, c));
    return out;
}

/// Point taking tau_c * e_c on the axes of `mask` and base's blocks elsewhere.
Point mixed_scaled(const SpaceSignature& sig, std::uint32_t mask, const Point& e,
                   const std::vector<Fp>& taus, const Point& base) {
    Point out = base;
    for (std::size_t c = 0; c < sig.k(); ++c)
        if (mask & (1u << c))
            set_coord(sig, out, c, vals_scale(get_coord(sig, e, c), taus[c].value(), sig.p()));
    return out;
}

/// Point with blocks a_c + tau_c * b_c on every coordinate.
Point shifted_point(const SpaceSignature& sig, const Point& a, const Point& b,
                    const std::vector<Fp>& taus) {
    Point out = a;
    for (std::size_t c = 0; c < sig.k(); ++c) {
        std::vector<std::uint8_t> scaled = vals_scale(get_coord(sig, b, c), taus[c].value(), sig.p());
        set_coord(sig, out, c, vals_add(get_coord(sig, a, c), scaled, sig.p()));
    }
    return out;
}

/// Index of the single differing coordinate block; -1 equal, -2 several.
int one_block_difference(const SpaceSignature& sig, const Point& a, const Point& b) {
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

/// Value of phi at x, with a PreconditionFailed naming the point when it
/// falls outside the domain.
std::vector<std::uint8_t> fetch_value(const PartialMultilinearMap& phi, const Point& x,
                                      const std::string& role) {
    if (!phi.defined_at(x))
        throw PreconditionFailed(role + " leaves the domain at " +
                                 point_str(phi.domain().sig(), x));
    return phi.value_at(x);
}

}  // namespace

PartialMultilinearMap::PartialMultilinearMap(
    Variety domain, unsigned codim_h, std::map<std::uint64_t, std::vector<std::uint8_t>> table)
    : domain_(std::move(domain)), codim_h_(codim_h), table_(std::move(table)) {
    if (codim_h_ == 0) throw MismatchError("the target space needs at least one component");
    const SpaceSignature& sig = domain_.sig();
    for (const auto& [rank, value] : table_) {
        if (rank >= sig.total_points())
            throw MismatchError("table rank " + std::to_string(rank) + " is outside the space");
        if (value.size() != codim_h_)
            throw MismatchError("table value at rank " + std::to_string(rank) +
                                " has the wrong number of components");
        for (std::uint8_t d : value)
            if (d >= sig.p())
                throw MismatchError("table value at rank " + std::to_string(rank) +
                                    " has a digit outside the field");
    }
    for_each_point(sig, [&](const Point& x) {
        const std::uint64_t r = point_rank(sig, x);
        const bool in_domain = domain_.membership(x);
        const bool in_table = table_.count(r) != 0;
        if (in_domain && !in_table)
            throw MismatchError("domain point " + point_str(sig, x) + " is missing from the table");
        if (!in_domain && in_table)
            throw MismatchError("table covers " + point_str(sig, x) + " outside the domain");
    });
}

PartialMultilinearMap PartialMultilinearMap::restriction(const Variety& domain,
                                                         const MultilinearMapH& global) {
    if (!(domain.sig() == global.sig()))
        throw MismatchError("domain and map live on different spaces");
    std::map<std::uint64_t, std::vector<std::uint8_t>> table;
    for_each_point(domain.sig(), [&](const Point& x) {
        if (domain.membership(x)) table[point_rank(domain.sig(), x)] = global.evaluate(x);
    });
    return PartialMultilinearMap(domain, static_cast<unsigned>(global.codim_h()),
                                 std::move(table));
}

bool PartialMultilinearMap::defined_at(const Point& x) const {
    check_point(domain_.sig(), x);
    return table_.count(point_rank(domain_.sig(), x)) != 0;
}

std::vector<std::uint8_t> PartialMultilinearMap::value_at(const Point& x) const {
    check_point(domain_.sig(), x);
    auto it = table_.find(point_rank(domain_.sig(), x));
    if (it == table_.end())
        throw NotFound("the map is not defined at " + point_str(domain_.sig(), x));
    return it->second;
}

MultilinearCheck check_multilinear(const PartialMultilinearMap& phi) {
    const SpaceSignature& sig = phi.domain().sig();
    const unsigned p = sig.p();
    for (const auto& [rank, value] : phi.table()) {
        const Point x = unrank_point(sig, rank);
        for (std::size_t c = 0; c < sig.k(); ++c) {
            // Difference law against every one-block neighbour in the domain.
            std::vector<std::uint8_t> block(sig.dim(c), 0);
            Point y = x;
            do {
                if (block == get_coord(sig, x, c)) continue;
                set_coord(sig, y, c, block);
                if (!phi.defined_at(y)) continue;
                const Point d = ominus(sig, x, y);
                if (!phi.defined_at(d)) continue;
                if (vals_sub(value, phi.value_at(y), p) != phi.value_at(d))
                    return {false, "difference law: x=" + point_str(sig, x) +
                                       " y=" + point_str(sig, y) + " coordinate " +
                                       std::to_string(c + 1)};
            } while (next_block(block, p));
            // Scaling law for every scalar applied to one block.
            for (unsigned s = 0; s < p; ++s) {
                if (s == 1) continue;
                const Point xs = scale_coord(sig, x, c, Fp(s, p));
                if (!phi.defined_at(xs)) continue;
                if (phi.value_at(xs) != vals_scale(value, s, p))
                    return {false, "scaling law: x=" + point_str(sig, x) + " coordinate " +
                                       std::to_string(c + 1) + " scalar " + std::to_string(s)};
            }
        }
    }
    return {true, ""};
}

Point find_point_with_value_one(const SpaceSignature& sig, const MultilinearForm& rho,
                                const std::vector<MultilinearForm>& betas,
                                const std::vector<MultilinearForm>& gammas) {
    if (!(rho.sig() == sig)) throw MismatchError("rho lives on a different space");
    for (const MultilinearForm& f : betas)
        if (!(f.sig() == sig)) throw MismatchError("a constraint lives on a different space");
    for (const MultilinearForm& f : gammas)
        if (!(f.sig() == sig)) throw MismatchError("a constraint lives on a different space");
    check_cap(sig.total_points());
    const Fp one(1, sig.p());
    Point x = zero_point(sig);
    do {
        if (rho.evaluate(x) != one) continue;
        bool ok = true;
        for (const MultilinearForm& f : betas) ok = ok && f.evaluate(x).is_zero();
        for (const MultilinearForm& f : gammas) ok = ok && f.evaluate(x).is_zero();
        if (ok) return x;
    } while (next_point(sig, x));
    throw NotFound("no point attains value one subject to the vanishing constraints");
}

OrthogonalPoint find_orthogonal_point(const SpaceSignature& sig, const MultilinearForm& rho,
                                      const std::vector<MultilinearForm>& betas,
                                      const std::vector<GoodSequence>& sequences,
                                      const std::optional<Point>& z, bool strong) {
    const unsigned p = sig.p();
    const unsigned k = sig.k();
    if (!(rho.sig() == sig)) throw MismatchError("rho lives on a different space");
    for (const MultilinearForm& f : betas)
        if (!(f.sig() == sig)) throw MismatchError("a constraint lives on a different space");
    std::vector<Point> anchors;
    for (const GoodSequence& seq : sequences)
        for (const Point& q : seq.points) {
            check_point(sig, q);
            anchors.push_back(q);
        }
    if (z) {
        check_point(sig, *z);
        anchors.push_back(*z);
    }
    if (strong && k < 2)
        throw PreconditionFailed("pair-splitting conditions need at least two coordinates");
    if (strong && !z)
        throw PreconditionFailed("pair-splitting conditions need the base point");

    const std::uint32_t full_mask = (1u << k) - 1;
    const Fp one(1, p);
    const Fp minus_one(-1, p);

    auto value_ok = [&](const Point& e) { return rho.evaluate(e) == minus_one; };

    auto mixed_rho_ok = [&](const Point& e) {
        for (std::uint32_t mask = 1; mask < full_mask; ++mask)
            for (const Point& q : anchors)
                if (!rho.evaluate(mixed_point(sig, mask, e, q)).is_zero()) return false;
        return true;
    };

    auto mixed_beta_ok = [&](const Point& e) {
        for (const MultilinearForm& beta : betas) {
            const std::uint32_t imask = axes_mask(beta.axes());
            if (anchors.empty()) {
                // Only the anchor-free instance (every supported block from e).
                if (!beta.evaluate(mixed_point(sig, imask, e, zero_point(sig))).is_zero())
                    return false;
                continue;
            }
            for (std::uint32_t j = imask; j != 0; j = (j - 1) & imask)
                for (const Point& q : anchors)
                    if (!beta.evaluate(mixed_point(sig, j, e, q)).is_zero()) return false;
        }
        return true;
    };

    // For every coordinate pair and every nonzero scaling of the remaining
    // blocks, a companion pair (u, v) must complete a splitting grid whose
    // off-diagonal cells vanish under rho and all cells vanish under the
    // constraints.
    auto pair_grids_ok = [&](const Point& e) {
        for (std::size_t c1 = 0; c1 + 1 < k; ++c1) {
            for (std::size_t c2 = c1 + 1; c2 < k; ++c2) {
                std::vector<std::size_t> rest;
                for (std::size_t c = 0; c < k; ++c)
                    if (c != c1 && c != c2) rest.push_back(c);
                std::vector<unsigned> tau(rest.size(), 1);
                while (true) {
                    Point base = *z;
                    for (std::size_t t = 0; t < rest.size(); ++t) {
                        std::vector<std::uint8_t> shift =
                            vals_scale(get_coord(sig, e, rest[t]), tau[t], p);
                        set_coord(sig, base, rest[t],
                                  vals_add(get_coord(sig, *z, rest[t]), shift, p));
                    }
                    const std::vector<std::uint8_t> z1 = get_coord(sig, *z, c1);
                    const std::vector<std::uint8_t> e1 = get_coord(sig, e, c1);
                    const std::vector<std::uint8_t> z2 = get_coord(sig, *z, c2);
                    const std::vector<std::uint8_t> e2 = get_coord(sig, e, c2);
                    auto cell = [&](const std::vector<std::uint8_t>& a,
                                    const std::vector<std::uint8_t>& b) {
                        Point out = base;
                        set_coord(sig, out, c1, a);
                        set_coord(sig, out, c2, b);
                        return out;
                    };
                    auto vanishes = [&](const Point& q) {
                        if (!rho.evaluate(q).is_zero()) return false;
                        for (const MultilinearForm& beta : betas)
                            if (!beta.evaluate(q).is_zero()) return false;
                        return true;
                    };
                    bool solved = false;
                    std::vector<std::uint8_t> u(sig.dim(c1), 0);
                    do {
                        if (!vanishes(cell(u, z2)) || !vanishes(cell(u, e2))) continue;
                        std::vector<std::uint8_t> v(sig.dim(c2), 0);
                        do {
                            if (!vanishes(cell(z1, v)) || !vanishes(cell(e1, v))) continue;
                            const Point corner = cell(u, v);
                            if (rho.evaluate(corner) != one) continue;
                            bool clean = true;
                            for (const MultilinearForm& beta : betas)
                                clean = clean && beta.evaluate(corner).is_zero();
                            if (clean) {
                                solved = true;
                                break;
                            }
                        } while (next_block(v, p));
                        if (solved) break;
                    } while (next_block(u, p));
                    if (!solved) return false;
                    // Advance the scaling odometer over nonzero values.
                    std::size_t t = 0;
                    for (; t < tau.size(); ++t) {
                        if (++tau[t] < p) break;
                        tau[t] = 1;
                    }
                    if (t == tau.size()) break;
                }
            }
        }
        return true;
    };

    std::vector<std::string> conditions = {"rho(e) = -1", "mixed rho evaluations vanish",
                                           "mixed constraint evaluations vanish"};
    if (strong) conditions.push_back("pair splitting grids solvable");

    check_cap(sig.total_points());
    Point e = zero_point(sig);
    do {
        if (!value_ok(e)) continue;
        if (!mixed_rho_ok(e)) continue;
        if (!mixed_beta_ok(e)) continue;
        if (strong && !pair_grids_ok(e)) continue;
        return {e, conditions};
    } while (next_point(sig, e));
    throw NotFound("no orthogonal point in the space");
}

bool verify_splitting_identity(const PartialMultilinearMap& phi, const MultilinearForm& rho,
                               const SplittingConfig& cfg, Fp l) {
    const SpaceSignature& sig = phi.domain().sig();
    const unsigned p = sig.p();
    if (sig.k() != 2)
        throw PreconditionFailed("the splitting identities live on two-coordinate spaces");
    if (!(rho.sig() == sig)) throw MismatchError("rho lives on a different space");
    if (l.modulus() != p) throw MismatchError("the scalar has the wrong modulus");

    auto check_block = [&](const std::vector<std::uint8_t>& b, std::size_t axis,
                           const char* name) {
        if (b.size() != sig.dim(axis))
            throw MismatchError(std::string("block ") + name + " has the wrong length");
        for (std::uint8_t d : b)
            if (d >= p) throw MismatchError(std::string("block ") + name + " has a digit >= p");
    };
    check_block(cfg.x, 0, "x");
    check_block(cfg.z, 0, "z");
    check_block(cfg.u, 0, "u");
    check_block(cfg.y, 1, "y");
    check_block(cfg.w, 1, "w");
    check_block(cfg.v, 1, "v");

    auto pair_point = [&](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
        Point out = zero_point(sig);
        set_coord(sig, out, 0, a);
        set_coord(sig, out, 1, b);
        return out;
    };

    const std::vector<std::uint8_t>* rows[3] = {&cfg.x, &cfg.z, &cfg.u};
    const std::vector<std::uint8_t>* cols[3] = {&cfg.y, &cfg.w, &cfg.v};
    const char* row_names[3] = {"x", "z", "u"};
    const char* col_names[3] = {"y", "w", "v"};
    const Fp one(1, p);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const Fp r = rho.evaluate(pair_point(*rows[i], *cols[j]));
            const Fp want = i == j ? one : Fp(0, p);
            if (r != want)
                throw PreconditionFailed(std::string("rho grid: rho(") + row_names[i] + "," +
                                         col_names[j] + ") = " + r.str() + ", expected " +
                                         want.str());
        }
    }

    auto value = [&](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
        return fetch_value(phi, pair_point(a, b), "a splitting evaluation");
    };

    const unsigned lv = l.value();
    const unsigned l1 = (l - one).value();           // l - 1
    const unsigned l2 = (l * l - one).value();       // l^2 - 1
    const unsigned lsq = (l * l).value();            // l^2

    const auto v_main = value(vals_sub(cfg.x, vals_scale(cfg.z, lv, p), p),
                              vals_add(vals_scale(cfg.y, lv, p), cfg.w, p));
    const auto v_xz = value(vals_sub(cfg.x, cfg.z, p), vals_add(cfg.y, cfg.w, p));
    const auto v_xu = value(vals_sub(cfg.x, cfg.u, p), vals_add(cfg.y, cfg.v, p));
    const auto v_zu = value(vals_sub(cfg.z, cfg.u, p), vals_add(cfg.w, cfg.v, p));
    const auto v_xv = value(cfg.x, cfg.v);
    const auto v_zy = value(cfg.z, cfg.y);
    const auto v_uy = value(cfg.u, cfg.y);
    const auto v_zv = value(cfg.z, cfg.v);
    const auto v_uw = value(cfg.u, cfg.w);
    const auto v_xw = value(cfg.x, cfg.w);

    auto acc = [&](std::vector<std::uint8_t>& sum, const std::vector<std::uint8_t>& term,
                   unsigned coeff, bool plus) {
        const std::vector<std::uint8_t> scaled = vals_scale(term, coeff, p);
        sum = plus ? vals_add(sum, scaled, p) : vals_sub(sum, scaled, p);
    };

    std::vector<std::uint8_t> rhs1 = v_xz;
    acc(rhs1, v_xu, l1, true);
    acc(rhs1, v_zu, l1, false);
    acc(rhs1, v_xv, l1, false);
    acc(rhs1, v_zy, l2, false);
    acc(rhs1, v_uy, l1, true);
    acc(rhs1, v_zv, l1, true);
    acc(rhs1, v_uw, l1, false);

    std::vector<std::uint8_t> rhs2(phi.codim_h(), 0);
    acc(rhs2, v_xu, lv, true);
    acc(rhs2, v_zu, lv, false);
    acc(rhs2, v_xw, 1, true);
    acc(rhs2, v_xv, lv, false);
    acc(rhs2, v_zy, lsq, false);
    acc(rhs2, v_uy, lv, true);
    acc(rhs2, v_zv, lv, true);
    acc(rhs2, v_uw, lv, false);

    return v_main == rhs1 && v_main == rhs2;
}

void verify_telescoping_identity(const PartialMultilinearMap& phi, const RestrictedSet& set,
                                 const GoodSequence& seq, const Point& z, const Point& x,
                                 const Point& e, const std::vector<Fp>& nus) {
    const SpaceSignature& sig = phi.domain().sig();
    const unsigned p = sig.p();
    const unsigned k = sig.k();
    if (!(set.sig() == sig)) throw MismatchError("the restricted set lives on a different space");
    if (nus.size() != k) throw MismatchError("one scaling nu per coordinate block is required");
    for (const Fp& nu : nus) {
        if (nu.modulus() != p) throw MismatchError("a scaling has the wrong modulus");
        if (nu.is_zero()) throw PreconditionFailed("each scaling nu must be nonzero");
    }
    check_point(sig, e);
    verify_good_sequence(set, seq, z, x);

    const Fp one(1, p);
    const MultilinearForm& rho = set.rho();
    if (rho.evaluate(z) != one)
        throw PreconditionFailed("the identity requires rho(z) = 1");
    Fp prod = one;
    for (const Fp& lam : seq.lambdas) prod *= lam;
    const Fp prod_lambda = prod;
    for (const Fp& nu : nus) prod *= nu;
    if (prod != one)
        throw PreconditionFailed("the scalings must satisfy prod(nu) * prod(lambda) = 1");

    // e must be orthogonal to every point of the walk.
    if (rho.evaluate(e) != Fp(-1, p))
        throw PreconditionFailed("orthogonality requires rho(e) = -1");
    const std::uint32_t full_mask = (1u << k) - 1;
    for (std::uint32_t mask = 1; mask < full_mask; ++mask)
        for (const Point& q : seq.points)
            if (!rho.evaluate(mixed_point(sig, mask, e, q)).is_zero())
                throw PreconditionFailed("orthogonality fails: mixed rho evaluation at " +
                                         point_str(sig, q));
    for (const MultilinearForm& beta : set.zero_constraints()) {
        const std::uint32_t imask = axes_mask(beta.axes());
        for (std::uint32_t j = imask; j != 0; j = (j - 1) & imask)
            for (const Point& q : seq.points)
                if (!beta.evaluate(mixed_point(sig, j, e, q)).is_zero())
                    throw PreconditionFailed("orthogonality fails: mixed constraint evaluation at " +
                                             point_str(sig, q));
    }

    std::vector<std::uint8_t> lhs(phi.codim_h(), 0);
    for (std::size_t i = 0; i + 1 < seq.points.size(); ++i) {
        const Point d = ominus(sig, seq.points[i + 1], seq.points[i]);
        lhs = vals_add(lhs, fetch_value(phi, d, "a walk difference"), p);
    }

    std::vector<Fp> nl(k, one);
    for (std::size_t c = 0; c < k; ++c) nl[c] = nus[c] * seq.lambdas[c];

    std::vector<std::uint8_t> rhs =
        vals_scale(fetch_value(phi, shifted_point(sig, x, e, nus), "the shifted endpoint"),
                   prod_lambda.value(), p);
    rhs = vals_sub(rhs, fetch_value(phi, shifted_point(sig, z, e, nl), "the shifted base point"),
                   p);
    for (std::uint32_t mask = 1; mask < full_mask; ++mask) {
        const auto vx = fetch_value(phi, mixed_scaled(sig, mask, e, nus, x), "a mixed endpoint");
        rhs = vals_sub(rhs, vals_scale(vx, prod_lambda.value(), p), p);
        const auto vz = fetch_value(phi, mixed_scaled(sig, mask, e, nl, z), "a mixed base point");
        rhs = vals_add(rhs, vz, p);
    }

    if (lhs != rhs)
        throw MismatchError("telescoping identity fails: walk sum " + vals_str(lhs) +
                            " vs combination " + vals_str(rhs));
}

void verify_unit_rescaling_invariance(const PartialMultilinearMap& phi, const Point& z,
                                      const Point& e) {
    const SpaceSignature& sig = phi.domain().sig();
    const unsigned p = sig.p();
    const unsigned k = sig.k();
    check_point(sig, z);
    check_point(sig, e);
    const std::uint32_t full_mask = (1u << k) - 1;

    auto combination = [&](const std::vector<Fp>& taus) {
        std::vector<std::uint8_t> out =
            fetch_value(phi, shifted_point(sig, z, e, taus), "a shifted base point");
        for (std::uint32_t mask = 1; mask < full_mask; ++mask)
            out = vals_sub(out, fetch_value(phi, mixed_scaled(sig, mask, e, taus, z),
                                            "a mixed evaluation"),
                           p);
        return out;
    };

    auto tau_str = [&](const std::vector<Fp>& taus) {
        std::string out = "(";
        for (std::size_t c = 0; c < taus.size(); ++c) {
            if (c) out += ",";
            out += taus[c].str();
        }
        return out + ")";
    };

    // Enumerate tau in (F*)^k with product 1: free nonzero choices on the
    // first k-1 blocks; the last is forced.
    std::vector<unsigned> free(k > 0 ? k - 1 : 0, 1);
    bool have_first = false;
    std::vector<Fp> first_tau;
    std::vector<std::uint8_t> first_val;
    while (true) {
        std::vector<Fp> taus;
        Fp prod(1, p);
        for (unsigned c = 0; c + 1 < k; ++c) {
            taus.emplace_back(free[c], p);
            prod *= taus.back();
        }
        taus.push_back(prod.inv());
        const std::vector<std::uint8_t> val = combination(taus);
        if (!have_first) {
            have_first = true;
            first_tau = taus;
            first_val = val;
        } else if (val != first_val) {
            throw MismatchError("rescaling invariance fails between t=" + tau_str(first_tau) +
                                " giving " + vals_str(first_val) + " and t=" + tau_str(taus) +
                                " giving " + vals_str(val));
        }
        std::size_t t = 0;
        for (; t < free.size(); ++t) {
            if (++free[t] < p) break;
            free[t] = 1;
        }
        if (t == free.size()) break;
    }
}

namespace {

struct WalkState {
    std::vector<Fp> lambdas;
    Point endpoint;                   // blockwise-scaled point with rho = 1
    std::vector<std::uint8_t> value;  // h0' plus the walk sum up to here
};

}  // namespace

PartialMultilinearMap qr_extend(const Variety& b, const MultilinearForm& rho,
                                const PartialMultilinearMap& phi, const Point& z,
                                const std::vector<std::uint8_t>& h0, const QrOptions& opts) {
    const SpaceSignature& sig = b.sig();
    const unsigned p = sig.p();
    const unsigned k = sig.k();
    if (!(rho.sig() == sig)) throw MismatchError("rho lives on a different space");
    if (!(phi.domain().sig() == sig)) throw MismatchError("the map lives on a different space");
    check_point(sig, z);
    if (h0.size() != phi.codim_h())
        throw MismatchError("h0 length differs from the map's target dimension");
    for (std::uint8_t d : h0)
        if (d >= p) throw MismatchError("h0 has a digit outside the field");
    if (axes_mask(rho.axes()) != (1u << k) - 1)
        throw PreconditionFailed("rho must be supported on every coordinate block");
    if (!b.membership(z)) throw PreconditionFailed("the base point is outside the variety");

    const Fp rz = rho.evaluate(z);
    const std::vector<Point> b_points = b.enumerate_points();
    if (rz.is_zero()) {
        bool all_zero = true;
        for (const Point& x : b_points) all_zero = all_zero && rho.evaluate(x).is_zero();
        if (all_zero) return phi;  // nothing outside the kernel: the map already covers B
        throw PreconditionFailed("the base point must have nonzero rho");
    }

    // phi must be defined exactly on the rho-kernel of the variety.
    for (const Point& x : b_points) {
        const bool kernel = rho.evaluate(x).is_zero();
        if (kernel != phi.defined_at(x))
            throw PreconditionFailed("the map must be defined exactly on the rho-kernel; "
                                     "offending point " +
                                     point_str(sig, x));
    }
    for (const auto& [rank, value] : phi.table()) {
        const Point x = unrank_point(sig, rank);
        if (!b.membership(x) || !rho.evaluate(x).is_zero())
            throw PreconditionFailed("the map covers " + point_str(sig, x) +
                                     " outside the rho-kernel of the variety");
    }
    const MultilinearCheck mc = check_multilinear(phi);
    if (!mc.ok) throw MultilinearityViolation("the input map fails the multilinearity laws",
                                              mc.witness);

    const RestrictedSet rset(sig, b.constraints(), rho);
    std::vector<std::uint64_t> members;
    for (const Point& x : b_points)
        if (!rho.evaluate(x).is_zero()) members.push_back(point_rank(sig, x));

    // Normalize: scale the first block of z so that rho becomes 1 there.
    const Point z_norm = scale_coord(sig, z, 0, rz.inv());
    const std::vector<std::uint8_t> h0_norm = vals_scale(h0, rz.inv().value(), p);
    const Fp one(1, p);

    auto compute = [&](std::uint64_t seed) {
        const BfsTree tree = bfs_tree(rset, z_norm, seed);
        std::vector<bool> reached(sig.total_points(), false);
        for (std::uint64_t r : tree.visit_order) reached[r] = true;
        for (std::uint64_t r : members) {
            if (!reached[r])
                throw NotConnected(
                    "a point with nonzero rho cannot be walked to from the base point",
                    point_str(sig, unrank_point(sig, tree.start_rank)),
                    point_str(sig, unrank_point(sig, r)));
        }

        std::unordered_map<std::uint64_t, WalkState> state;
        state.emplace(tree.start_rank,
                      WalkState{std::vector<Fp>(k, one), z_norm, h0_norm});
        std::unordered_map<std::uint64_t, std::vector<std::uint8_t>> out;
        out.emplace(tree.start_rank,
                    vals_scale(h0_norm, rho.evaluate(unrank_point(sig, tree.start_rank)).value(),
                               p));
        for (std::size_t idx = 1; idx < tree.visit_order.size(); ++idx) {
            const std::uint64_t rank = tree.visit_order[idx];
            const std::uint64_t par = tree.parents.at(rank);
            const WalkState& ps = state.at(par);
            const Point x = unrank_point(sig, rank);
            const Point par_pt = unrank_point(sig, par);
            const int axis = one_block_difference(sig, par_pt, x);
            if (axis < 0)
                throw MismatchError("internal: walk step is not a one-block move");

            Point scaled = x;
            for (std::size_t c = 0; c < k; ++c)
                if (ps.lambdas[c] != one) scaled = scale_coord(sig, scaled, c, ps.lambdas[c]);
            const Fp r = rho.evaluate(scaled);
            std::vector<Fp> lambdas = ps.lambdas;
            if (r != one) {
                const Fp mu = r.inv();
                scaled = scale_coord(sig, scaled, static_cast<std::size_t>(axis), mu);
                lambdas[static_cast<std::size_t>(axis)] *= mu;
            }
            std::vector<std::uint8_t> value = ps.value;
            if (!(scaled == ps.endpoint)) {
                const Point diff = ominus(sig, scaled, ps.endpoint);
                if (!phi.defined_at(diff))
                    throw MismatchError("internal: walk difference " + point_str(sig, diff) +
                                        " left the rho-kernel");
                value = vals_add(value, phi.value_at(diff), p);
            }
            out.emplace(rank, vals_scale(value, rho.evaluate(x).value(), p));
            state.emplace(rank, WalkState{std::move(lambdas), std::move(scaled),
                                          std::move(value)});
        }
        return out;
    };

    const auto primary = compute(opts.seed);
    if (opts.audit) {
        const std::uint64_t audit_seed = opts.audit_seed == opts.seed
                                             ? opts.seed + 0x9E3779B97F4A7C15ull
                                             : opts.audit_seed;
        const auto check = compute(audit_seed);
        for (std::uint64_t r : members) {
            if (primary.at(r) != check.at(r))
                throw AuditFailed("independent walks disagree at " +
                                  point_str(sig, unrank_point(sig, r)) + ": " +
                                  vals_str(primary.at(r)) + " vs " + vals_str(check.at(r)));
        }
    }

    std::map<std::uint64_t, std::vector<std::uint8_t>> table = phi.table();
    for (std::uint64_t r : members) table[r] = primary.at(r);
    PartialMultilinearMap result(b, static_cast<unsigned>(phi.codim_h()), std::move(table));

    if (result.value_at(z) != h0)
        throw AuditFailed("the base value is not reproduced: expected " + vals_str(h0) +
                          ", got " + vals_str(result.value_at(z)));
    const MultilinearCheck mc2 = check_multilinear(result);
    if (!mc2.ok)
        throw MultilinearityViolation("the extension fails the multilinearity laws", mc2.witness);
    return result;
}

namespace {

/// Little-endian digits of `rank` in base p, length `s`.
std::vector<std::uint8_t> combo_digits(std::uint64_t rank, unsigned p, std::size_t s) {
    std::vector<std::uint8_t> out(s, 0);
    for (std::size_t j = 0; j < s; ++j) {
        out[j] = static_cast<std::uint8_t>(rank % p);
        rank /= p;
    }
    return out;
}

MultilinearForm combine_forms(const std::vector<MultilinearForm>& forms,
                              const std::vector<std::uint8_t>& combo, unsigned p) {
    MultilinearForm out = MultilinearForm::zero(forms.front().sig(), forms.front().axes());
    for (std::size_t j = 0; j < forms.size(); ++j)
        out = form_add(out, form_scale(forms[j], Fp(combo[j], p)));
    return out;
}

}  // namespace

StepResult extend_step(const PartialMultilinearMap& phi,
                       const std::vector<std::uint32_t>& down_set, std::uint32_t removed_mask,
                       const StepOptions& opts) {
    const SpaceSignature& sig = phi.domain().sig();
    const unsigned p = sig.p();
    const unsigned k = sig.k();
    const unsigned codim = phi.codim_h();
    const std::uint32_t full_mask = (1u << k) - 1;
    if (removed_mask == 0 || removed_mask > full_mask)
        throw PreconditionFailed("the removed set must be a nonempty subset of the coordinates");
    if (std::find(down_set.begin(), down_set.end(), removed_mask) == down_set.end())
        throw PreconditionFailed("the removed set must belong to the admissible family");
    for (std::uint32_t t : down_set)
        if (t != removed_mask && (t & removed_mask) == removed_mask)
            throw PreconditionFailed("the removed set must be maximal in the admissible family");

    std::vector<MultilinearForm> exact;
    std::vector<MultilinearForm> others;
    for (const MultilinearForm& c : phi.domain().constraints()) {
        const std::uint32_t mask = axes_mask(c.axes());
        if (mask == 0)
            throw PreconditionFailed("constant constraints are not admissible in the pipeline");
        if (std::find(down_set.begin(), down_set.end(), mask) == down_set.end())
            throw PreconditionFailed("a constraint's support lies outside the admissible family");
        (mask == removed_mask ? exact : others).push_back(c);
    }

    StageRecord record;
    record.down_set = down_set;
    record.removed_mask = removed_mask;
    record.codim_in = phi.domain().codimension();

    if (exact.empty()) {
        record.codim_out = record.codim_in;
        return {record, phi};
    }

    // Split the exactly-S constraints into high-bias combinations and a
    // basis completion, scanning combination vectors in rank order.
    const std::size_t s = exact.size();
    if (s > 20) throw CapExceeded(~0ull, enumeration_cap());
    std::uint64_t n_combos = 1;
    for (std::size_t j = 0; j < s; ++j) n_combos *= p;
    check_cap(n_combos);
    const Rational threshold = rational_pow(p, -static_cast<long long>(opts.bias_exponent_t));

    FpSpan span(p, s);
    while (true) {
        bool have_best = false;
        Rational best_bias;
        std::uint64_t best_rank = 0;
        for (std::uint64_t r = 1; r < n_combos; ++r) {
            const std::vector<std::uint8_t> combo = combo_digits(r, p, s);
            if (span.contains(combo)) continue;
            const Rational bval = bias(combine_forms(exact, combo, p));
            if (!have_best || bval > best_bias) {
                have_best = true;
                best_bias = bval;
                best_rank = r;
            }
        }
        if (!have_best || best_bias < threshold) break;
        const std::vector<std::uint8_t> combo = combo_digits(best_rank, p, s);
        span.try_add(combo);
        record.alpha_combos.push_back(combo);
        record.alphas.push_back(combine_forms(exact, combo, p));
    }
    for (std::uint64_t r = 1; r < n_combos && record.alpha_combos.size() +
                                                  record.rho_combos.size() < s; ++r) {
        const std::vector<std::uint8_t> combo = combo_digits(r, p, s);
        if (span.contains(combo)) continue;
        span.try_add(combo);
        record.rho_combos.push_back(combo);
        record.rhos.push_back(combine_forms(exact, combo, p));
    }

    const std::vector<int> s_axes = mask_axes(removed_mask);
    std::vector<int> rest_axes;
    for (unsigned c = 0; c < k; ++c)
        if (!(removed_mask & (1u << c))) rest_axes.push_back(static_cast<int>(c));
    const SubSpace sub(sig, s_axes);
    const SubSpace rest(sig, rest_axes);
    const SpaceSignature& sig_s = sub.reduced_sig();

    std::vector<MultilinearForm> within;   // support strictly inside S
    std::vector<MultilinearForm> mixed;    // support meeting S and its complement
    std::vector<MultilinearForm> outside;  // support disjoint from S
    for (const MultilinearForm& c : others) {
        const std::uint32_t mask = axes_mask(c.axes());
        if ((mask & removed_mask) == 0)
            outside.push_back(c);
        else if ((mask & ~removed_mask) == 0)
            within.push_back(c);
        else
            mixed.push_back(c);
    }

    std::vector<MultilinearForm> substituted;
    auto domain_constraints = [&](std::size_t next_rho) {
        std::vector<MultilinearForm> cs = others;
        cs.insert(cs.end(), record.alphas.begin(), record.alphas.end());
        cs.insert(cs.end(), substituted.begin(), substituted.end());
        for (std::size_t j = next_rho; j < record.rhos.size(); ++j) cs.push_back(record.rhos[j]);
        return cs;
    };

    // Re-express the domain over the combination basis; the point set is
    // unchanged, which the table-coverage validation re-checks.
    PartialMultilinearMap current(Variety(sig, domain_constraints(0)), codim, phi.table());

    for (std::size_t i = 0; i < record.rhos.size(); ++i) {
        const MultilinearForm rho_s = sub.reduce_form(record.rhos[i]);
        std::vector<MultilinearForm> laters;
        for (std::size_t j = i + 1; j < record.rhos.size(); ++j)
            laters.push_back(sub.reduce_form(record.rhos[j]));
        std::vector<MultilinearForm> known;
        for (const MultilinearForm& a : record.alphas) known.push_back(sub.reduce_form(a));
        for (const MultilinearForm& c : within) known.push_back(sub.reduce_form(c));

        Point z_s = zero_point(sig_s);
        bool degenerate = false;
        try {
            z_s = find_point_with_value_one(sig_s, rho_s, laters, known);
        } catch (const NotFound&) {
            degenerate = true;  // rho vanishes identically there: drop it outright
        }
        record.rho_degenerate.push_back(degenerate);
        record.z_points.push_back(z_s);
        if (degenerate) {
            current = PartialMultilinearMap(Variety(sig, domain_constraints(i + 1)), codim,
                                            current.table());
            continue;
        }

        // Substitute the base point into every mixed constraint.
        for (const MultilinearForm& c : mixed) {
            std::map<int, std::vector<std::uint8_t>> fixed;
            for (int a : c.axes())
                if (removed_mask & (1u << a)) {
                    std::size_t j = 0;
                    while (sub.full_axis(j) != a) ++j;
                    fixed[a] = get_coord(sig_s, z_s, j);
                }
            const MultilinearForm sliced = slice_form(c, fixed);
            if (sliced.is_zero()) continue;
            bool duplicate = false;
            for (const MultilinearForm& f : outside) duplicate = duplicate || f == sliced;
            for (const MultilinearForm& f : substituted) duplicate = duplicate || f == sliced;
            if (!duplicate) {
                substituted.push_back(sliced);
                record.substituted.push_back(sliced);
            }
        }

        // Extend each admissible slice over rho.
        std::map<std::uint64_t, std::vector<std::uint8_t>> new_table;
        Point w = zero_point(rest.reduced_sig());
        do {
            const Point w_full = rest.embed_point(w, zero_point(sig));
            bool admissible = true;
            for (const MultilinearForm& c : outside)
                admissible = admissible && c.evaluate(w_full).is_zero();
            for (const MultilinearForm& c : substituted)
                admissible = admissible && c.evaluate(w_full).is_zero();
            if (!admissible) continue;

            std::vector<MultilinearForm> slice_cs;
            for (const MultilinearForm& a : record.alphas) slice_cs.push_back(sub.reduce_form(a));
            for (const MultilinearForm& f : laters) slice_cs.push_back(f);
            for (const MultilinearForm& c : within) slice_cs.push_back(sub.reduce_form(c));
            for (const MultilinearForm& c : mixed) {
                std::map<int, std::vector<std::uint8_t>> fixed;
                for (int a : c.axes())
                    if (!(removed_mask & (1u << a))) fixed[a] = get_coord(sig, w_full, a);
                slice_cs.push_back(sub.reduce_form(slice_form(c, fixed)));
            }
            const Variety b_w(sig_s, slice_cs);
            std::vector<MultilinearForm> kernel_cs = slice_cs;
            kernel_cs.push_back(rho_s);
            const Variety b0_w(sig_s, kernel_cs);
            std::map<std::uint64_t, std::vector<std::uint8_t>> tw;
            for (const Point& xs : b0_w.enumerate_points())
                tw[point_rank(sig_s, xs)] = current.value_at(sub.embed_point(xs, w_full));
            const PartialMultilinearMap phi_w(b0_w, codim, std::move(tw));
            const PartialMultilinearMap ext = qr_extend(
                b_w, rho_s, phi_w, z_s, std::vector<std::uint8_t>(codim, 0), opts.qr);
            for (const auto& [rs, val] : ext.table()) {
                const Point full = sub.embed_point(unrank_point(sig_s, rs), w_full);
                new_table[point_rank(sig, full)] = val;
            }
        } while (next_point(rest.reduced_sig(), w));

        current = PartialMultilinearMap(Variety(sig, domain_constraints(i + 1)), codim,
                                        std::move(new_table));
    }

    // Replace the high-bias combinations by factors from their partition
    // decompositions; the factor zero set is certified to sit inside the
    // combination zero set, so restricting the table loses no coverage.
    if (!record.alphas.empty()) {
        const ContainmentCertificate cert = containment_from_decomposition(record.alphas);
        record.gammas = cert.factors;
    }
    std::vector<MultilinearForm> final_cs = others;
    final_cs.insert(final_cs.end(), substituted.begin(), substituted.end());
    final_cs.insert(final_cs.end(), record.gammas.begin(), record.gammas.end());
    // Drop the exactly-S originals: `others` excludes them already.
    std::vector<MultilinearForm> pruned;
    for (const MultilinearForm& c : final_cs)
        if (axes_mask(c.axes()) != removed_mask) pruned.push_back(c);
    const Variety final_domain(sig, pruned);
    std::map<std::uint64_t, std::vector<std::uint8_t>> final_table;
    for (const Point& x : final_domain.enumerate_points()) {
        auto it = current.table().find(point_rank(sig, x));
        if (it == current.table().end())
            throw MismatchError("internal: the factor zero set left the extended domain at " +
                                point_str(sig, x));
        final_table[point_rank(sig, x)] = it->second;
    }
    PartialMultilinearMap psi(final_domain, codim, std::move(final_table));

    const MultilinearCheck mc = check_multilinear(psi);
    if (!mc.ok)
        throw MultilinearityViolation("the stage output fails the multilinearity laws",
                                      mc.witness);
    for (const auto& [rank, val] : psi.table()) {
        const Point x = unrank_point(sig, rank);
        if (phi.defined_at(x) && phi.value_at(x) != val)
            throw AuditFailed("the stage output disagrees with its input at " +
                              point_str(sig, x));
    }
    record.codim_out = final_domain.codimension();
    return {record, psi};
}

namespace {

std::vector<std::uint32_t> removal_schedule(unsigned k) {
    std::vector<std::uint32_t> masks;
    for (std::uint32_t m = 1; m < (1u << k); ++m) masks.push_back(m);
    std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
        const int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
        if (pa != pb) return pa > pb;
        const std::vector<int> aa = mask_axes(a), bb = mask_axes(b);
        return std::lexicographical_compare(aa.begin(), aa.end(), bb.begin(), bb.end());
    });
    return masks;
}

std::string axes_str(std::uint32_t mask) {
    std::string out = "{";
    bool first = true;
    for (int a : mask_axes(mask)) {
        if (!first) out += ",";
        out += std::to_string(a + 1);
        first = false;
    }
    return out + "}";
}

std::string classify_failure(const Error& e) {
    if (dynamic_cast<const NotConnected*>(&e) || dynamic_cast<const NotFound*>(&e) ||
        dynamic_cast<const BudgetExhausted*>(&e))
        return "search";
    if (dynamic_cast<const AuditFailed*>(&e) || dynamic_cast<const MultilinearityViolation*>(&e))
        return "audit";
    if (dynamic_cast<const CapExceeded*>(&e)) return "cap";
    return "input";
}

}  // namespace

ExtensionCertificate run_pipeline(const PartialMultilinearMap& phi, const PipelineOptions& opts) {
    const SpaceSignature& sig = phi.domain().sig();
    const unsigned p = sig.p();
    const unsigned k = sig.k();
    ExtensionCertificate cert;
    if (k == 0) {
        cert.status = "the space has no coordinates";
        cert.failure_kind = "input";
        return cert;
    }

    std::vector<std::uint32_t> family = removal_schedule(k);
    PartialMultilinearMap current = phi;
    std::vector<Variety> stage_domains;
    const std::vector<std::uint32_t> schedule = family;
    for (std::size_t t = 0; t < schedule.size(); ++t) {
        try {
            StepResult res = extend_step(current, family, schedule[t], opts.step);
            cert.stages.push_back(std::move(res.record));
            current = std::move(res.psi);
            stage_domains.push_back(current.domain());
        } catch (const Error& e) {
            cert.status = "stage " + std::to_string(t + 1) + " removing " +
                          axes_str(schedule[t]) + " failed: " + e.what();
            cert.failure_kind = classify_failure(e);
            cert.failed_stage = t;
            return cert;
        }
        family.erase(std::remove(family.begin(), family.end(), schedule[t]), family.end());
    }
    cert.failed_stage = cert.stages.size();

    if (!current.domain().constraints().empty())
        throw MismatchError("internal: the pipeline left constraints behind");

    // Read the coefficient tensors off the everywhere-defined table.
    std::vector<MultilinearForm> components;
    const std::vector<int> all_axes_list = [&] {
        std::vector<int> axes;
        for (unsigned c = 0; c < k; ++c) axes.push_back(static_cast<int>(c));
        return axes;
    }();
    for (unsigned h = 0; h < current.codim_h(); ++h)
        components.push_back(MultilinearForm::zero(sig, all_axes_list));
    const std::size_t n_coeffs = components.front().coeffs().size();
    for (std::size_t idx = 0; idx < n_coeffs; ++idx) {
        Point basis = zero_point(sig);
        std::size_t r = idx;
        for (int c = static_cast<int>(k) - 1; c >= 0; --c) {
            const unsigned n = sig.dim(static_cast<std::size_t>(c));
            std::vector<std::uint8_t> block(n, 0);
            block[r % n] = 1;
            set_coord(sig, basis, static_cast<std::size_t>(c), block);
            r /= n;
        }
        const std::vector<std::uint8_t> val = current.value_at(basis);
        for (unsigned h = 0; h < current.codim_h(); ++h) components[h].coeffs()[idx] = val[h];
    }
    MultilinearMapH global(sig, components);
    try {
        for_each_point(sig, [&](const Point& x) {
            if (global.evaluate(x) != current.value_at(x))
                throw AuditFailed("the final table is not a single multilinear map; witness " +
                                  point_str(sig, x));
        });

        std::vector<MultilinearForm> agreement_cs = phi.domain().constraints();
        for (const Variety& d : stage_domains)
            for (const MultilinearForm& c : d.constraints())
                if (std::find(agreement_cs.begin(), agreement_cs.end(), c) == agreement_cs.end())
                    agreement_cs.push_back(c);
        Variety agreement(sig, agreement_cs);
        for (const Point& x : agreement.enumerate_points()) {
            if (global.evaluate(x) != phi.value_at(x))
                throw AuditFailed("the global map disagrees with the input at " +
                                  point_str(sig, x));
        }
        cert.agreement = std::move(agreement);
    } catch (const Error& e) {
        cert.status = std::string("final verification failed: ") + e.what();
        cert.failure_kind = classify_failure(e);
        cert.failed_stage = cert.stages.size();
        return cert;
    }
    cert.global_map = std::move(global);
    cert.completed = true;
    cert.status = "extended";
    (void)p;
    return cert;
}

}  // namespace mlv
