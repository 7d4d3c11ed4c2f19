#pragma once

// Deterministic random instance generators shared by the unit and
// acceptance suites.  Everything is seeded explicitly so failures are
// reproducible.

#include <random>
#include <vector>

#include "mlv/forms.hpp"
#include "mlv/variety.hpp"

namespace mlvtest {

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    unsigned below(unsigned n) {
        return std::uniform_int_distribution<unsigned>(0, n - 1)(eng);
    }
    bool flip() { return below(2) == 1; }
    unsigned pick(const std::vector<unsigned>& options) { return options[below(options.size())]; }
};

inline std::vector<int> all_axes(const mlv::SpaceSignature& sig) {
    std::vector<int> axes;
    for (std::size_t i = 0; i < sig.k(); ++i) axes.push_back(static_cast<int>(i));
    return axes;
}

inline mlv::SpaceSignature random_signature(Rng& rng, unsigned k_min, unsigned k_max,
                                            unsigned dim_max,
                                            const std::vector<unsigned>& primes) {
    unsigned k = k_min + rng.below(k_max - k_min + 1);
    std::vector<unsigned> dims;
    for (unsigned i = 0; i < k; ++i) dims.push_back(1 + rng.below(dim_max));
    return mlv::SpaceSignature(rng.pick(primes), dims);
}

inline mlv::MultilinearForm random_form(Rng& rng, const mlv::SpaceSignature& sig,
                                        std::vector<int> axes) {
    std::size_t n = 1;
    for (int a : axes) n *= sig.dim(static_cast<std::size_t>(a));
    std::vector<std::uint8_t> coeffs(n);
    for (auto& c : coeffs) c = static_cast<std::uint8_t>(rng.below(sig.p()));
    return mlv::MultilinearForm(sig, std::move(axes), std::move(coeffs));
}

inline mlv::MultilinearForm random_full_form(Rng& rng, const mlv::SpaceSignature& sig) {
    return random_form(rng, sig, all_axes(sig));
}

inline mlv::Point random_point(Rng& rng, const mlv::SpaceSignature& sig) {
    mlv::Point x = mlv::zero_point(sig);
    for (auto& d : x.flat) d = static_cast<std::uint8_t>(rng.below(sig.p()));
    return x;
}

/// Random nonempty axis subset.
inline std::vector<int> random_axes(Rng& rng, const mlv::SpaceSignature& sig) {
    std::vector<int> axes;
    while (axes.empty())
        for (std::size_t i = 0; i < sig.k(); ++i)
            if (rng.flip()) axes.push_back(static_cast<int>(i));
    return axes;
}

inline mlv::MultiaffineForm random_multiaffine(Rng& rng, const mlv::SpaceSignature& sig) {
    mlv::MultiaffineForm alpha(sig);
    alpha.set_constant(mlv::Fp(rng.below(sig.p()), sig.p()));
    unsigned subsets = (1u << sig.k()) - 1;
    for (std::uint32_t mask = 1; mask <= subsets; ++mask)
        if (rng.flip()) alpha.set_part(random_form(rng, sig, mlv::mask_axes(mask)));
    return alpha;
}

/// Random variety with the requested number of constraints on random
/// nonempty axis subsets; retried until nonempty when required.
inline mlv::Variety random_variety(Rng& rng, const mlv::SpaceSignature& sig,
                                   unsigned n_constraints, bool require_nonempty = false) {
    for (;;) {
        std::vector<mlv::MultilinearForm> cs;
        for (unsigned i = 0; i < n_constraints; ++i)
            cs.push_back(random_form(rng, sig, random_axes(rng, sig)));
        mlv::Variety v(sig, std::move(cs));
        if (!require_nonempty || v.count_points() > 0) return v;
    }
}

}  // namespace mlvtest
