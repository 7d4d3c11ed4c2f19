#include "mlv/forms.hpp"

#include <algorithm>
#include <atomic>

namespace mlv {

namespace {
std::atomic<unsigned long long> g_cap{kDefaultEnumerationCap};
}

unsigned long long enumeration_cap() { return g_cap.load(); }

void set_enumeration_cap(unsigned long long cap) {
    if (cap == 0) throw std::invalid_argument("enumeration cap must be positive");
    g_cap.store(cap);
}

void check_cap(unsigned long long n) {
    unsigned long long cap = g_cap.load();
    if (n > cap) throw CapExceeded(n, cap);
}

SpaceSignature::SpaceSignature(unsigned p, std::vector<unsigned> dims) : p_(p), dims_(std::move(dims)) {
    require_supported_prime(p);
    offsets_.reserve(dims_.size());
    for (unsigned n : dims_) {
        if (n == 0) throw std::invalid_argument("coordinate dimension must be at least 1");
        offsets_.push_back(flat_size_);
        flat_size_ += n;
    }
    for (unsigned i = 0; i < flat_size_; ++i) {
        if (total_points_ > (1ull << 62) / p_)
            throw std::invalid_argument("space too large: p^" + std::to_string(flat_size_) +
                                        " points overflows the supported range");
        total_points_ *= p_;
    }
}

void check_point(const SpaceSignature& sig, const Point& x) {
    if (x.flat.size() != sig.flat_size())
        throw MismatchError("point has " + std::to_string(x.flat.size()) + " digits, signature needs " +
                            std::to_string(sig.flat_size()));
    for (std::uint8_t d : x.flat)
        if (d >= sig.p())
            throw MismatchError("point digit " + std::to_string(d) + " out of range for modulus " +
                                std::to_string(sig.p()));
}

unsigned long long point_rank(const SpaceSignature& sig, const Point& x) {
    check_point(sig, x);
    unsigned long long r = 0;
    for (std::size_t j = x.flat.size(); j-- > 0;) r = r * sig.p() + x.flat[j];
    return r;
}

Point unrank_point(const SpaceSignature& sig, unsigned long long rank) {
    if (rank >= sig.total_points())
        throw MismatchError("point index " + std::to_string(rank) + " out of range");
    Point x;
    x.flat.resize(sig.flat_size());
    for (std::size_t j = 0; j < x.flat.size(); ++j) {
        x.flat[j] = static_cast<std::uint8_t>(rank % sig.p());
        rank /= sig.p();
    }
    return x;
}

bool next_point(const SpaceSignature& sig, Point& x) {
    for (std::size_t j = 0; j < x.flat.size(); ++j) {
        if (++x.flat[j] < sig.p()) return true;
        x.flat[j] = 0;
    }
    return false;
}

Point zero_point(const SpaceSignature& sig) {
    Point x;
    x.flat.assign(sig.flat_size(), 0);
    return x;
}

std::vector<std::uint8_t> get_coord(const SpaceSignature& sig, const Point& x, std::size_t axis) {
    check_point(sig, x);
    auto begin = x.flat.begin() + sig.offset(axis);
    return std::vector<std::uint8_t>(begin, begin + sig.dim(axis));
}

void set_coord(const SpaceSignature& sig, Point& x, std::size_t axis,
               const std::vector<std::uint8_t>& value) {
    if (value.size() != sig.dim(axis))
        throw MismatchError("coordinate block has wrong length");
    std::copy(value.begin(), value.end(), x.flat.begin() + sig.offset(axis));
}

Point scale_coord(const SpaceSignature& sig, const Point& x, std::size_t axis, Fp c) {
    check_point(sig, x);
    if (c.modulus() != sig.p()) throw MismatchError("scalar modulus does not match signature");
    Point y = x;
    unsigned off = sig.offset(axis);
    for (unsigned j = 0; j < sig.dim(axis); ++j)
        y.flat[off + j] = static_cast<std::uint8_t>(y.flat[off + j] * c.value() % sig.p());
    return y;
}

unsigned differing_coordinates(const SpaceSignature& sig, const Point& x, const Point& y) {
    check_point(sig, x);
    check_point(sig, y);
    unsigned count = 0;
    for (std::size_t i = 0; i < sig.k(); ++i) {
        unsigned off = sig.offset(i);
        if (!std::equal(x.flat.begin() + off, x.flat.begin() + off + sig.dim(i),
                        y.flat.begin() + off))
            ++count;
    }
    return count;
}

Point ominus(const SpaceSignature& sig, const Point& x, const Point& y) {
    check_point(sig, x);
    check_point(sig, y);
    int differing = -1;
    for (std::size_t i = 0; i < sig.k(); ++i) {
        unsigned off = sig.offset(i);
        if (!std::equal(x.flat.begin() + off, x.flat.begin() + off + sig.dim(i),
                        y.flat.begin() + off)) {
            if (differing >= 0)
                throw MismatchError("ominus needs points differing in exactly one coordinate; " +
                                    point_str(sig, x) + " and " + point_str(sig, y) +
                                    " differ in several");
            differing = static_cast<int>(i);
        }
    }
    if (differing < 0)
        throw MismatchError("ominus needs points differing in exactly one coordinate; " +
                            point_str(sig, x) + " equals " + point_str(sig, y));
    Point d = x;
    unsigned off = sig.offset(static_cast<std::size_t>(differing));
    for (unsigned j = 0; j < sig.dim(static_cast<std::size_t>(differing)); ++j) {
        int v = static_cast<int>(x.flat[off + j]) - static_cast<int>(y.flat[off + j]);
        d.flat[off + j] = static_cast<std::uint8_t>(mod_reduce(v, sig.p()));
    }
    return d;
}

std::string point_str(const SpaceSignature& sig, const Point& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < sig.k(); ++i) {
        if (i) s += "|";
        unsigned off = sig.offset(i);
        for (unsigned j = 0; j < sig.dim(i); ++j) {
            if (j) s += ",";
            s += std::to_string(x.flat[off + j]);
        }
    }
    return s + ")";
}

MultilinearForm::MultilinearForm(SpaceSignature sig, std::vector<int> axes,
                                 std::vector<std::uint8_t> coeffs)
    : sig_(std::move(sig)), axes_(std::move(axes)), coeffs_(std::move(coeffs)) {
    for (std::size_t j = 0; j < axes_.size(); ++j) {
        if (axes_[j] < 0 || axes_[j] >= static_cast<int>(sig_.k()))
            throw MismatchError("axis " + std::to_string(axes_[j] + 1) + " outside the space");
        if (j && axes_[j - 1] >= axes_[j])
            throw MismatchError("axes must be strictly ascending");
    }
    std::size_t expected = 1;
    for (int a : axes_) expected *= sig_.dim(static_cast<std::size_t>(a));
    if (coeffs_.size() != expected)
        throw MismatchError("coefficient tensor has " + std::to_string(coeffs_.size()) +
                            " entries, expected " + std::to_string(expected));
    for (std::uint8_t c : coeffs_)
        if (c >= sig_.p()) throw MismatchError("coefficient out of range for modulus");
}

MultilinearForm MultilinearForm::zero(const SpaceSignature& sig, std::vector<int> axes) {
    std::size_t n = 1;
    for (int a : axes) n *= sig.dim(static_cast<std::size_t>(a));
    return MultilinearForm(sig, std::move(axes), std::vector<std::uint8_t>(n, 0));
}

MultilinearForm MultilinearForm::constant(const SpaceSignature& sig, Fp value) {
    if (value.modulus() != sig.p()) throw MismatchError("constant modulus does not match signature");
    return MultilinearForm(sig, {}, {static_cast<std::uint8_t>(value.value())});
}

bool MultilinearForm::is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](std::uint8_t c) { return c == 0; });
}

Fp MultilinearForm::evaluate(const Point& x) const {
    check_point(sig_, x);
    const unsigned p = sig_.p();
    const std::size_t m = axes_.size();
    if (m == 0) return Fp(coeffs_[0], p);
    std::vector<unsigned> idx(m, 0);
    std::vector<unsigned> off(m);
    for (std::size_t j = 0; j < m; ++j) off[j] = sig_.offset(static_cast<std::size_t>(axes_[j]));
    unsigned long long acc = 0;
    for (std::size_t flat = 0;; ++flat) {
        if (coeffs_[flat]) {
            unsigned prod = coeffs_[flat];
            for (std::size_t j = 0; j < m && prod; ++j) prod = prod * x.flat[off[j] + idx[j]] % p;
            acc += prod;
        }
        // advance the multi-index, last axis fastest
        std::size_t j = m;
        while (j-- > 0) {
            if (++idx[j] < sig_.dim(static_cast<std::size_t>(axes_[j]))) break;
            idx[j] = 0;
            if (j == 0) return Fp(static_cast<long long>(acc % p), p);
        }
    }
}

std::vector<std::uint8_t> MultilinearForm::last_axis_functional(const Point& x) const {
    if (axes_.empty()) throw MismatchError("constant form has no last axis");
    check_point(sig_, x);
    const unsigned p = sig_.p();
    const std::size_t m = axes_.size();
    const unsigned last_dim = sig_.dim(static_cast<std::size_t>(axes_.back()));
    std::vector<unsigned> out(last_dim, 0);
    std::vector<unsigned> idx(m, 0);
    std::vector<unsigned> off(m);
    for (std::size_t j = 0; j < m; ++j) off[j] = sig_.offset(static_cast<std::size_t>(axes_[j]));
    for (std::size_t flat = 0;; ++flat) {
        if (coeffs_[flat]) {
            unsigned prod = coeffs_[flat];
            for (std::size_t j = 0; j + 1 < m && prod; ++j) prod = prod * x.flat[off[j] + idx[j]] % p;
            out[idx[m - 1]] = (out[idx[m - 1]] + prod) % p;
        }
        std::size_t j = m;
        bool done = false;
        while (j-- > 0) {
            if (++idx[j] < sig_.dim(static_cast<std::size_t>(axes_[j]))) break;
            idx[j] = 0;
            if (j == 0) done = true;
        }
        if (done) break;
    }
    return std::vector<std::uint8_t>(out.begin(), out.end());
}

MultilinearForm form_add(const MultilinearForm& f, const MultilinearForm& g) {
    if (f.sig() != g.sig() || f.axes() != g.axes())
        throw MismatchError("form addition needs matching signature and axes");
    std::vector<std::uint8_t> c(f.coeffs().size());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = static_cast<std::uint8_t>((f.coeffs()[i] + g.coeffs()[i]) % f.sig().p());
    return MultilinearForm(f.sig(), f.axes(), std::move(c));
}

MultilinearForm form_scale(const MultilinearForm& f, Fp c) {
    if (c.modulus() != f.sig().p()) throw MismatchError("scalar modulus does not match form");
    std::vector<std::uint8_t> out(f.coeffs().size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(f.coeffs()[i] * c.value() % f.sig().p());
    return MultilinearForm(f.sig(), f.axes(), std::move(out));
}

MultilinearForm slice_form(const MultilinearForm& f,
                           const std::map<int, std::vector<std::uint8_t>>& fixed) {
    if (fixed.empty()) return f;
    const unsigned p = f.sig().p();
    std::vector<int> rest_axes;
    for (int a : f.axes())
        if (!fixed.count(a)) rest_axes.push_back(a);
    for (const auto& [axis, value] : fixed) {
        if (std::find(f.axes().begin(), f.axes().end(), axis) == f.axes().end())
            throw MismatchError("cannot fix axis " + std::to_string(axis + 1) +
                                ": not an axis of the form");
        if (value.size() != f.sig().dim(static_cast<std::size_t>(axis)))
            throw MismatchError("fixed block for axis " + std::to_string(axis + 1) +
                                " has the wrong length");
    }
    if (rest_axes.empty())
        throw MismatchError("slice would fix every axis of the form; use evaluate");

    MultilinearForm out = MultilinearForm::zero(f.sig(), rest_axes);
    const std::size_t m = f.axes().size();
    std::vector<unsigned> idx(m, 0);
    std::vector<unsigned> rest_dim;
    for (int a : rest_axes) rest_dim.push_back(f.sig().dim(static_cast<std::size_t>(a)));
    std::vector<unsigned> acc(out.coeffs().size(), 0);
    for (std::size_t flat = 0;; ++flat) {
        if (f.coeffs()[flat]) {
            unsigned prod = f.coeffs()[flat];
            std::size_t rest_index = 0;
            std::size_t r = 0;
            for (std::size_t j = 0; j < m; ++j) {
                int a = f.axes()[j];
                auto it = fixed.find(a);
                if (it != fixed.end()) {
                    prod = prod * it->second[idx[j]] % p;
                } else {
                    rest_index = rest_index * rest_dim[r] + idx[j];
                    ++r;
                }
            }
            acc[rest_index] = (acc[rest_index] + prod) % p;
        }
        std::size_t j = m;
        bool done = false;
        while (j-- > 0) {
            if (++idx[j] < f.sig().dim(static_cast<std::size_t>(f.axes()[j]))) break;
            idx[j] = 0;
            if (j == 0) done = true;
        }
        if (done) break;
    }
    for (std::size_t i = 0; i < acc.size(); ++i)
        out.coeffs()[i] = static_cast<std::uint8_t>(acc[i]);
    return out;
}

MultiaffineForm::MultiaffineForm(SpaceSignature sig)
    : sig_(std::move(sig)), constant_(0, sig_.p()) {}

void MultiaffineForm::set_constant(Fp c) {
    if (c.modulus() != sig_.p()) throw MismatchError("constant modulus does not match signature");
    constant_ = c;
}

void MultiaffineForm::set_part(MultilinearForm part) {
    if (part.sig() != sig_) throw MismatchError("part signature does not match");
    if (part.axes().empty())
        throw MismatchError("use set_constant for the empty-support part");
    std::uint32_t mask = axes_mask(part.axes());
    parts_.erase(mask);
    parts_.emplace(mask, std::move(part));
}

Fp MultiaffineForm::evaluate(const Point& x) const {
    Fp v = constant_;
    for (const auto& [mask, part] : parts_) v += part.evaluate(x);
    return v;
}

MultilinearForm MultiaffineForm::multilinear_part() const {
    std::vector<int> all;
    for (std::size_t i = 0; i < sig_.k(); ++i) all.push_back(static_cast<int>(i));
    auto it = parts_.find(axes_mask(all));
    if (it != parts_.end()) return it->second;
    return MultilinearForm::zero(sig_, all);
}

MultilinearMapH::MultilinearMapH(SpaceSignature sig, std::vector<MultilinearForm> components)
    : sig_(std::move(sig)), components_(std::move(components)) {
    for (const auto& c : components_) {
        if (c.sig() != sig_) throw MismatchError("component signature does not match");
        if (c.axes().size() != sig_.k())
            throw MismatchError("map components must be supported on every coordinate");
    }
}

std::vector<std::uint8_t> MultilinearMapH::evaluate(const Point& x) const {
    std::vector<std::uint8_t> out;
    out.reserve(components_.size());
    for (const auto& c : components_)
        out.push_back(static_cast<std::uint8_t>(c.evaluate(x).value()));
    return out;
}

SubSpace::SubSpace(SpaceSignature full, std::vector<int> axes)
    : full_(std::move(full)), axes_(std::move(axes)) {
    std::vector<unsigned> dims;
    reduced_index_.assign(full_.k(), -1);
    for (std::size_t j = 0; j < axes_.size(); ++j) {
        int a = axes_[j];
        if (a < 0 || a >= static_cast<int>(full_.k()))
            throw MismatchError("subspace axis outside the space");
        if (j && axes_[j - 1] >= a) throw MismatchError("subspace axes must be strictly ascending");
        dims.push_back(full_.dim(static_cast<std::size_t>(a)));
        reduced_index_[static_cast<std::size_t>(a)] = static_cast<int>(j);
    }
    reduced_ = SpaceSignature(full_.p(), dims);
}

Point SubSpace::reduce_point(const Point& full_point) const {
    check_point(full_, full_point);
    Point out = zero_point(reduced_);
    for (std::size_t j = 0; j < axes_.size(); ++j) {
        unsigned off = full_.offset(static_cast<std::size_t>(axes_[j]));
        unsigned n = full_.dim(static_cast<std::size_t>(axes_[j]));
        std::copy(full_point.flat.begin() + off, full_point.flat.begin() + off + n,
                  out.flat.begin() + reduced_.offset(j));
    }
    return out;
}

Point SubSpace::embed_point(const Point& reduced_point, const Point& base) const {
    check_point(reduced_, reduced_point);
    check_point(full_, base);
    Point out = base;
    for (std::size_t j = 0; j < axes_.size(); ++j) {
        unsigned off = full_.offset(static_cast<std::size_t>(axes_[j]));
        unsigned n = full_.dim(static_cast<std::size_t>(axes_[j]));
        std::copy(reduced_point.flat.begin() + reduced_.offset(j),
                  reduced_point.flat.begin() + reduced_.offset(j) + n, out.flat.begin() + off);
    }
    return out;
}

MultilinearForm SubSpace::reduce_form(const MultilinearForm& f) const {
    if (f.sig() != full_) throw MismatchError("form signature does not match subspace");
    std::vector<int> new_axes;
    for (int a : f.axes()) {
        int r = reduced_index_.at(static_cast<std::size_t>(a));
        if (r < 0)
            throw MismatchError("form touches axis " + std::to_string(a + 1) +
                                " outside the subspace");
        new_axes.push_back(r);
    }
    return MultilinearForm(reduced_, std::move(new_axes), f.coeffs());
}

MultilinearForm SubSpace::lift_form(const MultilinearForm& f) const {
    if (f.sig() != reduced_) throw MismatchError("form signature does not match reduced space");
    std::vector<int> new_axes;
    for (int a : f.axes()) new_axes.push_back(axes_.at(static_cast<std::size_t>(a)));
    return MultilinearForm(full_, std::move(new_axes), f.coeffs());
}

std::uint32_t axes_mask(const std::vector<int>& axes) {
    std::uint32_t mask = 0;
    for (int a : axes) mask |= 1u << a;
    return mask;
}

std::vector<int> mask_axes(std::uint32_t mask) {
    std::vector<int> axes;
    for (int a = 0; a < 32; ++a)
        if (mask & (1u << a)) axes.push_back(a);
    return axes;
}

}  // namespace mlv
