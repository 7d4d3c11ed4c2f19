#include "mlv/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mlv {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Token {
    std::string text;
    std::size_t line;
};

/// Splits the stream into whitespace-separated tokens, stripping `#`
/// comments and treating `|` as a token of its own.
std::vector<Token> lex(std::istream& in) {
    std::vector<Token> tokens;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string spaced;
        spaced.reserve(line.size() + 2);
        for (char c : line) {
            if (c == '|')
                spaced += " | ";
            else
                spaced += c;
        }
        std::istringstream split(spaced);
        std::string text;
        while (split >> text) tokens.push_back({text, line_no});
    }
    return tokens;
}

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : tokens_(lex(in)) {}

    bool done() const { return next_ == tokens_.size(); }

    /// Line to blame in an error message: the next token's line, or the
    /// last seen line at end of input.
    std::size_t here() const {
        if (!done()) return tokens_[next_].line;
        return tokens_.empty() ? 1 : tokens_.back().line;
    }

    const std::string& take(const std::string& what) {
        if (done()) throw ParseError("missing " + what, here());
        return tokens_[next_++].text;
    }

    unsigned long long take_uint(const std::string& what, unsigned long long max) {
        const std::size_t at = here();
        const std::string& text = take(what);
        if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("expected " + what + ", got '" + text + "'", at);
        unsigned long long value = 0;
        for (char c : text) {
            value = value * 10 + static_cast<unsigned>(c - '0');
            if (value > max)
                throw ParseError(what + " " + text + " is larger than " + std::to_string(max), at);
        }
        return value;
    }

    std::uint8_t take_residue(const std::string& what, unsigned p) {
        const std::size_t at = here();
        const unsigned long long value = take_uint(what, 255);
        if (value >= p)
            throw ParseError(what + " " + std::to_string(value) + " is not a residue modulo " +
                                 std::to_string(p),
                             at);
        return static_cast<std::uint8_t>(value);
    }

    void expect_end() {
        if (!done()) throw ParseError("unexpected trailing content '" + tokens_[next_].text + "'", here());
    }

private:
    std::vector<Token> tokens_;
    std::size_t next_ = 0;
};

/// `p k n_1 ... n_k`, validated through the signature constructor.
SpaceSignature read_space(TokenReader& in) {
    const std::size_t at = in.here();
    const auto p = static_cast<unsigned>(in.take_uint("modulus p", 255));
    const auto k = static_cast<std::size_t>(in.take_uint("coordinate count k", 31));
    if (k == 0) throw ParseError("coordinate count k must be positive", at);
    std::vector<unsigned> dims;
    dims.reserve(k);
    for (std::size_t i = 0; i < k; ++i)
        dims.push_back(static_cast<unsigned>(in.take_uint("dimension n_" + std::to_string(i + 1),
                                                          1u << 20)));
    try {
        return SpaceSignature(p, std::move(dims));
    } catch (const std::exception& e) {
        throw ParseError(e.what(), at);
    }
}

/// `axes:<comma list>`, 1-based and strictly ascending; returns 0-based.
std::vector<int> read_axes(TokenReader& in, std::size_t k) {
    const std::size_t at = in.here();
    const std::string& text = in.take("axes:<comma list>");
    if (text.rfind("axes:", 0) != 0)
        throw ParseError("expected axes:<comma list>, got '" + text + "'", at);
    const std::string list = text.substr(5);
    if (list.empty()) throw ParseError("axis list must not be empty", at);
    std::vector<int> axes;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        const std::string item = list.substr(pos, comma - pos);
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError("bad axis '" + item + "' in '" + text + "'", at);
        const unsigned long long axis = std::stoull(item);
        if (axis < 1 || axis > k)
            throw ParseError("axis " + item + " outside 1.." + std::to_string(k), at);
        if (!axes.empty() && static_cast<int>(axis - 1) <= axes.back())
            throw ParseError("axis list must be strictly ascending", at);
        axes.push_back(static_cast<int>(axis - 1));
        pos = comma + 1;
    }
    return axes;
}

MultilinearForm read_form(TokenReader& in, const SpaceSignature& sig) {
    const std::vector<int> axes = read_axes(in, sig.k());
    std::size_t count = 1;
    for (int a : axes) count *= sig.dim(static_cast<std::size_t>(a));
    std::vector<std::uint8_t> coeffs;
    coeffs.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        coeffs.push_back(in.take_residue("coefficient", sig.p()));
    return MultilinearForm(sig, axes, std::move(coeffs));
}

void append_space(std::string& out, const SpaceSignature& sig) {
    out += std::to_string(sig.p());
    out += ' ';
    out += std::to_string(sig.k());
    for (unsigned n : sig.dims()) {
        out += ' ';
        out += std::to_string(n);
    }
}

std::string axes_token(const std::vector<int>& axes) {
    std::string out = "axes:";
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(axes[i] + 1);
    }
    return out;
}

/// Coefficients in rows of the last axis' dimension, one row per line.
void append_coeff_rows(std::string& out, const MultilinearForm& f) {
    const unsigned row = f.sig().dim(static_cast<std::size_t>(f.axes().back()));
    const std::vector<std::uint8_t>& coeffs = f.coeffs();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        out += std::to_string(coeffs[i]);
        out += (i + 1) % row == 0 ? '\n' : ' ';
    }
}

void require_file_form(const MultilinearForm& f) {
    if (f.axes().empty())
        throw PreconditionFailed("constant forms have no file representation");
}

ordered_json json_axes(std::uint32_t mask) {
    ordered_json out = ordered_json::array();
    for (int a : mask_axes(mask)) out.push_back(a + 1);
    return out;
}

ordered_json json_form(const MultilinearForm& f) {
    ordered_json out;
    out["axes"] = json_axes(axes_mask(f.axes()));
    out["coeffs"] = f.coeffs();
    return out;
}

ordered_json json_forms(const std::vector<MultilinearForm>& forms) {
    ordered_json out = ordered_json::array();
    for (const MultilinearForm& f : forms) out.push_back(json_form(f));
    return out;
}

ordered_json json_space(const SpaceSignature& sig) {
    ordered_json out;
    out["p"] = sig.p();
    out["dims"] = sig.dims();
    return out;
}

ordered_json json_stage(const StageRecord& stage) {
    ordered_json out;
    ordered_json down = ordered_json::array();
    for (std::uint32_t mask : stage.down_set) down.push_back(json_axes(mask));
    out["down_set"] = std::move(down);
    out["removed_axes"] = json_axes(stage.removed_mask);
    out["alpha_combos"] = stage.alpha_combos;
    out["alphas"] = json_forms(stage.alphas);
    out["gammas"] = json_forms(stage.gammas);
    out["rho_combos"] = stage.rho_combos;
    out["rhos"] = json_forms(stage.rhos);
    out["rho_degenerate"] = stage.rho_degenerate;
    ordered_json zs = ordered_json::array();
    for (const Point& z : stage.z_points) zs.push_back(z.flat);
    out["z_points"] = std::move(zs);
    out["substituted"] = json_forms(stage.substituted);
    out["codim_in"] = stage.codim_in;
    out["codim_out"] = stage.codim_out;
    return out;
}

}  // namespace

MultilinearForm parse_tensor(std::istream& in) {
    TokenReader reader(in);
    const SpaceSignature sig = read_space(reader);
    MultilinearForm f = read_form(reader, sig);
    reader.expect_end();
    return f;
}

Variety parse_variety(std::istream& in) {
    TokenReader reader(in);
    const SpaceSignature sig = read_space(reader);
    std::vector<MultilinearForm> constraints;
    while (!reader.done()) constraints.push_back(read_form(reader, sig));
    return Variety(sig, std::move(constraints));
}

MapFileData parse_map(std::istream& in) {
    TokenReader reader(in);
    MapFileData data;
    data.sig = read_space(reader);
    data.codim_h = static_cast<unsigned>(reader.take_uint("output arity h", 64));
    if (data.codim_h == 0) throw ParseError("output arity h must be positive", reader.here());
    while (!reader.done()) {
        Point x;
        x.flat.reserve(data.sig.flat_size());
        for (unsigned i = 0; i < data.sig.flat_size(); ++i)
            x.flat.push_back(reader.take_residue("point digit", data.sig.p()));
        const std::size_t at = reader.here();
        if (reader.take("'|' separator") != "|")
            throw ParseError("expected '|' between point and value", at);
        std::vector<std::uint8_t> value;
        value.reserve(data.codim_h);
        for (unsigned i = 0; i < data.codim_h; ++i)
            value.push_back(reader.take_residue("value digit", data.sig.p()));
        data.rows.emplace_back(std::move(x), std::move(value));
    }
    return data;
}

MultilinearForm parse_tensor(const std::string& text) {
    std::istringstream in(text);
    return parse_tensor(in);
}

Variety parse_variety(const std::string& text) {
    std::istringstream in(text);
    return parse_variety(in);
}

MapFileData parse_map(const std::string& text) {
    std::istringstream in(text);
    return parse_map(in);
}

std::string serialize_tensor(const MultilinearForm& f) {
    require_file_form(f);
    std::string out;
    append_space(out, f.sig());
    out += ' ';
    out += axes_token(f.axes());
    out += '\n';
    append_coeff_rows(out, f);
    return out;
}

std::string serialize_variety(const Variety& v) {
    std::string out;
    append_space(out, v.sig());
    out += '\n';
    for (const MultilinearForm& f : v.constraints()) {
        require_file_form(f);
        out += axes_token(f.axes());
        out += '\n';
        append_coeff_rows(out, f);
    }
    return out;
}

std::string serialize_map(const MapFileData& data) {
    std::string out;
    append_space(out, data.sig);
    out += ' ';
    out += std::to_string(data.codim_h);
    out += '\n';
    for (const auto& [x, value] : data.rows) {
        for (std::uint8_t d : x.flat) {
            out += std::to_string(d);
            out += ' ';
        }
        out += '|';
        for (std::uint8_t v : value) {
            out += ' ';
            out += std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

MapFileData map_rows(const PartialMultilinearMap& phi) {
    MapFileData data;
    data.sig = phi.domain().sig();
    data.codim_h = phi.codim_h();
    data.rows.reserve(phi.table().size());
    for (const auto& [rank, value] : phi.table())
        data.rows.emplace_back(unrank_point(data.sig, rank), value);
    return data;
}

PartialMultilinearMap assemble_map(const MapFileData& data, const Variety& domain) {
    if (data.sig != domain.sig())
        throw MismatchError("map file space differs from the domain's space");
    std::map<std::uint64_t, std::vector<std::uint8_t>> table;
    for (const auto& [x, value] : data.rows) {
        const std::uint64_t rank = point_rank(data.sig, x);
        if (!table.emplace(rank, value).second)
            throw MismatchError("map file lists point " + point_str(data.sig, x) + " twice");
    }
    return PartialMultilinearMap(domain, data.codim_h, std::move(table));
}

std::string serialize_certificate(const ExtensionCertificate& cert) {
    ordered_json out;
    out["completed"] = cert.completed;
    out["status"] = cert.status;
    out["failure_kind"] = cert.failure_kind;
    out["failed_stage"] = cert.failed_stage;
    ordered_json stages = ordered_json::array();
    for (const StageRecord& stage : cert.stages) stages.push_back(json_stage(stage));
    out["stages"] = std::move(stages);
    if (cert.global_map.has_value()) {
        ordered_json global;
        global["space"] = json_space(cert.global_map->sig());
        ordered_json components = ordered_json::array();
        for (const MultilinearForm& f : cert.global_map->components())
            components.push_back(f.coeffs());
        global["components"] = std::move(components);
        out["global_map"] = std::move(global);
    } else {
        out["global_map"] = nullptr;
    }
    if (cert.agreement.has_value()) {
        ordered_json agreement;
        agreement["space"] = json_space(cert.agreement->sig());
        agreement["constraints"] = json_forms(cert.agreement->constraints());
        out["agreement"] = std::move(agreement);
    } else {
        out["agreement"] = nullptr;
    }
    return out.dump(2) + "\n";
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

void Report::add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
}

void Report::add(std::string key, const char* value) { add(std::move(key), std::string(value)); }

void Report::add(std::string key, unsigned long long value) {
    add(std::move(key), std::to_string(value));
}

void Report::add(std::string key, long long value) { add(std::move(key), std::to_string(value)); }

void Report::add(std::string key, const Rational& value) {
    add(std::move(key), rational_str(value));
}

void Report::add(std::string key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    add(std::move(key), std::string(buf));
}

void Report::write(std::ostream& out) const {
    for (const auto& [key, value] : entries_) out << key << ": " << value << "\n";
}

std::string Report::str() const {
    std::ostringstream out;
    write(out);
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw ParseError("cannot read " + path);
    return buffer.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot create " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("cannot write " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot move " + tmp + " into place");
}

}  // namespace mlv
