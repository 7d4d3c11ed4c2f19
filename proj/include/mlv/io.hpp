#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlv/extend.hpp"
#include "mlv/forms.hpp"
#include "mlv/variety.hpp"

namespace mlv {

/// Text formats.  All three are UTF-8, whitespace-separated, with `#`
/// starting a comment that runs to the end of the line.
///
///   tensor file:   `p k n_1 ... n_k axes:<comma list>` then the
///                  coefficients in row-major order (last listed axis
///                  fastest); axes are 1-based and ascending.
///   variety file:  `p k n_1 ... n_k` then one `axes:` + coefficient
///                  block per constraint (zero blocks = whole space).
///   map file:      `p k n_1 ... n_k h` then one `digits | values` row
///                  per point of the domain.
///
/// Parsers throw ParseError carrying the 1-based line number of the
/// offending token.  Serializers emit a canonical layout, so
/// serialize(parse(serialize(x))) is byte-identical to serialize(x).

MultilinearForm parse_tensor(std::istream& in);
MultilinearForm parse_tensor(const std::string& text);
std::string serialize_tensor(const MultilinearForm& f);

Variety parse_variety(std::istream& in);
Variety parse_variety(const std::string& text);
std::string serialize_variety(const Variety& v);

/// Raw rows of a map file, kept in file order.
struct MapFileData {
    SpaceSignature sig;
    unsigned codim_h = 1;
    std::vector<std::pair<Point, std::vector<std::uint8_t>>> rows;
};

MapFileData parse_map(std::istream& in);
MapFileData parse_map(const std::string& text);
std::string serialize_map(const MapFileData& data);

/// Rows of a partial map's table in canonical point order.
MapFileData map_rows(const PartialMultilinearMap& phi);

/// Builds the partial map with the given rows over `domain`; the rows
/// must match the domain's space and cover its points exactly
/// (MismatchError otherwise, naming the first offender).
PartialMultilinearMap assemble_map(const MapFileData& data, const Variety& domain);

/// Extension certificate as structured text: JSON with fixed key order,
/// two-space indentation and a trailing newline, so identical runs give
/// identical bytes.
std::string serialize_certificate(const ExtensionCertificate& cert);

/// FNV-1a 64-bit digest of a byte string (for input echoes in reports).
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Ordered `key: value` report.  Entries appear in insertion order and
/// every value is rendered deterministically.
class Report {
public:
    void add(std::string key, std::string value);
    void add(std::string key, const char* value);
    void add(std::string key, unsigned long long value);
    void add(std::string key, long long value);
    void add(std::string key, const Rational& value);
    /// Shortest round-trip decimal rendering.
    void add(std::string key, double value);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    void write(std::ostream& out) const;
    std::string str() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Whole file as bytes; ParseError when the file cannot be read.
std::string read_file(const std::string& path);

/// Writes via a temporary file in the same directory plus an atomic
/// rename, so readers never observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace mlv
