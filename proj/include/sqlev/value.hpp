#pragma once

#include <cstdint>
#include <string>

namespace sqlev {

// One SQLite cell. Blobs keep only their size; blob content never enters
// prompts or probes.
struct Value {
    enum class Kind { null, integer, real, text, blob };
    Kind kind = Kind::null;
    std::int64_t i = 0;
    double r = 0.0;
    std::string s;               // text payload
    std::size_t blob_size = 0;

    static Value null();
    static Value integer(std::int64_t v);
    static Value real(double v);
    static Value text(std::string v);
    static Value blob(std::size_t size, std::string content_hash = "");

    // Literal rendering: integers and reals in shortest decimal form, text
    // verbatim, temporal values as stored text, blobs as "<blob:N bytes>".
    std::string render() const;

    // Tagged cell used in execution-result signatures. Integral reals fold
    // onto their integer form so 3 and 3.0 compare equal; text stays distinct
    // from numbers; NULLs compare equal to NULLs.
    std::string signature_cell() const;
};

}  // namespace sqlev
