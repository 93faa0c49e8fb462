#include "sqlev/value.hpp"

#include <cmath>
#include <limits>

#include "sqlev/text.hpp"

namespace sqlev {

Value Value::null() { return Value{}; }

Value Value::integer(std::int64_t v) {
    Value out;
    out.kind = Kind::integer;
    out.i = v;
    return out;
}

Value Value::real(double v) {
    Value out;
    out.kind = Kind::real;
    out.r = v;
    return out;
}

Value Value::text(std::string v) {
    Value out;
    out.kind = Kind::text;
    out.s = std::move(v);
    return out;
}

Value Value::blob(std::size_t size, std::string content_hash) {
    Value out;
    out.kind = Kind::blob;
    out.blob_size = size;
    out.s = std::move(content_hash);
    return out;
}

std::string Value::render() const {
    switch (kind) {
        case Kind::null: return "NULL";
        case Kind::integer: return std::to_string(i);
        case Kind::real: return render_double(r);
        case Kind::text: return s;
        case Kind::blob: return "<blob:" + std::to_string(blob_size) + " bytes>";
    }
    return "";
}

std::string Value::signature_cell() const {
    switch (kind) {
        case Kind::null:
            return "n:";
        case Kind::integer:
            return "i:" + std::to_string(i);
        case Kind::real: {
            // 2^53: beyond this doubles cannot represent every integer.
            if (std::floor(r) == r && std::fabs(r) < 9007199254740992.0) {
                return "i:" + std::to_string(static_cast<std::int64_t>(r));
            }
            return "r:" + render_double(r);
        }
        case Kind::text:
            return "t:" + s;
        case Kind::blob:
            return "b:" + std::to_string(blob_size) + ":" + s;
    }
    return "";
}

}  // namespace sqlev
