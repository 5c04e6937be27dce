#pragma once
// Minimal RFC-4180 CSV output. Doubles are printed with %.17g so files
// round-trip bit-exactly.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace reglab {

inline std::string csv_escape(const std::string& field) {
    bool needs_quote = false;
    for (char c : field)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') needs_quote = true;
    if (!needs_quote) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << csv_escape(fields[i]);
    }
    os << "\r\n";
}

}  // namespace reglab
