#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "knowflow/common.hpp"

namespace knowflow::csv {

// RFC-style quoting: fields containing comma, quote or newline are quoted,
// embedded quotes doubled.
inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline std::string format_double(double v, int decimals = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return std::string(buf);
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot write " + path);
    }

    // '#'-prefixed header comment line.
    void comment(std::string_view text) { out_ << "# " << text << '\n'; }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote(fields[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

} // namespace knowflow::csv
