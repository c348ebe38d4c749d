#pragma once

#include <string>
#include <vector>

#include "core/error.hpp"

namespace kirby {

inline std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

// Whitespace tokenizer that also splits off ':' as its own token.
inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (char ch : line) {
        if (ch == ' ' || ch == '\t' || ch == '\r') {
            flush();
        } else if (ch == ':') {
            flush();
            out.push_back(":");
        } else {
            cur.push_back(ch);
        }
    }
    flush();
    return out;
}

inline long long parse_int(const std::string& tok, int lineno) {
    try {
        size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::Syntax, "expected integer, got '" + tok + "'", lineno);
    }
}

} // namespace kirby
