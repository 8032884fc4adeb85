#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chargebid/errors.hpp"

namespace chargebid {
namespace csv {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

/// Reads all lines of a text file; throws InputError if it cannot be opened.
inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

/// Strict double parse: the whole field must be consumed.
inline double parse_double(const std::string& field, std::size_t line_no = 0) {
    const std::string t = trim(field);
    if (t.empty()) throw ParseError("empty numeric field", line_no);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw ParseError("bad numeric field '" + t + "'", line_no);
    return v;
}

inline long parse_long(const std::string& field, std::size_t line_no = 0) {
    const std::string t = trim(field);
    if (t.empty()) throw ParseError("empty integer field", line_no);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size() || errno == ERANGE)
        throw ParseError("bad integer field '" + t + "'", line_no);
    return v;
}

/// Shortest round-trippable decimal form; used everywhere numbers are written so
/// repeated runs produce byte-identical files.
inline std::string format_double(double v) {
    if (v == 0.0) return "0";  // normalize -0
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace csv
}  // namespace chargebid
