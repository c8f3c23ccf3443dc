#pragma once

#include "rosa/assoc.hpp"
#include "rosa/error.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace rosa {

// Triple files hold one entry per line, `row<TAB>col<TAB>value`, in
// row-major sorted order with no header. Canonical decimal integers read
// back as integer keys; everything else is a text key.

namespace detail {

inline void check_savable_key(const Key& k) {
    if (!key_is_persistable(k)) {
        throw ArgumentError("key '" + to_string(k) + "' contains a tab or newline");
    }
    std::int64_t ignored = 0;
    if (const auto* s = std::get_if<std::string>(&k); s != nullptr && parse_canonical_int(*s, ignored)) {
        throw ArgumentError("text key '" + *s + "' would read back as an integer key");
    }
}

inline std::string format_tsv_value(const Value& v) {
    if (const auto* set = std::get_if<ValueSet>(&v)) {
        for (const auto& item : set->items()) {
            if (item.find_first_of(",\t\n") != std::string::npos) {
                throw ArgumentError("set element '" + item + "' cannot be written to a triple file");
            }
        }
    } else if (const auto* text = std::get_if<std::string>(&v)) {
        if (text->find_first_of("\t\n") != std::string::npos) {
            throw ArgumentError("text value contains a tab or newline");
        }
    }
    return to_string(v);
}

inline Value parse_tsv_value(std::string_view field, const Semiring& s, std::size_t line) {
    switch (s.kind()) {
    case ValueKind::number: {
        Value v;
        if (!parse_number(field, v)) {
            throw ParseError(line, "'" + std::string(field) + "' is not a number");
        }
        return v;
    }
    case ValueKind::text:
        return std::string(field);
    case ValueKind::set: {
        std::vector<std::string> items;
        std::size_t start = 0;
        while (start <= field.size()) {
            auto end = field.find(',', start);
            if (end == std::string_view::npos) {
                end = field.size();
            }
            if (end > start) {
                items.emplace_back(field.substr(start, end - start));
            }
            start = end + 1;
        }
        return ValueSet(std::move(items));
    }
    }
    throw ParseError(line, "unsupported value kind");
}

} // namespace detail

inline void save_tsv(const AssociativeArray& a, std::ostream& out) {
    a.for_each([&](const Key& r, const Key& c, const Value& v) {
        detail::check_savable_key(r);
        detail::check_savable_key(c);
        out << to_string(r) << '\t' << to_string(c) << '\t' << detail::format_tsv_value(v) << '\n';
    });
}

inline std::string to_tsv(const AssociativeArray& a) {
    std::ostringstream out;
    save_tsv(a, out);
    return out.str();
}

inline void save_tsv(const AssociativeArray& a, const std::filesystem::path& path) {
    // Format first so a failing key never leaves a truncated file behind.
    const std::string text = to_tsv(a);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw Error("write to '" + path.string() + "' failed");
    }
}

/**
 * @brief Reads a triple file into an array over `s`.
 *
 * Values are parsed according to the semiring's value kind. Repeated
 * coordinates combine with add, as in construct().
 *
 * @throws ParseError naming the 1-based line of a malformed entry.
 * @throws DomainError when a value lies outside the semiring domain.
 */
inline AssociativeArray load_tsv(std::istream& in, const Semiring& s) {
    std::vector<Key> rows;
    std::vector<Key> cols;
    std::vector<Value> vals;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text(line);
        const auto t1 = text.find('\t');
        const auto t2 = t1 == std::string_view::npos ? t1 : text.find('\t', t1 + 1);
        if (t1 == std::string_view::npos || t2 == std::string_view::npos) {
            throw ParseError(line_no, "expected 3 tab-separated fields");
        }
        if (text.find('\t', t2 + 1) != std::string_view::npos) {
            throw ParseError(line_no, "expected 3 tab-separated fields, found more");
        }
        const auto row = text.substr(0, t1);
        const auto col = text.substr(t1 + 1, t2 - t1 - 1);
        const auto val = text.substr(t2 + 1);
        if (row.empty() || col.empty() || val.empty()) {
            throw ParseError(line_no, "empty field");
        }
        Value v = detail::parse_tsv_value(val, s, line_no);
        if (!s.in_domain(v)) {
            throw DomainError("line " + std::to_string(line_no) + ": value '" + std::string(val) +
                              "' is outside the domain of " + s.name());
        }
        rows.push_back(parse_key(row));
        cols.push_back(parse_key(col));
        vals.push_back(std::move(v));
    }
    return construct(rows, cols, vals, s);
}

inline AssociativeArray load_tsv(const std::filesystem::path& path, const Semiring& s) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    return load_tsv(in, s);
}

inline AssociativeArray from_tsv(std::string_view text, const Semiring& s) {
    std::istringstream in{std::string(text)};
    return load_tsv(in, s);
}

} // namespace rosa
