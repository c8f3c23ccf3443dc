#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace rosa {

/**
 * @brief Row or column key of an associative array.
 *
 * Either an integer or a text. The variant ordering is the key order:
 * every integer sorts before every text, integers compare numerically and
 * texts compare bytewise.
 */
using Key = std::variant<std::int64_t, std::string>;

inline Key key(std::int64_t k) { return Key{k}; }
inline Key key(std::string k) { return Key{std::move(k)}; }
inline Key key(const char* k) { return Key{std::string(k)}; }

inline bool is_text(const Key& k) { return k.index() == 1; }
inline bool is_integer(const Key& k) { return k.index() == 0; }

inline std::string to_string(const Key& k) {
    if (const auto* i = std::get_if<std::int64_t>(&k)) {
        return std::to_string(*i);
    }
    return std::get<std::string>(k);
}

/// Text keys that would be mistaken for newline/tab separated fields.
inline bool key_is_persistable(const Key& k) {
    const auto* s = std::get_if<std::string>(&k);
    return s == nullptr || s->find_first_of("\t\n") == std::string::npos;
}

/// Finite set of strings, kept sorted and duplicate free.
class ValueSet {
public:
    ValueSet() = default;
    ValueSet(std::initializer_list<std::string> items) : items_(items) { normalize(); }
    explicit ValueSet(std::vector<std::string> items) : items_(std::move(items)) { normalize(); }

    const std::vector<std::string>& items() const noexcept { return items_; }
    bool empty() const noexcept { return items_.empty(); }
    std::size_t size() const noexcept { return items_.size(); }

    bool contains(std::string_view s) const {
        return std::binary_search(items_.begin(), items_.end(), s, std::less<>{});
    }

    bool is_subset_of(const ValueSet& other) const {
        return std::includes(other.items_.begin(), other.items_.end(), items_.begin(), items_.end());
    }

    friend ValueSet set_union(const ValueSet& a, const ValueSet& b) {
        ValueSet out;
        out.items_.reserve(a.size() + b.size());
        std::set_union(a.items_.begin(), a.items_.end(), b.items_.begin(), b.items_.end(),
                       std::back_inserter(out.items_));
        return out;
    }

    friend ValueSet set_intersection(const ValueSet& a, const ValueSet& b) {
        ValueSet out;
        std::set_intersection(a.items_.begin(), a.items_.end(), b.items_.begin(), b.items_.end(),
                              std::back_inserter(out.items_));
        return out;
    }

    friend bool operator==(const ValueSet&, const ValueSet&) = default;
    friend auto operator<=>(const ValueSet&, const ValueSet&) = default;

private:
    void normalize() {
        std::sort(items_.begin(), items_.end());
        items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
    }

    std::vector<std::string> items_;
};

/**
 * @brief Stored value of an associative array.
 *
 * Numbers are either exact 64-bit integers or doubles; the two compare
 * numerically with each other.
 */
using Value = std::variant<std::int64_t, double, std::string, ValueSet>;

enum class ValueKind { number, text, set };

inline ValueKind kind_of(const Value& v) {
    switch (v.index()) {
    case 0:
    case 1:
        return ValueKind::number;
    case 2:
        return ValueKind::text;
    default:
        return ValueKind::set;
    }
}

inline bool is_number(const Value& v) { return v.index() <= 1; }

inline double as_double(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return static_cast<double>(*i);
    }
    return std::get<double>(v);
}

inline bool is_finite_number(const Value& v) {
    return v.index() == 0 || (v.index() == 1 && std::isfinite(std::get<double>(v)));
}

/// Numeric order for numbers, bytewise for texts, element sequence for sets.
/// Values of different kinds order by kind. Mixed int/double compares as double.
inline std::partial_ordering compare_values(const Value& a, const Value& b) {
    if (is_number(a) && is_number(b)) {
        if (a.index() == 0 && b.index() == 0) {
            return std::get<std::int64_t>(a) <=> std::get<std::int64_t>(b);
        }
        return as_double(a) <=> as_double(b);
    }
    if (kind_of(a) != kind_of(b)) {
        return static_cast<int>(kind_of(a)) <=> static_cast<int>(kind_of(b));
    }
    if (kind_of(a) == ValueKind::text) {
        return std::get<std::string>(a) <=> std::get<std::string>(b);
    }
    return std::get<ValueSet>(a) <=> std::get<ValueSet>(b);
}

inline bool values_equal(const Value& a, const Value& b) {
    return compare_values(a, b) == std::partial_ordering::equivalent;
}

/**
 * Equality with a relative tolerance applied when either side is a double.
 * Integers, texts and sets compare exactly; infinities must match exactly.
 */
inline bool values_close(const Value& a, const Value& b, double rel_tol) {
    if (is_number(a) && is_number(b) && (a.index() == 1 || b.index() == 1)) {
        const double x = as_double(a);
        const double y = as_double(b);
        if (x == y) {
            return true;
        }
        if (!std::isfinite(x) || !std::isfinite(y)) {
            return false;
        }
        return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
    }
    return values_equal(a, b);
}

/// Shortest decimal text that reads back to the same number.
inline std::string format_number(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return std::to_string(*i);
    }
    const double d = std::get<double>(v);
    if (std::isinf(d)) {
        return d > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), d);
    return std::string(buf, res.ptr);
}

inline std::string to_string(const Value& v) {
    switch (kind_of(v)) {
    case ValueKind::number:
        return format_number(v);
    case ValueKind::text:
        return std::get<std::string>(v);
    case ValueKind::set: {
        std::string out;
        for (const auto& item : std::get<ValueSet>(v).items()) {
            if (!out.empty()) {
                out += ',';
            }
            out += item;
        }
        return out;
    }
    }
    return {};
}

/// Parses a canonical decimal integer ("0", "-12", no leading zeros or '+').
inline bool parse_canonical_int(std::string_view s, std::int64_t& out) {
    if (s.empty()) {
        return false;
    }
    std::string_view digits = s.front() == '-' ? s.substr(1) : s;
    if (digits.empty() || (digits.size() > 1 && digits.front() == '0')) {
        return false;
    }
    if (s == "-0") {
        return false;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

/// Integer if `s` is an integer literal, otherwise a double; false if neither.
inline bool parse_number(std::string_view s, Value& out) {
    if (s.empty()) {
        return false;
    }
    std::int64_t i = 0;
    auto ires = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ires.ec == std::errc{} && ires.ptr == s.data() + s.size()) {
        out = i;
        return true;
    }
    if (s == "inf" || s == "+inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (s == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    double d = 0;
    auto dres = std::from_chars(s.data(), s.data() + s.size(), d);
    if (dres.ec == std::errc{} && dres.ptr == s.data() + s.size()) {
        out = d;
        return true;
    }
    return false;
}

/// Integer key for canonical decimal integers, text key otherwise.
inline Key parse_key(std::string_view s) {
    std::int64_t i = 0;
    if (parse_canonical_int(s, i)) {
        return Key{i};
    }
    return Key{std::string(s)};
}

} // namespace rosa
