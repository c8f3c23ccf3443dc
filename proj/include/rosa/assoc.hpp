#pragma once

#include "rosa/error.hpp"
#include "rosa/semiring.hpp"
#include "rosa/value.hpp"

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace rosa {

struct Triple {
    Key row;
    Key col;
    Value val;
};

/**
 * @brief Sparse map from (row key, column key) to nonzero semiring values.
 *
 * Entries are held in row-major sorted coordinate order: a sorted list of
 * distinct row keys, a row pointer array, and per-entry column keys and
 * values. No stored value ever equals the semiring zero, every listed row
 * holds at least one entry, and arrays never change after construction.
 */
class AssociativeArray {
public:
    class Builder;

    explicit AssociativeArray(Semiring s = plus_times()) : s_(std::move(s)), row_ptr_{0} {}

    const Semiring& semiring() const noexcept { return s_; }

    std::size_t nnz() const noexcept { return vals_.size(); }
    bool empty() const noexcept { return vals_.empty(); }

    std::size_t row_count() const noexcept { return rows_.size(); }
    std::span<const Key> rows() const noexcept { return rows_; }
    const Key& row_key(std::size_t i) const { return rows_[i]; }

    std::span<const Key> row_cols(std::size_t i) const {
        return std::span<const Key>(cols_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    }
    std::span<const Value> row_vals(std::size_t i) const {
        return std::span<const Value>(vals_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    }

    std::optional<std::size_t> find_row(const Key& r) const {
        auto it = std::lower_bound(rows_.begin(), rows_.end(), r);
        if (it == rows_.end() || *it != r) {
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - rows_.begin());
    }

    bool has_row(const Key& r) const { return find_row(r).has_value(); }

    /// Stored value at (r, c), or nullptr when the entry is absent (zero).
    const Value* get(const Key& r, const Key& c) const {
        auto i = find_row(r);
        if (!i) {
            return nullptr;
        }
        auto cs = row_cols(*i);
        auto it = std::lower_bound(cs.begin(), cs.end(), c);
        if (it == cs.end() || *it != c) {
            return nullptr;
        }
        return &vals_[row_ptr_[*i] + static_cast<std::size_t>(it - cs.begin())];
    }

    /// Sorted distinct column keys.
    std::vector<Key> col_keys() const {
        std::vector<Key> out(cols_);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            for (std::size_t e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) {
                f(rows_[i], cols_[e], vals_[e]);
            }
        }
    }

    std::vector<Triple> triples() const {
        std::vector<Triple> out;
        out.reserve(nnz());
        for_each([&](const Key& r, const Key& c, const Value& v) { out.push_back({r, c, v}); });
        return out;
    }

private:
    Semiring s_;
    std::vector<Key> rows_;
    std::vector<std::size_t> row_ptr_;
    std::vector<Key> cols_;
    std::vector<Value> vals_;
};

/**
 * @brief Appends entries in strictly increasing (row, col) order.
 *
 * Zero values are dropped. `push` validates order, keys and domain;
 * the row-at-a-time interface used by the array operations does not.
 */
class AssociativeArray::Builder {
public:
    explicit Builder(Semiring s) : a_(std::move(s)) {}

    void reserve(std::size_t rows, std::size_t nnz) {
        a_.rows_.reserve(rows);
        a_.row_ptr_.reserve(rows + 1);
        a_.cols_.reserve(nnz);
        a_.vals_.reserve(nnz);
    }

    void push(Key row, Key col, Value v) {
        if (!key_is_persistable(row) || !key_is_persistable(col)) {
            throw ArgumentError("keys must not contain tab or newline characters");
        }
        a_.s_.require_domain(v);
        if (have_last_) {
            if (row < last_row_ || (row == last_row_ && !(last_col_ < col))) {
                throw ArgumentError("builder entries must be pushed in strictly increasing order");
            }
        }
        last_row_ = row;
        last_col_ = col;
        have_last_ = true;
        if (a_.s_.is_zero(v)) {
            return;
        }
        if (a_.rows_.empty() || a_.rows_.back() != row) {
            begin_row(std::move(row));
        }
        push_col(std::move(col), std::move(v));
    }

    // Row-at-a-time interface: caller guarantees ordering and domain.
    void begin_row(Key row) {
        seal_row();
        a_.rows_.push_back(std::move(row));
        open_ = true;
    }

    void push_col(Key col, Value v) {
        if (a_.s_.is_zero(v)) {
            return;
        }
        a_.cols_.push_back(std::move(col));
        a_.vals_.push_back(std::move(v));
    }

    AssociativeArray finish() && {
        seal_row();
        return std::move(a_);
    }

private:
    void seal_row() {
        if (!open_) {
            return;
        }
        open_ = false;
        if (a_.cols_.size() == a_.row_ptr_.back()) {
            a_.rows_.pop_back(); // every entry of the row was zero
        } else {
            a_.row_ptr_.push_back(a_.cols_.size());
        }
    }

    AssociativeArray a_;
    bool open_ = false;
    bool have_last_ = false;
    Key last_row_;
    Key last_col_;
};

namespace detail {

inline void require_same_semiring(const AssociativeArray& a, const AssociativeArray& b, const char* op) {
    if (!(a.semiring() == b.semiring())) {
        throw AlgebraError(std::string(op) + ": semiring mismatch (" + a.semiring().name() + " vs " +
                           b.semiring().name() + ")");
    }
}

} // namespace detail

/**
 * @brief Builds an array from parallel row-key, column-key and value lists.
 *
 * A single value is broadcast over every (row, col) pair. Repeated
 * coordinates are combined with the semiring add, in input order, and
 * entries that end up equal to zero are dropped.
 */
inline AssociativeArray construct(std::span<const Key> rows, std::span<const Key> cols,
                                  std::span<const Value> vals, const Semiring& s) {
    const bool broadcast = vals.size() == 1 && rows.size() != 1;
    if (rows.size() != cols.size() || (!broadcast && vals.size() != rows.size())) {
        throw ArityError("construct: got " + std::to_string(rows.size()) + " rows, " +
                         std::to_string(cols.size()) + " cols, " + std::to_string(vals.size()) + " values");
    }
    for (const auto& v : vals) {
        s.require_domain(v);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!key_is_persistable(rows[i]) || !key_is_persistable(cols[i])) {
            throw ArgumentError("keys must not contain tab or newline characters");
        }
    }

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a] != rows[b]) {
            return rows[a] < rows[b];
        }
        return cols[a] < cols[b];
    });

    AssociativeArray::Builder b(s);
    b.reserve(rows.size(), rows.size());
    const Key* current_row = nullptr;
    for (std::size_t i = 0; i < order.size();) {
        const std::size_t first = order[i];
        Value acc = vals[broadcast ? 0 : first];
        std::size_t j = i + 1;
        for (; j < order.size() && rows[order[j]] == rows[first] && cols[order[j]] == cols[first]; ++j) {
            acc = s.add(acc, vals[broadcast ? 0 : order[j]]);
        }
        if (current_row == nullptr || *current_row != rows[first]) {
            b.begin_row(rows[first]);
            current_row = &rows[first];
        }
        b.push_col(cols[first], std::move(acc));
        i = j;
    }
    return std::move(b).finish();
}

inline AssociativeArray construct(std::span<const Key> rows, std::span<const Key> cols, const Value& val,
                                  const Semiring& s) {
    return construct(rows, cols, std::span<const Value>(&val, 1), s);
}

/// Array of ones at the given coordinates; rows and columns may repeat.
inline AssociativeArray ones(std::span<const Key> rows, std::span<const Key> cols, const Semiring& s) {
    return construct(rows, cols, s.one(), s);
}

/**
 * @brief Selector array of ones pairing rows[i] with cols[i].
 * @throws NotASelectorError when a row key or column key repeats.
 */
inline AssociativeArray identity_pairs(std::span<const Key> rows, std::span<const Key> cols,
                                       const Semiring& s) {
    if (rows.size() != cols.size()) {
        throw ArityError("identity_pairs: " + std::to_string(rows.size()) + " rows vs " +
                         std::to_string(cols.size()) + " cols");
    }
    const auto check_unique = [](std::span<const Key> keys, const char* what) {
        std::vector<Key> sorted(keys.begin(), keys.end());
        std::sort(sorted.begin(), sorted.end());
        auto dup = std::adjacent_find(sorted.begin(), sorted.end());
        if (dup != sorted.end()) {
            throw NotASelectorError(std::string("identity_pairs: repeated ") + what + " key '" +
                                    to_string(*dup) + "'");
        }
    };
    check_unique(rows, "row");
    check_unique(cols, "column");
    return ones(rows, cols, s);
}

/// The identity I(k) = I(k, k).
inline AssociativeArray identity(std::span<const Key> keys, const Semiring& s) {
    return identity_pairs(keys, keys, s);
}

/**
 * @brief Key selection pattern: an explicit list, a text prefix, or all keys.
 *
 * Prefix patterns are written with a trailing `*` ("child|*") and match
 * text keys beginning with everything before the `*`. Integer keys never
 * match a prefix.
 */
class KeyPattern {
public:
    struct Prefix {
        std::string text;
    };
    struct All {};

    static KeyPattern all() { return KeyPattern(All{}); }
    static KeyPattern prefix(std::string p) {
        if (!p.empty() && p.back() == '*') {
            p.pop_back();
        }
        return KeyPattern(Prefix{std::move(p)});
    }
    static KeyPattern keys(std::vector<Key> ks) {
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        return KeyPattern(std::move(ks));
    }

    /// "*" → all; "abc*" → prefix; otherwise a comma separated key list.
    static KeyPattern parse(std::string_view text) {
        if (text == "*") {
            return all();
        }
        if (!text.empty() && text.back() == '*') {
            return prefix(std::string(text));
        }
        std::vector<Key> ks;
        std::size_t start = 0;
        while (start <= text.size()) {
            auto end = text.find(',', start);
            if (end == std::string_view::npos) {
                end = text.size();
            }
            if (end > start) {
                ks.push_back(parse_key(text.substr(start, end - start)));
            }
            start = end + 1;
        }
        return keys(std::move(ks));
    }

    bool matches(const Key& k) const {
        return std::visit(
            [&](const auto& p) -> bool {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, All>) {
                    return true;
                } else if constexpr (std::is_same_v<P, Prefix>) {
                    const auto* s = std::get_if<std::string>(&k);
                    return s != nullptr && s->starts_with(p.text);
                } else {
                    return std::binary_search(p.begin(), p.end(), k);
                }
            },
            p_);
    }

private:
    using Rep = std::variant<std::vector<Key>, Prefix, All>;
    explicit KeyPattern(Rep p) : p_(std::move(p)) {}

    Rep p_;
};

/// Sorted distinct row keys holding at least one entry.
inline std::vector<Key> row_keys(const AssociativeArray& a) {
    return std::vector<Key>(a.rows().begin(), a.rows().end());
}

inline std::vector<Key> col_keys(const AssociativeArray& a) { return a.col_keys(); }

inline std::size_t nnz(const AssociativeArray& a) { return a.nnz(); }

/// Identity over the universe keys matched by `pattern`.
inline AssociativeArray selector(const KeyPattern& pattern, std::span<const Key> universe, const Semiring& s) {
    std::vector<Key> matched;
    for (const auto& k : universe) {
        if (pattern.matches(k)) {
            matched.push_back(k);
        }
    }
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
    return identity(matched, s);
}

/// Element-wise addition: union of coordinates, overlaps combined with add.
inline AssociativeArray ewise_add(const AssociativeArray& a, const AssociativeArray& b) {
    detail::require_same_semiring(a, b, "ewise_add");
    const Semiring& s = a.semiring();
    AssociativeArray::Builder out(s);
    out.reserve(a.row_count() + b.row_count(), a.nnz() + b.nnz());

    const auto copy_row = [&](const AssociativeArray& x, std::size_t i) {
        out.begin_row(x.row_key(i));
        auto cs = x.row_cols(i);
        auto vs = x.row_vals(i);
        for (std::size_t e = 0; e < cs.size(); ++e) {
            out.push_col(cs[e], vs[e]);
        }
    };

    std::size_t i = 0, j = 0;
    while (i < a.row_count() || j < b.row_count()) {
        if (j == b.row_count() || (i < a.row_count() && a.row_key(i) < b.row_key(j))) {
            copy_row(a, i++);
        } else if (i == a.row_count() || b.row_key(j) < a.row_key(i)) {
            copy_row(b, j++);
        } else {
            out.begin_row(a.row_key(i));
            auto ac = a.row_cols(i);
            auto av = a.row_vals(i);
            auto bc = b.row_cols(j);
            auto bv = b.row_vals(j);
            std::size_t p = 0, q = 0;
            while (p < ac.size() || q < bc.size()) {
                if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
                    out.push_col(ac[p], av[p]);
                    ++p;
                } else if (p == ac.size() || bc[q] < ac[p]) {
                    out.push_col(bc[q], bv[q]);
                    ++q;
                } else {
                    out.push_col(ac[p], s.add(av[p], bv[q]));
                    ++p;
                    ++q;
                }
            }
            ++i;
            ++j;
        }
    }
    return std::move(out).finish();
}

/// Element-wise multiplication: intersection of coordinates combined with mult.
inline AssociativeArray ewise_mult(const AssociativeArray& a, const AssociativeArray& b) {
    detail::require_same_semiring(a, b, "ewise_mult");
    const Semiring& s = a.semiring();
    AssociativeArray::Builder out(s);
    std::size_t i = 0, j = 0;
    while (i < a.row_count() && j < b.row_count()) {
        if (a.row_key(i) < b.row_key(j)) {
            ++i;
        } else if (b.row_key(j) < a.row_key(i)) {
            ++j;
        } else {
            out.begin_row(a.row_key(i));
            auto ac = a.row_cols(i);
            auto av = a.row_vals(i);
            auto bc = b.row_cols(j);
            auto bv = b.row_vals(j);
            std::size_t p = 0, q = 0;
            while (p < ac.size() && q < bc.size()) {
                if (ac[p] < bc[q]) {
                    ++p;
                } else if (bc[q] < ac[p]) {
                    ++q;
                } else {
                    out.push_col(ac[p], s.mult(av[p], bv[q]));
                    ++p;
                    ++q;
                }
            }
            ++i;
            ++j;
        }
    }
    return std::move(out).finish();
}

/**
 * @brief Array multiplication C(i,j) = add over k of A(i,k) mult B(k,j).
 *
 * Contraction runs over keys present in both A's columns and B's rows.
 * Rows of A with a single entry stream the matching row of B directly;
 * other rows gather products, order them by column (stable, so partial
 * sums accumulate in increasing k), and fold duplicates with add.
 */
inline AssociativeArray array_mult(const AssociativeArray& a, const AssociativeArray& b) {
    detail::require_same_semiring(a, b, "array_mult");
    const Semiring& s = a.semiring();
    AssociativeArray::Builder out(s);
    out.reserve(a.row_count(), a.nnz());

    std::vector<std::pair<const Key*, Value>> products;
    for (std::size_t i = 0; i < a.row_count(); ++i) {
        auto ac = a.row_cols(i);
        auto av = a.row_vals(i);
        if (ac.size() == 1) {
            auto k = b.find_row(ac[0]);
            if (!k) {
                continue;
            }
            out.begin_row(a.row_key(i));
            auto bc = b.row_cols(*k);
            auto bv = b.row_vals(*k);
            for (std::size_t e = 0; e < bc.size(); ++e) {
                out.push_col(bc[e], s.mult(av[0], bv[e]));
            }
            continue;
        }

        products.clear();
        for (std::size_t p = 0; p < ac.size(); ++p) {
            auto k = b.find_row(ac[p]);
            if (!k) {
                continue;
            }
            auto bc = b.row_cols(*k);
            auto bv = b.row_vals(*k);
            for (std::size_t e = 0; e < bc.size(); ++e) {
                products.emplace_back(&bc[e], s.mult(av[p], bv[e]));
            }
        }
        if (products.empty()) {
            continue;
        }
        std::stable_sort(products.begin(), products.end(),
                         [](const auto& x, const auto& y) { return *x.first < *y.first; });
        out.begin_row(a.row_key(i));
        for (std::size_t p = 0; p < products.size();) {
            Value acc = std::move(products[p].second);
            std::size_t q = p + 1;
            for (; q < products.size() && *products[q].first == *products[p].first; ++q) {
                acc = s.add(acc, products[q].second);
            }
            out.push_col(*products[p].first, std::move(acc));
            p = q;
        }
    }
    return std::move(out).finish();
}

inline AssociativeArray transpose(const AssociativeArray& a) {
    std::vector<std::size_t> row_of(a.nnz());
    std::vector<const Key*> col_of(a.nnz());
    std::vector<const Value*> val_of(a.nnz());
    std::size_t e = 0;
    for (std::size_t i = 0; i < a.row_count(); ++i) {
        auto cs = a.row_cols(i);
        auto vs = a.row_vals(i);
        for (std::size_t p = 0; p < cs.size(); ++p, ++e) {
            row_of[e] = i;
            col_of[e] = &cs[p];
            val_of[e] = &vs[p];
        }
    }
    std::vector<std::size_t> order(a.nnz());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Entries are already row-major, so a stable sort on the column alone
    // yields (column, row) order.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return *col_of[x] < *col_of[y]; });

    AssociativeArray::Builder out(a.semiring());
    out.reserve(a.nnz(), a.nnz());
    const Key* current = nullptr;
    for (std::size_t x : order) {
        if (current == nullptr || *current != *col_of[x]) {
            out.begin_row(*col_of[x]);
            current = col_of[x];
        }
        out.push_col(a.row_key(row_of[x]), *val_of[x]);
    }
    return std::move(out).finish();
}

/// Structural removal: A without every coordinate stored in B, whatever B's values.
inline AssociativeArray remove(const AssociativeArray& a, const AssociativeArray& b) {
    detail::require_same_semiring(a, b, "remove");
    AssociativeArray::Builder out(a.semiring());
    out.reserve(a.row_count(), a.nnz());
    for (std::size_t i = 0; i < a.row_count(); ++i) {
        auto ac = a.row_cols(i);
        auto av = a.row_vals(i);
        auto k = b.find_row(a.row_key(i));
        out.begin_row(a.row_key(i));
        if (!k) {
            for (std::size_t p = 0; p < ac.size(); ++p) {
                out.push_col(ac[p], av[p]);
            }
            continue;
        }
        auto bc = b.row_cols(*k);
        std::size_t q = 0;
        for (std::size_t p = 0; p < ac.size(); ++p) {
            while (q < bc.size() && bc[q] < ac[p]) {
                ++q;
            }
            if (q < bc.size() && bc[q] == ac[p]) {
                continue;
            }
            out.push_col(ac[p], av[p]);
        }
    }
    return std::move(out).finish();
}

/// Applies `f(row, col, value)` to every entry; zero results are dropped.
template <class F>
AssociativeArray transform(const AssociativeArray& a, F&& f) {
    AssociativeArray::Builder out(a.semiring());
    out.reserve(a.row_count(), a.nnz());
    for (std::size_t i = 0; i < a.row_count(); ++i) {
        auto cs = a.row_cols(i);
        auto vs = a.row_vals(i);
        out.begin_row(a.row_key(i));
        for (std::size_t p = 0; p < cs.size(); ++p) {
            Value v = f(a.row_key(i), cs[p], vs[p]);
            a.semiring().require_domain(v);
            out.push_col(cs[p], std::move(v));
        }
    }
    return std::move(out).finish();
}

/// I(rows matching) * A * I(cols matching).
inline AssociativeArray select(const AssociativeArray& a, const KeyPattern& rows, const KeyPattern& cols) {
    const auto rk = row_keys(a);
    const auto ck = col_keys(a);
    return array_mult(array_mult(selector(rows, rk, a.semiring()), a), selector(cols, ck, a.semiring()));
}

/// Relative tolerance applied by equals() when doubles are involved.
inline constexpr double equals_float_tolerance = 1e-12;

/// Same semiring, same coordinates, equal values (1e-12 relative for doubles).
inline bool equals(const AssociativeArray& a, const AssociativeArray& b) {
    if (!(a.semiring() == b.semiring()) || a.nnz() != b.nnz() || a.row_count() != b.row_count()) {
        return false;
    }
    for (std::size_t i = 0; i < a.row_count(); ++i) {
        if (a.row_key(i) != b.row_key(i)) {
            return false;
        }
        auto ac = a.row_cols(i);
        auto bc = b.row_cols(i);
        if (!std::equal(ac.begin(), ac.end(), bc.begin(), bc.end())) {
            return false;
        }
        auto av = a.row_vals(i);
        auto bv = b.row_vals(i);
        for (std::size_t p = 0; p < av.size(); ++p) {
            if (!values_close(av[p], bv[p], equals_float_tolerance)) {
                return false;
            }
        }
    }
    return true;
}

} // namespace rosa
