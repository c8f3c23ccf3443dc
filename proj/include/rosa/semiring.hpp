#pragma once

#include "rosa/error.hpp"
#include "rosa/value.hpp"

#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rosa {

/**
 * @brief Value algebra (add, mult, zero, one) over a restricted value domain.
 *
 * Semirings are immutable, cheap to copy handles. Two handles compare equal
 * when they carry the same name and, for set semirings, the same universe.
 */
class Semiring {
public:
    using BinaryOp = std::function<Value(const Value&, const Value&)>;
    using DomainCheck = std::function<bool(const Value&)>;

    /// Builds an arbitrary algebra. Used for presets and for law-checker tests.
    static Semiring custom(std::string name, ValueKind kind, Value zero, Value one, BinaryOp add,
                           BinaryOp mult, DomainCheck in_domain, ValueSet universe = {}) {
        auto d = std::make_shared<Descriptor>();
        d->name = std::move(name);
        d->kind = kind;
        d->zero = std::move(zero);
        d->one = std::move(one);
        d->add = std::move(add);
        d->mult = std::move(mult);
        d->in_domain = std::move(in_domain);
        d->universe = std::move(universe);
        return Semiring(std::move(d));
    }

    const std::string& name() const noexcept { return d_->name; }
    ValueKind kind() const noexcept { return d_->kind; }
    const Value& zero() const noexcept { return d_->zero; }
    const Value& one() const noexcept { return d_->one; }
    const ValueSet& universe() const noexcept { return d_->universe; }

    Value add(const Value& a, const Value& b) const { return d_->add(a, b); }
    Value mult(const Value& a, const Value& b) const { return d_->mult(a, b); }

    bool is_zero(const Value& v) const { return values_equal(v, d_->zero); }
    bool in_domain(const Value& v) const { return d_->in_domain(v); }

    void require_domain(const Value& v) const {
        if (!in_domain(v)) {
            throw DomainError("value '" + to_string(v) + "' is outside the domain of " + name());
        }
    }

    friend bool operator==(const Semiring& a, const Semiring& b) {
        return a.d_ == b.d_ || (a.d_->name == b.d_->name && a.d_->universe == b.d_->universe);
    }

private:
    struct Descriptor {
        std::string name;
        ValueKind kind = ValueKind::number;
        Value zero;
        Value one;
        BinaryOp add;
        BinaryOp mult;
        DomainCheck in_domain;
        ValueSet universe;
    };

    explicit Semiring(std::shared_ptr<const Descriptor> d) : d_(std::move(d)) {}

    std::shared_ptr<const Descriptor> d_;
};

namespace detail {

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline Value num_add(const Value& a, const Value& b) {
    if (a.index() == 0 && b.index() == 0) {
        std::int64_t r = 0;
        if (!__builtin_add_overflow(std::get<std::int64_t>(a), std::get<std::int64_t>(b), &r)) {
            return r;
        }
    }
    return as_double(a) + as_double(b);
}

inline Value num_mult(const Value& a, const Value& b) {
    if (a.index() == 0 && b.index() == 0) {
        std::int64_t r = 0;
        if (!__builtin_mul_overflow(std::get<std::int64_t>(a), std::get<std::int64_t>(b), &r)) {
            return r;
        }
    }
    return as_double(a) * as_double(b);
}

inline Value num_max(const Value& a, const Value& b) { return compare_values(a, b) < 0 ? b : a; }
inline Value num_min(const Value& a, const Value& b) { return compare_values(b, a) < 0 ? b : a; }

} // namespace detail

/// Identifiers accepted by preset().
inline constexpr std::array<std::string_view, 8> preset_names = {
    "plus.times", "union.intersection", "max.plus", "min.plus",
    "max.times",  "min.times",          "max.min",  "min.max",
};

/**
 * @brief Looks up one of the eight built-in semirings.
 *
 * union.intersection needs the finite universe that serves as its
 * multiplicative identity; the other presets ignore `universe`.
 *
 * Domains: plus.times, max.plus, min.plus, max.min and min.max take finite
 * numbers; max.times takes nonnegative numbers; min.times takes positive
 * numbers. The zero and one sentinels are always members.
 */
inline Semiring preset(std::string_view name, ValueSet universe = {}) {
    using detail::inf;
    const auto finite_or = [](Value a, Value b) {
        return [a = std::move(a), b = std::move(b)](const Value& v) {
            return is_finite_number(v) || (is_number(v) && (values_equal(v, a) || values_equal(v, b)));
        };
    };

    if (name == "plus.times") {
        return Semiring::custom("plus.times", ValueKind::number, std::int64_t{0}, std::int64_t{1},
                                detail::num_add, detail::num_mult,
                                [](const Value& v) { return is_finite_number(v); });
    }
    if (name == "max.plus") {
        return Semiring::custom("max.plus", ValueKind::number, -inf, std::int64_t{0}, detail::num_max,
                                detail::num_add, finite_or(-inf, -inf));
    }
    if (name == "min.plus") {
        return Semiring::custom("min.plus", ValueKind::number, inf, std::int64_t{0}, detail::num_min,
                                detail::num_add, finite_or(inf, inf));
    }
    if (name == "max.times") {
        return Semiring::custom("max.times", ValueKind::number, std::int64_t{0}, std::int64_t{1},
                                detail::num_max, detail::num_mult, [](const Value& v) {
                                    return is_finite_number(v) && as_double(v) >= 0;
                                });
    }
    if (name == "min.times") {
        return Semiring::custom("min.times", ValueKind::number, inf, std::int64_t{1}, detail::num_min,
                                detail::num_mult, [](const Value& v) {
                                    return is_number(v) && (as_double(v) == inf ||
                                                            (is_finite_number(v) && as_double(v) > 0));
                                });
    }
    if (name == "max.min") {
        return Semiring::custom("max.min", ValueKind::number, -inf, inf, detail::num_max, detail::num_min,
                                finite_or(-inf, inf));
    }
    if (name == "min.max") {
        return Semiring::custom("min.max", ValueKind::number, inf, -inf, detail::num_min, detail::num_max,
                                finite_or(inf, -inf));
    }
    if (name == "union.intersection") {
        ValueSet u = universe;
        return Semiring::custom(
            "union.intersection", ValueKind::set, ValueSet{}, std::move(universe),
            [](const Value& a, const Value& b) -> Value {
                return set_union(std::get<ValueSet>(a), std::get<ValueSet>(b));
            },
            [](const Value& a, const Value& b) -> Value {
                return set_intersection(std::get<ValueSet>(a), std::get<ValueSet>(b));
            },
            [u](const Value& v) {
                const auto* s = std::get_if<ValueSet>(&v);
                return s != nullptr && s->is_subset_of(u);
            },
            u);
    }
    throw UnsupportedSemiringError("unsupported semiring '" + std::string(name) + "'");
}

inline Semiring plus_times() { return preset("plus.times"); }

/// Triple of sample values fed to check_laws().
struct Sample {
    Value x;
    Value y;
    Value z;
};

struct LawResult {
    std::string law;
    bool passed = true;
    std::size_t checked = 0;
    std::optional<std::string> counterexample;
};

struct LawReport {
    std::string semiring;
    std::vector<LawResult> laws;

    bool all_passed() const {
        return std::all_of(laws.begin(), laws.end(), [](const LawResult& l) { return l.passed; });
    }

    const LawResult* find(std::string_view law) const {
        for (const auto& l : laws) {
            if (l.law == law) {
                return &l;
            }
        }
        return nullptr;
    }
};

/// Relative tolerance used by check_laws() whenever a double is involved.
inline constexpr double law_float_tolerance = 1e-9;

/**
 * @brief Checks the semiring axioms on every sample triple.
 *
 * Laws: add commutativity and associativity, mult associativity, left
 * distributivity, additive identity, multiplicative identity, annihilator.
 * Comparisons are exact except when doubles are involved, which use a
 * relative tolerance of 1e-9. Each law records its first counterexample.
 *
 * @throws DomainError if any sample value lies outside the semiring domain.
 */
inline LawReport check_laws(const Semiring& s, std::span<const Sample> samples) {
    for (const auto& t : samples) {
        s.require_domain(t.x);
        s.require_domain(t.y);
        s.require_domain(t.z);
    }

    struct Law {
        const char* name;
        std::function<std::pair<Value, Value>(const Sample&)> sides;
    };
    const Law laws[] = {
        {"add_commutative", [&](const Sample& t) { return std::pair{s.add(t.x, t.y), s.add(t.y, t.x)}; }},
        {"add_associative",
         [&](const Sample& t) {
             return std::pair{s.add(s.add(t.x, t.y), t.z), s.add(t.x, s.add(t.y, t.z))};
         }},
        {"mult_associative",
         [&](const Sample& t) {
             return std::pair{s.mult(s.mult(t.x, t.y), t.z), s.mult(t.x, s.mult(t.y, t.z))};
         }},
        {"distributive",
         [&](const Sample& t) {
             return std::pair{s.mult(t.x, s.add(t.y, t.z)), s.add(s.mult(t.x, t.y), s.mult(t.x, t.z))};
         }},
        {"add_identity", [&](const Sample& t) { return std::pair{s.add(t.x, s.zero()), t.x}; }},
        {"mult_identity", [&](const Sample& t) { return std::pair{s.mult(t.x, s.one()), t.x}; }},
        {"annihilator", [&](const Sample& t) { return std::pair{s.mult(t.x, s.zero()), s.zero()}; }},
    };

    LawReport report{s.name(), {}};
    for (const auto& law : laws) {
        LawResult r{law.name, true, 0, std::nullopt};
        for (const auto& t : samples) {
            auto [lhs, rhs] = law.sides(t);
            ++r.checked;
            if (!values_close(lhs, rhs, law_float_tolerance)) {
                r.passed = false;
                r.counterexample = "x=" + to_string(t.x) + " y=" + to_string(t.y) + " z=" + to_string(t.z) +
                                   ": " + to_string(lhs) + " != " + to_string(rhs);
                break;
            }
        }
        report.laws.push_back(std::move(r));
    }
    return report;
}

} // namespace rosa
