#pragma once

// Satisfiability of conjunctions of (possibly negated) unary selection
// predicates, decided per attribute: interval plus exclusion-set reasoning
// for numeric attributes, equality/exclusion sets with lexicographic order
// for strings. String interval interiors are treated as inhabited, which can
// only over-approximate satisfiability; routing and minterm pruning stay
// sound. Cross-attribute interactions are independent, which is exact for
// conjunctions of unary predicates.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xfrag/workload.hpp"

namespace xfrag {

struct Literal {
    const Predicate* predicate = nullptr;
    bool negated = false;
};

using LiteralList = std::vector<Literal>;

namespace detail {

struct NumericState {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_strict = false;
    bool hi_strict = false;
    std::set<double> excluded;
    bool contradiction = false;

    void add(CompareOp op, double v) {
        switch (op) {
            case CompareOp::Eq:
                add(CompareOp::Ge, v);
                add(CompareOp::Le, v);
                break;
            case CompareOp::Ne: excluded.insert(v); break;
            case CompareOp::Lt:
                if (v < hi || (v == hi && !hi_strict)) {
                    hi = v;
                    hi_strict = true;
                }
                break;
            case CompareOp::Le:
                if (v < hi) {
                    hi = v;
                    hi_strict = false;
                }
                break;
            case CompareOp::Gt:
                if (v > lo || (v == lo && !lo_strict)) {
                    lo = v;
                    lo_strict = true;
                }
                break;
            case CompareOp::Ge:
                if (v > lo) {
                    lo = v;
                    lo_strict = false;
                }
                break;
        }
    }

    bool satisfiable_integer() const {
        if (contradiction) return false;
        double lo_eff = lo, hi_eff = hi;
        long long L, H;
        if (std::isinf(lo_eff) || std::isinf(hi_eff)) {
            // One side unbounded: finitely many exclusions never exhaust it.
            if (std::isinf(lo_eff) && std::isinf(hi_eff)) return true;
            if (std::isinf(lo_eff)) {
                H = static_cast<long long>(std::floor(hi_eff));
                if (hi_strict && std::floor(hi_eff) == hi_eff) --H;
                (void)H;
            }
            return true;
        }
        L = static_cast<long long>(std::ceil(lo_eff));
        if (lo_strict && std::ceil(lo_eff) == lo_eff) ++L;
        H = static_cast<long long>(std::floor(hi_eff));
        if (hi_strict && std::floor(hi_eff) == hi_eff) --H;
        if (L > H) return false;
        // Enough integers to outnumber the exclusions?
        if (static_cast<unsigned long long>(H - L) >= excluded.size()) return true;
        for (long long v = L; v <= H; ++v)
            if (!excluded.count(static_cast<double>(v))) return true;
        return false;
    }

    bool satisfiable_decimal() const {
        if (contradiction) return false;
        if (lo > hi) return false;
        if (lo == hi) {
            if (lo_strict || hi_strict) return false;
            return !excluded.count(lo);
        }
        return true;  // dense interior
    }
};

struct StringState {
    std::optional<std::string> eq;
    std::set<std::string> excluded;
    std::optional<std::pair<std::string, bool>> lower;  // (bound, strict)
    std::optional<std::pair<std::string, bool>> upper;
    bool contradiction = false;

    void add(CompareOp op, const std::string& v) {
        switch (op) {
            case CompareOp::Eq:
                if (eq && *eq != v) contradiction = true;
                eq = v;
                break;
            case CompareOp::Ne: excluded.insert(v); break;
            case CompareOp::Lt: tighten_upper(v, true); break;
            case CompareOp::Le: tighten_upper(v, false); break;
            case CompareOp::Gt: tighten_lower(v, true); break;
            case CompareOp::Ge: tighten_lower(v, false); break;
        }
    }

    void tighten_upper(const std::string& v, bool strict) {
        if (!upper || v < upper->first || (v == upper->first && strict))
            upper = std::make_pair(v, strict);
    }

    void tighten_lower(const std::string& v, bool strict) {
        if (!lower || v > lower->first || (v == lower->first && strict))
            lower = std::make_pair(v, strict);
    }

    bool satisfiable() const {
        if (contradiction) return false;
        if (eq) {
            if (excluded.count(*eq)) return false;
            if (lower && (*eq < lower->first || (*eq == lower->first && lower->second)))
                return false;
            if (upper && (*eq > upper->first || (*eq == upper->first && upper->second)))
                return false;
            return true;
        }
        if (lower && upper) {
            if (lower->first > upper->first) return false;
            if (lower->first == upper->first) {
                if (lower->second || upper->second) return false;
                return !excluded.count(lower->first);
            }
        }
        // Unbounded or open interval of strings: treated as inhabited beyond
        // any finite exclusion set.
        return true;
    }
};

struct AttributeState {
    AttrType type = AttrType::String;
    bool has_type = false;
    NumericState num;
    StringState str;

    void add(const Predicate& p, bool negated) {
        if (!has_type) {
            type = p.literal.type;
            has_type = true;
        } else if (type != p.literal.type) {
            throw TypeError("attribute '" + p.dimension_id + "." + p.attribute +
                            "' is constrained with both " + to_string(type) + " and " +
                            to_string(p.literal.type) + " literals");
        }
        CompareOp op = negated ? negate_op(p.op) : p.op;
        if (type == AttrType::String)
            str.add(op, p.literal.text);
        else
            num.add(op, p.literal.num);
    }

    bool satisfiable() const {
        if (!has_type) return true;
        switch (type) {
            case AttrType::String: return str.satisfiable();
            case AttrType::Integer: return num.satisfiable_integer();
            case AttrType::Decimal: return num.satisfiable_decimal();
        }
        return true;
    }
};

}  // namespace detail

/// Decides whether a conjunction of (possibly negated) bound predicates can
/// be satisfied by some assignment of attribute values.
inline bool satisfiable(const LiteralList& conjunction) {
    std::map<std::pair<std::string_view, std::string_view>, detail::AttributeState> states;
    for (const Literal& lit : conjunction) {
        const Predicate& p = *lit.predicate;
        states[{p.dimension_id, p.attribute}].add(p, lit.negated);
    }
    for (const auto& [key, st] : states)
        if (!st.satisfiable()) return false;
    return true;
}

inline bool satisfiable_with(const LiteralList& base, const Literal& extra) {
    LiteralList all = base;
    all.push_back(extra);
    return satisfiable(all);
}

/// base implies the literal iff base together with its negation cannot hold.
inline bool implies(const LiteralList& base, const Literal& lit) {
    return !satisfiable_with(base, Literal{lit.predicate, !lit.negated});
}

/// First pair (a, b) with a from `left`, b from `right` that is jointly
/// unsatisfiable on one attribute; used for pruning proofs.
inline std::optional<std::pair<const Predicate*, const Predicate*>> contradicting_pair(
    const LiteralList& left, const LiteralList& right) {
    for (const Literal& a : left)
        for (const Literal& b : right) {
            if (a.predicate->dimension_id != b.predicate->dimension_id ||
                a.predicate->attribute != b.predicate->attribute)
                continue;
            if (!satisfiable({a, b})) return std::make_pair(a.predicate, b.predicate);
        }
    return std::nullopt;
}

/// Satisfiability of units ∧ ¬(block_1) ∧ ... ∧ ¬(block_m) where each block
/// is a conjunction of literals. Each negated block is a clause of negated
/// literals; clauses are first simplified against the units, then the
/// remaining free clauses are searched. The search carries an evaluation
/// budget; exhausting it returns true (an over-approximation, which for
/// callers means routing a fragment rather than pruning it).
inline bool cnf_satisfiable(const LiteralList& units,
                            const std::vector<const LiteralList*>& negated_blocks,
                            std::size_t budget = 200000) {
    if (!satisfiable(units)) return false;
    std::vector<const LiteralList*> free_clauses;
    for (const LiteralList* block : negated_blocks) {
        if (!satisfiable(*block)) continue;  // ¬block is a tautology
        bool dropped = false;
        bool all_implied = true;
        for (const Literal& lit : *block) {
            if (budget == 0) return true;
            --budget;
            if (!satisfiable_with(units, lit)) {
                dropped = true;  // some literal already false: clause holds
                break;
            }
            if (satisfiable_with(units, Literal{lit.predicate, !lit.negated}))
                all_implied = false;
        }
        if (dropped) continue;
        if (all_implied) return false;  // units force the whole block
        free_clauses.push_back(block);
    }
    if (free_clauses.empty()) return true;

    // Depth-first search over which literal of each remaining clause to negate.
    struct Search {
        std::size_t* budget;
        bool exhausted = false;

        bool run(LiteralList& assign, const std::vector<const LiteralList*>& clauses,
                 std::size_t idx) {
            if (idx == clauses.size()) return true;
            const LiteralList& block = *clauses[idx];
            for (const Literal& lit : block) {
                if (*budget == 0) {
                    exhausted = true;
                    return true;
                }
                --*budget;
                Literal negated{lit.predicate, !lit.negated};
                if (!satisfiable_with(assign, negated)) continue;
                assign.push_back(negated);
                bool ok = run(assign, clauses, idx + 1);
                assign.pop_back();
                if (ok) return true;
            }
            return false;
        }
    };

    LiteralList assign = units;
    Search search{&budget};
    return search.run(assign, free_clauses, 0);
}

}  // namespace xfrag
