#pragma once

// Fragmentation schema derivation. Three strategies over one bound workload:
//   KM — k-means predicate clusters, one fragment per cluster (k fragments).
//   PC — predicate construction: per-dimension minterms, combined across the
//        dimension sets that queries actually use.
//   AB — affinity-based grouping by greedy cycle growth over the predicate
//        affinity matrix.
// Every schema ends with one ELSE fragment that owns whatever no other
// fragment claims; for PC the minterms are already complete, so its ELSE is
// flagged empty.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xfrag/clustering.hpp"
#include "xfrag/sat.hpp"
#include "xfrag/workload.hpp"
#include "xfrag/xml.hpp"

namespace xfrag {

struct PredicateRef {
    std::string predicate_id;
    bool negated = false;
    bool operator==(const PredicateRef&) const = default;
};

struct FragmentDef {
    std::string id;
    bool is_else = false;
    // dimension id -> conjunctive predicate list; dimensions ordered by first
    // predicate appearance inside the fragment.
    std::vector<std::pair<std::string, std::vector<PredicateRef>>> dimensions;

    std::size_t predicate_count() const {
        std::size_t n = 0;
        for (const auto& [dim, refs] : dimensions) n += refs.size();
        return n;
    }
    bool operator==(const FragmentDef&) const = default;
};

enum class Strategy { KM, PC, AB };

inline std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::KM: return "km";
        case Strategy::PC: return "pc";
        case Strategy::AB: return "ab";
    }
    return "km";
}

inline Strategy strategy_from_string(const std::string& s) {
    if (s == "km") return Strategy::KM;
    if (s == "pc") return Strategy::PC;
    if (s == "ab") return Strategy::AB;
    throw ParamError("unknown strategy '" + s + "' (expected km, pc or ab)");
}

struct FragSchema {
    Strategy strategy = Strategy::KM;
    std::size_t k = 0;            // KM cluster count (informational otherwise)
    bool else_empty = false;      // ELSE provably covers nothing (PC)
    std::vector<FragmentDef> fragments;  // ELSE last

    const FragmentDef& else_fragment() const {
        if (fragments.empty() || !fragments.back().is_else)
            throw IntegrityError("schema has no ELSE fragment");
        return fragments.back();
    }
    std::size_t fragment_count() const { return fragments.size(); }
    bool operator==(const FragSchema&) const = default;
};

namespace detail {

/// Bucket predicate ids (kept in the given order) under their dimensions,
/// dimensions ordered by first appearance.
inline FragmentDef make_fragment(const Workload& wl, std::string id,
                                 const std::vector<PredicateRef>& refs) {
    FragmentDef frag;
    frag.id = std::move(id);
    for (const auto& ref : refs) {
        const Predicate& p = wl.predicate(ref.predicate_id);
        auto it = std::find_if(frag.dimensions.begin(), frag.dimensions.end(),
                               [&](const auto& e) { return e.first == p.dimension_id; });
        if (it == frag.dimensions.end()) {
            frag.dimensions.emplace_back(p.dimension_id, std::vector<PredicateRef>{ref});
        } else {
            it->second.push_back(ref);
        }
    }
    return frag;
}

inline FragmentDef make_else(std::string id) {
    FragmentDef frag;
    frag.id = std::move(id);
    frag.is_else = true;
    return frag;
}

inline std::vector<PredicateRef> positive_refs(const std::vector<std::string>& ids) {
    std::vector<PredicateRef> refs;
    for (const auto& id : ids) refs.push_back(PredicateRef{id, false});
    return refs;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// KM
// ---------------------------------------------------------------------------

inline FragSchema km_schema_from_clusters(const Workload& wl, const Clustering& clustering) {
    FragSchema schema;
    schema.strategy = Strategy::KM;
    schema.k = clustering.clusters.size();
    std::size_t next = 1;
    for (const auto& cluster : clustering.clusters)
        schema.fragments.push_back(detail::make_fragment(
            wl, "f" + std::to_string(next++), detail::positive_refs(cluster)));
    schema.fragments.push_back(detail::make_else("f" + std::to_string(next)));
    return schema;
}

inline FragSchema km_schema(const QpMatrix& qp, const Workload& wl, std::size_t k,
                            std::uint64_t seed) {
    return km_schema_from_clusters(wl, kmeans(qp_columns(qp), k, seed));
}

// ---------------------------------------------------------------------------
// PC
// ---------------------------------------------------------------------------

inline constexpr std::size_t kPcPredicateLimit = 20;

/// All satisfiable sign assignments over the given predicates, all-positive
/// first, all-negated last.
inline std::vector<std::vector<PredicateRef>> enumerate_minterms(
    const Workload& wl, const std::vector<std::string>& predicate_ids) {
    std::vector<std::vector<PredicateRef>> out;
    std::vector<PredicateRef> current;
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == predicate_ids.size()) {
            LiteralList lits;
            for (const auto& ref : current)
                lits.push_back(Literal{&wl.predicate(ref.predicate_id), ref.negated});
            if (satisfiable(lits)) out.push_back(current);
            return;
        }
        current.push_back(PredicateRef{predicate_ids[i], false});
        self(self, i + 1);
        current.back().negated = true;
        self(self, i + 1);
        current.pop_back();
    };
    rec(rec, 0);
    return out;
}

inline FragSchema pc_schema(const Workload& wl) {
    if (!wl.bound) throw ParamError("pc_schema needs a bound workload");
    if (wl.predicates.size() > kPcPredicateLimit)
        throw ParamError("predicate construction is exponential; refusing |P| = " +
                         std::to_string(wl.predicates.size()) + " > " +
                         std::to_string(kPcPredicateLimit));

    // Per-dimension predicate lists, dimensions in sorted order.
    std::map<std::string, std::vector<std::string>> by_dim;
    for (const auto& p : wl.predicates) by_dim[p.dimension_id].push_back(p.id);

    std::map<std::string, std::vector<std::vector<PredicateRef>>> minterms;
    for (const auto& [dim, preds] : by_dim) minterms[dim] = enumerate_minterms(wl, preds);

    // Dimension sets actually used by queries (dimensions with predicates).
    std::set<std::vector<std::string>> used_sets;
    for (const auto& q : wl.queries) {
        std::set<std::string> dims;
        for (const auto& pid : q.predicate_ids) dims.insert(wl.predicate(pid).dimension_id);
        if (!dims.empty()) used_sets.insert(std::vector<std::string>(dims.begin(), dims.end()));
    }
    std::vector<std::vector<std::string>> sets(used_sets.begin(), used_sets.end());
    std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });

    FragSchema schema;
    schema.strategy = Strategy::PC;
    schema.else_empty = !sets.empty();
    std::size_t next = 1;
    for (const auto& set : sets) {
        // Cross product of the per-dimension minterm lists of this set.
        std::vector<std::size_t> idx(set.size(), 0);
        bool done = false;
        while (!done) {
            std::vector<PredicateRef> refs;
            for (std::size_t d = 0; d < set.size(); ++d)
                for (const auto& ref : minterms[set[d]][idx[d]]) refs.push_back(ref);
            schema.fragments.push_back(
                detail::make_fragment(wl, "f" + std::to_string(next++), refs));
            std::size_t d = set.size();
            while (true) {
                if (d == 0) {
                    done = true;
                    break;
                }
                --d;
                if (++idx[d] < minterms[set[d]].size()) break;
                idx[d] = 0;
            }
        }
    }
    schema.fragments.push_back(detail::make_else("f" + std::to_string(next)));
    return schema;
}

// ---------------------------------------------------------------------------
// AB
// ---------------------------------------------------------------------------

struct AffinityMatrix {
    std::vector<std::string> predicates;
    std::vector<std::vector<long long>> aff;  // symmetric; diagonal = usage frequency

    long long at(std::size_t i, std::size_t j) const { return aff[i][j]; }
};

/// aff[p][q] = summed frequency of the queries that use both p and q; the
/// diagonal holds each predicate's own usage frequency.
inline AffinityMatrix build_affinity_matrix(const Workload& wl) {
    AffinityMatrix m;
    for (const auto& p : wl.predicates) m.predicates.push_back(p.id);
    const std::size_t n = m.predicates.size();
    m.aff.assign(n, std::vector<long long>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            long long sum = 0;
            for (const auto& q : wl.queries)
                if (q.uses(m.predicates[i]) && q.uses(m.predicates[j])) sum += q.frequency;
            m.aff[i][j] = sum;
        }
    return m;
}

/// Greedy cycle growth: repeatedly take the highest-affinity edge between
/// ungrouped predicates, then extend the group while some edge from it to an
/// ungrouped predicate has affinity at least the minimum affinity accepted
/// into the group so far. Leftovers become singleton groups.
inline std::vector<std::vector<std::string>> affinity_groups(const AffinityMatrix& m) {
    const std::size_t n = m.predicates.size();
    std::vector<bool> grouped(n, false);
    std::vector<std::vector<std::string>> groups;

    while (true) {
        long long best = 0;
        std::size_t bi = n, bj = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (grouped[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (grouped[j]) continue;
                if (m.aff[i][j] > best) {
                    best = m.aff[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi == n) break;  // no positive edge left
        std::vector<std::size_t> group = {bi, bj};
        grouped[bi] = grouped[bj] = true;
        long long min_aff = best;
        while (true) {
            long long cand_best = 0;
            std::size_t cand = n;
            for (std::size_t g : group)
                for (std::size_t j = 0; j < n; ++j) {
                    if (grouped[j]) continue;
                    if (m.aff[g][j] > cand_best) {
                        cand_best = m.aff[g][j];
                        cand = j;
                    }
                }
            if (cand == n || cand_best < min_aff) break;
            group.push_back(cand);
            grouped[cand] = true;
            min_aff = std::min(min_aff, cand_best);
        }
        std::vector<std::string> ids;
        for (std::size_t g : group) ids.push_back(m.predicates[g]);
        std::sort(ids.begin(), ids.end(),
                  [](const auto& a, const auto& b) { return natural_less(a, b); });
        groups.push_back(std::move(ids));
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!grouped[i]) groups.push_back({m.predicates[i]});
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return natural_less(a.front(), b.front()); });
    return groups;
}

inline FragSchema ab_schema(const Workload& wl) {
    if (!wl.bound) throw ParamError("ab_schema needs a bound workload");
    AffinityMatrix m = build_affinity_matrix(wl);
    FragSchema schema;
    schema.strategy = Strategy::AB;
    std::size_t next = 1;
    for (const auto& group : affinity_groups(m))
        schema.fragments.push_back(detail::make_fragment(wl, "f" + std::to_string(next++),
                                                         detail::positive_refs(group)));
    schema.fragments.push_back(detail::make_else("f" + std::to_string(next)));
    return schema;
}

// ---------------------------------------------------------------------------
// Schema document
// ---------------------------------------------------------------------------

inline XmlElem schema_to_xml(const FragSchema& schema) {
    XmlElem root;
    root.name = "Schema";
    for (const auto& frag : schema.fragments) {
        XmlElem& fe = root.add("fragment");
        fe.set("id", frag.id);
        if (frag.is_else) {
            fe.set("else", "true");
            if (schema.else_empty) fe.set("empty", "true");
        }
        for (const auto& [dim, refs] : frag.dimensions) {
            XmlElem& de = fe.add("dimension");
            de.set("name", dim);
            for (const auto& ref : refs) {
                XmlElem& pe = de.add("predicate");
                pe.set("name", ref.predicate_id);
                if (ref.negated) pe.set("negated", "true");
            }
        }
    }
    return root;
}

inline FragSchema schema_from_xml(const XmlElem& root) {
    if (root.name != "Schema")
        throw ParseError("frag-schema", root.line, root.col,
                         "expected root <Schema>, found <" + root.name + ">");
    FragSchema schema;
    schema.strategy = strategy_from_string(root.attr_or("strategy", "km"));
    for (const auto& fe : root.children) {
        if (fe.name != "fragment")
            throw ParseError("frag-schema", fe.line, fe.col,
                             "unexpected <" + fe.name + "> inside <Schema>");
        FragmentDef frag;
        frag.id = fe.attr("id");
        frag.is_else = fe.attr_or("else") == "true";
        if (frag.is_else && fe.attr_or("empty") == "true") schema.else_empty = true;
        for (const auto& de : fe.children) {
            if (de.name != "dimension")
                throw ParseError("frag-schema", de.line, de.col,
                                 "unexpected <" + de.name + "> inside <fragment>");
            std::vector<PredicateRef> refs;
            for (const auto& pe : de.children) {
                if (pe.name != "predicate")
                    throw ParseError("frag-schema", pe.line, pe.col,
                                     "unexpected <" + pe.name + "> inside <dimension>");
                refs.push_back(PredicateRef{pe.attr("name"), pe.attr_or("negated") == "true"});
            }
            frag.dimensions.emplace_back(de.attr("name"), std::move(refs));
        }
        schema.fragments.push_back(std::move(frag));
    }
    if (schema.fragments.empty() || !schema.fragments.back().is_else)
        throw IntegrityError("fragmentation schema must end with an ELSE fragment");
    std::size_t non_else = 0;
    for (const auto& f : schema.fragments) non_else += f.is_else ? 0 : 1;
    schema.k = non_else;
    return schema;
}

}  // namespace xfrag
