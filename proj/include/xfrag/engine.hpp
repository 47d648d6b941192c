#pragma once

// Query routing and execution over fragmented or unfragmented warehouses,
// plus the benchmark driver that emits the CSV report series.
//
// Routing works on the schema alone: a fragment is pruned only when the
// query's predicate conjunction cannot hold together with the fragment's
// membership condition (its own conjunction and the negation of every
// earlier fragment's conjunction). The simulated distributed cost of a query
// is the maximum per-fragment cost over the fragments it accesses; the cost
// unit is scanned fact entries, with wall time recorded alongside.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "xfrag/fragmenter.hpp"
#include "xfrag/generator.hpp"
#include "xfrag/sat.hpp"
#include "xfrag/strategies.hpp"
#include "xfrag/threading.hpp"
#include "xfrag/workload.hpp"

namespace xfrag {

// ---------------------------------------------------------------------------
// Routing
// ---------------------------------------------------------------------------

struct RoutingPlan {
    std::string query_id;
    std::vector<std::string> fragment_ids;                     // schema order
    std::vector<std::pair<std::string, std::string>> pruned;   // fragment -> reason

    bool routes(std::string_view fragment_id) const {
        return std::find(fragment_ids.begin(), fragment_ids.end(), fragment_id) !=
               fragment_ids.end();
    }
};

namespace detail {

inline LiteralList query_literals(const Query& q, const Workload& wl) {
    LiteralList lits;
    for (const auto& pid : q.predicate_ids) lits.push_back(Literal{&wl.predicate(pid), false});
    return lits;
}

inline LiteralList fragment_literals(const FragmentDef& frag, const Workload& wl) {
    LiteralList lits;
    for (const auto& [dim, refs] : frag.dimensions)
        for (const auto& ref : refs)
            lits.push_back(Literal{&wl.predicate(ref.predicate_id), ref.negated});
    return lits;
}

/// Number of leading fragments after which the negated-conjunction prefix is
/// already unsatisfiable: every fragment from that index on can never claim
/// a fact. Monotone in the prefix length, hence the binary search.
inline std::size_t shadow_prefix(const std::vector<LiteralList>& conds,
                                 const std::vector<bool>& cond_sat) {
    auto prefix_reachable = [&](std::size_t end) {
        std::vector<const LiteralList*> clauses;
        for (std::size_t j = 0; j < end; ++j)
            if (cond_sat[j]) clauses.push_back(&conds[j]);
        return cnf_satisfiable({}, clauses);
    };
    if (prefix_reachable(conds.size())) return conds.size() + 1;
    std::size_t lo = 0, hi = conds.size();  // smallest end with unsat prefix
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (prefix_reachable(mid))
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace detail

/// Relevant fragments for a query: those whose membership condition is
/// co-satisfiable with the query's predicate conjunction. The ELSE fragment
/// is included unless the query's predicates force membership in some
/// preceding fragment (or the schema proves ELSE empty).
inline RoutingPlan route(const Query& query, const FragSchema& schema, const Workload& wl) {
    if (!wl.bound) throw ParamError("route needs a bound workload");
    RoutingPlan plan;
    plan.query_id = query.id;
    const LiteralList qlits = detail::query_literals(query, wl);

    const std::size_t nfrag = schema.fragments.size();
    std::vector<LiteralList> conds(nfrag);
    std::vector<bool> cond_sat(nfrag, false);
    for (std::size_t i = 0; i < nfrag; ++i) {
        conds[i] = detail::fragment_literals(schema.fragments[i], wl);
        cond_sat[i] = schema.fragments[i].is_else || satisfiable(conds[i]);
    }
    const std::size_t shadow = detail::shadow_prefix(conds, cond_sat);

    for (std::size_t i = 0; i < nfrag; ++i) {
        const FragmentDef& frag = schema.fragments[i];
        if (i >= shadow) {
            plan.pruned.emplace_back(frag.id,
                                     "unreachable: preceding fragments cover every fact");
            continue;
        }
        if (frag.is_else) {
            if (schema.else_empty) {
                plan.pruned.emplace_back(frag.id, "schema is minterm-complete, ELSE is empty");
                continue;
            }
            std::vector<const LiteralList*> clauses;
            for (std::size_t j = 0; j + 1 < nfrag; ++j)
                if (cond_sat[j]) clauses.push_back(&conds[j]);
            if (cnf_satisfiable(qlits, clauses))
                plan.fragment_ids.push_back(frag.id);
            else
                plan.pruned.emplace_back(
                    frag.id, "query predicates imply membership in a preceding fragment");
            continue;
        }
        if (!cond_sat[i]) {
            plan.pruned.emplace_back(frag.id, "fragment condition is unsatisfiable");
            continue;
        }
        LiteralList together = qlits;
        together.insert(together.end(), conds[i].begin(), conds[i].end());
        if (!satisfiable(together)) {
            std::string reason = "query contradicts the fragment condition";
            if (auto pair = contradicting_pair(qlits, conds[i]))
                reason = pair->first->id + " contradicts " + pair->second->id + " on " +
                         pair->first->dimension_id + "." + pair->first->attribute;
            plan.pruned.emplace_back(frag.id, reason);
            continue;
        }
        std::vector<const LiteralList*> clauses;
        for (std::size_t j = 0; j < i; ++j)
            if (cond_sat[j] && !schema.fragments[j].is_else) clauses.push_back(&conds[j]);
        if (!cnf_satisfiable(together, clauses)) {
            plan.pruned.emplace_back(frag.id,
                                     "matching facts are claimed by an earlier fragment");
            continue;
        }
        plan.fragment_ids.push_back(frag.id);
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct ExecRow {
    std::string query_id;
    std::size_t fragments_accessed = 0;
    std::size_t facts_scanned = 0;   // total entries touched
    std::size_t parallel_cost = 0;   // max per accessed fragment
    std::size_t sequential_cost = 0; // sum per accessed fragment
    std::size_t result_size = 0;
    double wall_ms = 0.0;
};

struct ExecResult {
    std::vector<std::size_t> fact_indices;  // positions in the original document, sorted
    ExecRow row;
};

namespace detail {

class StopWatch {
public:
    StopWatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                         start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// True when the fact satisfies every selection predicate of the query,
/// resolving dimension references through the given per-dimension indexes.
template <typename IndexOf>
inline bool fact_matches(const Fact& fact, const Query& query, const Workload& wl,
                         IndexOf&& index_of) {
    for (const auto& pid : query.predicate_ids) {
        const Predicate& p = wl.predicate(pid);
        const std::string* ref = fact.ref(p.dimension_id);
        if (!ref) return false;
        const DimensionIndex* index = index_of(p.dimension_id);
        if (!index)
            throw IntegrityError("no dimension document for '" + p.dimension_id + "'");
        if (!index->find(*ref))
            throw IntegrityError("fact references instance '" + *ref +
                                 "' missing from dimension '" + p.dimension_id + "'");
        const Value* v = index->resolve_attribute(*ref, p.attribute);
        if (!v || !eval_compare(p.op, *v, p.literal)) return false;
    }
    return true;
}

}  // namespace detail

/// Full scan of the unfragmented warehouse.
inline ExecResult execute_nf(const Warehouse& wh, const Query& query, const Workload& wl) {
    detail::StopWatch watch;
    ExecResult out;
    out.row.query_id = query.id;
    const FactData* facts = wh.find_fact_data(query.fact_set_id);
    if (!facts) throw IntegrityError("unknown fact set '" + query.fact_set_id + "'");
    std::vector<DimensionIndex> indexes;
    for (const auto& dim : wh.dimensions) indexes.emplace_back(dim);
    auto index_of = [&](std::string_view dim) -> const DimensionIndex* {
        for (std::size_t i = 0; i < wh.dimensions.size(); ++i)
            if (wh.dimensions[i].dimension_id == dim) return &indexes[i];
        return nullptr;
    };
    for (std::size_t i = 0; i < facts->facts.size(); ++i)
        if (detail::fact_matches(facts->facts[i], query, wl, index_of))
            out.fact_indices.push_back(i);
    out.row.fragments_accessed = 1;
    out.row.facts_scanned = facts->facts.size();
    out.row.parallel_cost = facts->facts.size();
    out.row.sequential_cost = facts->facts.size();
    out.row.result_size = out.fact_indices.size();
    out.row.wall_ms = watch.ms();
    return out;
}

/// Runs the query over every routed fragment independently and unions the
/// per-fragment results; fact parts are disjoint so the union needs no
/// deduplication.
inline ExecResult execute_fragmented(const std::vector<Fragment>& fragments,
                                     const RoutingPlan& plan, const Query& query,
                                     const Workload& wl) {
    detail::StopWatch watch;
    ExecResult out;
    out.row.query_id = query.id;
    std::vector<const Fragment*> routed;
    for (const auto& fid : plan.fragment_ids) {
        const Fragment* frag = nullptr;
        for (const auto& f : fragments)
            if (f.id == fid) frag = &f;
        if (!frag) throw IntegrityError("routing plan names unknown fragment '" + fid + "'");
        routed.push_back(frag);
    }
    std::vector<std::vector<std::size_t>> partial(routed.size());
    parallel_for(routed.size(), [&](std::size_t r) {
        const Fragment& frag = *routed[r];
        auto index_of = [&](std::string_view dim) { return frag.part_index_for(dim); };
        for (std::size_t local = 0; local < frag.fact_part.facts.size(); ++local)
            if (detail::fact_matches(frag.fact_part.facts[local], query, wl, index_of))
                partial[r].push_back(frag.fact_indices[local]);
    });
    for (std::size_t r = 0; r < routed.size(); ++r) {
        out.fact_indices.insert(out.fact_indices.end(), partial[r].begin(), partial[r].end());
        const std::size_t scanned = routed[r]->fact_part.facts.size();
        out.row.facts_scanned += scanned;
        out.row.sequential_cost += scanned;
        out.row.parallel_cost = std::max(out.row.parallel_cost, scanned);
    }
    std::sort(out.fact_indices.begin(), out.fact_indices.end());
    out.row.fragments_accessed = routed.size();
    out.row.result_size = out.fact_indices.size();
    out.row.wall_ms = watch.ms();
    return out;
}

// ---------------------------------------------------------------------------
// Correctness checks (used by --verify and the test suites)
// ---------------------------------------------------------------------------

/// Completeness and disjointness: the fact parts partition the original
/// facts exactly.
inline void verify_partition(const std::vector<Fragment>& fragments, const Warehouse& wh) {
    const FactData& facts = wh.fact_sets.front();
    std::vector<int> seen(facts.facts.size(), 0);
    for (const auto& frag : fragments) {
        if (frag.fact_part.facts.size() != frag.fact_indices.size())
            throw IntegrityError("fragment '" + frag.id + "' fact bookkeeping is inconsistent");
        for (std::size_t idx : frag.fact_indices) {
            if (idx >= seen.size())
                throw IntegrityError("fragment '" + frag.id + "' references fact #" +
                                     std::to_string(idx) + " beyond the original document");
            ++seen[idx];
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (seen[i] == 0)
            throw IntegrityError("fact #" + std::to_string(i) + " appears in no fragment");
        if (seen[i] > 1)
            throw IntegrityError("fact #" + std::to_string(i) + " appears in " +
                                 std::to_string(seen[i]) + " fragments");
    }
}

/// Every dimension reference of every fragment fact resolves inside the
/// fragment's own dimension parts.
inline void verify_derived_join(const std::vector<Fragment>& fragments) {
    for (const auto& frag : fragments)
        for (const Fact& fact : frag.fact_part.facts)
            for (const auto& [dim, ref] : fact.dimension_refs) {
                const DimensionIndex* index = frag.part_index_for(dim);
                if (!index || !index->find(ref))
                    throw IntegrityError("fragment '" + frag.id + "' fact references '" + ref +
                                         "' missing from its dimension part '" + dim + "'");
            }
}

/// Result equivalence against the unfragmented scan, plus the per-fact
/// routing soundness oracle: no fact of the reference result may live in a
/// pruned fragment.
inline void verify_query_equivalence(const std::vector<Fragment>& fragments,
                                     const FragSchema& schema, const Warehouse& wh,
                                     const Workload& wl) {
    std::vector<std::string> owner(wh.fact_sets.front().facts.size());
    for (const auto& frag : fragments)
        for (std::size_t idx : frag.fact_indices) owner[idx] = frag.id;
    for (const auto& query : wl.queries) {
        ExecResult reference = execute_nf(wh, query, wl);
        RoutingPlan plan = route(query, schema, wl);
        ExecResult fragmented = execute_fragmented(fragments, plan, query, wl);
        if (reference.fact_indices != fragmented.fact_indices)
            throw IntegrityError("query " + query.id + " returns " +
                                 std::to_string(fragmented.fact_indices.size()) +
                                 " facts over fragments vs " +
                                 std::to_string(reference.fact_indices.size()) +
                                 " over the whole warehouse");
        for (std::size_t idx : reference.fact_indices)
            if (!plan.routes(owner[idx]))
                throw IntegrityError("query " + query.id + " result fact #" +
                                     std::to_string(idx) + " lives in pruned fragment '" +
                                     owner[idx] + "'");
    }
}

// ---------------------------------------------------------------------------
// Benchmark driver
// ---------------------------------------------------------------------------

struct BenchConfig {
    std::vector<std::size_t> sizes = {1000, 2000, 3000, 4000, 5000, 6000, 7000};
    std::vector<std::string> strategies = {"nf", "pc", "ab", "km"};
    std::size_t k = 8;
    std::size_t ksweep_lo = 1;
    std::size_t ksweep_hi = 10;
    std::vector<std::size_t> ksweep_sizes = {4000, 5000};
    std::uint64_t seed = 42;
    GeneratorSpec base;
    int overhead_reps = 5;
    bool verify = false;
};

struct KsweepRow {
    std::size_t size = 0;
    std::size_t k = 0;
    double mean_parallel_cost = 0.0;
};

struct OverheadRow {
    std::string strategy;
    std::size_t predicate_count = 0;
    double derivation_ms = 0.0;
};

struct FragcountRow {
    std::string strategy;
    std::size_t fragment_count = 0;
};

struct EffRow {
    std::size_t size = 0;
    std::string strategy;
    std::string query_id;          // "ALL" for the per-(size, strategy) mean row
    double fragments_accessed = 0;
    double facts_scanned = 0;
    double parallel_cost = 0;
    double sequential_cost = 0;
    double wall_ms = 0.0;
    bool aggregate = false;

    static EffRow of(std::size_t size, std::string strategy, const ExecRow& r) {
        EffRow row;
        row.size = size;
        row.strategy = std::move(strategy);
        row.query_id = r.query_id;
        row.fragments_accessed = static_cast<double>(r.fragments_accessed);
        row.facts_scanned = static_cast<double>(r.facts_scanned);
        row.parallel_cost = static_cast<double>(r.parallel_cost);
        row.sequential_cost = static_cast<double>(r.sequential_cost);
        row.wall_ms = r.wall_ms;
        return row;
    }
};

namespace detail {

inline std::string fmt(double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

}  // namespace detail

struct BenchResult {
    std::vector<EffRow> efficiency;
    std::vector<KsweepRow> ksweep;
    std::vector<OverheadRow> overhead;
    std::vector<FragcountRow> fragcounts;

    std::string efficiency_csv() const {
        std::string out =
            "size,strategy,query_id,fragments_accessed,facts_scanned_total,parallel_cost,"
            "sequential_cost,wall_ms\n";
        for (const auto& r : efficiency) {
            out += std::to_string(r.size) + "," + r.strategy + "," + r.query_id + ",";
            if (r.aggregate) {
                out += detail::fmt(r.fragments_accessed, 2) + "," +
                       detail::fmt(r.facts_scanned, 2) + "," +
                       detail::fmt(r.parallel_cost, 2) + "," +
                       detail::fmt(r.sequential_cost, 2) + ",";
            } else {
                out += std::to_string(static_cast<long long>(r.fragments_accessed)) + "," +
                       std::to_string(static_cast<long long>(r.facts_scanned)) + "," +
                       std::to_string(static_cast<long long>(r.parallel_cost)) + "," +
                       std::to_string(static_cast<long long>(r.sequential_cost)) + ",";
            }
            out += detail::fmt(r.wall_ms, 3) + "\n";
        }
        return out;
    }

    std::string ksweep_csv() const {
        std::string out = "size,k,mean_parallel_cost\n";
        for (const auto& r : ksweep)
            out += std::to_string(r.size) + "," + std::to_string(r.k) + "," +
                   detail::fmt(r.mean_parallel_cost, 3) + "\n";
        return out;
    }

    std::string overhead_csv() const {
        std::string out = "strategy,predicate_count,derivation_ms\n";
        for (const auto& r : overhead)
            out += r.strategy + "," + std::to_string(r.predicate_count) + "," +
                   detail::fmt(r.derivation_ms, 4) + "\n";
        return out;
    }

    std::string fragcounts_csv() const {
        std::string out = "strategy,fragment_count\n";
        for (const auto& r : fragcounts)
            out += r.strategy + "," + std::to_string(r.fragment_count) + "\n";
        return out;
    }

    void write(const std::filesystem::path& dir) const {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        auto dump = [&](const char* name, const std::string& body) {
            std::ofstream out(dir / name, std::ios::binary);
            if (!out) throw IoError("cannot write " + (dir / name).string());
            out << body;
        };
        dump("efficiency.csv", efficiency_csv());
        dump("ksweep.csv", ksweep_csv());
        dump("overhead.csv", overhead_csv());
        dump("fragcounts.csv", fragcounts_csv());
    }
};

namespace detail {

inline double median_ms(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

}  // namespace detail

/// Full experimental protocol: per-size efficiency comparison across the
/// chosen strategies (including the unfragmented reference), the k sweep at
/// the fixed sizes, derivation-overhead medians, and fragment counts.
inline BenchResult bench(const BenchConfig& config, std::string_view workload_text) {
    if (config.sizes.empty()) throw ParamError("bench needs a nonempty size list");
    if (config.ksweep_lo < 1 || config.ksweep_lo > config.ksweep_hi)
        throw ParamError("invalid k sweep range");
    for (const auto& s : config.strategies)
        if (s != "nf" && s != "km" && s != "pc" && s != "ab")
            throw ParamError("unknown strategy '" + s + "'");

    Workload wl = parse_workload(workload_text);

    // One generated warehouse per distinct size, shared by all experiments.
    std::map<std::size_t, Warehouse> warehouses;
    auto warehouse_at = [&](std::size_t size) -> const Warehouse& {
        auto it = warehouses.find(size);
        if (it == warehouses.end()) {
            GeneratorSpec spec = config.base;
            spec.seed = config.seed;
            spec.fact_count = size;
            it = warehouses.emplace(size, generate_warehouse(spec)).first;
        }
        return it->second;
    };

    bind_workload(wl, warehouse_at(config.sizes.front()).meta);
    const QpMatrix qp = build_qp_matrix(wl);
    if (config.ksweep_hi > wl.predicates.size())
        throw ParamError("k sweep upper bound " + std::to_string(config.ksweep_hi) +
                         " exceeds |P| = " + std::to_string(wl.predicates.size()));

    BenchResult result;

    // Schema derivation per strategy: once for use, overhead_reps times for
    // the timing medians (schema derivation only, materialization excluded).
    std::map<std::string, FragSchema> schemas;
    for (const auto& strategy : config.strategies) {
        if (strategy == "nf") continue;
        auto derive = [&]() -> FragSchema {
            if (strategy == "km") return km_schema(qp, wl, config.k, config.seed);
            if (strategy == "pc") return pc_schema(wl);
            return ab_schema(wl);
        };
        std::vector<double> samples;
        for (int rep = 0; rep < config.overhead_reps; ++rep) {
            detail::StopWatch watch;
            FragSchema schema = derive();
            samples.push_back(watch.ms());
            if (rep == 0) schemas.emplace(strategy, std::move(schema));
        }
        result.overhead.push_back(
            OverheadRow{strategy, wl.predicates.size(), detail::median_ms(samples)});
        result.fragcounts.push_back(
            FragcountRow{strategy, schemas.at(strategy).fragment_count()});
    }

    // Efficiency series (response cost vs warehouse size, per strategy).
    for (std::size_t size : config.sizes) {
        const Warehouse& wh = warehouse_at(size);
        for (const auto& strategy : config.strategies) {
            std::vector<ExecRow> rows;
            if (strategy == "nf") {
                for (const auto& query : wl.queries)
                    rows.push_back(execute_nf(wh, query, wl).row);
            } else {
                const FragSchema& schema = schemas.at(strategy);
                std::vector<Fragment> fragments = materialize(schema, wh, wl);
                if (config.verify) {
                    verify_partition(fragments, wh);
                    verify_derived_join(fragments);
                    verify_query_equivalence(fragments, schema, wh, wl);
                }
                for (const auto& query : wl.queries) {
                    RoutingPlan plan = route(query, schema, wl);
                    rows.push_back(execute_fragmented(fragments, plan, query, wl).row);
                }
            }
            EffRow mean;
            mean.size = size;
            mean.strategy = strategy;
            mean.query_id = "ALL";
            mean.aggregate = true;
            for (const auto& r : rows) {
                mean.fragments_accessed += static_cast<double>(r.fragments_accessed);
                mean.facts_scanned += static_cast<double>(r.facts_scanned);
                mean.parallel_cost += static_cast<double>(r.parallel_cost);
                mean.sequential_cost += static_cast<double>(r.sequential_cost);
                mean.wall_ms += r.wall_ms;
            }
            const double n = static_cast<double>(rows.size());
            mean.fragments_accessed /= n;
            mean.facts_scanned /= n;
            mean.parallel_cost /= n;
            mean.sequential_cost /= n;
            for (const auto& r : rows)
                result.efficiency.push_back(EffRow::of(size, strategy, r));
            result.efficiency.push_back(mean);
        }
    }

    // k sweep at the fixed sizes; k = 1 is the unfragmented reference.
    for (std::size_t size : config.ksweep_sizes) {
        const Warehouse& wh = warehouse_at(size);
        for (std::size_t k = config.ksweep_lo; k <= config.ksweep_hi; ++k) {
            double total = 0.0;
            if (k == 1) {
                for (const auto& query : wl.queries)
                    total += static_cast<double>(execute_nf(wh, query, wl).row.parallel_cost);
            } else {
                FragSchema schema = km_schema(qp, wl, k, config.seed);
                std::vector<Fragment> fragments = materialize(schema, wh, wl);
                for (const auto& query : wl.queries) {
                    RoutingPlan plan = route(query, schema, wl);
                    total += static_cast<double>(
                        execute_fragmented(fragments, plan, query, wl).row.parallel_cost);
                }
            }
            result.ksweep.push_back(
                KsweepRow{size, k, total / static_cast<double>(wl.queries.size())});
        }
    }

    return result;
}

}  // namespace xfrag
