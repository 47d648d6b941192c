#pragma once

// Fragment materialization: primary horizontal fragments of the dimension
// documents, derived fragments of the fact document, and the trailing ELSE
// fragment. Facts matching several fragment conditions go to the
// lowest-indexed one, so the fact parts always partition the original facts.

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "xfrag/model.hpp"
#include "xfrag/sat.hpp"
#include "xfrag/strategies.hpp"
#include "xfrag/threading.hpp"
#include "xfrag/warehouse_io.hpp"
#include "xfrag/workload.hpp"

namespace xfrag {

/// Conjunction of the fragment's own literals and the negation of every
/// higher-priority fragment's conjunction.
struct MembershipCondition {
    LiteralList own;
    std::vector<LiteralList> negated_prior;
};

struct Fragment {
    std::string id;
    bool is_else = false;
    std::vector<DimensionData> dimension_parts;  // aligned with warehouse meta order
    FactData fact_part;
    std::vector<std::size_t> fact_indices;       // positions in the original document
    MembershipCondition membership;
    std::vector<DimensionIndex> part_index;      // aligned with dimension_parts

    const DimensionData* dimension_part(std::string_view dim) const {
        for (const auto& d : dimension_parts)
            if (d.dimension_id == dim) return &d;
        return nullptr;
    }
    const DimensionIndex* part_index_for(std::string_view dim) const {
        for (std::size_t i = 0; i < dimension_parts.size(); ++i)
            if (dimension_parts[i].dimension_id == dim) return &part_index[i];
        return nullptr;
    }
};

namespace detail {

inline bool instance_satisfies(const DimensionIndex& index, const std::string& instance_id,
                               const std::vector<PredicateRef>& refs, const Workload& wl) {
    for (const auto& ref : refs) {
        const Predicate& p = wl.predicate(ref.predicate_id);
        const Value* v = index.resolve_attribute(instance_id, p.attribute);
        if (!v) return false;
        bool ok = eval_compare(p.op, *v, p.literal);
        if (ref.negated) ok = !ok;
        if (!ok) return false;
    }
    return true;
}

/// Restriction of a dimension to the given finest-level instances plus their
/// roll-up closure; Drill-Down lists are filtered to what remains.
inline DimensionData restrict_dimension(const DimensionData& dim,
                                        const std::unordered_set<std::string>& finest_keep) {
    DimensionData out;
    out.dimension_id = dim.dimension_id;
    std::vector<std::unordered_set<std::string>> keep(dim.levels.size());
    keep[0] = finest_keep;
    for (std::size_t li = 0; li + 1 < dim.levels.size(); ++li)
        for (const Instance& inst : dim.levels[li].instances)
            if (keep[li].count(inst.id) && !inst.roll_up.empty())
                keep[li + 1].insert(inst.roll_up);
    for (std::size_t li = 0; li < dim.levels.size(); ++li) {
        LevelData lvl;
        lvl.id = dim.levels[li].id;
        for (const Instance& inst : dim.levels[li].instances) {
            if (!keep[li].count(inst.id)) continue;
            Instance copy = inst;
            if (li > 0) {
                copy.drill_down.clear();
                for (const auto& child : inst.drill_down)
                    if (keep[li - 1].count(child)) copy.drill_down.push_back(child);
            }
            lvl.instances.push_back(std::move(copy));
        }
        out.levels.push_back(std::move(lvl));
    }
    return out;
}

}  // namespace detail

/// Builds the physical fragments for a schema over a warehouse. Dimension
/// parts of a non-ELSE fragment hold the instances satisfying the fragment's
/// conjunction on that dimension; predicate-free dimensions are replicated
/// whole. The ELSE fragment keeps only the instances its own facts reference.
inline std::vector<Fragment> materialize(const FragSchema& schema, const Warehouse& wh,
                                         const Workload& wl) {
    if (!wl.bound) throw ParamError("materialize needs a bound workload");
    if (wh.fact_sets.size() != 1)
        throw IntegrityError("materialize expects exactly one fact set");
    const FactData& facts = wh.fact_sets.front();

    for (const auto& frag : schema.fragments)
        for (const auto& [dim, refs] : frag.dimensions) {
            if (!wh.find_dimension_data(dim))
                throw IntegrityError("fragment '" + frag.id + "' references unknown dimension '" +
                                     dim + "'");
            for (const auto& ref : refs)
                if (!wl.find_predicate(ref.predicate_id))
                    throw IntegrityError("fragment '" + frag.id +
                                         "' references unknown predicate '" + ref.predicate_id +
                                         "'");
        }

    std::vector<DimensionIndex> base_index;
    base_index.reserve(wh.dimensions.size());
    for (const auto& dim : wh.dimensions) base_index.emplace_back(dim);
    auto index_of = [&](std::string_view dim) -> const DimensionIndex& {
        for (std::size_t i = 0; i < wh.dimensions.size(); ++i)
            if (wh.dimensions[i].dimension_id == dim) return base_index[i];
        throw IntegrityError("unknown dimension '" + std::string(dim) + "'");
    };

    // Finest-level keep sets per (fragment, constrained dimension).
    struct FragSets {
        std::vector<std::pair<std::string, std::unordered_set<std::string>>> by_dim;
        const std::unordered_set<std::string>* find(std::string_view dim) const {
            for (const auto& [d, s] : by_dim)
                if (d == dim) return &s;
            return nullptr;
        }
    };
    const std::size_t nfrag = schema.fragments.size();
    std::vector<FragSets> keep_sets(nfrag);
    parallel_for(nfrag, [&](std::size_t fi) {
        const FragmentDef& frag = schema.fragments[fi];
        if (frag.is_else) return;
        for (const auto& [dim, refs] : frag.dimensions) {
            const DimensionIndex& index = index_of(dim);
            std::unordered_set<std::string> sat;
            for (const Instance& inst : index.data()->finest().instances)
                if (detail::instance_satisfies(index, inst.id, refs, wl)) sat.insert(inst.id);
            keep_sets[fi].by_dim.emplace_back(dim, std::move(sat));
        }
    });

    // Priority-disjoint fact assignment (single sequential pass).
    std::vector<std::vector<std::size_t>> assigned(nfrag);
    for (std::size_t i = 0; i < facts.facts.size(); ++i) {
        const Fact& fact = facts.facts[i];
        std::size_t target = nfrag - 1;  // ELSE
        for (std::size_t fi = 0; fi + 1 < nfrag; ++fi) {
            bool match = true;
            for (const auto& [dim, set] : keep_sets[fi].by_dim) {
                const std::string* ref = fact.ref(dim);
                if (!ref || !set.count(*ref)) {
                    match = false;
                    break;
                }
            }
            if (match) {
                target = fi;
                break;
            }
        }
        assigned[target].push_back(i);
    }

    std::vector<Fragment> out(nfrag);
    parallel_for(nfrag, [&](std::size_t fi) {
        const FragmentDef& def = schema.fragments[fi];
        Fragment frag;
        frag.id = def.id;
        frag.is_else = def.is_else;
        frag.fact_indices = assigned[fi];
        frag.fact_part.fact_set_id = facts.fact_set_id;
        for (std::size_t i : frag.fact_indices) frag.fact_part.facts.push_back(facts.facts[i]);

        for (const auto& [dim, refs] : def.dimensions)
            for (const auto& ref : refs)
                frag.membership.own.push_back(
                    Literal{&wl.predicate(ref.predicate_id), ref.negated});
        for (std::size_t prior = 0; prior < fi; ++prior) {
            if (schema.fragments[prior].is_else) continue;
            LiteralList lits;
            for (const auto& [dim, refs] : schema.fragments[prior].dimensions)
                for (const auto& ref : refs)
                    lits.push_back(Literal{&wl.predicate(ref.predicate_id), ref.negated});
            frag.membership.negated_prior.push_back(std::move(lits));
        }

        for (std::size_t di = 0; di < wh.dimensions.size(); ++di) {
            const DimensionData& dim = wh.dimensions[di];
            if (def.is_else) {
                std::unordered_set<std::string> referenced;
                for (const Fact& fact : frag.fact_part.facts)
                    if (const std::string* ref = fact.ref(dim.dimension_id))
                        referenced.insert(*ref);
                frag.dimension_parts.push_back(
                    detail::restrict_dimension(dim, referenced));
            } else if (const auto* set = keep_sets[fi].find(dim.dimension_id)) {
                frag.dimension_parts.push_back(
                    detail::restrict_dimension(dim, *set));
            } else {
                frag.dimension_parts.push_back(dim);  // replicated whole
            }
        }
        frag.part_index.reserve(frag.dimension_parts.size());
        for (const auto& part : frag.dimension_parts) frag.part_index.emplace_back(part);
        out[fi] = std::move(frag);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Physical layout
// ---------------------------------------------------------------------------

struct FragmentFiles {
    std::string fragment_id;
    std::filesystem::path facts;
    std::vector<std::pair<std::string, std::filesystem::path>> dimensions;  // dim -> file
};

struct Manifest {
    std::vector<FragmentFiles> entries;
};

inline XmlElem manifest_to_xml(const Manifest& manifest) {
    XmlElem root;
    root.name = "Manifest";
    for (const auto& entry : manifest.entries) {
        XmlElem& fe = root.add("fragment");
        fe.set("id", entry.fragment_id);
        fe.add("file").set("role", "facts").set("path", entry.facts.filename().string());
        for (const auto& [dim, path] : entry.dimensions) {
            XmlElem& de = fe.add("file");
            de.set("role", "dimension").set("dim-id", dim).set("path",
                                                               path.filename().string());
        }
    }
    return root;
}

inline Manifest manifest_from_xml(const XmlElem& root, const std::filesystem::path& dir) {
    if (root.name != "Manifest")
        throw ParseError("manifest", root.line, root.col,
                         "expected root <Manifest>, found <" + root.name + ">");
    Manifest manifest;
    for (const auto& fe : root.children) {
        if (fe.name != "fragment")
            throw ParseError("manifest", fe.line, fe.col,
                             "unexpected <" + fe.name + "> inside <Manifest>");
        FragmentFiles entry;
        entry.fragment_id = fe.attr("id");
        for (const auto& ce : fe.children) {
            if (ce.name != "file")
                throw ParseError("manifest", ce.line, ce.col,
                                 "unexpected <" + ce.name + "> inside <fragment>");
            const std::string role = ce.attr("role");
            if (role == "facts")
                entry.facts = dir / ce.attr("path");
            else if (role == "dimension")
                entry.dimensions.emplace_back(ce.attr("dim-id"), dir / ce.attr("path"));
            else
                throw ParseError("manifest", ce.line, ce.col, "unknown file role '" + role + "'");
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

/// Writes one facts document and one document per dimension for every
/// fragment (empty ones included, so the router can still target them), plus
/// manifest.xml. Documents reuse the warehouse formats and reload through
/// the same readers.
inline Manifest write_fragments(const std::vector<Fragment>& fragments, const Warehouse& wh,
                                const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec && !std::filesystem::is_directory(out_dir))
        throw IoError("cannot create directory " + out_dir.string());
    const std::string fact_set = wh.meta.fact_sets.front().id;
    Manifest manifest;
    for (const auto& frag : fragments) {
        FragmentFiles entry;
        entry.fragment_id = frag.id;
        entry.facts = out_dir / ("facts_" + fact_set + "_" + frag.id + ".xml");
        xml_save_file(facts_to_xml(frag.fact_part), entry.facts);
        for (const auto& part : frag.dimension_parts) {
            std::filesystem::path p =
                out_dir / ("dimension_" + part.dimension_id + "_" + frag.id + ".xml");
            xml_save_file(dimension_to_xml(part), p);
            entry.dimensions.emplace_back(part.dimension_id, p);
        }
        manifest.entries.push_back(std::move(entry));
    }
    xml_save_file(manifest_to_xml(manifest), out_dir / "manifest.xml");
    return manifest;
}

/// Reloads one fragment's documents and re-checks the warehouse invariants
/// plus fact-to-dimension join soundness inside the fragment.
inline Fragment load_fragment(const FragmentFiles& entry, const WarehouseMeta& meta) {
    Fragment frag;
    frag.id = entry.fragment_id;
    for (const auto& [dim, path] : entry.dimensions) {
        const DimensionMeta* dmeta = meta.find_dimension(dim);
        if (!dmeta) throw IntegrityError("manifest references unknown dimension '" + dim + "'");
        DimensionData data = dimension_from_xml(xml_load_file(path), *dmeta);
        validate_dimension(*dmeta, data);
        frag.dimension_parts.push_back(std::move(data));
    }
    frag.fact_part = facts_from_xml(xml_load_file(entry.facts), meta.fact_sets.front());
    for (const auto& part : frag.dimension_parts) frag.part_index.emplace_back(part);
    std::size_t n = 0;
    for (const Fact& fact : frag.fact_part.facts) {
        ++n;
        for (const auto& [dim, ref] : fact.dimension_refs) {
            const DimensionIndex* index = frag.part_index_for(dim);
            if (!index || !index->find(ref))
                throw IntegrityError("fragment '" + frag.id + "' fact #" + std::to_string(n) +
                                     " references instance '" + ref +
                                     "' missing from its own dimension part '" + dim + "'");
        }
    }
    return frag;
}

// ---------------------------------------------------------------------------
// Script emission
// ---------------------------------------------------------------------------

/// Human-readable construction script: per-dimension selection queries, then
/// the fact semijoin over the freshly built dimension fragments. The ELSE
/// fragment has no single-path expression and is documented in a comment.
inline std::string emit_fragment_script(const FragSchema& schema, const WarehouseMeta& meta,
                                        const Workload& wl) {
    std::string out;
    const std::string fact_doc =
        meta.fact_sets.empty() ? std::string("facts.xml") : meta.fact_sets.front().path;
    static const char* kVars[] = {"y", "z", "t", "u", "v", "w"};
    for (const auto& frag : schema.fragments) {
        if (!out.empty()) out += "\n";
        if (frag.is_else) {
            out += "(: fragment " + frag.id + " (ELSE): holds every fact matched by no\n";
            out += "   preceding fragment condition, with the dimension instances those\n";
            out += "   facts reference. The complement of a conjunction has no single\n";
            out += "   path expression, so no query is emitted for it. :)\n";
            continue;
        }
        out += "(: fragment " + frag.id + " :)\n";
        for (const auto& [dim, refs] : frag.dimensions) {
            const DimensionMeta* dmeta = meta.find_dimension(dim);
            const std::string level_id =
                dmeta && !dmeta->levels.empty() ? dmeta->levels.front().id : dim;
            out += "element dimension { attribute dim-id {\"" + dim + "\"}, element Level {\n";
            out += "  attribute id {\"" + level_id + "\"},\n";
            out += "  for $x in document(\"dimension_" + dim + ".xml\")//Level/instance\n";
            bool first = true;
            for (const auto& ref : refs) {
                const Predicate& p = wl.predicate(ref.predicate_id);
                std::string cmp = "$x/attribute[@id=\"" + p.attribute + "\"]/@value " +
                                  to_string(p.op) + " \"" + p.literal.text + "\"";
                if (ref.negated) cmp = "not(" + cmp + ")";
                out += first ? "  where " : "    and ";
                out += cmp + "\n";
                first = false;
            }
            out += "  return $x }\n}\n";
        }
        out += "element FactDoc {\n  for $x in document(\"" + fact_doc + "\")//FactDoc/Fact";
        std::size_t vi = 0;
        std::vector<std::pair<std::string, std::string>> joins;
        for (const auto& [dim, refs] : frag.dimensions) {
            std::string var =
                vi < 6 ? kVars[vi] : ("d" + std::to_string(vi + 1));
            ++vi;
            out += ",\n      $" + var + " in document(\"dimension_" + dim + "_" + frag.id +
                   ".xml\")//instance";
            joins.emplace_back(dim, var);
        }
        out += "\n";
        bool first = true;
        for (const auto& [dim, var] : joins) {
            out += first ? "  where " : "    and ";
            out += "$x/dimension[@dim-id=\"" + dim + "\"]/@value-id = $" + var + "/@id\n";
            first = false;
        }
        out += "  return $x\n}\n";
    }
    return out;
}

}  // namespace xfrag
