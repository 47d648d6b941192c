#pragma once

// In-memory model of the star-schema warehouse: metadata, dimension data
// with roll-up/drill-down hierarchies, and fact data. All types are plain
// values; instances are immutable once built and safe to share across
// threads.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xfrag/errors.hpp"

namespace xfrag {

enum class AttrType { String, Integer, Decimal };

inline std::string to_string(AttrType t) {
    switch (t) {
        case AttrType::String: return "string";
        case AttrType::Integer: return "integer";
        case AttrType::Decimal: return "decimal";
    }
    return "string";
}

inline AttrType attr_type_from_string(const std::string& s) {
    if (s == "string") return AttrType::String;
    if (s == "integer") return AttrType::Integer;
    if (s == "decimal") return AttrType::Decimal;
    throw IntegrityError("unknown attribute type '" + s + "'");
}

/// Typed value. The textual form is what gets serialized (verbatim); the
/// numeric cache backs comparisons for integer/decimal attributes.
struct Value {
    AttrType type = AttrType::String;
    std::string text;
    double num = 0.0;

    static Value of_string(std::string s) { return Value{AttrType::String, std::move(s), 0.0}; }

    static Value of_integer(long long v) {
        Value out{AttrType::Integer, std::to_string(v), static_cast<double>(v)};
        return out;
    }

    static Value of_decimal(std::string text) {
        Value out{AttrType::Decimal, std::move(text), 0.0};
        out.num = std::strtod(out.text.c_str(), nullptr);
        return out;
    }

    /// Coerce raw text to the given type. Throws BindError when the text is
    /// not a valid literal of that type.
    static Value parse(AttrType t, const std::string& raw) {
        if (t == AttrType::String) return of_string(raw);
        const char* begin = raw.c_str();
        char* end = nullptr;
        if (t == AttrType::Integer) {
            long long v = std::strtoll(begin, &end, 10);
            if (end == begin || *end != '\0')
                throw BindError("cannot coerce '" + raw + "' to integer");
            Value out{AttrType::Integer, raw, static_cast<double>(v)};
            return out;
        }
        double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0')
            throw BindError("cannot coerce '" + raw + "' to decimal");
        return Value{AttrType::Decimal, raw, v};
    }

    friend bool operator==(const Value& a, const Value& b) {
        return a.type == b.type && a.text == b.text;
    }
};

/// Three-way comparison under the attribute-type semantics: numeric for
/// integer/decimal, lexicographic for strings.
inline int compare_values(const Value& a, const Value& b) {
    if (a.type != b.type)
        throw TypeError("cannot compare " + to_string(a.type) + " with " + to_string(b.type));
    if (a.type == AttrType::String) return a.text.compare(b.text);
    if (a.num < b.num) return -1;
    if (a.num > b.num) return 1;
    return 0;
}

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

inline std::string to_string(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Lt: return "<";
        case CompareOp::Le: return "<=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "=";
}

inline CompareOp compare_op_from_string(const std::string& s) {
    if (s == "=") return CompareOp::Eq;
    if (s == "!=") return CompareOp::Ne;
    if (s == "<") return CompareOp::Lt;
    if (s == "<=") return CompareOp::Le;
    if (s == ">") return CompareOp::Gt;
    if (s == ">=") return CompareOp::Ge;
    throw ParamError("unknown comparator '" + s + "'");
}

/// Comparator satisfied by exactly the values the original rejects.
inline CompareOp negate_op(CompareOp op) {
    switch (op) {
        case CompareOp::Eq: return CompareOp::Ne;
        case CompareOp::Ne: return CompareOp::Eq;
        case CompareOp::Lt: return CompareOp::Ge;
        case CompareOp::Le: return CompareOp::Gt;
        case CompareOp::Gt: return CompareOp::Le;
        case CompareOp::Ge: return CompareOp::Lt;
    }
    return op;
}

inline bool eval_compare(CompareOp op, const Value& lhs, const Value& rhs) {
    int c = compare_values(lhs, rhs);
    switch (op) {
        case CompareOp::Eq: return c == 0;
        case CompareOp::Ne: return c != 0;
        case CompareOp::Lt: return c < 0;
        case CompareOp::Le: return c <= 0;
        case CompareOp::Gt: return c > 0;
        case CompareOp::Ge: return c >= 0;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Metadata (dw-model.xml)
// ---------------------------------------------------------------------------

struct AttributeMeta {
    std::string name;
    AttrType type = AttrType::String;
    bool operator==(const AttributeMeta&) const = default;
};

struct LevelMeta {
    std::string id;
    std::vector<AttributeMeta> attributes;
    bool operator==(const LevelMeta&) const = default;
};

struct DimensionMeta {
    std::string id;
    std::string path;  // document file name
    std::vector<LevelMeta> levels;

    const AttributeMeta* find_attribute(std::string_view name) const {
        for (const auto& lvl : levels)
            for (const auto& a : lvl.attributes)
                if (a.name == name) return &a;
        return nullptr;
    }
    bool operator==(const DimensionMeta&) const = default;
};

struct MeasureMeta {
    std::string name;
    AttrType type = AttrType::Integer;
    bool operator==(const MeasureMeta&) const = default;
};

struct FactSetMeta {
    std::string id;
    std::string path;
    std::vector<MeasureMeta> measures;
    std::vector<std::string> dimension_refs;
    bool operator==(const FactSetMeta&) const = default;
};

struct WarehouseMeta {
    std::vector<DimensionMeta> dimensions;
    std::vector<FactSetMeta> fact_sets;

    const DimensionMeta* find_dimension(std::string_view id) const {
        for (const auto& d : dimensions)
            if (d.id == id) return &d;
        return nullptr;
    }
    const FactSetMeta* find_fact_set(std::string_view id) const {
        for (const auto& f : fact_sets)
            if (f.id == id) return &f;
        return nullptr;
    }
    bool operator==(const WarehouseMeta&) const = default;
};

// ---------------------------------------------------------------------------
// Dimension data
// ---------------------------------------------------------------------------

struct Instance {
    std::string id;
    std::vector<std::pair<std::string, Value>> attributes;  // name -> value
    std::string roll_up;                   // instance id at the next level, "" if none
    std::vector<std::string> drill_down;   // instance ids at the previous level

    const Value* find_attribute(std::string_view name) const {
        for (const auto& [n, v] : attributes)
            if (n == name) return &v;
        return nullptr;
    }
    bool operator==(const Instance&) const = default;
};

struct LevelData {
    std::string id;
    std::vector<Instance> instances;
    bool operator==(const LevelData&) const = default;
};

/// Levels are ordered finest first; roll_up points from level i to i+1.
struct DimensionData {
    std::string dimension_id;
    std::vector<LevelData> levels;

    const LevelData& finest() const {
        if (levels.empty())
            throw IntegrityError("dimension '" + dimension_id + "' has no levels");
        return levels.front();
    }
    bool operator==(const DimensionData&) const = default;
};

// ---------------------------------------------------------------------------
// Fact data
// ---------------------------------------------------------------------------

struct Fact {
    std::vector<std::pair<std::string, Value>> measures;
    std::vector<std::pair<std::string, std::string>> dimension_refs;  // dim id -> instance id

    const std::string* ref(std::string_view dimension_id) const {
        for (const auto& [d, i] : dimension_refs)
            if (d == dimension_id) return &i;
        return nullptr;
    }
    bool operator==(const Fact&) const = default;
};

struct FactData {
    std::string fact_set_id;
    std::vector<Fact> facts;
    bool operator==(const FactData&) const = default;
};

struct Warehouse {
    WarehouseMeta meta;
    std::vector<DimensionData> dimensions;
    std::vector<FactData> fact_sets;

    const DimensionData* find_dimension_data(std::string_view id) const {
        for (const auto& d : dimensions)
            if (d.dimension_id == id) return &d;
        return nullptr;
    }
    const FactData* find_fact_data(std::string_view id) const {
        for (const auto& f : fact_sets)
            if (f.fact_set_id == id) return &f;
        return nullptr;
    }
    bool operator==(const Warehouse&) const = default;
};

// ---------------------------------------------------------------------------
// Lookup index over one dimension (id -> location, roll-up resolution)
// ---------------------------------------------------------------------------

class DimensionIndex {
public:
    DimensionIndex() = default;

    explicit DimensionIndex(const DimensionData& data) : data_(&data) {
        for (std::size_t li = 0; li < data.levels.size(); ++li)
            for (std::size_t ii = 0; ii < data.levels[li].instances.size(); ++ii)
                by_id_.emplace(data.levels[li].instances[ii].id, std::make_pair(li, ii));
    }

    const DimensionData* data() const { return data_; }

    const Instance* find(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) return nullptr;
        return &data_->levels[it->second.first].instances[it->second.second];
    }

    /// Attribute value of an instance, searching the instance itself and then
    /// its roll-up ancestors. Returns nullptr when nothing in the chain
    /// carries the attribute.
    const Value* resolve_attribute(const std::string& instance_id, std::string_view attr) const {
        const Instance* inst = find(instance_id);
        while (inst) {
            if (const Value* v = inst->find_attribute(attr)) return v;
            if (inst->roll_up.empty()) break;
            inst = find(inst->roll_up);
        }
        return nullptr;
    }

private:
    const DimensionData* data_ = nullptr;
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> by_id_;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void validate_meta(const WarehouseMeta& meta) {
    std::set<std::string> dim_ids;
    for (const auto& d : meta.dimensions) {
        if (!dim_ids.insert(d.id).second)
            throw IntegrityError("duplicate dimension id '" + d.id + "'");
        std::set<std::string> level_ids;
        for (const auto& lvl : d.levels) {
            if (!level_ids.insert(lvl.id).second)
                throw IntegrityError("duplicate level id '" + lvl.id + "' in dimension '" + d.id + "'");
            std::set<std::string> attr_names;
            for (const auto& a : lvl.attributes)
                if (!attr_names.insert(a.name).second)
                    throw IntegrityError("duplicate attribute '" + a.name + "' in level '" +
                                         lvl.id + "' of dimension '" + d.id + "'");
        }
    }
    std::set<std::string> fact_ids;
    for (const auto& f : meta.fact_sets) {
        if (!fact_ids.insert(f.id).second)
            throw IntegrityError("duplicate fact set id '" + f.id + "'");
        for (const auto& ref : f.dimension_refs)
            if (!dim_ids.count(ref))
                throw IntegrityError("fact set '" + f.id + "' references unknown dimension '" +
                                     ref + "'");
    }
}

inline void validate_dimension(const DimensionMeta& meta, const DimensionData& data) {
    if (meta.id != data.dimension_id)
        throw IntegrityError("dimension document id '" + data.dimension_id +
                             "' does not match metadata id '" + meta.id + "'");
    std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> where;
    for (std::size_t li = 0; li < data.levels.size(); ++li)
        for (std::size_t ii = 0; ii < data.levels[li].instances.size(); ++ii) {
            const Instance& inst = data.levels[li].instances[ii];
            if (!where.emplace(inst.id, std::make_pair(li, ii)).second)
                throw IntegrityError("duplicate instance id '" + inst.id + "' in dimension '" +
                                     data.dimension_id + "'");
        }
    for (std::size_t li = 0; li < data.levels.size(); ++li) {
        for (const Instance& inst : data.levels[li].instances) {
            if (!inst.roll_up.empty()) {
                auto it = where.find(inst.roll_up);
                if (it == where.end() || it->second.first != li + 1)
                    throw IntegrityError("instance '" + inst.id + "' of dimension '" +
                                         data.dimension_id + "' rolls up to '" + inst.roll_up +
                                         "' which is not an instance of the next level");
                const Instance& parent =
                    data.levels[li + 1].instances[it->second.second];
                if (std::find(parent.drill_down.begin(), parent.drill_down.end(), inst.id) ==
                    parent.drill_down.end())
                    throw IntegrityError("instance '" + inst.roll_up + "' of dimension '" +
                                         data.dimension_id + "' is missing '" + inst.id +
                                         "' in its Drill-Down list");
            }
            for (const std::string& child : inst.drill_down) {
                auto it = where.find(child);
                if (li == 0 || it == where.end() || it->second.first != li - 1)
                    throw IntegrityError("instance '" + inst.id + "' of dimension '" +
                                         data.dimension_id + "' drills down to '" + child +
                                         "' which is not an instance of the previous level");
                const Instance& childInst = data.levels[li - 1].instances[it->second.second];
                if (childInst.roll_up != inst.id)
                    throw IntegrityError("instance '" + child + "' of dimension '" +
                                         data.dimension_id + "' does not roll up to '" +
                                         inst.id + "'");
            }
        }
    }
}

inline void validate_facts(const WarehouseMeta& meta, const Warehouse& wh, const FactData& facts) {
    const FactSetMeta* fmeta = meta.find_fact_set(facts.fact_set_id);
    if (!fmeta) throw IntegrityError("unknown fact set '" + facts.fact_set_id + "'");
    std::vector<std::pair<const DimensionData*, std::set<std::string>>> finest;
    for (const auto& ref : fmeta->dimension_refs) {
        const DimensionData* dd = wh.find_dimension_data(ref);
        if (!dd)
            throw IntegrityError("fact set '" + fmeta->id + "' references dimension '" + ref +
                                 "' which has no data document");
        std::set<std::string> ids;
        for (const auto& inst : dd->finest().instances) ids.insert(inst.id);
        finest.emplace_back(dd, std::move(ids));
    }
    std::size_t n = 0;
    for (const Fact& fact : facts.facts) {
        ++n;
        if (fact.dimension_refs.size() != fmeta->dimension_refs.size())
            throw IntegrityError("fact #" + std::to_string(n) + " of '" + facts.fact_set_id +
                                 "' carries " + std::to_string(fact.dimension_refs.size()) +
                                 " dimension references, expected " +
                                 std::to_string(fmeta->dimension_refs.size()));
        for (std::size_t di = 0; di < fmeta->dimension_refs.size(); ++di) {
            const std::string& dim = fmeta->dimension_refs[di];
            const std::string* ref = fact.ref(dim);
            if (!ref)
                throw IntegrityError("fact #" + std::to_string(n) + " of '" + facts.fact_set_id +
                                     "' is missing a reference to dimension '" + dim + "'");
            if (!finest[di].second.count(*ref))
                throw IntegrityError("fact #" + std::to_string(n) + " of '" + facts.fact_set_id +
                                     "' references instance '" + *ref +
                                     "' which is not a finest-level instance of dimension '" +
                                     dim + "'");
        }
    }
}

inline void validate_warehouse(const Warehouse& wh) {
    validate_meta(wh.meta);
    for (const auto& dmeta : wh.meta.dimensions) {
        const DimensionData* data = wh.find_dimension_data(dmeta.id);
        if (!data)
            throw IntegrityError("dimension '" + dmeta.id + "' has no data document");
        validate_dimension(dmeta, *data);
    }
    for (const auto& fdata : wh.fact_sets) validate_facts(wh.meta, wh, fdata);
    for (const auto& fmeta : wh.meta.fact_sets)
        if (!wh.find_fact_data(fmeta.id))
            throw IntegrityError("fact set '" + fmeta.id + "' has no data document");
}

}  // namespace xfrag
