#pragma once

// Deterministic synthetic warehouse generator. The schema mirrors the XWeB
// sale warehouse: Customer/Supplier/Date/Part dimensions (two hierarchy
// levels each) around one sales fact set with amount and quantity measures.

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "xfrag/model.hpp"

namespace xfrag {

struct GeneratorSpec {
    std::uint64_t seed = 42;
    std::size_t fact_count = 7000;
    std::map<std::string, std::size_t> dimension_instances = {
        {"Customer", 1000}, {"Supplier", 1000}, {"Date", 500}, {"Part", 1000}};
    // Value-domain size per attribute, keyed "Dimension.attribute".
    std::map<std::string, std::size_t> attribute_cardinality = {
        {"Customer.c_nation_key", 25}, {"Customer.c_mkt_segment", 5},
        {"Customer.c_region", 5},      {"Supplier.s_nation_key", 25},
        {"Supplier.s_region", 5},      {"Supplier.s_acct_bal", 10000},
        {"Date.d_date_name", 7},       {"Date.d_month", 12},
        {"Date.d_year", 10},           {"Part.p_type", 6},
        {"Part.p_brand", 8},           {"Part.p_size", 50},
        {"Part.p_container", 6}};

    void validate() const {
        if (fact_count < 1) throw ParamError("fact_count must be >= 1");
        for (const auto& [dim, n] : dimension_instances)
            if (n < 1) throw ParamError("instance count for dimension '" + dim + "' must be >= 1");
        for (const auto& [attr, n] : attribute_cardinality)
            if (n < 1) throw ParamError("cardinality for attribute '" + attr + "' must be >= 1");
    }

    std::size_t instances(const std::string& dim) const {
        auto it = dimension_instances.find(dim);
        return it == dimension_instances.end() ? 1000 : it->second;
    }

    std::size_t cardinality(const std::string& key, std::size_t def) const {
        auto it = attribute_cardinality.find(key);
        return it == attribute_cardinality.end() ? def : it->second;
    }
};

namespace detail {

// SplitMix64; fixed algorithm so that equal seeds give byte-identical output
// on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

private:
    std::uint64_t state_;
};

inline const std::array<const char*, 7>& day_names() {
    static const std::array<const char*, 7> names = {"Mon.", "Tue.", "Wed.", "Thu.",
                                                     "Fri.", "Sat.", "Sun."};
    return names;
}

inline const std::array<const char*, 6>& part_types() {
    static const std::array<const char*, 6> names = {"PBC",   "STEEL", "COPPER",
                                                     "BRASS", "TIN",   "NICKEL"};
    return names;
}

inline const std::array<const char*, 5>& regions() {
    static const std::array<const char*, 5> names = {"AFRICA", "AMERICA", "ASIA", "EUROPE",
                                                     "MIDDLE EAST"};
    return names;
}

inline const std::array<const char*, 5>& segments() {
    static const std::array<const char*, 5> names = {"AUTOMOBILE", "BUILDING", "FURNITURE",
                                                     "HOUSEHOLD", "MACHINERY"};
    return names;
}

inline const std::array<const char*, 6>& containers() {
    static const std::array<const char*, 6> names = {"BAG", "BOX", "CAN", "DRUM", "JAR", "PKG"};
    return names;
}

template <std::size_t N>
inline std::string pick_name(const std::array<const char*, N>& builtin, std::size_t idx) {
    if (idx < N) return builtin[idx];
    return "VALUE#" + std::to_string(idx);
}

struct GroupLevel {
    // Coarse level derived from one finest-level integer attribute.
    std::string level_id;
    std::string instance_prefix;
    std::string label_attr;
    std::string label_prefix;
};

}  // namespace detail

/// Deterministic for a fixed spec: same seed, same bytes after save.
inline Warehouse generate_warehouse(const GeneratorSpec& spec) {
    spec.validate();
    detail::SplitMix64 rng(spec.seed);
    Warehouse wh;

    const std::size_t nation_card = spec.cardinality("Customer.c_nation_key", 25);
    const std::size_t s_nation_card = spec.cardinality("Supplier.s_nation_key", 25);
    const std::size_t month_card = spec.cardinality("Date.d_month", 12);
    const std::size_t type_card = spec.cardinality("Part.p_type", 6);

    // --- metadata -----------------------------------------------------------
    {
        DimensionMeta customer{
            "Customer",
            "dimension_Customer.xml",
            {LevelMeta{"Customers",
                       {{"c_name", AttrType::String},
                        {"c_nation_key", AttrType::Integer},
                        {"c_mkt_segment", AttrType::String},
                        {"c_region", AttrType::String}}},
             LevelMeta{"Nations", {{"n_name", AttrType::String}}}}};
        DimensionMeta supplier{
            "Supplier",
            "dimension_Supplier.xml",
            {LevelMeta{"Suppliers",
                       {{"s_name", AttrType::String},
                        {"s_nation_key", AttrType::Integer},
                        {"s_region", AttrType::String},
                        {"s_acct_bal", AttrType::Integer}}},
             LevelMeta{"Nations", {{"n_name", AttrType::String}}}}};
        DimensionMeta date{
            "Date",
            "dimension_Date.xml",
            {LevelMeta{"Days",
                       {{"d_name", AttrType::String},
                        {"d_date_name", AttrType::String},
                        {"d_month", AttrType::Integer},
                        {"d_year", AttrType::Integer}}},
             LevelMeta{"Months", {{"m_name", AttrType::String}}}}};
        DimensionMeta part{
            "Part",
            "dimension_Part.xml",
            {LevelMeta{"Parts",
                       {{"p_name", AttrType::String},
                        {"p_type", AttrType::String},
                        {"p_brand", AttrType::String},
                        {"p_size", AttrType::Integer},
                        {"p_container", AttrType::String}}},
             LevelMeta{"Types", {{"t_name", AttrType::String}}}}};
        wh.meta.dimensions = {customer, supplier, date, part};
        wh.meta.fact_sets = {FactSetMeta{
            "sales",
            "facts_sales.xml",
            {{"amount", AttrType::Decimal}, {"quantity", AttrType::Integer}},
            {"Customer", "Supplier", "Date", "Part"}}};
    }

    // --- helpers ------------------------------------------------------------
    auto make_group_level = [](const std::string& level_id, const std::string& prefix,
                               const std::string& label_attr, std::size_t count,
                               auto label_of) {
        LevelData lvl;
        lvl.id = level_id;
        for (std::size_t i = 0; i < count; ++i) {
            Instance inst;
            inst.id = prefix + std::to_string(i);
            inst.attributes.emplace_back(label_attr, Value::of_string(label_of(i)));
            lvl.instances.push_back(std::move(inst));
        }
        return lvl;
    };

    auto link_hierarchy = [](DimensionData& dim, const std::vector<std::size_t>& group_of) {
        LevelData& fine = dim.levels[0];
        LevelData& coarse = dim.levels[1];
        for (std::size_t i = 0; i < fine.instances.size(); ++i) {
            fine.instances[i].roll_up = coarse.instances[group_of[i]].id;
            coarse.instances[group_of[i]].drill_down.push_back(fine.instances[i].id);
        }
    };

    // --- Customer -----------------------------------------------------------
    {
        DimensionData dim;
        dim.dimension_id = "Customer";
        LevelData fine;
        fine.id = "Customers";
        const std::size_t n = spec.instances("Customer");
        const std::size_t seg_card = spec.cardinality("Customer.c_mkt_segment", 5);
        const std::size_t reg_card = spec.cardinality("Customer.c_region", 5);
        std::vector<std::size_t> group_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            Instance inst;
            inst.id = "c" + std::to_string(i + 1);
            std::size_t nation = rng.below(nation_card);
            group_of[i] = nation;
            inst.attributes.emplace_back("c_name",
                                         Value::of_string("Customer#" + std::to_string(i + 1)));
            inst.attributes.emplace_back("c_nation_key",
                                         Value::of_integer(static_cast<long long>(nation)));
            inst.attributes.emplace_back(
                "c_mkt_segment",
                Value::of_string(detail::pick_name(detail::segments(), rng.below(seg_card))));
            inst.attributes.emplace_back(
                "c_region",
                Value::of_string(detail::pick_name(detail::regions(), rng.below(reg_card))));
            fine.instances.push_back(std::move(inst));
        }
        dim.levels.push_back(std::move(fine));
        dim.levels.push_back(make_group_level("Nations", "cn", "n_name", nation_card,
                                              [](std::size_t i) {
                                                  return "Nation#" + std::to_string(i);
                                              }));
        link_hierarchy(dim, group_of);
        wh.dimensions.push_back(std::move(dim));
    }

    // --- Supplier -----------------------------------------------------------
    {
        DimensionData dim;
        dim.dimension_id = "Supplier";
        LevelData fine;
        fine.id = "Suppliers";
        const std::size_t n = spec.instances("Supplier");
        const std::size_t reg_card = spec.cardinality("Supplier.s_region", 5);
        const std::size_t bal_card = spec.cardinality("Supplier.s_acct_bal", 10000);
        std::vector<std::size_t> group_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            Instance inst;
            inst.id = "s" + std::to_string(i + 1);
            std::size_t nation = rng.below(s_nation_card);
            group_of[i] = nation;
            inst.attributes.emplace_back("s_name",
                                         Value::of_string("Supplier#" + std::to_string(i + 1)));
            inst.attributes.emplace_back("s_nation_key",
                                         Value::of_integer(static_cast<long long>(nation)));
            inst.attributes.emplace_back(
                "s_region",
                Value::of_string(detail::pick_name(detail::regions(), rng.below(reg_card))));
            inst.attributes.emplace_back(
                "s_acct_bal", Value::of_integer(static_cast<long long>(rng.below(bal_card))));
            fine.instances.push_back(std::move(inst));
        }
        dim.levels.push_back(std::move(fine));
        dim.levels.push_back(make_group_level("Nations", "sn", "n_name", s_nation_card,
                                              [](std::size_t i) {
                                                  return "Nation#" + std::to_string(i);
                                              }));
        link_hierarchy(dim, group_of);
        wh.dimensions.push_back(std::move(dim));
    }

    // --- Date ---------------------------------------------------------------
    {
        DimensionData dim;
        dim.dimension_id = "Date";
        LevelData fine;
        fine.id = "Days";
        const std::size_t n = spec.instances("Date");
        const std::size_t day_card = spec.cardinality("Date.d_date_name", 7);
        const std::size_t year_card = spec.cardinality("Date.d_year", 10);
        std::vector<std::size_t> group_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            Instance inst;
            inst.id = "d" + std::to_string(i + 1);
            std::size_t month = rng.below(month_card);
            group_of[i] = month;
            inst.attributes.emplace_back("d_name",
                                         Value::of_string("Day#" + std::to_string(i + 1)));
            inst.attributes.emplace_back(
                "d_date_name",
                Value::of_string(detail::pick_name(detail::day_names(), rng.below(day_card))));
            inst.attributes.emplace_back("d_month",
                                         Value::of_integer(static_cast<long long>(month + 1)));
            inst.attributes.emplace_back(
                "d_year",
                Value::of_integer(static_cast<long long>(1998 + rng.below(year_card))));
            fine.instances.push_back(std::move(inst));
        }
        dim.levels.push_back(std::move(fine));
        dim.levels.push_back(make_group_level("Months", "m", "m_name", month_card,
                                              [](std::size_t i) {
                                                  return "Month#" + std::to_string(i + 1);
                                              }));
        link_hierarchy(dim, group_of);
        wh.dimensions.push_back(std::move(dim));
    }

    // --- Part ---------------------------------------------------------------
    {
        DimensionData dim;
        dim.dimension_id = "Part";
        LevelData fine;
        fine.id = "Parts";
        const std::size_t n = spec.instances("Part");
        const std::size_t brand_card = spec.cardinality("Part.p_brand", 8);
        const std::size_t size_card = spec.cardinality("Part.p_size", 50);
        const std::size_t cont_card = spec.cardinality("Part.p_container", 6);
        std::vector<std::size_t> group_of(n);
        for (std::size_t i = 0; i < n; ++i) {
            Instance inst;
            inst.id = "p" + std::to_string(i + 1);
            std::size_t type = rng.below(type_card);
            group_of[i] = type;
            inst.attributes.emplace_back("p_name",
                                         Value::of_string("Part#" + std::to_string(i + 1)));
            inst.attributes.emplace_back(
                "p_type", Value::of_string(detail::pick_name(detail::part_types(), type)));
            inst.attributes.emplace_back(
                "p_brand",
                Value::of_string("Brand#" + std::to_string(1 + rng.below(brand_card))));
            inst.attributes.emplace_back(
                "p_size", Value::of_integer(static_cast<long long>(1 + rng.below(size_card))));
            inst.attributes.emplace_back(
                "p_container",
                Value::of_string(detail::pick_name(detail::containers(), rng.below(cont_card))));
            fine.instances.push_back(std::move(inst));
        }
        dim.levels.push_back(std::move(fine));
        dim.levels.push_back(make_group_level("Types", "t", "t_name", type_card,
                                              [&](std::size_t i) {
                                                  return detail::pick_name(detail::part_types(), i);
                                              }));
        link_hierarchy(dim, group_of);
        wh.dimensions.push_back(std::move(dim));
    }

    // --- Facts ----------------------------------------------------------------
    {
        FactData facts;
        facts.fact_set_id = "sales";
        for (std::size_t i = 0; i < spec.fact_count; ++i) {
            Fact fact;
            long long cents = static_cast<long long>(100 + rng.below(999900));
            char buf[32];
            std::snprintf(buf, sizeof buf, "%lld.%02lld", cents / 100, cents % 100);
            fact.measures.emplace_back("amount", Value::of_decimal(buf));
            fact.measures.emplace_back("quantity",
                                       Value::of_integer(static_cast<long long>(1 + rng.below(100))));
            for (const auto& dim : wh.dimensions) {
                const auto& fine = dim.finest().instances;
                fact.dimension_refs.emplace_back(dim.dimension_id,
                                                 fine[rng.below(fine.size())].id);
            }
            facts.facts.push_back(std::move(fact));
        }
        wh.fact_sets.push_back(std::move(facts));
    }

    validate_warehouse(wh);
    return wh;
}

}  // namespace xfrag
