#pragma once

// XML persistence of the warehouse: dw-model.xml plus one document per
// dimension and per fact set. Serialization is deterministic, so equal
// warehouses produce byte-identical files.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "xfrag/model.hpp"
#include "xfrag/xml.hpp"

namespace xfrag {

// --- model document ---------------------------------------------------------

inline XmlElem meta_to_xml(const WarehouseMeta& meta) {
    XmlElem root;
    root.name = "DW-model";
    for (const auto& d : meta.dimensions) {
        XmlElem& de = root.add("dimension");
        de.set("dim-id", d.id).set("path", d.path);
        for (const auto& lvl : d.levels) {
            XmlElem& le = de.add("Level");
            le.set("id", lvl.id);
            for (const auto& a : lvl.attributes)
                le.add("attribute").set("name", a.name).set("type", to_string(a.type));
        }
    }
    for (const auto& f : meta.fact_sets) {
        XmlElem& fe = root.add("FactDoc");
        fe.set("id", f.id).set("path", f.path);
        for (const auto& m : f.measures)
            fe.add("measure").set("name", m.name).set("type", to_string(m.type));
        for (const auto& ref : f.dimension_refs) fe.add("dimension").set("ref", ref);
    }
    return root;
}

inline WarehouseMeta meta_from_xml(const XmlElem& root) {
    if (root.name != "DW-model")
        throw ParseError("dw-model", root.line, root.col,
                         "expected root <DW-model>, found <" + root.name + ">");
    WarehouseMeta meta;
    for (const auto& child : root.children) {
        if (child.name == "dimension") {
            DimensionMeta d;
            d.id = child.attr("dim-id");
            d.path = child.attr("path");
            for (const auto& le : child.children) {
                if (le.name != "Level")
                    throw ParseError("dw-model", le.line, le.col,
                                     "unexpected <" + le.name + "> inside <dimension>");
                LevelMeta lvl;
                lvl.id = le.attr("id");
                for (const auto& ae : le.children) {
                    if (ae.name != "attribute")
                        throw ParseError("dw-model", ae.line, ae.col,
                                         "unexpected <" + ae.name + "> inside <Level>");
                    lvl.attributes.push_back(
                        AttributeMeta{ae.attr("name"), attr_type_from_string(ae.attr("type"))});
                }
                d.levels.push_back(std::move(lvl));
            }
            meta.dimensions.push_back(std::move(d));
        } else if (child.name == "FactDoc") {
            FactSetMeta f;
            f.id = child.attr("id");
            f.path = child.attr("path");
            for (const auto& ce : child.children) {
                if (ce.name == "measure")
                    f.measures.push_back(
                        MeasureMeta{ce.attr("name"), attr_type_from_string(ce.attr("type"))});
                else if (ce.name == "dimension")
                    f.dimension_refs.push_back(ce.attr("ref"));
                else
                    throw ParseError("dw-model", ce.line, ce.col,
                                     "unexpected <" + ce.name + "> inside <FactDoc>");
            }
            meta.fact_sets.push_back(std::move(f));
        } else {
            throw ParseError("dw-model", child.line, child.col,
                             "unexpected <" + child.name + "> inside <DW-model>");
        }
    }
    validate_meta(meta);
    return meta;
}

// --- dimension document -----------------------------------------------------

inline XmlElem dimension_to_xml(const DimensionData& data) {
    XmlElem root;
    root.name = "dimension";
    root.set("dim-id", data.dimension_id);
    for (const auto& lvl : data.levels) {
        XmlElem& le = root.add("Level");
        le.set("id", lvl.id);
        for (const auto& inst : lvl.instances) {
            XmlElem& ie = le.add("instance");
            ie.set("id", inst.id);
            if (!inst.roll_up.empty()) ie.set("Roll-up", inst.roll_up);
            if (!inst.drill_down.empty()) {
                std::string joined;
                for (const auto& d : inst.drill_down) {
                    if (!joined.empty()) joined.push_back(' ');
                    joined += d;
                }
                ie.set("Drill-Down", joined);
            }
            for (const auto& [name, value] : inst.attributes)
                ie.add("attribute").set("id", name).set("value", value.text);
        }
    }
    return root;
}

inline DimensionData dimension_from_xml(const XmlElem& root, const DimensionMeta& meta) {
    if (root.name != "dimension")
        throw ParseError(meta.path, root.line, root.col,
                         "expected root <dimension>, found <" + root.name + ">");
    DimensionData data;
    data.dimension_id = root.attr("dim-id");
    for (const auto& le : root.children) {
        if (le.name != "Level")
            throw ParseError(meta.path, le.line, le.col,
                             "unexpected <" + le.name + "> inside <dimension>");
        LevelData lvl;
        lvl.id = le.attr("id");
        const LevelMeta* lmeta = nullptr;
        for (const auto& lm : meta.levels)
            if (lm.id == lvl.id) lmeta = &lm;
        if (!lmeta)
            throw IntegrityError("dimension '" + data.dimension_id + "' document declares level '" +
                                 lvl.id + "' absent from metadata");
        for (const auto& ie : le.children) {
            if (ie.name != "instance")
                throw ParseError(meta.path, ie.line, ie.col,
                                 "unexpected <" + ie.name + "> inside <Level>");
            Instance inst;
            inst.id = ie.attr("id");
            inst.roll_up = ie.attr_or("Roll-up");
            std::istringstream dd(ie.attr_or("Drill-Down"));
            for (std::string tok; dd >> tok;) inst.drill_down.push_back(tok);
            for (const auto& ae : ie.children) {
                if (ae.name != "attribute")
                    throw ParseError(meta.path, ae.line, ae.col,
                                     "unexpected <" + ae.name + "> inside <instance>");
                const std::string& name = ae.attr("id");
                const AttributeMeta* ameta = nullptr;
                for (const auto& am : lmeta->attributes)
                    if (am.name == name) ameta = &am;
                if (!ameta)
                    throw IntegrityError("instance '" + inst.id + "' of dimension '" +
                                         data.dimension_id + "' carries attribute '" + name +
                                         "' absent from level '" + lvl.id + "' metadata");
                inst.attributes.emplace_back(name, Value::parse(ameta->type, ae.attr("value")));
            }
            lvl.instances.push_back(std::move(inst));
        }
        data.levels.push_back(std::move(lvl));
    }
    return data;
}

// --- facts document ---------------------------------------------------------

inline XmlElem facts_to_xml(const FactData& data) {
    XmlElem root;
    root.name = "FactDoc";
    root.set("id", data.fact_set_id);
    for (const auto& fact : data.facts) {
        XmlElem& fe = root.add("Fact");
        for (const auto& [name, value] : fact.measures)
            fe.add("measure").set("id", name).set("value", value.text);
        for (const auto& [dim, ref] : fact.dimension_refs)
            fe.add("dimension").set("dim-id", dim).set("value-id", ref);
    }
    return root;
}

inline FactData facts_from_xml(const XmlElem& root, const FactSetMeta& meta) {
    if (root.name != "FactDoc")
        throw ParseError(meta.path, root.line, root.col,
                         "expected root <FactDoc>, found <" + root.name + ">");
    FactData data;
    data.fact_set_id = root.attr("id");
    for (const auto& fe : root.children) {
        if (fe.name != "Fact")
            throw ParseError(meta.path, fe.line, fe.col,
                             "unexpected <" + fe.name + "> inside <FactDoc>");
        Fact fact;
        for (const auto& ce : fe.children) {
            if (ce.name == "measure") {
                const std::string& name = ce.attr("id");
                const MeasureMeta* mmeta = nullptr;
                for (const auto& mm : meta.measures)
                    if (mm.name == name) mmeta = &mm;
                if (!mmeta)
                    throw IntegrityError("fact in '" + data.fact_set_id +
                                         "' carries unknown measure '" + name + "'");
                fact.measures.emplace_back(name, Value::parse(mmeta->type, ce.attr("value")));
            } else if (ce.name == "dimension") {
                fact.dimension_refs.emplace_back(ce.attr("dim-id"), ce.attr("value-id"));
            } else {
                throw ParseError(meta.path, ce.line, ce.col,
                                 "unexpected <" + ce.name + "> inside <Fact>");
            }
        }
        data.facts.push_back(std::move(fact));
    }
    return data;
}

// --- whole-warehouse load/save ----------------------------------------------

/// Writes dw-model.xml plus one document per dimension and fact set into
/// out_dir. Returns the written paths (model first).
inline std::vector<std::filesystem::path> save_warehouse(const Warehouse& wh,
                                                         const std::filesystem::path& out_dir) {
    validate_warehouse(wh);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec && !std::filesystem::is_directory(out_dir))
        throw IoError("cannot create directory " + out_dir.string());
    std::vector<std::filesystem::path> written;
    std::filesystem::path model = out_dir / "dw-model.xml";
    xml_save_file(meta_to_xml(wh.meta), model);
    written.push_back(model);
    for (const auto& dmeta : wh.meta.dimensions) {
        const DimensionData* data = wh.find_dimension_data(dmeta.id);
        std::filesystem::path p = out_dir / dmeta.path;
        xml_save_file(dimension_to_xml(*data), p);
        written.push_back(p);
    }
    for (const auto& fmeta : wh.meta.fact_sets) {
        const FactData* data = wh.find_fact_data(fmeta.id);
        std::filesystem::path p = out_dir / fmeta.path;
        xml_save_file(facts_to_xml(*data), p);
        written.push_back(p);
    }
    return written;
}

/// Loads a warehouse from its dw-model.xml. Dimension and fact documents are
/// resolved relative to the model file. All referential invariants are
/// checked; violations raise IntegrityError naming the offender.
inline Warehouse load_warehouse(const std::filesystem::path& model_path) {
    Warehouse wh;
    wh.meta = meta_from_xml(xml_load_file(model_path));
    std::filesystem::path dir = model_path.parent_path();
    for (const auto& dmeta : wh.meta.dimensions)
        wh.dimensions.push_back(dimension_from_xml(xml_load_file(dir / dmeta.path), dmeta));
    for (const auto& fmeta : wh.meta.fact_sets)
        wh.fact_sets.push_back(facts_from_xml(xml_load_file(dir / fmeta.path), fmeta));
    validate_warehouse(wh);
    return wh;
}

}  // namespace xfrag
