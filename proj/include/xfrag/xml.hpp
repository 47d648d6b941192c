#pragma once

// Minimal XML reader/writer for the attribute-only dialect used by the
// warehouse documents: elements, attributes, comments. No namespaces, no
// DTDs, no mixed content (non-whitespace text is rejected).

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xfrag/errors.hpp"

namespace xfrag {

struct XmlAttr {
    std::string name;
    std::string value;
    bool operator==(const XmlAttr&) const = default;
};

struct XmlElem {
    std::string name;
    std::vector<XmlAttr> attrs;
    std::vector<XmlElem> children;
    int line = 0;
    int col = 0;

    const std::string* find_attr(std::string_view n) const {
        for (const auto& a : attrs)
            if (a.name == n) return &a.value;
        return nullptr;
    }

    const std::string& attr(std::string_view n) const {
        if (const std::string* v = find_attr(n)) return *v;
        throw IntegrityError("element <" + name + "> at line " + std::to_string(line) +
                             " is missing attribute '" + std::string(n) + "'");
    }

    std::string attr_or(std::string_view n, std::string def = {}) const {
        if (const std::string* v = find_attr(n)) return *v;
        return def;
    }

    XmlElem& set(std::string n, std::string v) {
        attrs.push_back(XmlAttr{std::move(n), std::move(v)});
        return *this;
    }

    XmlElem& add(std::string child_name) {
        children.push_back(XmlElem{});
        children.back().name = std::move(child_name);
        return children.back();
    }

    /// Equality on names, attribute lists and children; source positions ignored.
    bool structurally_equal(const XmlElem& other) const {
        if (name != other.name || attrs != other.attrs ||
            children.size() != other.children.size())
            return false;
        for (std::size_t i = 0; i < children.size(); ++i)
            if (!children[i].structurally_equal(other.children[i])) return false;
        return true;
    }
};

namespace detail {

class XmlCursor {
public:
    XmlCursor(std::string_view text, std::string source)
        : text_(text), source_(std::move(source)) {
        // UTF-8 BOM
        if (text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }
    bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }
    int line() const { return line_; }
    int col() const { return col_; }

    char next() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip(std::size_t n) {
        for (std::size_t i = 0; i < n && !eof(); ++i) next();
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' || peek() == '\n'))
            next();
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(source_, line_, col_, what);
    }

    void expect(std::string_view s) {
        if (!starts_with(s)) fail("expected '" + std::string(s) + "'");
        skip(s.size());
    }

    std::string_view text() const { return text_; }
    std::size_t pos() const { return pos_; }
    const std::string& source() const { return source_; }

private:
    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

inline bool xml_name_start(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

inline bool xml_name_char(char c) {
    return xml_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.' || c == ':';
}

inline std::string xml_read_name(XmlCursor& cur) {
    if (cur.eof() || !xml_name_start(cur.peek())) cur.fail("expected a name");
    std::string out;
    while (!cur.eof() && xml_name_char(cur.peek())) out.push_back(cur.next());
    return out;
}

inline std::string xml_decode_entities(XmlCursor& cur, char quote) {
    std::string out;
    while (true) {
        if (cur.eof()) cur.fail("unterminated attribute value");
        char c = cur.peek();
        if (c == quote) break;
        if (c == '<') cur.fail("'<' not allowed in attribute value");
        if (c != '&') {
            out.push_back(cur.next());
            continue;
        }
        cur.next();
        std::string ent;
        while (!cur.eof() && cur.peek() != ';') {
            ent.push_back(cur.next());
            if (ent.size() > 8) cur.fail("malformed entity reference");
        }
        if (cur.eof()) cur.fail("unterminated entity reference");
        cur.next();  // ';'
        if (ent == "amp")
            out.push_back('&');
        else if (ent == "lt")
            out.push_back('<');
        else if (ent == "gt")
            out.push_back('>');
        else if (ent == "quot")
            out.push_back('"');
        else if (ent == "apos")
            out.push_back('\'');
        else if (!ent.empty() && ent[0] == '#') {
            long v = 0;
            try {
                v = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                        ? std::stol(ent.substr(2), nullptr, 16)
                        : std::stol(ent.substr(1));
            } catch (...) {
                cur.fail("malformed character reference '&" + ent + ";'");
            }
            if (v < 1 || v > 127) cur.fail("unsupported character reference '&" + ent + ";'");
            out.push_back(static_cast<char>(v));
        } else
            cur.fail("unknown entity '&" + ent + ";'");
    }
    return out;
}

inline void xml_skip_misc(XmlCursor& cur) {
    while (true) {
        cur.skip_ws();
        if (cur.starts_with("<!--")) {
            cur.skip(4);
            while (!cur.eof() && !cur.starts_with("-->")) cur.next();
            if (cur.eof()) cur.fail("unterminated comment");
            cur.skip(3);
        } else if (cur.starts_with("<?")) {
            cur.skip(2);
            while (!cur.eof() && !cur.starts_with("?>")) cur.next();
            if (cur.eof()) cur.fail("unterminated processing instruction");
            cur.skip(2);
        } else {
            return;
        }
    }
}

inline XmlElem xml_parse_element(XmlCursor& cur) {
    XmlElem elem;
    elem.line = cur.line();
    elem.col = cur.col();
    cur.expect("<");
    elem.name = xml_read_name(cur);
    while (true) {
        cur.skip_ws();
        if (cur.eof()) cur.fail("unterminated start tag <" + elem.name + ">");
        if (cur.starts_with("/>")) {
            cur.skip(2);
            return elem;
        }
        if (cur.peek() == '>') {
            cur.next();
            break;
        }
        XmlAttr attr;
        attr.name = xml_read_name(cur);
        cur.skip_ws();
        cur.expect("=");
        cur.skip_ws();
        char quote = cur.peek();
        if (quote != '"' && quote != '\'') cur.fail("expected quoted attribute value");
        cur.next();
        attr.value = xml_decode_entities(cur, quote);
        cur.next();  // closing quote
        for (const auto& a : elem.attrs)
            if (a.name == attr.name) cur.fail("duplicate attribute '" + attr.name + "'");
        elem.attrs.push_back(std::move(attr));
    }
    // content
    while (true) {
        int tline = cur.line(), tcol = cur.col();
        while (!cur.eof() && cur.peek() != '<') {
            char c = cur.next();
            if (c != ' ' && c != '\t' && c != '\r' && c != '\n')
                throw ParseError(cur.source(), tline, tcol, "text content is not supported");
        }
        if (cur.eof()) cur.fail("missing </" + elem.name + ">");
        if (cur.starts_with("</")) {
            cur.skip(2);
            std::string closing = xml_read_name(cur);
            if (closing != elem.name)
                cur.fail("mismatched closing tag </" + closing + ">, expected </" + elem.name + ">");
            cur.skip_ws();
            cur.expect(">");
            return elem;
        }
        if (cur.starts_with("<!--")) {
            cur.skip(4);
            while (!cur.eof() && !cur.starts_with("-->")) cur.next();
            if (cur.eof()) cur.fail("unterminated comment");
            cur.skip(3);
            continue;
        }
        elem.children.push_back(xml_parse_element(cur));
    }
}

inline void xml_escape_attr(const std::string& v, std::string& out) {
    for (char c : v) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
}

inline void xml_serialize_elem(const XmlElem& e, int depth, std::string& out) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out.push_back('<');
    out += e.name;
    for (const auto& a : e.attrs) {
        out.push_back(' ');
        out += a.name;
        out += "=\"";
        xml_escape_attr(a.value, out);
        out.push_back('"');
    }
    if (e.children.empty()) {
        out += "/>\n";
        return;
    }
    out += ">\n";
    for (const auto& c : e.children) xml_serialize_elem(c, depth + 1, out);
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    out += "</";
    out += e.name;
    out += ">\n";
}

}  // namespace detail

inline XmlElem xml_parse(std::string_view text, const std::string& source = "<xml>") {
    detail::XmlCursor cur(text, source);
    detail::xml_skip_misc(cur);
    if (cur.eof()) cur.fail("document has no root element");
    if (cur.peek() != '<') cur.fail("expected '<'");
    XmlElem root = detail::xml_parse_element(cur);
    detail::xml_skip_misc(cur);
    if (!cur.eof()) cur.fail("trailing content after root element");
    return root;
}

inline XmlElem xml_load_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return xml_parse(ss.str(), path.string());
}

inline std::string xml_serialize(const XmlElem& root) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    detail::xml_serialize_elem(root, 0, out);
    return out;
}

inline void xml_save_file(const XmlElem& root, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << xml_serialize(root);
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace xfrag
