#pragma once

// Workload parsing: a constrained XQuery shape (for/where/return over
// //FactDoc/Fact and //dimension[...]/Level/instance bindings), selection
// predicate extraction, and the binary query-predicate matrix.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xfrag/model.hpp"

namespace xfrag {

/// Order "p2" before "p10": digit runs compare numerically, the rest bytewise.
inline bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) &&
            std::isdigit(static_cast<unsigned char>(b[j]))) {
            std::size_t i0 = i, j0 = j;
            while (i < a.size() && std::isdigit(static_cast<unsigned char>(a[i]))) ++i;
            while (j < b.size() && std::isdigit(static_cast<unsigned char>(b[j]))) ++j;
            std::string_view da = a.substr(i0, i - i0), db = b.substr(j0, j - j0);
            std::string_view ta = da.substr(std::min(da.find_first_not_of('0'), da.size()));
            std::string_view tb = db.substr(std::min(db.find_first_not_of('0'), db.size()));
            if (ta.size() != tb.size()) return ta.size() < tb.size();
            if (ta != tb) return ta < tb;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

struct Predicate {
    std::string id;            // p1, p2, ... in first-appearance order
    std::string dimension_id;
    std::string attribute;
    CompareOp op = CompareOp::Eq;
    Value literal;             // raw string until bind, typed afterwards
    bool bound = false;

    bool operator==(const Predicate&) const = default;
};

struct Query {
    std::string id;            // q1, q2, ...
    long long frequency = 1;
    std::vector<std::string> predicate_ids;      // appearance order, deduplicated
    std::vector<std::string> joined_dimensions;  // appearance order, deduplicated
    std::string fact_set_id;                     // resolved at bind time

    bool uses(std::string_view predicate_id) const {
        return std::find(predicate_ids.begin(), predicate_ids.end(), predicate_id) !=
               predicate_ids.end();
    }
    bool operator==(const Query&) const = default;
};

struct Workload {
    std::vector<Query> queries;
    std::vector<Predicate> predicates;
    bool bound = false;

    const Predicate* find_predicate(std::string_view id) const {
        for (const auto& p : predicates)
            if (p.id == id) return &p;
        return nullptr;
    }
    const Predicate& predicate(std::string_view id) const {
        if (const Predicate* p = find_predicate(id)) return *p;
        throw ParamError("unknown predicate '" + std::string(id) + "'");
    }
    bool operator==(const Workload&) const = default;
};

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace detail {

enum class TokKind { Word, Var, Str, Sym, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    int line = 1;
    int col = 1;
};

class WorkloadLexer {
public:
    WorkloadLexer(std::string_view text, std::string source)
        : text_(text), source_(std::move(source)) {
        advance();
    }

    const Token& peek() const { return tok_; }
    const std::string& source() const { return source_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

    /// Frequency annotation seen since the last query, if any.
    std::optional<long long> take_pending_freq() {
        auto f = pending_freq_;
        pending_freq_.reset();
        return f;
    }

    [[noreturn]] void fail(const Token& at, const std::string& what) const {
        throw ParseError(source_, at.line, at.col, what);
    }

private:
    char cur() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    bool word_char(char c) const {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            char c = cur();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else if (c == '(' && pos_ + 1 < text_.size() && text_[pos_ + 1] == ':') {
                int cline = line_, ccol = col_;
                bump();
                bump();
                std::string body;
                while (pos_ < text_.size() &&
                       !(cur() == ':' && pos_ + 1 < text_.size() && text_[pos_ + 1] == ')')) {
                    body.push_back(cur());
                    bump();
                }
                if (pos_ >= text_.size())
                    throw ParseError(source_, cline, ccol, "unterminated comment");
                bump();
                bump();
                parse_freq_comment(body, cline, ccol);
            } else {
                return;
            }
        }
    }

    void parse_freq_comment(const std::string& body, int cline, int ccol) {
        std::string compact;
        for (char c : body)
            if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
        if (compact.rfind("freq=", 0) != 0) return;  // ordinary comment
        const std::string digits = compact.substr(5);
        if (digits.empty() ||
            digits.find_first_not_of("0123456789") != std::string::npos)
            throw ParseError(source_, cline, ccol, "malformed frequency annotation '" + body + "'");
        long long f = std::stoll(digits);
        if (f < 1) throw ParseError(source_, cline, ccol, "frequency must be >= 1");
        pending_freq_ = f;
    }

    void advance() {
        skip_space_and_comments();
        tok_ = Token{TokKind::End, "", line_, col_};
        if (pos_ >= text_.size()) return;
        char c = cur();
        tok_.line = line_;
        tok_.col = col_;
        if (c == '$') {
            bump();
            if (!word_char(cur()))
                throw ParseError(source_, tok_.line, tok_.col, "expected variable name after '$'");
            tok_.kind = TokKind::Var;
            while (pos_ < text_.size() && word_char(cur())) {
                tok_.text.push_back(cur());
                bump();
            }
            return;
        }
        if (c == '"') {
            bump();
            tok_.kind = TokKind::Str;
            while (pos_ < text_.size() && cur() != '"') {
                if (cur() == '\n')
                    throw ParseError(source_, tok_.line, tok_.col, "unterminated string literal");
                tok_.text.push_back(cur());
                bump();
            }
            if (pos_ >= text_.size())
                throw ParseError(source_, tok_.line, tok_.col, "unterminated string literal");
            bump();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            tok_.kind = TokKind::Word;
            while (pos_ < text_.size() && word_char(cur())) {
                tok_.text.push_back(cur());
                bump();
            }
            return;
        }
        tok_.kind = TokKind::Sym;
        if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
            tok_.text = "//";
            bump();
            bump();
            return;
        }
        if ((c == '!' || c == '<' || c == '>') && pos_ + 1 < text_.size() &&
            text_[pos_ + 1] == '=') {
            tok_.text = std::string(1, c) + "=";
            bump();
            bump();
            return;
        }
        if (std::string("/[]@,=<>").find(c) != std::string::npos) {
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        throw ParseError(source_, line_, col_, std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
    std::optional<long long> pending_freq_;
};

struct ParsedBinding {
    std::string var;
    bool is_fact = false;
    std::string dimension_id;
};

class WorkloadParser {
public:
    WorkloadParser(std::string_view text, std::string source) : lex_(text, std::move(source)) {}

    Workload run() {
        Workload wl;
        while (lex_.peek().kind != TokKind::End) parse_query(wl);
        return wl;
    }

private:
    Token expect_word(const std::string& w) {
        Token t = lex_.take();
        if (t.kind != TokKind::Word || t.text != w)
            lex_.fail(t, "expected '" + w + "', found '" + t.text + "'");
        return t;
    }

    Token expect_sym(const std::string& s) {
        Token t = lex_.take();
        if (t.kind != TokKind::Sym || t.text != s)
            lex_.fail(t, "expected '" + s + "', found '" + t.text + "'");
        return t;
    }

    Token expect_var() {
        Token t = lex_.take();
        if (t.kind != TokKind::Var) lex_.fail(t, "expected a variable, found '" + t.text + "'");
        return t;
    }

    Token expect_str() {
        Token t = lex_.take();
        if (t.kind != TokKind::Str)
            lex_.fail(t, "expected a quoted string, found '" + t.text + "'");
        return t;
    }

    bool peek_sym(const std::string& s) const {
        return lex_.peek().kind == TokKind::Sym && lex_.peek().text == s;
    }

    bool peek_word(const std::string& w) const {
        return lex_.peek().kind == TokKind::Word && lex_.peek().text == w;
    }

    ParsedBinding parse_binding() {
        ParsedBinding b;
        Token var = expect_var();
        b.var = var.text;
        expect_word("in");
        expect_sym("//");
        Token head = lex_.take();
        if (head.kind != TokKind::Word) lex_.fail(head, "expected 'FactDoc' or 'dimension'");
        if (head.text == "FactDoc") {
            expect_sym("/");
            expect_word("Fact");
            b.is_fact = true;
            return b;
        }
        if (head.text == "dimension") {
            expect_sym("[");
            expect_sym("@");
            expect_word("dim-id");
            expect_sym("=");
            b.dimension_id = expect_str().text;
            expect_sym("]");
            expect_sym("/");
            expect_word("Level");
            expect_sym("/");
            expect_word("instance");
            return b;
        }
        lex_.fail(head, "expected 'FactDoc' or 'dimension', found '" + head.text + "'");
    }

    void parse_query(Workload& wl) {
        std::optional<long long> freq = lex_.take_pending_freq();
        Token at = lex_.peek();
        expect_word("for");

        std::vector<ParsedBinding> bindings;
        bindings.push_back(parse_binding());
        while (peek_sym(",")) {
            lex_.take();
            bindings.push_back(parse_binding());
        }
        const ParsedBinding* fact_binding = nullptr;
        for (const auto& b : bindings) {
            if (!b.is_fact) continue;
            if (fact_binding)
                lex_.fail(at, "a query must bind the fact document exactly once");
            fact_binding = &b;
        }
        if (!fact_binding) lex_.fail(at, "a query must bind //FactDoc/Fact");

        auto find_binding = [&](const std::string& var) -> const ParsedBinding* {
            for (const auto& b : bindings)
                if (b.var == var) return &b;
            return nullptr;
        };

        Query query;
        query.id = "q" + std::to_string(wl.queries.size() + 1);
        query.frequency = freq.value_or(1);

        expect_word("where");
        while (true) {
            parse_condition(wl, query, *fact_binding, find_binding);
            if (peek_word("and")) {
                lex_.take();
                continue;
            }
            if (peek_word("or")) {
                Token t = lex_.take();
                lex_.fail(t, "disjunction is not supported; where-clauses are conjunctions");
            }
            break;
        }

        expect_word("return");
        Token ret = expect_var();
        if (ret.text != fact_binding->var)
            lex_.fail(ret, "queries must return the fact variable $" + fact_binding->var);

        // Every dimension carrying a selection predicate must be joined.
        for (const auto& pid : query.predicate_ids) {
            const Predicate& p = wl.predicate(pid);
            if (std::find(query.joined_dimensions.begin(), query.joined_dimensions.end(),
                          p.dimension_id) == query.joined_dimensions.end())
                lex_.fail(at, "query " + query.id + " selects on dimension '" + p.dimension_id +
                                  "' but never joins it to the facts");
        }

        wl.queries.push_back(std::move(query));
    }

    template <typename FindBinding>
    void parse_condition(Workload& wl, Query& query, const ParsedBinding& fact_binding,
                         FindBinding&& find_binding) {
        Token var = expect_var();
        const ParsedBinding* b = find_binding(var.text);
        if (!b) lex_.fail(var, "unbound variable $" + var.text);
        expect_sym("/");
        Token head = lex_.take();
        if (head.kind != TokKind::Word)
            lex_.fail(head, "expected 'attribute' or 'dimension' step");

        if (head.text == "attribute") {
            if (b->is_fact)
                lex_.fail(var, "selection predicates apply to dimension variables, not $" +
                                   var.text);
            expect_sym("[");
            expect_sym("@");
            expect_word("id");
            expect_sym("=");
            std::string attr = expect_str().text;
            expect_sym("]");
            expect_sym("/");
            expect_sym("@");
            expect_word("value");
            Token op_tok = lex_.take();
            if (op_tok.kind != TokKind::Sym)
                lex_.fail(op_tok, "expected a comparator, found '" + op_tok.text + "'");
            CompareOp op;
            try {
                op = compare_op_from_string(op_tok.text);
            } catch (const ParamError&) {
                lex_.fail(op_tok, "expected a comparator, found '" + op_tok.text + "'");
            }
            std::string literal = expect_str().text;
            const std::string pid = intern_predicate(wl, b->dimension_id, attr, op, literal);
            if (!query.uses(pid)) query.predicate_ids.push_back(pid);
            return;
        }

        if (head.text == "dimension") {
            if (!b->is_fact)
                lex_.fail(var, "join conditions start from the fact variable, not $" + var.text);
            expect_sym("[");
            expect_sym("@");
            expect_word("dim-id");
            expect_sym("=");
            Token dim_tok = expect_str();
            expect_sym("]");
            expect_sym("/");
            expect_sym("@");
            expect_word("value-id");
            expect_sym("=");
            Token dvar = expect_var();
            expect_sym("/");
            expect_sym("@");
            expect_word("id");
            const ParsedBinding* db = find_binding(dvar.text);
            if (!db) lex_.fail(dvar, "unbound variable $" + dvar.text);
            if (db->is_fact)
                lex_.fail(dvar, "join conditions end at a dimension variable, not $" + dvar.text);
            if (db->dimension_id != dim_tok.text)
                lex_.fail(dim_tok, "join names dimension '" + dim_tok.text + "' but $" +
                                       dvar.text + " is bound to '" + db->dimension_id + "'");
            (void)fact_binding;
            if (std::find(query.joined_dimensions.begin(), query.joined_dimensions.end(),
                          db->dimension_id) == query.joined_dimensions.end())
                query.joined_dimensions.push_back(db->dimension_id);
            return;
        }

        lex_.fail(head, "expected 'attribute' or 'dimension', found '" + head.text + "'");
    }

    std::string intern_predicate(Workload& wl, const std::string& dim, const std::string& attr,
                                 CompareOp op, const std::string& literal) {
        for (const auto& p : wl.predicates)
            if (p.dimension_id == dim && p.attribute == attr && p.op == op &&
                p.literal.text == literal)
                return p.id;
        Predicate p;
        p.id = "p" + std::to_string(wl.predicates.size() + 1);
        p.dimension_id = dim;
        p.attribute = attr;
        p.op = op;
        p.literal = Value::of_string(literal);
        wl.predicates.push_back(std::move(p));
        return wl.predicates.back().id;
    }

    WorkloadLexer lex_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline Workload parse_workload(std::string_view text, const std::string& source = "workload") {
    return detail::WorkloadParser(text, source).run();
}

/// Resolves every predicate against the warehouse metadata and coerces its
/// literal to the declared attribute type.
inline void bind_workload(Workload& wl, const WarehouseMeta& meta) {
    auto first_user = [&](const std::string& pid) -> std::string {
        for (const auto& q : wl.queries)
            if (q.uses(pid)) return q.id;
        return "?";
    };
    for (auto& p : wl.predicates) {
        const DimensionMeta* dim = meta.find_dimension(p.dimension_id);
        if (!dim)
            throw BindError("query " + first_user(p.id) + ", predicate " + p.id +
                            ": unknown dimension '" + p.dimension_id + "'");
        const AttributeMeta* attr = dim->find_attribute(p.attribute);
        if (!attr)
            throw BindError("query " + first_user(p.id) + ", predicate " + p.id +
                            ": dimension '" + p.dimension_id + "' has no attribute '" +
                            p.attribute + "'");
        try {
            p.literal = Value::parse(attr->type, p.literal.text);
        } catch (const BindError& e) {
            throw BindError("query " + first_user(p.id) + ", predicate " + p.id + ": " +
                            e.what());
        }
        p.bound = true;
    }
    for (auto& q : wl.queries) {
        for (const auto& d : q.joined_dimensions)
            if (!meta.find_dimension(d))
                throw BindError("query " + q.id + ": unknown dimension '" + d + "'");
        if (meta.fact_sets.size() != 1)
            throw BindError("query " + q.id + ": //FactDoc/Fact is ambiguous, warehouse declares " +
                            std::to_string(meta.fact_sets.size()) + " fact sets");
        q.fact_set_id = meta.fact_sets.front().id;
    }
    wl.bound = true;
}

/// Canonical text form; reparsing yields an identical workload.
inline std::string render_workload(const Workload& wl) {
    static const char* kDimVars[] = {"y", "z", "t", "u", "v", "w"};
    std::string out;
    for (const auto& q : wl.queries) {
        if (!out.empty()) out += "\n";
        if (q.frequency != 1) out += "(: freq=" + std::to_string(q.frequency) + " :)\n";
        std::map<std::string, std::string> var_of;
        for (std::size_t i = 0; i < q.joined_dimensions.size(); ++i)
            var_of[q.joined_dimensions[i]] =
                i < 6 ? kDimVars[i] : "d" + std::to_string(i + 1);
        out += "for $x in //FactDoc/Fact";
        for (const auto& d : q.joined_dimensions)
            out += ",\n    $" + var_of[d] + " in //dimension[@dim-id=\"" + d +
                   "\"]/Level/instance";
        out += "\nwhere ";
        bool first = true;
        for (const auto& pid : q.predicate_ids) {
            const Predicate& p = wl.predicate(pid);
            if (!first) out += "\n  and ";
            first = false;
            out += "$" + var_of[p.dimension_id] + "/attribute[@id=\"" + p.attribute +
                   "\"]/@value " + to_string(p.op) + " \"" + p.literal.text + "\"";
        }
        for (const auto& d : q.joined_dimensions) {
            if (!first) out += "\n  and ";
            first = false;
            out += "$x/dimension[@dim-id=\"" + d + "\"]/@value-id = $" + var_of[d] + "/@id";
        }
        out += "\nreturn $x\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Query-predicate matrix
// ---------------------------------------------------------------------------

struct QpMatrix {
    std::vector<std::string> queries;     // row ids, workload order
    std::vector<std::string> predicates;  // column ids, first-appearance order
    std::vector<std::vector<int>> cells;  // 0/1

    int at(std::size_t row, std::size_t col) const { return cells[row][col]; }

    std::string to_csv() const {
        std::string out = "query_id";
        for (const auto& p : predicates) out += "," + p;
        out += "\n";
        for (std::size_t i = 0; i < queries.size(); ++i) {
            out += queries[i];
            for (std::size_t j = 0; j < predicates.size(); ++j)
                out += "," + std::to_string(cells[i][j]);
            out += "\n";
        }
        return out;
    }
};

inline QpMatrix build_qp_matrix(const Workload& wl) {
    QpMatrix qp;
    for (const auto& q : wl.queries) qp.queries.push_back(q.id);
    for (const auto& p : wl.predicates) qp.predicates.push_back(p.id);
    qp.cells.assign(qp.queries.size(), std::vector<int>(qp.predicates.size(), 0));
    for (std::size_t i = 0; i < wl.queries.size(); ++i)
        for (std::size_t j = 0; j < wl.predicates.size(); ++j)
            qp.cells[i][j] = wl.queries[i].uses(wl.predicates[j].id) ? 1 : 0;
    return qp;
}

}  // namespace xfrag
