#include "ordirs/rs/filter.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <utility>

#include "ordirs/errors.hpp"
#include "ordirs/util/numeric.hpp"

namespace ordirs::rs {

namespace {

constexpr int kMaxAnchorDepth = 2;

enum class TokKind { Ident, String, Number, LParen, RParen, Comma, End };

struct Token {
    TokKind kind;
    std::string text;    // identifier name or decoded string payload
    double number = 0.0; // Number only, already canon6-quantized
    bool integral = false;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size()) return {TokKind::End, "", 0.0, false, start};
        char c = text_[pos_];
        if (c == '(') { ++pos_; return {TokKind::LParen, "(", 0.0, false, start}; }
        if (c == ')') { ++pos_; return {TokKind::RParen, ")", 0.0, false, start}; }
        if (c == ',') { ++pos_; return {TokKind::Comma, ",", 0.0, false, start}; }
        if (c == '"') return lex_string(start);
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.')
            return lex_number(start);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return lex_ident(start);
        fail("unexpected character '" + std::string(1, c) + "'", start);
    }

    [[noreturn]] void fail(const std::string& msg, std::size_t offset) const {
        std::size_t line = 1;
        std::size_t col = offset;
        for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = offset - i - 1;
            }
        }
        throw ParseError(msg, line, col);
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    Token lex_string(std::size_t start) {
        ++pos_;  // opening quote
        std::string out;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '"') {
                ++pos_;
                return {TokKind::String, out, 0.0, false, start};
            }
            if (c == '\\') {
                if (pos_ + 1 >= text_.size()) break;
                char esc = text_[pos_ + 1];
                if (esc != '"' && esc != '\\')
                    fail("unsupported escape '\\" + std::string(1, esc) + "'",
                         pos_);
                out.push_back(esc);
                pos_ += 2;
                continue;
            }
            if (c == '\n') fail("newline inside string literal", pos_);
            out.push_back(c);
            ++pos_;
        }
        fail("unterminated string literal", start);
    }

    Token lex_number(std::size_t start) {
        std::size_t end = pos_;
        bool integral = true;
        if (end < text_.size() && text_[end] == '-') ++end;
        while (end < text_.size()) {
            char c = text_[end];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                ++end;
            } else if (c == '.' || c == 'e' || c == 'E' || c == '+' ||
                       c == '-') {
                if ((c == '+' || c == '-') &&
                    !(text_[end - 1] == 'e' || text_[end - 1] == 'E'))
                    break;
                integral = false;
                ++end;
            } else {
                break;
            }
        }
        std::string lit = text_.substr(pos_, end - pos_);
        char* parse_end = nullptr;
        double v = std::strtod(lit.c_str(), &parse_end);
        if (parse_end != lit.c_str() + lit.size())
            fail("malformed number '" + lit + "'", start);
        pos_ = end;
        return {TokKind::Number, lit, util::canon6(v), integral, start};
    }

    Token lex_ident(std::size_t start) {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                text_[end] == '_')) {
            ++end;
        }
        std::string name = text_.substr(pos_, end - pos_);
        pos_ = end;
        return {TokKind::Ident, name, 0.0, false, start};
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { advance(); }

    FilterPtr parse() {
        FilterPtr f = parse_or(0);
        expect(TokKind::End, "trailing input after filter expression");
        return f;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    void expect(TokKind kind, const std::string& what) {
        if (cur_.kind != kind) lexer_.fail(what, cur_.offset);
        if (kind != TokKind::End) advance();
    }

    bool accept_ident(const char* name) {
        if (cur_.kind == TokKind::Ident && cur_.text == name) {
            advance();
            return true;
        }
        return false;
    }

    FilterPtr parse_or(int anchor_depth) {
        std::vector<FilterPtr> ops;
        ops.push_back(parse_and(anchor_depth));
        while (accept_ident("OR")) ops.push_back(parse_and(anchor_depth));
        if (ops.size() == 1) return ops.front();
        return std::make_shared<FilterExpr>(FilterExpr{FilterOr{std::move(ops)}});
    }

    FilterPtr parse_and(int anchor_depth) {
        std::vector<FilterPtr> ops;
        ops.push_back(parse_not(anchor_depth));
        while (accept_ident("AND")) ops.push_back(parse_not(anchor_depth));
        if (ops.size() == 1) return ops.front();
        return std::make_shared<FilterExpr>(FilterExpr{FilterAnd{std::move(ops)}});
    }

    FilterPtr parse_not(int anchor_depth) {
        if (accept_ident("NOT")) {
            FilterPtr inner = parse_atom(anchor_depth);
            return std::make_shared<FilterExpr>(
                FilterExpr{FilterNot{std::move(inner)}});
        }
        return parse_atom(anchor_depth);
    }

    FilterPtr parse_atom(int anchor_depth) {
        if (cur_.kind == TokKind::LParen) {
            advance();
            FilterPtr inner = parse_or(anchor_depth);
            expect(TokKind::RParen, "expected ')'");
            return inner;
        }
        if (cur_.kind != TokKind::Ident)
            lexer_.fail("expected an atom", cur_.offset);

        std::string name = cur_.text;
        std::size_t name_offset = cur_.offset;
        advance();

        if (name == "LABEL" || name == "SEM") {
            expect(TokKind::LParen, "expected '(' after " + name);
            if (cur_.kind != TokKind::String)
                lexer_.fail(name + " takes a quoted string", cur_.offset);
            std::string payload = cur_.text;
            advance();
            expect(TokKind::RParen, "expected ')'");
            if (name == "LABEL")
                return std::make_shared<FilterExpr>(
                    FilterExpr{FilterLabel{std::move(payload)}});
            return std::make_shared<FilterExpr>(
                FilterExpr{FilterSem{std::move(payload)}});
        }

        spatial::PredKind kind;
        if (!spatial::pred_kind_from_name(name, kind))
            lexer_.fail("unknown atom '" + name + "'", name_offset);
        return parse_spred(kind, anchor_depth);
    }

    FilterPtr parse_spred(spatial::PredKind kind, int anchor_depth) {
        if (cur_.kind != TokKind::LParen)
            lexer_.fail("expected '(' after predicate name", cur_.offset);
        std::size_t args_offset = cur_.offset;
        advance();

        spatial::SpatialPredicate pred;
        pred.kind = kind;
        FilterPtr anchor;

        using spatial::PredKind;
        switch (kind) {
            case PredKind::LeftOf:
            case PredKind::RightOf:
            case PredKind::Above:
            case PredKind::Below:
            case PredKind::NearerThan:
            case PredKind::FartherThan:
                anchor = parse_anchor(anchor_depth, args_offset);
                break;

            case PredKind::WithinPx: {
                double radius =
                    expect_number("WITHIN_PX takes (radius, ANCHOR(...))",
                                  args_offset);
                if (!(radius > 0.0))
                    lexer_.fail("WITHIN_PX radius must be > 0", args_offset);
                pred.radius = radius;
                expect(TokKind::Comma, "expected ',' before ANCHOR");
                anchor = parse_anchor(anchor_depth, args_offset);
                break;
            }

            case PredKind::Overlaps: {
                if (cur_.kind == TokKind::Number) {
                    double tau = cur_.number;
                    if (!(tau > 0.0 && tau <= 1.0))
                        lexer_.fail("OVERLAPS threshold must be in (0, 1]",
                                    cur_.offset);
                    pred.iou_threshold = tau;
                    pred.has_threshold = true;
                    advance();
                    expect(TokKind::Comma, "expected ',' before ANCHOR");
                }
                anchor = parse_anchor(anchor_depth, args_offset);
                break;
            }

            case PredKind::NearestK:
            case PredKind::FarthestK: {
                pred.k = expect_k(args_offset);
                expect(TokKind::Comma, "expected ',' before ANCHOR");
                anchor = parse_anchor(anchor_depth, args_offset);
                break;
            }

            case PredKind::LargestK:
                pred.k = expect_k(args_offset);
                break;
        }

        expect(TokKind::RParen, "expected ')' closing predicate arguments");
        return std::make_shared<FilterExpr>(
            FilterExpr{FilterSpatial{pred, std::move(anchor)}});
    }

    double expect_number(const std::string& what, std::size_t args_offset) {
        if (cur_.kind != TokKind::Number) lexer_.fail(what, args_offset);
        double v = cur_.number;
        advance();
        return v;
    }

    std::int64_t expect_k(std::size_t args_offset) {
        if (cur_.kind != TokKind::Number || !cur_.integral)
            lexer_.fail("k must be a positive integer", args_offset);
        std::int64_t k = static_cast<std::int64_t>(cur_.number);
        if (k < 1) lexer_.fail("k must be >= 1", cur_.offset);
        advance();
        return k;
    }

    FilterPtr parse_anchor(int anchor_depth, std::size_t args_offset) {
        if (cur_.kind != TokKind::Ident || cur_.text != "ANCHOR")
            lexer_.fail("expected ANCHOR(...)", args_offset);
        std::size_t anchor_offset = cur_.offset;
        if (anchor_depth + 1 > kMaxAnchorDepth)
            lexer_.fail("ANCHOR nesting deeper than 2", anchor_offset);
        advance();
        expect(TokKind::LParen, "expected '(' after ANCHOR");
        FilterPtr inner = parse_or(anchor_depth + 1);
        expect(TokKind::RParen, "expected ')' closing ANCHOR");
        return inner;
    }

    Lexer lexer_;
    Token cur_;
};

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

enum Precedence { kOr = 0, kAnd = 1, kAtom = 2 };

int node_precedence(const FilterExpr& e) {
    if (std::holds_alternative<FilterOr>(e.node)) return kOr;
    if (std::holds_alternative<FilterAnd>(e.node)) return kAnd;
    return kAtom;  // NOT binds like an atom prefix; atoms are self-delimiting
}

void print_node(const FilterExpr& e, int min_prec, std::string& out);

void print_operand(const FilterPtr& child, int min_prec, std::string& out) {
    if (node_precedence(*child) < min_prec) {
        out.push_back('(');
        print_node(*child, kOr, out);
        out.push_back(')');
    } else {
        print_node(*child, min_prec, out);
    }
}

void print_node(const FilterExpr& e, int /*min_prec*/, std::string& out) {
    if (const auto* o = std::get_if<FilterOr>(&e.node)) {
        for (std::size_t i = 0; i < o->operands.size(); ++i) {
            if (i) out += " OR ";
            print_operand(o->operands[i], kAnd, out);
        }
        return;
    }
    if (const auto* a = std::get_if<FilterAnd>(&e.node)) {
        for (std::size_t i = 0; i < a->operands.size(); ++i) {
            if (i) out += " AND ";
            print_operand(a->operands[i], kAtom, out);
        }
        return;
    }
    if (const auto* n = std::get_if<FilterNot>(&e.node)) {
        out += "NOT ";
        // Grammar allows exactly one NOT before an atom, so a nested
        // NOT/OR/AND operand must be parenthesized.
        print_operand(n->operand,
                      std::holds_alternative<FilterNot>(n->operand->node)
                          ? kAtom + 1
                          : kAtom,
                      out);
        return;
    }
    if (const auto* l = std::get_if<FilterLabel>(&e.node)) {
        out += "LABEL(" + quote_string(l->label) + ")";
        return;
    }
    if (const auto* s = std::get_if<FilterSem>(&e.node)) {
        out += "SEM(" + quote_string(s->question) + ")";
        return;
    }
    const auto& sp = std::get<FilterSpatial>(e.node);
    out += spatial::pred_kind_name(sp.pred.kind);
    out.push_back('(');
    using spatial::PredKind;
    switch (sp.pred.kind) {
        case PredKind::WithinPx:
            out += util::format_sig6(sp.pred.radius) + ", ";
            break;
        case PredKind::Overlaps:
            if (sp.pred.has_threshold)
                out += util::format_sig6(sp.pred.iou_threshold) + ", ";
            break;
        case PredKind::NearestK:
        case PredKind::FarthestK:
            out += std::to_string(sp.pred.k) + ", ";
            break;
        case PredKind::LargestK:
            out += std::to_string(sp.pred.k);
            break;
        default:
            break;
    }
    if (sp.anchor) {
        out += "ANCHOR(";
        print_node(*sp.anchor, kOr, out);
        out.push_back(')');
    }
    out.push_back(')');
}

template <typename Fn>
void walk(const FilterExpr& e, const Fn& fn) {
    fn(e);
    if (const auto* o = std::get_if<FilterOr>(&e.node)) {
        for (const auto& c : o->operands) walk(*c, fn);
    } else if (const auto* a = std::get_if<FilterAnd>(&e.node)) {
        for (const auto& c : a->operands) walk(*c, fn);
    } else if (const auto* n = std::get_if<FilterNot>(&e.node)) {
        walk(*n->operand, fn);
    } else if (const auto* s = std::get_if<FilterSpatial>(&e.node)) {
        if (s->anchor) walk(*s->anchor, fn);
    }
}

}  // namespace

FilterPtr parse_filter(const std::string& text) {
    Parser parser(text);
    return parser.parse();
}

std::string print_filter(const FilterExpr& expr) {
    std::string out;
    print_node(expr, kOr, out);
    return out;
}

std::string print_filter(const FilterPtr& expr) {
    if (!expr) throw InputError("print_filter: null expression");
    return print_filter(*expr);
}

bool filter_equal(const FilterExpr& a, const FilterExpr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const auto* ao = std::get_if<FilterOr>(&a.node)) {
        const auto& bo = std::get<FilterOr>(b.node);
        if (ao->operands.size() != bo.operands.size()) return false;
        for (std::size_t i = 0; i < ao->operands.size(); ++i)
            if (!filter_equal(*ao->operands[i], *bo.operands[i])) return false;
        return true;
    }
    if (const auto* aa = std::get_if<FilterAnd>(&a.node)) {
        const auto& ba = std::get<FilterAnd>(b.node);
        if (aa->operands.size() != ba.operands.size()) return false;
        for (std::size_t i = 0; i < aa->operands.size(); ++i)
            if (!filter_equal(*aa->operands[i], *ba.operands[i])) return false;
        return true;
    }
    if (const auto* an = std::get_if<FilterNot>(&a.node)) {
        return filter_equal(*an->operand,
                            *std::get<FilterNot>(b.node).operand);
    }
    if (const auto* al = std::get_if<FilterLabel>(&a.node)) {
        return al->label == std::get<FilterLabel>(b.node).label;
    }
    if (const auto* as = std::get_if<FilterSem>(&a.node)) {
        return as->question == std::get<FilterSem>(b.node).question;
    }
    const auto& asp = std::get<FilterSpatial>(a.node);
    const auto& bsp = std::get<FilterSpatial>(b.node);
    if (asp.pred.kind != bsp.pred.kind) return false;
    if (asp.pred.radius != bsp.pred.radius) return false;
    if (asp.pred.iou_threshold != bsp.pred.iou_threshold) return false;
    if (asp.pred.has_threshold != bsp.pred.has_threshold) return false;
    if (asp.pred.k != bsp.pred.k) return false;
    if (!asp.anchor != !bsp.anchor) return false;
    if (asp.anchor && !filter_equal(*asp.anchor, *bsp.anchor)) return false;
    return true;
}

bool filter_equal(const FilterPtr& a, const FilterPtr& b) {
    if (!a || !b) return !a && !b;
    return filter_equal(*a, *b);
}

int filter_anchor_depth(const FilterExpr& expr) {
    struct Visitor {
        static int depth(const FilterExpr& e) {
            int best = 0;
            if (const auto* o = std::get_if<FilterOr>(&e.node)) {
                for (const auto& c : o->operands)
                    best = std::max(best, depth(*c));
            } else if (const auto* a = std::get_if<FilterAnd>(&e.node)) {
                for (const auto& c : a->operands)
                    best = std::max(best, depth(*c));
            } else if (const auto* n = std::get_if<FilterNot>(&e.node)) {
                best = depth(*n->operand);
            } else if (const auto* s = std::get_if<FilterSpatial>(&e.node)) {
                if (s->anchor) best = 1 + depth(*s->anchor);
            }
            return best;
        }
    };
    return Visitor::depth(expr);
}

bool filter_has_semantic_atom(const FilterExpr& expr) {
    bool found = false;
    walk(expr, [&](const FilterExpr& e) {
        if (std::holds_alternative<FilterLabel>(e.node) ||
            std::holds_alternative<FilterSem>(e.node))
            found = true;
    });
    return found;
}

bool filter_has_spatial_atom(const FilterExpr& expr) {
    bool found = false;
    walk(expr, [&](const FilterExpr& e) {
        if (std::holds_alternative<FilterSpatial>(e.node)) found = true;
    });
    return found;
}

std::vector<std::string> filter_sem_questions(const FilterExpr& expr) {
    std::vector<std::string> out;
    walk(expr, [&](const FilterExpr& e) {
        if (const auto* s = std::get_if<FilterSem>(&e.node)) {
            if (std::find(out.begin(), out.end(), s->question) == out.end())
                out.push_back(s->question);
        }
    });
    return out;
}

}  // namespace ordirs::rs
