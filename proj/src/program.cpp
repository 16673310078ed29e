#include "ordirs/agent/program.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <variant>

#include "ordirs/errors.hpp"
#include "ordirs/util/numeric.hpp"

namespace ordirs::agent {
namespace {

enum class Type {
    kNumber,
    kNumSeries,
    kBoolSeries,
    kCount,
    kFrame,
    kFrames,
    kFramesList,
    kRate,
};

const char* type_name(Type t) {
    switch (t) {
        case Type::kNumber: return "number";
        case Type::kNumSeries: return "number series";
        case Type::kBoolSeries: return "bool series";
        case Type::kCount: return "count";
        case Type::kFrame: return "frame";
        case Type::kFrames: return "frames";
        case Type::kFramesList: return "frames list";
        case Type::kRate: return "rate";
    }
    return "?";
}

bool is_series(Type t) {
    return t == Type::kNumSeries || t == Type::kBoolSeries;
}

enum class Source { kPresence, kArea, kCount, kCentroidX, kCentroidY };

enum class Fn {
    kThreshold,
    kRisingEdges,
    kFallingEdges,
    kFirstTrue,
    kLastTrue,
    kCountTrue,
    kDurations,
    kBetween,
    kRate,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct SourceExpr { Source source; };
struct NumberExpr { double value; };
struct VarExpr { std::string name; };
struct FpsExpr {};
struct CallExpr {
    Fn fn;
    std::vector<ExprPtr> args;
};

struct Expr {
    std::variant<SourceExpr, NumberExpr, VarExpr, FpsExpr, CallExpr> node;
    Type type = Type::kNumber;
};

struct Statement {
    std::string name;
    ExprPtr expr;
};

[[noreturn]] void fail(std::size_t line_no, const std::string& msg) {
    throw ProgramError("line " + std::to_string(line_no) + ": " + msg);
}

const std::map<std::string, Source>& source_table() {
    static const std::map<std::string, Source> kSources = {
        {"PRESENCE", Source::kPresence},
        {"AREA", Source::kArea},
        {"COUNT", Source::kCount},
        {"CENTROID_X", Source::kCentroidX},
        {"CENTROID_Y", Source::kCentroidY},
    };
    return kSources;
}

struct FnSignature {
    Fn fn;
    std::vector<Type> params;  // Type of each argument; kNumber for FPS slot
    Type result;
    bool second_is_fps = false;
};

const std::map<std::string, FnSignature>& fn_table() {
    static const std::map<std::string, FnSignature> kFns = {
        {"THRESHOLD",
         {Fn::kThreshold, {Type::kNumSeries, Type::kNumber}, Type::kBoolSeries}},
        {"RISING_EDGES", {Fn::kRisingEdges, {Type::kBoolSeries}, Type::kCount}},
        {"FALLING_EDGES",
         {Fn::kFallingEdges, {Type::kBoolSeries}, Type::kCount}},
        {"FIRST_TRUE", {Fn::kFirstTrue, {Type::kBoolSeries}, Type::kFrame}},
        {"LAST_TRUE", {Fn::kLastTrue, {Type::kBoolSeries}, Type::kFrame}},
        {"COUNT_TRUE", {Fn::kCountTrue, {Type::kBoolSeries}, Type::kFrames}},
        {"DURATIONS", {Fn::kDurations, {Type::kBoolSeries}, Type::kFramesList}},
        {"BETWEEN",
         {Fn::kBetween, {Type::kFrame, Type::kFrame}, Type::kFrames}},
        {"RATE", {Fn::kRate, {Type::kCount, Type::kNumber}, Type::kRate, true}},
    };
    return kFns;
}

struct Token {
    enum Kind { kIdent, kNumber, kLParen, kRParen, kComma, kEquals, kEnd };
    Kind kind = kEnd;
    std::string text;
    double number = 0.0;
};

std::vector<Token> tokenize_line(const std::string& line, std::size_t line_no) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < line.size() &&
                   (std::isalnum(static_cast<unsigned char>(line[i])) ||
                    line[i] == '_'))
                ++i;
            tokens.push_back({Token::kIdent, line.substr(start, i - start), 0});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
            c == '.') {
            std::size_t start = i;
            if (line[i] == '-') ++i;
            while (i < line.size() &&
                   (std::isdigit(static_cast<unsigned char>(line[i])) ||
                    line[i] == '.' || line[i] == 'e' || line[i] == 'E' ||
                    ((line[i] == '+' || line[i] == '-') &&
                     (line[i - 1] == 'e' || line[i - 1] == 'E'))))
                ++i;
            std::string text = line.substr(start, i - start);
            char* end = nullptr;
            double v = std::strtod(text.c_str(), &end);
            if (end == nullptr || *end != '\0')
                fail(line_no, "malformed number '" + text + "'");
            tokens.push_back({Token::kNumber, text, v});
            continue;
        }
        if (c == '(') tokens.push_back({Token::kLParen, "(", 0});
        else if (c == ')') tokens.push_back({Token::kRParen, ")", 0});
        else if (c == ',') tokens.push_back({Token::kComma, ",", 0});
        else if (c == '=') tokens.push_back({Token::kEquals, "=", 0});
        else fail(line_no, std::string("unexpected character '") + c + "'");
        ++i;
    }
    tokens.push_back({Token::kEnd, "", 0});
    return tokens;
}

class LineParser {
public:
    LineParser(std::vector<Token> tokens, std::size_t line_no,
               const std::map<std::string, Type>& env)
        : tokens_(std::move(tokens)), line_no_(line_no), env_(env) {}

    ExprPtr parse_expression() {
        ExprPtr e = parse_one();
        expect(Token::kEnd, "end of line");
        return e;
    }

    ExprPtr parse_one() {
        const Token& t = peek();
        if (t.kind == Token::kNumber) {
            advance();
            auto e = std::make_shared<Expr>();
            e->node = NumberExpr{t.number};
            e->type = Type::kNumber;
            return e;
        }
        if (t.kind != Token::kIdent)
            fail(line_no_, "expected an expression, got '" + t.text + "'");
        std::string name = t.text;
        advance();

        auto fn_it = fn_table().find(name);
        if (fn_it != fn_table().end()) return parse_call(fn_it->second, name);

        if (peek().kind == Token::kLParen)
            fail(line_no_, "'" + name + "' is not a known function");

        auto src_it = source_table().find(name);
        if (src_it != source_table().end()) {
            auto e = std::make_shared<Expr>();
            e->node = SourceExpr{src_it->second};
            e->type = src_it->second == Source::kPresence ? Type::kBoolSeries
                                                          : Type::kNumSeries;
            return e;
        }
        if (name == "FPS") {
            auto e = std::make_shared<Expr>();
            e->node = FpsExpr{};
            e->type = Type::kNumber;
            return e;
        }
        auto var_it = env_.find(name);
        if (var_it == env_.end())
            fail(line_no_, "variable '" + name + "' is not defined");
        auto e = std::make_shared<Expr>();
        e->node = VarExpr{name};
        e->type = var_it->second;
        return e;
    }

private:
    ExprPtr parse_call(const FnSignature& sig, const std::string& name) {
        expect(Token::kLParen, "'(' after " + name);
        std::vector<ExprPtr> args;
        if (peek().kind != Token::kRParen) {
            args.push_back(parse_one());
            while (peek().kind == Token::kComma) {
                advance();
                args.push_back(parse_one());
            }
        }
        expect(Token::kRParen, "')' closing " + name);
        if (args.size() != sig.params.size())
            fail(line_no_, name + " takes " +
                               std::to_string(sig.params.size()) +
                               " arguments, got " + std::to_string(args.size()));
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (sig.second_is_fps && i == 1) {
                if (!std::holds_alternative<FpsExpr>(args[i]->node))
                    fail(line_no_,
                         name + "'s second argument must be the FPS keyword");
                continue;
            }
            if (args[i]->type != sig.params[i])
                fail(line_no_, name + " argument " + std::to_string(i + 1) +
                                   " must be a " + type_name(sig.params[i]) +
                                   ", got " + type_name(args[i]->type));
            if (std::holds_alternative<FpsExpr>(args[i]->node) &&
                !sig.second_is_fps)
                fail(line_no_, "FPS is only valid as RATE's second argument");
        }
        auto e = std::make_shared<Expr>();
        e->node = CallExpr{sig.fn, std::move(args)};
        e->type = sig.result;
        return e;
    }

    const Token& peek() const { return tokens_[pos_]; }
    void advance() { ++pos_; }
    void expect(Token::Kind kind, const std::string& what) {
        if (tokens_[pos_].kind != kind)
            fail(line_no_, "expected " + what);
        ++pos_;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t line_no_;
    const std::map<std::string, Type>& env_;
};

bool reserved_name(const std::string& name) {
    return source_table().count(name) > 0 || fn_table().count(name) > 0 ||
           name == "FPS" || name == "OUTPUT";
}

struct EvalValue {
    Type type = Type::kNumber;
    double scalar = 0.0;
    std::vector<std::uint8_t> bools;
    std::vector<double> nums;
    std::vector<double> list;
    std::vector<std::size_t> defining;  // positions within the run
};

}  // namespace

struct AnalysisProgram::Impl {
    std::vector<Statement> statements;
    std::map<std::string, Type> types;
};

AnalysisProgram AnalysisProgram::parse(const std::string& text) {
    auto impl = std::make_shared<Impl>();
    std::vector<std::string> outputs;
    bool saw_output = false;
    std::size_t output_line = 0;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        std::string line = end == std::string::npos
                               ? text.substr(start)
                               : text.substr(start, end - start);
        start = end == std::string::npos ? text.size() + 1 : end + 1;
        ++line_no;

        std::vector<Token> tokens = tokenize_line(line, line_no);
        if (tokens.size() == 1) continue;
        if (saw_output)
            fail(output_line,
                 "OUTPUT must be the last statement of the program");

        if (tokens[0].kind == Token::kIdent && tokens[0].text == "OUTPUT") {
            std::size_t pos = 1;
            for (;;) {
                if (tokens[pos].kind != Token::kIdent)
                    fail(line_no, "OUTPUT expects variable names");
                const std::string& name = tokens[pos].text;
                auto it = impl->types.find(name);
                if (it == impl->types.end())
                    fail(line_no, "output '" + name + "' is not defined");
                if (is_series(it->second) || it->second == Type::kNumber)
                    fail(line_no, "output '" + name + "' is a " +
                                      type_name(it->second) +
                                      "; only event and duration values can "
                                      "be exported");
                if (std::find(outputs.begin(), outputs.end(), name) !=
                    outputs.end())
                    fail(line_no, "output '" + name + "' is listed twice");
                outputs.push_back(name);
                ++pos;
                if (tokens[pos].kind == Token::kComma) {
                    ++pos;
                    continue;
                }
                break;
            }
            if (tokens[pos].kind != Token::kEnd)
                fail(line_no, "unexpected tokens after the OUTPUT list");
            saw_output = true;
            output_line = line_no;
            continue;
        }

        if (tokens[0].kind != Token::kIdent ||
            tokens[1].kind != Token::kEquals)
            fail(line_no, "expected 'name = expression' or 'OUTPUT ...'");
        const std::string& name = tokens[0].text;
        if (reserved_name(name))
            fail(line_no, "'" + name + "' is a reserved word");
        if (impl->types.count(name) > 0)
            fail(line_no, "variable '" + name + "' is assigned twice");

        LineParser parser(
            std::vector<Token>(tokens.begin() + 2, tokens.end()), line_no,
            impl->types);
        ExprPtr expr = parser.parse_expression();
        impl->types[name] = expr->type;
        impl->statements.push_back({name, std::move(expr)});
    }

    if (!saw_output)
        throw ProgramError("program has no OUTPUT statement");
    if (outputs.empty()) throw ProgramError("OUTPUT list is empty");

    AnalysisProgram program;
    program.impl_ = std::move(impl);
    program.outputs_ = std::move(outputs);
    program.text_ = text;
    return program;
}

namespace {

EvalValue eval_expr(const Expr& expr, const SeriesBundle& series,
                    const std::map<std::string, EvalValue>& env);

EvalValue eval_call(const CallExpr& call, Type result_type,
                    const SeriesBundle& series,
                    const std::map<std::string, EvalValue>& env) {
    std::vector<EvalValue> args;
    for (const auto& arg : call.args)
        args.push_back(eval_expr(*arg, series, env));

    EvalValue out;
    out.type = result_type;
    switch (call.fn) {
        case Fn::kThreshold: {
            double tau = args[1].scalar;
            out.bools.reserve(args[0].nums.size());
            for (double v : args[0].nums)
                out.bools.push_back(!std::isnan(v) && v >= tau ? 1 : 0);
            return out;
        }
        case Fn::kRisingEdges: {
            const auto& s = args[0].bools;
            std::int64_t count = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                bool rise = s[i] && (i == 0 || !s[i - 1]);
                if (rise) {
                    ++count;
                    out.defining.push_back(i);
                }
            }
            out.scalar = static_cast<double>(count);
            return out;
        }
        case Fn::kFallingEdges: {
            const auto& s = args[0].bools;
            std::int64_t count = 0;
            for (std::size_t i = 1; i < s.size(); ++i) {
                if (!s[i] && s[i - 1]) {
                    ++count;
                    out.defining.push_back(i - 1);
                }
            }
            out.scalar = static_cast<double>(count);
            return out;
        }
        case Fn::kFirstTrue:
        case Fn::kLastTrue: {
            const auto& s = args[0].bools;
            std::size_t found = s.size();
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!s[i]) continue;
                found = i;
                if (call.fn == Fn::kFirstTrue) break;
            }
            if (found == s.size())
                throw ProgramError(std::string(call.fn == Fn::kFirstTrue
                                                   ? "FIRST_TRUE"
                                                   : "LAST_TRUE") +
                                   ": the series is never true");
            out.scalar = static_cast<double>(found);
            out.defining.push_back(found);
            return out;
        }
        case Fn::kCountTrue: {
            std::int64_t count = 0;
            for (std::uint8_t b : args[0].bools) count += b ? 1 : 0;
            out.scalar = static_cast<double>(count);
            return out;
        }
        case Fn::kDurations: {
            const auto& s = args[0].bools;
            std::size_t run = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (s[i]) {
                    if (run == 0) out.defining.push_back(i);
                    ++run;
                }
                if ((!s[i] || i + 1 == s.size()) && run > 0) {
                    out.list.push_back(static_cast<double>(run));
                    run = 0;
                }
            }
            return out;
        }
        case Fn::kBetween: {
            std::size_t a = static_cast<std::size_t>(args[0].scalar);
            std::size_t b = static_cast<std::size_t>(args[1].scalar);
            out.scalar = static_cast<double>(series.frame_indices[b] -
                                             series.frame_indices[a]);
            out.defining = args[0].defining;
            out.defining.insert(out.defining.end(), args[1].defining.begin(),
                                args[1].defining.end());
            return out;
        }
        case Fn::kRate: {
            if (series.frame_indices.empty())
                throw ProgramError("RATE over an empty run");
            double duration_seconds =
                static_cast<double>(series.frame_indices.size()) / series.fps;
            out.scalar = args[0].scalar / duration_seconds;
            out.defining = args[0].defining;
            return out;
        }
    }
    throw ProgramError("unknown function");
}

EvalValue eval_expr(const Expr& expr, const SeriesBundle& series,
                    const std::map<std::string, EvalValue>& env) {
    EvalValue out;
    out.type = expr.type;
    if (const auto* num = std::get_if<NumberExpr>(&expr.node)) {
        out.scalar = num->value;
        return out;
    }
    if (std::get_if<FpsExpr>(&expr.node)) {
        out.scalar = series.fps;
        return out;
    }
    if (const auto* var = std::get_if<VarExpr>(&expr.node))
        return env.at(var->name);
    if (const auto* src = std::get_if<SourceExpr>(&expr.node)) {
        switch (src->source) {
            case Source::kPresence:
                out.bools.assign(series.presence.begin(),
                                 series.presence.end());
                break;
            case Source::kArea:
                out.nums = series.area;
                break;
            case Source::kCount:
                out.nums = series.count;
                break;
            case Source::kCentroidX:
                out.nums = series.centroid_x;
                break;
            case Source::kCentroidY:
                out.nums = series.centroid_y;
                break;
        }
        return out;
    }
    return eval_call(std::get<CallExpr>(expr.node), expr.type, series, env);
}

}  // namespace

MetricOutputs AnalysisProgram::evaluate(const SeriesBundle& series) const {
    const std::size_t n = series.frame_indices.size();
    if (series.presence.size() != n || series.area.size() != n ||
        series.count.size() != n || series.centroid_x.size() != n ||
        series.centroid_y.size() != n)
        throw InputError("series bundle fields differ in length");
    if (!(series.fps > 0.0)) throw InputError("series fps must be positive");

    std::map<std::string, EvalValue> env;
    for (const auto& stmt : impl_->statements)
        env[stmt.name] = eval_expr(*stmt.expr, series, env);

    MetricOutputs result;
    result.metrics = nlohmann::json::object();
    std::set<std::int64_t> key_frames;

    auto frame_at = [&](std::size_t pos) {
        return series.frame_indices[pos];
    };
    auto seconds_of_frame = [&](std::int64_t frame_index) {
        return util::canon6(static_cast<double>(frame_index) / series.fps);
    };
    auto seconds_of_span = [&](double frames) {
        return util::canon6(frames / series.fps);
    };

    for (const auto& name : outputs_) {
        const EvalValue& value = env.at(name);
        switch (value.type) {
            case Type::kCount:
                result.metrics[name] =
                    static_cast<std::int64_t>(value.scalar);
                break;
            case Type::kRate:
                result.metrics[name] = util::canon6(value.scalar);
                break;
            case Type::kFrame: {
                std::int64_t frame =
                    frame_at(static_cast<std::size_t>(value.scalar));
                result.metrics[name + "_frame"] = frame;
                result.metrics[name + "_seconds"] = seconds_of_frame(frame);
                break;
            }
            case Type::kFrames:
                result.metrics[name + "_frames"] =
                    static_cast<std::int64_t>(value.scalar);
                result.metrics[name + "_seconds"] =
                    seconds_of_span(value.scalar);
                break;
            case Type::kFramesList: {
                result.metrics[name + "_count"] =
                    static_cast<std::int64_t>(value.list.size());
                for (std::size_t i = 0; i < value.list.size(); ++i) {
                    std::string prefix =
                        name + "_" + std::to_string(i + 1);
                    result.metrics[prefix + "_frames"] =
                        static_cast<std::int64_t>(value.list[i]);
                    result.metrics[prefix + "_seconds"] =
                        seconds_of_span(value.list[i]);
                }
                break;
            }
            default:
                throw ProgramError("output '" + name +
                                   "' has a non-exportable type");
        }
        for (std::size_t pos : value.defining) key_frames.insert(frame_at(pos));
    }
    result.key_frames.assign(key_frames.begin(), key_frames.end());
    return result;
}

}  // namespace ordirs::agent
