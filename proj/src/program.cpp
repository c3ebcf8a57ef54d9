#include "vassforge/program.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace vassforge {

bool operator==(const Inc& a, const Inc& b) { return a.counter == b.counter; }
bool operator==(const Dec& a, const Dec& b) { return a.counter == b.counter; }
bool operator==(const ZeroTest& a, const ZeroTest& b) { return a.counter == b.counter; }
bool operator==(const Push& a, const Push& b) { return a.symbol == b.symbol; }
bool operator==(const Pop& a, const Pop& b) { return a.symbol == b.symbol; }
bool operator==(const Goto& a, const Goto& b) { return a.first == b.first && a.second == b.second; }
bool operator==(const Add& a, const Add& b) { return a.counter == b.counter && a.amount == b.amount; }
bool operator==(const Sub& a, const Sub& b) { return a.counter == b.counter && a.amount == b.amount; }
bool operator==(const Move& a, const Move& b) { return a.from == b.from && a.to == b.to; }
bool operator==(const MoveK& a, const MoveK& b) {
    return a.from == b.from && a.to == b.to && a.amount == b.amount;
}
bool operator==(const Line& a, const Line& b) { return a.commands == b.commands; }
bool operator==(const Loop& a, const Loop& b) { return a.body == b.body; }
bool operator==(const Call& a, const Call& b) { return a.name == b.name; }
bool operator==(const Statement& a, const Statement& b) { return a.node == b.node; }
bool operator==(const Program& a, const Program& b) {
    return a.counters == b.counters && a.alphabet == b.alphabet && a.body == b.body;
}

ParseError::ParseError(std::size_t l, std::size_t c, const std::string& msg)
    : ProgramError("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
      line(l), column(c) {}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class F>
void for_each_line(const std::vector<Statement>& body, F&& f) {
    for (const auto& s : body) {
        if (auto* l = std::get_if<Line>(&s.node)) f(*l);
        else if (auto* lp = std::get_if<Loop>(&s.node)) for_each_line(lp->body, f);
    }
}

template <class F>
bool any_statement(const std::vector<Statement>& body, F&& f) {
    for (const auto& s : body) {
        if (f(s)) return true;
        if (auto* lp = std::get_if<Loop>(&s.node))
            if (any_statement(lp->body, f)) return true;
    }
    return false;
}

// Counters and symbols a command touches.
void names_of(const Command& c, std::vector<std::string>& counters, std::vector<std::string>& symbols) {
    std::visit(overloaded{
                   [&](const Inc& x) { counters.push_back(x.counter); },
                   [&](const Dec& x) { counters.push_back(x.counter); },
                   [&](const ZeroTest& x) { counters.push_back(x.counter); },
                   [&](const Push& x) { symbols.push_back(x.symbol); },
                   [&](const Pop& x) { symbols.push_back(x.symbol); },
                   [&](const Goto&) {},
                   [&](const Add& x) { counters.push_back(x.counter); },
                   [&](const Sub& x) { counters.push_back(x.counter); },
                   [&](const Move& x) {
                       counters.push_back(x.from);
                       counters.push_back(x.to);
                   },
                   [&](const MoveK& x) {
                       counters.push_back(x.from);
                       counters.push_back(x.to);
                   },
               },
               c);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

void merge_names(std::vector<std::string>& into, const std::vector<std::string>& from) {
    for (const auto& n : from)
        if (!contains(into, n)) into.push_back(n);
}

bool is_ident_char(char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'';
}

bool is_ident(const std::string& s) {
    if (s.empty()) return false;
    if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), is_ident_char);
}

struct Token {
    std::string text;
    std::size_t column;
};

std::vector<Token> split_ws(const std::string& s, std::size_t base) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i >= s.size()) break;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        out.push_back({s.substr(i, j - i), base + i});
        i = j;
    }
    return out;
}

class Parser {
  public:
    explicit Parser(const std::string& text) : text_(text) {}

    Program run() {
        std::vector<std::vector<Statement>*> stack{&prog_.body};
        std::vector<std::size_t> open_lines;
        std::istringstream in(text_);
        std::string raw;
        std::size_t lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            line_ = lineno;
            std::string s = raw;
            if (auto h = s.find('#'); h != std::string::npos) s = s.substr(0, h);
            std::size_t b = 0;
            while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
            std::size_t e = s.size();
            while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
            if (b == e) continue;
            std::string body = s.substr(b, e - b);

            if (body.rfind("counters:", 0) == 0 || body.rfind("stack:", 0) == 0) {
                bool is_counters = body[0] == 'c';
                std::size_t colon = body.find(':');
                for (auto& tok : split_ws(body.substr(colon + 1), b + colon + 2)) {
                    if (!is_ident(tok.text)) throw ParseError(lineno, tok.column, "bad identifier '" + tok.text + "'");
                    auto& v = is_counters ? prog_.counters : prog_.alphabet;
                    if (contains(v, tok.text)) throw ParseError(lineno, tok.column, "duplicate declaration '" + tok.text + "'");
                    v.push_back(tok.text);
                }
                if (is_counters) declared_counters_ = true;
                continue;
            }
            if (body == "}") {
                if (stack.size() == 1) throw ParseError(lineno, b + 1, "unmatched '}'");
                if (stack.back()->empty()) throw ParseError(lineno, b + 1, "empty loop body");
                stack.pop_back();
                open_lines.pop_back();
                continue;
            }
            if (body.rfind("loop", 0) == 0 && body.size() > 4 &&
                (std::isspace(static_cast<unsigned char>(body[4])) || body[4] == '{')) {
                std::size_t brace = body.find('{');
                if (brace == std::string::npos) throw ParseError(lineno, b + 5, "expected '{'");
                for (std::size_t k = 4; k < brace; ++k)
                    if (!std::isspace(static_cast<unsigned char>(body[k])))
                        throw ParseError(lineno, b + k + 1, "unexpected text before '{'");
                std::string rest = body.substr(brace + 1);
                auto& target = *stack.back();
                target.push_back(Statement{Loop{}});
                auto& loop = std::get<Loop>(target.back().node);
                std::size_t rb = rest.find_first_not_of(" \t");
                if (rb == std::string::npos) {
                    stack.push_back(&loop.body);
                    open_lines.push_back(lineno);
                    continue;
                }
                if (rest.back() != '}') throw ParseError(lineno, b + body.size(), "expected '}' closing one-line loop");
                std::string inner = rest.substr(0, rest.size() - 1);
                loop.body.push_back(Statement{parse_line(inner, b + brace + 2)});
                continue;
            }
            if (body.rfind("call", 0) == 0 && body.size() > 4 && std::isspace(static_cast<unsigned char>(body[4]))) {
                auto toks = split_ws(body.substr(4), b + 5);
                if (toks.size() != 1) throw ParseError(lineno, b + 5, "call expects one name");
                stack.back()->push_back(Statement{Call{toks[0].text}});
                continue;
            }
            stack.back()->push_back(Statement{parse_line(body, b + 1)});
        }
        if (stack.size() != 1) throw ParseError(open_lines.back(), 1, "unterminated loop");
        validate();
        return std::move(prog_);
    }

  private:
    Line parse_line(const std::string& s, std::size_t base) {
        Line line;
        std::size_t start = 0;
        while (start <= s.size()) {
            std::size_t semi = s.find(';', start);
            std::string part = s.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
            auto toks = split_ws(part, base + start);
            if (toks.empty()) throw ParseError(line_, base + start, "empty command");
            line.commands.push_back(parse_command(toks));
            if (semi == std::string::npos) break;
            start = semi + 1;
        }
        bool has_goto = std::any_of(line.commands.begin(), line.commands.end(),
                                    [](const Command& c) { return std::holds_alternative<Goto>(c); });
        if (has_goto && line.commands.size() != 1)
            throw ParseError(line_, base, "a goto must be alone on its line");
        return line;
    }

    std::uint32_t number(const Token& t) {
        if (t.text.empty() || !std::all_of(t.text.begin(), t.text.end(), ::isdigit))
            throw ParseError(line_, t.column, "expected a number, got '" + t.text + "'");
        unsigned long long v = std::stoull(t.text);
        if (v > 1000000) throw ParseError(line_, t.column, "constant too large");
        return static_cast<std::uint32_t>(v);
    }

    std::string ident(const Token& t) {
        if (!is_ident(t.text)) throw ParseError(line_, t.column, "bad identifier '" + t.text + "'");
        return t.text;
    }

    Command parse_command(const std::vector<Token>& t) {
        const std::string& op = t[0].text;
        auto arity = [&](std::size_t n) {
            if (t.size() != n + 1)
                throw ParseError(line_, t[0].column, "'" + op + "' expects " + std::to_string(n) + " argument(s)");
        };
        if (op == "inc") { arity(1); return Inc{ident(t[1])}; }
        if (op == "dec") { arity(1); return Dec{ident(t[1])}; }
        if (op == "zero?") { arity(1); return ZeroTest{ident(t[1])}; }
        if (op == "push") { arity(1); return Push{ident(t[1])}; }
        if (op == "pop") { arity(1); return Pop{ident(t[1])}; }
        if (op == "add") { arity(2); return Add{ident(t[1]), number(t[2])}; }
        if (op == "sub") { arity(2); return Sub{ident(t[1]), number(t[2])}; }
        if (op == "move") { arity(2); return Move{ident(t[1]), ident(t[2])}; }
        if (op == "movek") { arity(3); return MoveK{ident(t[1]), ident(t[2]), number(t[3])}; }
        if (op == "goto") {
            arity(2);
            Goto g{number(t[1]), number(t[2])};
            if (g.first == 0) throw ParseError(line_, t[1].column, "malformed goto target 0");
            if (g.second == 0) throw ParseError(line_, t[2].column, "malformed goto target 0");
            return g;
        }
        throw ParseError(line_, t[0].column, "unknown command '" + op + "'");
    }

    void validate() {
        std::vector<std::string> used_c, used_s;
        for_each_line(prog_.body, [&](const Line& l) {
            for (const auto& c : l.commands) names_of(c, used_c, used_s);
        });
        for (const auto& s : used_s)
            if (!contains(prog_.alphabet, s)) throw ProgramError("undeclared stack symbol '" + s + "'");
        if (declared_counters_) {
            for (const auto& c : used_c)
                if (!contains(prog_.counters, c)) throw ProgramError("undeclared counter '" + c + "'");
        } else {
            merge_names(prog_.counters, used_c);
        }
        for (const auto& c : prog_.counters)
            if (contains(prog_.alphabet, c)) throw ProgramError("'" + c + "' is both a counter and a stack symbol");
        if (prog_.has_gotos()) {
            bool structured = any_statement(prog_.body, [](const Statement& s) {
                return !std::holds_alternative<Line>(s.node);
            });
            if (structured) throw ProgramError("goto in a structured program (loops/calls)");
            std::size_t n = prog_.line_count();
            for_each_line(prog_.body, [&](const Line& l) {
                for (const auto& c : l.commands)
                    if (auto* g = std::get_if<Goto>(&c))
                        if (g->first > n + 1 || g->second > n + 1)
                            throw ProgramError("malformed goto target beyond halt (" + std::to_string(n + 1) + ")");
            });
        }
    }

    const std::string& text_;
    Program prog_;
    bool declared_counters_ = false;
    std::size_t line_ = 0;
};

void emit_statements(std::ostringstream& os, const std::vector<Statement>& body, int indent) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    for (const auto& s : body) {
        std::visit(overloaded{
                       [&](const Line& l) {
                           os << pad;
                           for (std::size_t i = 0; i < l.commands.size(); ++i)
                               os << (i ? "; " : "") << to_string(l.commands[i]);
                           os << '\n';
                       },
                       [&](const Loop& lp) {
                           os << pad << "loop {\n";
                           emit_statements(os, lp.body, indent + 1);
                           os << pad << "}\n";
                       },
                       [&](const Call& c) { os << pad << "call " << c.name << '\n'; },
                   },
                   s.node);
    }
}

void expand(const Command& c, std::vector<Command>& out) {
    std::visit(overloaded{
                   [&](const Add& x) {
                       for (std::uint32_t i = 0; i < x.amount; ++i) out.push_back(Inc{x.counter});
                   },
                   [&](const Sub& x) {
                       for (std::uint32_t i = 0; i < x.amount; ++i) out.push_back(Dec{x.counter});
                   },
                   [&](const Move& x) {
                       out.push_back(Dec{x.from});
                       out.push_back(Inc{x.to});
                   },
                   [&](const MoveK& x) {
                       for (std::uint32_t i = 0; i < x.amount; ++i) {
                           out.push_back(Dec{x.from});
                           out.push_back(Inc{x.to});
                       }
                   },
                   [&](const auto& atomic) { out.push_back(atomic); },
               },
               c);
}

bool body_is_flat(const std::vector<Statement>& body) {
    std::set<std::string> incs, decs;
    for (const auto& s : body) {
        auto* l = std::get_if<Line>(&s.node);
        if (!l) return false;
        std::vector<Command> atoms;
        for (const auto& c : l->commands) expand(c, atoms);
        for (const auto& a : atoms) {
            if (auto* i = std::get_if<Inc>(&a)) incs.insert(i->counter);
            else if (auto* d = std::get_if<Dec>(&a)) decs.insert(d->counter);
            else if (!std::holds_alternative<Push>(a) && !std::holds_alternative<Pop>(a)) return false;
        }
    }
    for (const auto& x : incs)
        if (decs.count(x)) return false;
    return true;
}

class Desugarer {
  public:
    explicit Desugarer(const Library& lib) : lib_(lib) {}

    FlatProgram run(const Program& p) {
        out_.program.counters = p.counters;
        out_.program.alphabet = p.alphabet;
        LineNo offset = 0;
        for (const auto& s : p.body) {
            LineNo begin = next();
            statement(s, p.has_gotos() ? offset : 0);
            out_.layout.top_level.push_back({begin, next()});
        }
        return std::move(out_);
    }

  private:
    LineNo next() const { return static_cast<LineNo>(out_.program.body.size() + 1); }

    void emit(std::vector<Command> atoms) {
        out_.program.body.push_back(Statement{Line{std::move(atoms)}});
    }

    void statement(const Statement& s, LineNo shift) {
        std::visit(overloaded{
                       [&](const Line& l) {
                           std::vector<Command> atoms;
                           for (const auto& c : l.commands) {
                               if (auto* g = std::get_if<Goto>(&c)) atoms.push_back(Goto{g->first + shift, g->second + shift});
                               else expand(c, atoms);
                           }
                           emit(std::move(atoms));
                       },
                       [&](const Loop& lp) {
                           LineNo entry = next();
                           emit({Goto{0, 0}});
                           for (const auto& b : lp.body) statement(b, shift);
                           LineNo back = next();
                           emit({Goto{entry, entry}});
                           LineNo exit = next();
                           std::get<Line>(out_.program.body[entry - 1].node).commands[0] = Goto{entry + 1, exit};
                           out_.layout.loops.push_back({entry, back, exit, body_is_flat(lp.body)});
                       },
                       [&](const Call& c) {
                           auto it = lib_.find(c.name);
                           if (it == lib_.end()) throw ProgramError("call to unknown program '" + c.name + "'");
                           if (std::find(active_.begin(), active_.end(), c.name) != active_.end())
                               throw ProgramError("recursive call to '" + c.name + "'");
                           const Program& callee = it->second;
                           merge_names(out_.program.counters, callee.counters);
                           merge_names(out_.program.alphabet, callee.alphabet);
                           active_.push_back(c.name);
                           std::size_t call_index = out_.layout.calls.size();
                           out_.layout.calls.push_back({c.name, next(), 0, static_cast<int>(active_.size())});
                           LineNo inner_shift = next() - 1;
                           for (const auto& b : callee.body) statement(b, callee.has_gotos() ? inner_shift : 0);
                           out_.layout.calls[call_index].end = next();
                           active_.pop_back();
                       },
                   },
                   s.node);
    }

    const Library& lib_;
    FlatProgram out_;
    std::vector<std::string> active_;
};

}  // namespace

bool is_atomic(const Command& c) {
    return std::holds_alternative<Inc>(c) || std::holds_alternative<Dec>(c) ||
           std::holds_alternative<ZeroTest>(c) || std::holds_alternative<Push>(c) ||
           std::holds_alternative<Pop>(c) || std::holds_alternative<Goto>(c);
}

std::string to_string(const Command& c) {
    return std::visit(overloaded{
                          [](const Inc& x) { return "inc " + x.counter; },
                          [](const Dec& x) { return "dec " + x.counter; },
                          [](const ZeroTest& x) { return "zero? " + x.counter; },
                          [](const Push& x) { return "push " + x.symbol; },
                          [](const Pop& x) { return "pop " + x.symbol; },
                          [](const Goto& x) { return "goto " + std::to_string(x.first) + " " + std::to_string(x.second); },
                          [](const Add& x) { return "add " + x.counter + " " + std::to_string(x.amount); },
                          [](const Sub& x) { return "sub " + x.counter + " " + std::to_string(x.amount); },
                          [](const Move& x) { return "move " + x.from + " " + x.to; },
                          [](const MoveK& x) {
                              return "movek " + x.from + " " + x.to + " " + std::to_string(x.amount);
                          },
                      },
                      c);
}

bool Program::has_counter(const std::string& n) const { return contains(counters, n); }
bool Program::has_symbol(const std::string& n) const { return contains(alphabet, n); }

bool Program::is_flat() const {
    for (const auto& s : body) {
        auto* l = std::get_if<Line>(&s.node);
        if (!l) return false;
        for (const auto& c : l->commands)
            if (!is_atomic(c)) return false;
    }
    return true;
}

bool Program::has_gotos() const {
    bool found = false;
    for_each_line(body, [&](const Line& l) {
        for (const auto& c : l.commands)
            if (std::holds_alternative<Goto>(c)) found = true;
    });
    return found;
}

bool Program::has_zero_tests() const {
    bool found = false;
    for_each_line(body, [&](const Line& l) {
        for (const auto& c : l.commands)
            if (std::holds_alternative<ZeroTest>(c)) found = true;
    });
    return found;
}

std::size_t Program::line_count() const {
    std::size_t n = 0;
    std::function<void(const std::vector<Statement>&)> walk = [&](const std::vector<Statement>& b) {
        for (const auto& s : b) {
            if (std::holds_alternative<Line>(s.node)) ++n;
            else if (auto* lp = std::get_if<Loop>(&s.node)) {
                n += 2;
                walk(lp->body);
            }
        }
    };
    walk(body);
    return n;
}

std::vector<Command> expand_atoms(const Command& c) {
    std::vector<Command> out;
    expand(c, out);
    return out;
}

Program parse(const std::string& text) { return Parser(text).run(); }

std::string pretty_print(const Program& p) {
    std::ostringstream os;
    os << "counters:";
    for (const auto& c : p.counters) os << ' ' << c;
    os << '\n';
    if (!p.alphabet.empty()) {
        os << "stack:";
        for (const auto& s : p.alphabet) os << ' ' << s;
        os << '\n';
    }
    emit_statements(os, p.body, 0);
    return os.str();
}

FlatProgram desugar_with_layout(const Program& p, const Library& lib) {
    FlatProgram f = Desugarer(lib).run(p);
    // Loops written as explicit gotos are recovered from the pattern.
    if (f.layout.loops.empty()) f.layout.loops = detect_loops(f.program);
    std::sort(f.layout.loops.begin(), f.layout.loops.end(),
              [](const LoopInfo& a, const LoopInfo& b) { return a.entry < b.entry; });
    return f;
}

Program desugar(const Program& p, const Library& lib) { return desugar_with_layout(p, lib).program; }

std::vector<LoopInfo> detect_loops(const Program& flat) {
    std::vector<LoopInfo> loops;
    auto goto_at = [&](LineNo l) -> const Goto* {
        if (l < 1 || l > flat.body.size()) return nullptr;
        auto* line = std::get_if<Line>(&flat.body[l - 1].node);
        if (!line || line->commands.size() != 1) return nullptr;
        return std::get_if<Goto>(&line->commands[0]);
    };
    for (LineNo e = 1; e <= flat.body.size(); ++e) {
        const Goto* g = goto_at(e);
        if (!g || g->first != e + 1 || g->second < e + 3) continue;
        LineNo back = g->second - 1;
        const Goto* gb = goto_at(back);
        if (!gb || gb->first != e || gb->second != e) continue;
        bool flat_body = true;
        std::set<std::string> incs, decs;
        for (LineNo l = e + 1; l < back; ++l) {
            const auto& line = std::get<Line>(flat.body[l - 1].node);
            for (const auto& c : line.commands) {
                if (auto* i = std::get_if<Inc>(&c)) incs.insert(i->counter);
                else if (auto* d = std::get_if<Dec>(&c)) decs.insert(d->counter);
                else if (!std::holds_alternative<Push>(c) && !std::holds_alternative<Pop>(c)) flat_body = false;
            }
        }
        for (const auto& x : incs)
            if (decs.count(x)) flat_body = false;
        loops.push_back({e, back, g->second, flat_body});
    }
    return loops;
}

Program compose(const Program& p, const Program& q, const Library& lib) {
    for (const auto& c : p.counters)
        if (contains(q.alphabet, c)) throw ProgramError("name collision: '" + c + "' is a counter and a stack symbol");
    for (const auto& c : q.counters)
        if (contains(p.alphabet, c)) throw ProgramError("name collision: '" + c + "' is a counter and a stack symbol");
    Program out;
    out.counters = p.counters;
    merge_names(out.counters, q.counters);
    out.alphabet = p.alphabet;
    merge_names(out.alphabet, q.alphabet);
    if (!p.has_gotos() && !q.has_gotos()) {
        out.body = p.body;
        out.body.insert(out.body.end(), q.body.begin(), q.body.end());
        return out;
    }
    Program fp = desugar(p, lib), fq = desugar(q, lib);
    out.body = fp.body;
    LineNo shift = static_cast<LineNo>(fp.body.size());
    for (auto s : fq.body) {
        auto& line = std::get<Line>(s.node);
        for (auto& c : line.commands)
            if (auto* g = std::get_if<Goto>(&c)) {
                g->first += shift;
                g->second += shift;
            }
        out.body.push_back(std::move(s));
    }
    return out;
}

void declare_used(Program& p) {
    std::vector<std::string> used_c, used_s;
    for_each_line(p.body, [&](const Line& l) {
        for (const auto& c : l.commands) names_of(c, used_c, used_s);
    });
    merge_names(p.counters, used_c);
    merge_names(p.alphabet, used_s);
}

namespace {

nlohmann::json command_json(const Command& c) {
    using nlohmann::json;
    return std::visit(overloaded{
                          [](const Inc& x) { return json{{"op", "inc"}, {"arg", x.counter}}; },
                          [](const Dec& x) { return json{{"op", "dec"}, {"arg", x.counter}}; },
                          [](const ZeroTest& x) { return json{{"op", "zero?"}, {"arg", x.counter}}; },
                          [](const Push& x) { return json{{"op", "push"}, {"arg", x.symbol}}; },
                          [](const Pop& x) { return json{{"op", "pop"}, {"arg", x.symbol}}; },
                          [](const Goto& x) { return json{{"op", "goto"}, {"targets", {x.first, x.second}}}; },
                          [](const Add& x) { return json{{"op", "add"}, {"arg", x.counter}, {"k", x.amount}}; },
                          [](const Sub& x) { return json{{"op", "sub"}, {"arg", x.counter}, {"k", x.amount}}; },
                          [](const Move& x) { return json{{"op", "move"}, {"from", x.from}, {"to", x.to}}; },
                          [](const MoveK& x) {
                              return json{{"op", "movek"}, {"from", x.from}, {"to", x.to}, {"k", x.amount}};
                          },
                      },
                      c);
}

Command command_from_json(const nlohmann::json& j) {
    std::string op = j.at("op").get<std::string>();
    if (op == "inc") return Inc{j.at("arg").get<std::string>()};
    if (op == "dec") return Dec{j.at("arg").get<std::string>()};
    if (op == "zero?") return ZeroTest{j.at("arg").get<std::string>()};
    if (op == "push") return Push{j.at("arg").get<std::string>()};
    if (op == "pop") return Pop{j.at("arg").get<std::string>()};
    if (op == "goto") return Goto{j.at("targets").at(0).get<LineNo>(), j.at("targets").at(1).get<LineNo>()};
    if (op == "add") return Add{j.at("arg").get<std::string>(), j.at("k").get<std::uint32_t>()};
    if (op == "sub") return Sub{j.at("arg").get<std::string>(), j.at("k").get<std::uint32_t>()};
    if (op == "move") return Move{j.at("from").get<std::string>(), j.at("to").get<std::string>()};
    if (op == "movek")
        return MoveK{j.at("from").get<std::string>(), j.at("to").get<std::string>(), j.at("k").get<std::uint32_t>()};
    throw ProgramError("unknown op '" + op + "' in program JSON");
}

nlohmann::json statements_json(const std::vector<Statement>& body) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : body) {
        std::visit(overloaded{
                       [&](const Line& l) {
                           nlohmann::json atoms = nlohmann::json::array();
                           for (const auto& c : l.commands) atoms.push_back(command_json(c));
                           arr.push_back({{"atoms", atoms}});
                       },
                       [&](const Loop& lp) { arr.push_back({{"loop", statements_json(lp.body)}}); },
                       [&](const Call& c) { arr.push_back({{"call", c.name}}); },
                   },
                   s.node);
    }
    return arr;
}

std::vector<Statement> statements_from_json(const nlohmann::json& arr) {
    std::vector<Statement> out;
    for (const auto& j : arr) {
        if (j.contains("atoms")) {
            Line l;
            for (const auto& a : j.at("atoms")) l.commands.push_back(command_from_json(a));
            if (l.commands.empty()) throw ProgramError("line without atoms in program JSON");
            out.push_back(Statement{std::move(l)});
        } else if (j.contains("loop")) {
            out.push_back(Statement{Loop{statements_from_json(j.at("loop"))}});
        } else if (j.contains("call")) {
            out.push_back(Statement{Call{j.at("call").get<std::string>()}});
        } else {
            throw ProgramError("unrecognised statement in program JSON");
        }
    }
    return out;
}

}  // namespace

nlohmann::json to_json(const Program& p) {
    return {{"format_version", kFormatVersion},
            {"counters", p.counters},
            {"stack", p.alphabet},
            {"lines", statements_json(p.body)}};
}

Program program_from_json(const nlohmann::json& j) {
    if (j.value("format_version", 0) != kFormatVersion) throw ProgramError("unsupported program format_version");
    Program p;
    p.counters = j.at("counters").get<std::vector<std::string>>();
    p.alphabet = j.value("stack", std::vector<std::string>{});
    p.body = statements_from_json(j.at("lines"));
    // Reuse the textual validator.
    return parse(pretty_print(p));
}

}  // namespace vassforge
