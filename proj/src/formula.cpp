#include "rebelfire/formula.hpp"

#include <cctype>
#include <sstream>

namespace rebelfire
{
    Formula Formula::make(FormulaNode node)
    {
        std::uint64_t h = 0x3f84d5b5b5470917ULL;
        h = hash_mix(h, static_cast<std::uint64_t>(node.kind));
        h = hash_mix(h, static_cast<std::uint64_t>(node.group));
        h = hash_mix(h, static_cast<std::uint64_t>(node.agent) + 7);
        h = hash_mix(h, static_cast<std::uint64_t>(node.occ));
        for (const auto &c : node.children)
            h = hash_mix(h, c.hash());
        node.hash = h;
        Formula f;
        f.m_node = std::make_shared<const FormulaNode>(std::move(node));
        return f;
    }

    bool Formula::operator==(const Formula &other) const
    {
        if (m_node == other.m_node)
            return true;
        if (!m_node || !other.m_node)
            return false;
        if (m_node->hash != other.m_node->hash)
            return false;
        if (m_node->kind != other.m_node->kind || m_node->group != other.m_node->group ||
            m_node->agent != other.m_node->agent || m_node->occ != other.m_node->occ ||
            m_node->children.size() != other.m_node->children.size())
            return false;
        for (std::size_t i = 0; i < m_node->children.size(); ++i)
            if (!(m_node->children[i] == other.m_node->children[i]))
                return false;
        return true;
    }

    namespace fml
    {
        Formula truth(bool v)
        {
            FormulaNode n;
            n.kind = v ? FKind::True_ : FKind::False_;
            return Formula::make(std::move(n));
        }
        Formula correct(AgentId i)
        {
            FormulaNode n;
            n.kind = FKind::AtomCorrect;
            n.agent = i;
            return Formula::make(std::move(n));
        }
        Formula occurred(AgentId i, OccKind o)
        {
            FormulaNode n;
            n.kind = FKind::AtomOccurred;
            n.agent = i;
            n.occ = o;
            return Formula::make(std::move(n));
        }
        Formula started(AgentId i)
        {
            FormulaNode n;
            n.kind = FKind::AtomStarted;
            n.agent = i;
            return Formula::make(std::move(n));
        }
        Formula fired(AgentId i)
        {
            FormulaNode n;
            n.kind = FKind::AtomFired;
            n.agent = i;
            return Formula::make(std::move(n));
        }
        Formula Not(Formula a)
        {
            FormulaNode n;
            n.kind = FKind::Not;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula And(std::vector<Formula> xs)
        {
            if (xs.empty())
                return truth(true);
            if (xs.size() == 1)
                return xs.front();
            FormulaNode n;
            n.kind = FKind::And;
            n.children = std::move(xs);
            return Formula::make(std::move(n));
        }
        Formula Or(std::vector<Formula> xs)
        {
            if (xs.empty())
                return truth(false);
            if (xs.size() == 1)
                return xs.front();
            FormulaNode n;
            n.kind = FKind::Or;
            n.children = std::move(xs);
            return Formula::make(std::move(n));
        }
        Formula implies(Formula a, Formula b)
        {
            FormulaNode n;
            n.kind = FKind::Implies;
            n.children = {std::move(a), std::move(b)};
            return Formula::make(std::move(n));
        }
        Formula iff(Formula a, Formula b)
        {
            return And({implies(a, b), implies(b, a)});
        }
        Formula K(AgentId i, Formula a)
        {
            FormulaNode n;
            n.kind = FKind::K;
            n.agent = i;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula B(AgentId i, Formula a)
        {
            FormulaNode n;
            n.kind = FKind::B;
            n.agent = i;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula H(AgentId i, Formula a)
        {
            FormulaNode n;
            n.kind = FKind::H;
            n.agent = i;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula yesterday(Formula a)
        {
            FormulaNode n;
            n.kind = FKind::Y;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula eventually(Formula a)
        {
            FormulaNode n;
            n.kind = FKind::Eventually;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula always(Formula a)
        {
            FormulaNode n;
            n.kind = FKind::Always;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula everyone(FGroup g, Formula a)
        {
            FormulaNode n;
            n.kind = FKind::EGroup;
            n.group = g;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
        Formula common_hope(Formula a)
        {
            FormulaNode n;
            n.kind = FKind::CdH;
            n.children = {std::move(a)};
            return Formula::make(std::move(n));
        }
    } // namespace fml

    namespace
    {
        const char *occ_name(OccKind o)
        {
            return o == OccKind::Start ? "START" : o == OccKind::Fire ? "FIRE" : "?";
        }

        void print_rec(std::ostream &os, const Formula &f)
        {
            switch (f.kind())
            {
            case FKind::True_:
                os << "true";
                break;
            case FKind::False_:
                os << "false";
                break;
            case FKind::AtomCorrect:
                os << "correct(" << f.agent() << ")";
                break;
            case FKind::AtomOccurred:
                if (f.agent() >= 0)
                    os << "occ(" << f.agent() << "," << occ_name(f.occ()) << ")";
                else
                    os << "occ(" << occ_name(f.occ()) << ")";
                break;
            case FKind::AtomStarted:
                os << "start";
                if (f.agent() >= 0)
                    os << "(" << f.agent() << ")";
                break;
            case FKind::AtomFired:
                os << "fire";
                if (f.agent() >= 0)
                    os << "(" << f.agent() << ")";
                break;
            case FKind::Not:
                os << "!";
                print_rec(os, f.child());
                break;
            case FKind::And:
            case FKind::Or:
            {
                os << "(";
                const char *sep = f.kind() == FKind::And ? " & " : " | ";
                for (std::size_t i = 0; i < f.children().size(); ++i)
                {
                    if (i)
                        os << sep;
                    print_rec(os, f.children()[i]);
                }
                os << ")";
                break;
            }
            case FKind::Implies:
                os << "(";
                print_rec(os, f.child(0));
                os << " -> ";
                print_rec(os, f.child(1));
                os << ")";
                break;
            case FKind::K:
                os << "K[" << f.agent() << "] ";
                print_rec(os, f.child());
                break;
            case FKind::B:
                os << "B[" << f.agent() << "] ";
                print_rec(os, f.child());
                break;
            case FKind::H:
                os << "H[" << f.agent() << "] ";
                print_rec(os, f.child());
                break;
            case FKind::Y:
                os << "Y ";
                print_rec(os, f.child());
                break;
            case FKind::Eventually:
                os << "<> ";
                print_rec(os, f.child());
                break;
            case FKind::Always:
                os << "[] ";
                print_rec(os, f.child());
                break;
            case FKind::EGroup:
                switch (f.group())
                {
                case FGroup::EB:
                    os << "EB ";
                    break;
                case FGroup::EH:
                    os << "EH ";
                    break;
                case FGroup::EdB:
                    os << "EdB ";
                    break;
                case FGroup::EdH:
                    os << "EdH ";
                    break;
                default:
                    os << "E? ";
                    break;
                }
                print_rec(os, f.child());
                break;
            case FKind::CdH:
                os << "CdH ";
                print_rec(os, f.child());
                break;
            }
        }

        struct Parser
        {
            const std::string &text;
            std::size_t pos = 0;

            explicit Parser(const std::string &t) : text(t) {}

            [[noreturn]] void fail(const std::string &why) const
            {
                raise(ErrorKind::ParseError, "formula parse error at position " + std::to_string(pos) + ": " + why);
            }

            void skip_ws()
            {
                while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
                    ++pos;
            }

            bool eat(const std::string &tok)
            {
                skip_ws();
                if (text.compare(pos, tok.size(), tok) == 0)
                {
                    // word tokens must not swallow identifier prefixes (e.g. "start" vs "starts")
                    if (std::isalpha(static_cast<unsigned char>(tok[0])))
                    {
                        const std::size_t end = pos + tok.size();
                        if (end < text.size() &&
                            (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_'))
                            return false;
                    }
                    pos += tok.size();
                    return true;
                }
                return false;
            }

            int parse_int()
            {
                skip_ws();
                std::size_t start = pos;
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                    ++pos;
                if (pos == start)
                    fail("expected an agent index");
                return std::stoi(text.substr(start, pos - start));
            }

            void expect(char c)
            {
                skip_ws();
                if (pos >= text.size() || text[pos] != c)
                    fail(std::string("expected '") + c + "'");
                ++pos;
            }

            AgentId bracket_agent()
            {
                expect('[');
                int i = parse_int();
                expect(']');
                return i;
            }

            Formula parse_formula_()
            {
                Formula a = parse_or();
                skip_ws();
                if (eat("->"))
                    return fml::implies(std::move(a), parse_formula_()); // right-assoc
                return a;
            }

            Formula parse_or()
            {
                std::vector<Formula> xs{parse_and()};
                while (true)
                {
                    skip_ws();
                    // don't confuse '|' with nothing else in this grammar
                    if (!eat("|"))
                        break;
                    xs.push_back(parse_and());
                }
                return xs.size() == 1 ? xs.front() : fml::Or(std::move(xs));
            }

            Formula parse_and()
            {
                std::vector<Formula> xs{parse_unary()};
                while (true)
                {
                    skip_ws();
                    if (!eat("&"))
                        break;
                    xs.push_back(parse_unary());
                }
                return xs.size() == 1 ? xs.front() : fml::And(std::move(xs));
            }

            Formula parse_unary()
            {
                skip_ws();
                if (eat("!"))
                    return fml::Not(parse_unary());
                if (eat("<>"))
                    return fml::eventually(parse_unary());
                if (eat("[]"))
                    return fml::always(parse_unary());
                if (eat("Y"))
                    return fml::yesterday(parse_unary());
                if (eat("K"))
                {
                    const AgentId i = bracket_agent();
                    return fml::K(i, parse_unary());
                }
                if (eat("B"))
                {
                    const AgentId i = bracket_agent();
                    return fml::B(i, parse_unary());
                }
                if (eat("H"))
                {
                    const AgentId i = bracket_agent();
                    return fml::H(i, parse_unary());
                }
                if (eat("EdH"))
                    return fml::everyone(FGroup::EdH, parse_unary());
                if (eat("EdB"))
                    return fml::everyone(FGroup::EdB, parse_unary());
                if (eat("EH"))
                    return fml::everyone(FGroup::EH, parse_unary());
                if (eat("EB"))
                    return fml::everyone(FGroup::EB, parse_unary());
                if (eat("CdH"))
                    return fml::common_hope(parse_unary());
                return parse_primary();
            }

            OccKind parse_occ_label()
            {
                if (eat("START"))
                    return OccKind::Start;
                if (eat("FIRE"))
                    return OccKind::Fire;
                fail("expected START or FIRE");
            }

            Formula parse_primary()
            {
                skip_ws();
                if (eat("("))
                {
                    Formula f = parse_formula_();
                    expect(')');
                    return f;
                }
                if (eat("true"))
                    return fml::truth(true);
                if (eat("false"))
                    return fml::truth(false);
                if (eat("correct"))
                {
                    expect('(');
                    int i = parse_int();
                    expect(')');
                    return fml::correct(i);
                }
                if (eat("occ"))
                {
                    expect('(');
                    skip_ws();
                    AgentId agent = -1;
                    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
                    {
                        agent = parse_int();
                        expect(',');
                    }
                    OccKind o = parse_occ_label();
                    expect(')');
                    return fml::occurred(agent, o);
                }
                if (eat("start"))
                    return parse_opt_agent(true);
                if (eat("fire"))
                    return parse_opt_agent(false);
                fail("expected a formula");
            }

            Formula parse_opt_agent(bool is_start)
            {
                skip_ws();
                AgentId agent = -1;
                if (pos < text.size() && text[pos] == '(')
                {
                    ++pos;
                    agent = parse_int();
                    expect(')');
                }
                return is_start ? fml::started(agent) : fml::fired(agent);
            }
        };
    } // namespace

    std::string print_formula(const Formula &f)
    {
        std::ostringstream os;
        print_rec(os, f);
        return os.str();
    }

    Formula parse_formula(const std::string &text)
    {
        Parser p(text);
        Formula f = p.parse_formula_();
        p.skip_ws();
        if (p.pos != text.size())
            p.fail("trailing input");
        return f;
    }
} // namespace rebelfire
