#pragma once

#include "rebelfire/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace rebelfire
{
    enum class FKind : std::uint8_t
    {
        True_,
        False_,
        AtomCorrect,  // correct(i)
        AtomOccurred, // occ(i, START|FIRE); agent -1 = any agent
        AtomStarted,  // start(i); agent -1 = some agent
        AtomFired,    // fire(i); agent -1 = some agent
        Not,
        And, // n-ary
        Or,  // n-ary
        Implies,
        K, // knowledge
        B, // belief: K_i(correct(i) -> phi)
        H, // hope: correct(i) -> B_i phi
        Y, // yesterday
        Eventually,
        Always,
        EGroup, // one of the mutual families below, over all agents
        CdH,    // greatest fixpoint of x <-> EdH(phi & x); evaluated, never expanded
    };

    enum class FGroup : std::uint8_t
    {
        None = 0,
        EB,  // /\_j B_j
        EH,  // /\_j H_j
        EdB, // /\_j <> B_j
        EdH, // /\_j <> H_j
    };

    class Formula;

    struct FormulaNode
    {
        FKind kind = FKind::True_;
        FGroup group = FGroup::None;
        AgentId agent = -1;
        OccKind occ = OccKind::Start;
        std::vector<Formula> children;
        std::uint64_t hash = 0;
    };

    // Immutable value handle over a shared AST node.
    class Formula
    {
    public:
        Formula() = default;

        FKind kind() const noexcept { return m_node->kind; }
        FGroup group() const noexcept { return m_node->group; }
        AgentId agent() const noexcept { return m_node->agent; }
        OccKind occ() const noexcept { return m_node->occ; }
        const std::vector<Formula> &children() const noexcept { return m_node->children; }
        const Formula &child(std::size_t i = 0) const { return m_node->children[i]; }
        std::uint64_t hash() const noexcept { return m_node->hash; }
        bool valid() const noexcept { return m_node != nullptr; }

        bool operator==(const Formula &other) const;

        static Formula make(FormulaNode node);

    private:
        std::shared_ptr<const FormulaNode> m_node;
    };

    namespace fml
    {
        Formula truth(bool v);
        Formula correct(AgentId i);
        Formula occurred(AgentId i, OccKind o); // i = -1 for "some agent"
        Formula started(AgentId i = -1);
        Formula fired(AgentId i = -1);
        Formula Not(Formula a);
        Formula And(std::vector<Formula> xs);
        Formula Or(std::vector<Formula> xs);
        Formula implies(Formula a, Formula b);
        Formula iff(Formula a, Formula b); // sugar: (a->b) & (b->a)
        Formula K(AgentId i, Formula a);
        Formula B(AgentId i, Formula a);
        Formula H(AgentId i, Formula a);
        Formula yesterday(Formula a);
        Formula eventually(Formula a);
        Formula always(Formula a);
        Formula everyone(FGroup g, Formula a); // EB/EH/EdB/EdH
        Formula common_hope(Formula a);        // CdH
    } // namespace fml

    // Text syntax used by the CLI and config files. parse(print(phi)) == phi structurally.
    std::string print_formula(const Formula &f);
    Formula parse_formula(const std::string &text); // ErrorKind::ParseError with position on failure
} // namespace rebelfire
