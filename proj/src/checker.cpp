#include "rebelfire/checker.hpp"

#include "rebelfire/protocol.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

namespace rebelfire
{
    namespace
    {
        struct PropertyEntry
        {
            PropertyId id;
            const char *name;
        };
        constexpr PropertyEntry PROPERTIES[] = {
            {PropertyId::C, "C"},
            {PropertyId::U, "U"},
            {PropertyId::R, "R"},
            {PropertyId::Lemma6, "Lemma6"},
            {PropertyId::Lemma7_Eq5, "Lemma7_Eq5"},
            {PropertyId::Lemma9_Eq6, "Lemma9_Eq6"},
            {PropertyId::Thm10, "Thm10"},
            {PropertyId::Thm14_Eq7, "Thm14_Eq7"},
            {PropertyId::Thm16_1, "Thm16_1"},
            {PropertyId::Thm16_2_Eq8, "Thm16_2_Eq8"},
            {PropertyId::Lemma18, "Lemma18"},
            {PropertyId::Lemma19, "Lemma19"},
            {PropertyId::Lemma21, "Lemma21"},
            {PropertyId::Cor22, "Cor22"},
            {PropertyId::Lemma23, "Lemma23"},
            {PropertyId::Cor24_Eq9_10, "Cor24_Eq9_10"},
            {PropertyId::Lemma26_Eq10, "Lemma26_Eq10"},
            {PropertyId::FixpointAxiom_Eq1, "FixpointAxiom_Eq1"},
            {PropertyId::BrainInVat, "BrainInVat"},
            {PropertyId::Remark12, "Remark12"},
        };
    } // namespace

} // namespace rebelfire

namespace rebelfire
{
    const char *property_name(PropertyId id)
    {
        for (const auto &e : PROPERTIES)
            if (e.id == id)
                return e.name;
        return "?";
    }

    std::optional<PropertyId> property_by_name(const std::string &name)
    {
        for (const auto &e : PROPERTIES)
            if (name == e.name)
                return e.id;
        return std::nullopt;
    }

    std::vector<PropertyId> all_properties()
    {
        std::vector<PropertyId> out;
        for (const auto &e : PROPERTIES)
            out.push_back(e.id);
        return out;
    }

    const char *verdict_name(Verdict v)
    {
        switch (v)
        {
        case Verdict::Holds:
            return "holds";
        case Verdict::Violated:
            return "violated";
        case Verdict::NotApplicable:
            return "not-applicable";
        }
        return "?";
    }

    CheckSuite::CheckSuite(const InterpretedSystem &system, SystemFingerprint fingerprint)
        : m_system(system), m_fingerprint(std::move(fingerprint))
    {
        m_fingerprint.n = system.n();
        m_fingerprint.f = system.f();
        m_fingerprint.horizon = system.horizon();
        m_fingerprint.run_count = system.runs().size();
        if (m_fingerprint.protocol.empty())
            m_fingerprint.protocol = system.run_set().protocol;
    }

    CheckReport CheckSuite::make_report(PropertyId id, Verdict v, std::string detail) const
    {
        CheckReport r;
        r.property = id;
        r.verdict = v;
        r.detail = std::move(detail);
        r.fingerprint = m_fingerprint;
        return r;
    }

    namespace
    {
        AgentId outermost_epistemic_agent(const Formula &f)
        {
            if (f.kind() == FKind::K || f.kind() == FKind::B || f.kind() == FKind::H)
                return f.agent();
            for (const auto &c : f.children())
            {
                const AgentId a = outermost_epistemic_agent(c);
                if (a >= 0)
                    return a;
            }
            return -1;
        }

        std::vector<std::string> decode_history(const InterpretedSystem &sys, Point p, AgentId agent)
        {
            std::vector<std::string> out;
            CanonicalHistory h = local_state_at(sys.runs()[p.run], agent, p.t);
            for (const auto &round : h.rounds)
            {
                std::string line;
                for (const auto &o : round)
                {
                    if (!line.empty())
                        line += ", ";
                    line += occurrence_to_string(Occurrence{o.kind, o.msg, o.peer, true},
                                                 sys.run_set().alphabet);
                }
                out.push_back(line);
            }
            return out;
        }
    } // namespace

    Witness CheckSuite::decode_witness(Point p, const Formula &f) const
    {
        Witness w;
        w.point = p;
        w.formula = print_formula(f);
        w.agent = outermost_epistemic_agent(f);
        if (w.agent >= 0)
        {
            w.agent_history = decode_history(m_system, p, w.agent);
            const auto &bucket = m_system.bucket(w.agent, m_system.index_of(p));
            for (std::size_t i = 0; i < bucket.size() && i < 16; ++i)
                w.bucket.push_back(m_system.point_at(bucket[i]));
            if (bucket.size() > 16)
                w.note = "bucket truncated to 16 of " + std::to_string(bucket.size()) + " points";
        }
        return w;
    }

    CheckReport CheckSuite::validity_report(PropertyId id, const Formula &f, std::string detail)
    {
        auto cex = m_system.first_counterexample(f);
        CheckReport r = make_report(id, cex ? Verdict::Violated : Verdict::Holds, std::move(detail));
        if (cex)
            r.witnesses.push_back(decode_witness(*cex, f));
        m_verdicts[id] = r.verdict;
        return r;
    }

    Verdict CheckSuite::require(PropertyId hypothesis) const
    {
        auto it = m_verdicts.find(hypothesis);
        if (it == m_verdicts.end())
            raise(ErrorKind::HypothesisNotVerified,
                  std::string("property ") + property_name(hypothesis) + " has not been checked yet");
        return it->second;
    }

    Formula CheckSuite::relay_consequent() const
    {
        std::vector<Formula> xs;
        for (AgentId i = 0; i < m_system.n(); ++i)
            xs.push_back(fml::eventually(fml::implies(fml::correct(i), fml::fired(i))));
        return fml::And(std::move(xs));
    }

    Formula CheckSuite::group_belief_antecedent() const
    {
        const int n = m_system.n();
        const int g = 2 * m_system.f() + 1;
        std::vector<Formula> groups;
        std::vector<int> pick(g);
        std::function<void(int, int)> rec = [&](int from, int depth) {
            if (depth == g)
            {
                std::vector<Formula> conj;
                for (int j : pick)
                    conj.push_back(fml::K(j, fml::implies(fml::correct(j), fml::started(-1))));
                groups.push_back(fml::And(std::move(conj)));
                return;
            }
            for (int a = from; a < n; ++a)
            {
                pick[depth] = a;
                rec(a + 1, depth + 1);
            }
        };
        rec(0, 0);
        return fml::Or(std::move(groups));
    }

    CheckReport CheckSuite::check_U()
    {
        return validity_report(PropertyId::U, fml::implies(fml::fired(-1), fml::started(-1)));
    }

    CheckReport CheckSuite::check_R()
    {
        Formula r = fml::implies(fml::fired(-1), relay_consequent());
        // optional cross-check: the joint "one common moment" reading
        std::vector<Formula> joint;
        for (AgentId i = 0; i < m_system.n(); ++i)
            joint.push_back(fml::implies(fml::correct(i), fml::fired(i)));
        const bool joint_valid =
            m_system.valid(fml::implies(fml::fired(-1), fml::eventually(fml::And(std::move(joint)))));
        std::string detail = std::string("joint-eventuality cross-check: ") +
                             (joint_valid ? "agrees" : "diverges");
        return validity_report(PropertyId::R, r, std::move(detail));
    }

    CheckReport CheckSuite::check_C()
    {
        if (m_system.n() < 2 * m_system.f() + 1)
        {
            CheckReport r = make_report(PropertyId::C, Verdict::NotApplicable,
                                        "no group of size 2f+1 exists");
            m_verdicts[PropertyId::C] = r.verdict;
            return r;
        }
        Formula c = fml::implies(group_belief_antecedent(), relay_consequent());
        const std::size_t learners = m_system.extension(group_belief_antecedent()).count();
        return validity_report(PropertyId::C, c,
                               "antecedent holds at " + std::to_string(learners) + " points");
    }

    CheckReport CheckSuite::check_theorem(PropertyId id)
    {
        const int n = m_system.n();
        auto per_agent = [&](auto make) {
            std::vector<Formula> xs;
            for (AgentId i = 0; i < n; ++i)
                xs.push_back(make(i));
            return fml::And(std::move(xs));
        };

        switch (id)
        {
        case PropertyId::U:
            return check_U();
        case PropertyId::R:
            return check_R();
        case PropertyId::C:
            return check_C();
        case PropertyId::Lemma6:
            return validity_report(id, per_agent([&](AgentId i) {
                return fml::And({fml::implies(fml::fired(i), fml::B(i, fml::fired(i))),
                                 fml::implies(fml::fired(i), fml::B(i, fml::fired(-1))),
                                 fml::implies(fml::started(i), fml::B(i, fml::started(i))),
                                 fml::implies(fml::started(i), fml::B(i, fml::started(-1)))});
            }));
        case PropertyId::Lemma7_Eq5:
        {
            if (require(PropertyId::U) != Verdict::Holds)
            {
                CheckReport r = make_report(id, Verdict::NotApplicable, "requires U to hold");
                m_verdicts[id] = r.verdict;
                return r;
            }
            return validity_report(id, per_agent([&](AgentId i) {
                return fml::implies(fml::fired(i), fml::B(i, fml::started(-1)));
            }));
        }
        case PropertyId::Lemma9_Eq6:
        {
            if (require(PropertyId::R) != Verdict::Holds)
            {
                CheckReport r = make_report(id, Verdict::NotApplicable, "requires R to hold");
                m_verdicts[id] = r.verdict;
                return r;
            }
            return validity_report(id, per_agent([&](AgentId i) {
                return fml::implies(fml::fired(i), fml::B(i, relay_consequent()));
            }));
        }
        case PropertyId::Thm10:
        case PropertyId::Thm14_Eq7:
        {
            if (require(PropertyId::U) != Verdict::Holds || require(PropertyId::R) != Verdict::Holds)
            {
                CheckReport r = make_report(id, Verdict::NotApplicable, "requires U and R to hold");
                m_verdicts[id] = r.verdict;
                return r;
            }
            const bool common = id == PropertyId::Thm14_Eq7;
            return validity_report(id, per_agent([&](AgentId i) {
                Formula inner = common
                                    ? fml::And({fml::started(-1), fml::common_hope(fml::started(-1))})
                                    : fml::And({fml::started(-1),
                                                fml::everyone(FGroup::EdH, fml::started(-1))});
                return fml::implies(fml::fired(i), fml::B(i, inner));
            }));
        }
        case PropertyId::Thm16_1:
        {
            Formula premise = per_agent([&](AgentId i) {
                return fml::implies(fml::Not(fml::B(i, fml::started(-1))), fml::Not(fml::fired(i)));
            });
            if (!m_system.valid(premise))
            {
                CheckReport r = make_report(id, Verdict::NotApplicable,
                                            "firing guard B_i start not respected; theorem not triggered");
                m_verdicts[id] = r.verdict;
                return r;
            }
            const Formula u = fml::implies(fml::fired(-1), fml::started(-1));
            auto cex = m_system.first_counterexample(u);
            CheckReport r = make_report(id, !cex ? Verdict::Holds : Verdict::Violated,
                                        "guard discipline verified; U re-checked independently");
            if (cex)
                r.witnesses.push_back(decode_witness(*cex, u));
            m_verdicts[id] = r.verdict;
            return r;
        }
        case PropertyId::Thm16_2_Eq8:
            return check_sufficiency();
        case PropertyId::Lemma18:
            return validity_report(id, per_agent([&](AgentId i) {
                return fml::implies(fml::Not(fml::correct(i)), fml::always(fml::Not(fml::correct(i))));
            }));
        case PropertyId::Lemma19:
        {
            std::vector<Formula> parts;
            int applicable = 0;
            for (AgentId i = 0; i < n; ++i)
            {
                Formula phi = fml::And({fml::correct(i), fml::Not(fml::started(-1))});
                if (!check_potentially_persistent(phi))
                    continue;
                ++applicable;
                parts.push_back(fml::implies(fml::K(i, fml::eventually(fml::Not(phi))),
                                             fml::K(i, fml::Not(phi))));
            }
            if (applicable == 0)
            {
                CheckReport r = make_report(id, Verdict::NotApplicable,
                                            "correct(i) & !start is not potentially persistent here");
                m_verdicts[id] = r.verdict;
                return r;
            }
            return validity_report(id, fml::And(std::move(parts)),
                                   std::to_string(applicable) + " agents applicable");
        }
        case PropertyId::Lemma21:
            return validity_report(id, per_agent([&](AgentId i) {
                std::vector<Formula> both;
                for (const Formula &phi : {fml::started(-1), fml::fired(-1)})
                {
                    Formula inner = fml::eventually(fml::implies(fml::correct(i), phi));
                    both.push_back(fml::iff(fml::B(i, inner), fml::K(i, inner)));
                }
                return fml::And(std::move(both));
            }));
        case PropertyId::Cor22:
            return validity_report(id, per_agent([&](AgentId i) {
                Formula inner = fml::eventually(fml::H(i, fml::started(-1)));
                return fml::iff(fml::B(i, inner), fml::K(i, inner));
            }));
        case PropertyId::Lemma23:
        case PropertyId::Cor24_Eq9_10:
        {
            std::vector<Formula> parts;
            int applicable = 0;
            for (AgentId i = 0; i < n; ++i)
            {
                Formula phi = fml::And({fml::correct(i), fml::Not(fml::started(-1))});
                if (!check_potentially_persistent(phi))
                    continue;
                ++applicable;
                if (id == PropertyId::Lemma23)
                    parts.push_back(fml::implies(fml::B(i, fml::eventually(fml::H(i, fml::started(-1)))),
                                                 fml::B(i, fml::started(-1))));
                else
                {
                    parts.push_back(fml::implies(fml::B(i, fml::everyone(FGroup::EdH, fml::started(-1))),
                                                 fml::B(i, fml::started(-1))));
                    parts.push_back(fml::implies(fml::B(i, fml::common_hope(fml::started(-1))),
                                                 fml::B(i, fml::started(-1))));
                }
            }
            if (applicable == 0)
            {
                CheckReport r = make_report(id, Verdict::NotApplicable,
                                            "correct(i) & !start is not potentially persistent here");
                m_verdicts[id] = r.verdict;
                return r;
            }
            return validity_report(id, fml::And(std::move(parts)),
                                   std::to_string(applicable) + " agents applicable");
        }
        case PropertyId::Lemma26_Eq10:
            return check_lifting();
        case PropertyId::FixpointAxiom_Eq1:
        {
            const Formula phi = fml::started(-1);
            auto fix = m_system.eventual_common_hope(phi);
            const PointSet &lhs = m_system.extension(fml::common_hope(phi));
            const PointSet &rhs = m_system.extension(
                fml::everyone(FGroup::EdH, fml::And({phi, fml::common_hope(phi)})));
            const bool eq = lhs == rhs;
            const bool below = lhs.subset_of(m_system.extension(fml::everyone(FGroup::EdH, phi)));
            CheckReport r = make_report(id, eq && below ? Verdict::Holds : Verdict::Violated,
                                        "fixpoint reached in " + std::to_string(fix.iterations) +
                                            " iterations over " + std::to_string(m_system.point_count()) +
                                            " points");
            m_verdicts[id] = r.verdict;
            return r;
        }
        case PropertyId::BrainInVat:
            return check_brain_in_vat();
        case PropertyId::Remark12:
            return check_remark12();
        }
        raise(ErrorKind::ConfigInvalid, "unknown property");
    }

    CheckReport CheckSuite::check_sufficiency()
    {
        const int n = m_system.n();
        const Formula guard_common = fml::And({fml::started(-1), fml::common_hope(fml::started(-1))});
        const Formula guard_mutual =
            fml::And({fml::started(-1), fml::everyone(FGroup::EdH, fml::started(-1))});

        // (a) a FIRE recorded at t requires the guard at t-1 (agents act on the previous
        // state); (b) a correct agent holding the guard eventually fires
        std::vector<Formula> conj_a, conj_b;
        for (AgentId i = 0; i < n; ++i)
        {
            Formula newly_fired =
                fml::And({fml::fired(i), fml::Not(fml::yesterday(fml::occurred(i, OccKind::Fire)))});
            conj_a.push_back(fml::implies(newly_fired, fml::yesterday(fml::B(i, guard_common))));
            conj_b.push_back(fml::implies(fml::B(i, guard_common),
                                          fml::eventually(fml::implies(fml::correct(i), fml::fired(i)))));
        }
        Formula a = fml::And(conj_a), b = fml::And(conj_b);
        auto cex_a = m_system.first_counterexample(a);
        auto cex_b = m_system.first_counterexample(b);

        if (cex_a || cex_b)
        {
            std::ostringstream detail;
            detail << "premise not satisfied:";
            if (cex_a)
            {
                detail << " guard-before-firing (a) fails";
                bool mutual_held = false;
                for (AgentId i = 0; i < n; ++i)
                {
                    Formula newly_fired = fml::And(
                        {fml::fired(i), fml::Not(fml::yesterday(fml::occurred(i, OccKind::Fire)))});
                    if (m_system.eval(*cex_a, newly_fired) &&
                        m_system.eval(*cex_a, fml::yesterday(fml::B(i, guard_mutual))))
                        mutual_held = true;
                }
                if (mutual_held)
                    detail << " although the eventual-mutual-hope guard held at the same point";
            }
            if (cex_b)
                detail << (cex_a ? ";" : "") << " guard-to-firing (b) fails";
            CheckReport r = make_report(PropertyId::Thm16_2_Eq8, Verdict::NotApplicable, detail.str());
            if (cex_a)
                r.witnesses.push_back(decode_witness(*cex_a, a));
            if (cex_b)
                r.witnesses.push_back(decode_witness(*cex_b, b));
            m_verdicts[PropertyId::Thm16_2_Eq8] = r.verdict;
            return r;
        }

        // premise holds: the theorem promises U and R; re-verify both independently
        const Formula u = fml::implies(fml::fired(-1), fml::started(-1));
        const Formula rr = fml::implies(fml::fired(-1), relay_consequent());
        auto cex_u = m_system.first_counterexample(u);
        auto cex_r = m_system.first_counterexample(rr);
        CheckReport r = make_report(PropertyId::Thm16_2_Eq8,
                                    !cex_u && !cex_r ? Verdict::Holds : Verdict::Violated,
                                    "guards (a) and (b) verified; U and R re-checked independently");
        if (cex_u)
            r.witnesses.push_back(decode_witness(*cex_u, u));
        if (cex_r)
            r.witnesses.push_back(decode_witness(*cex_r, rr));
        m_verdicts[PropertyId::Thm16_2_Eq8] = r.verdict;
        return r;
    }

    bool CheckSuite::check_potentially_persistent(const Formula &phi) const
    {
        const PointSet &holds_now = m_system.extension(phi);
        const PointSet &holds_forever = m_system.extension(fml::always(phi));
        const int stride = m_system.horizon() + 1;
        const int run_count = static_cast<int>(m_system.runs().size());

        for (int rid = 0; rid < run_count; ++rid)
            for (Time t = 0; t <= m_system.horizon(); ++t)
            {
                if (!holds_now.test(static_cast<std::size_t>(rid) * stride + t))
                    continue;
                bool found = false;
                const std::uint64_t want = m_system.runs()[rid].prefix_hash(t);
                for (int other = 0; other < run_count && !found; ++other)
                {
                    if (!holds_forever.test(static_cast<std::size_t>(other) * stride + t))
                        continue;
                    if (m_system.runs()[other].prefix_hash(t) == want &&
                        m_system.runs()[other].prefix_equal(m_system.runs()[rid], t))
                        found = true;
                }
                if (!found)
                    return false;
            }
        return true;
    }

    CheckReport CheckSuite::check_early_local_belief(AgentId i)
    {
        Formula phi = fml::And({fml::correct(i), fml::Not(fml::started(-1))});
        if (!check_potentially_persistent(phi))
            return make_report(PropertyId::Lemma23, Verdict::NotApplicable,
                               "correct(" + std::to_string(i) +
                                   ") & !start is not potentially persistent");
        Formula lemma = fml::implies(fml::B(i, fml::eventually(fml::H(i, fml::started(-1)))),
                                     fml::B(i, fml::started(-1)));
        Formula eq9 = fml::implies(fml::B(i, fml::everyone(FGroup::EdH, fml::started(-1))),
                                   fml::B(i, fml::started(-1)));
        Formula eq10 = fml::implies(fml::B(i, fml::common_hope(fml::started(-1))),
                                    fml::B(i, fml::started(-1)));
        return validity_report(PropertyId::Lemma23, fml::And({lemma, eq9, eq10}),
                               "agent " + std::to_string(i));
    }

    CheckReport CheckSuite::check_lifting()
    {
        const PointSet &mutual = m_system.extension(fml::everyone(FGroup::EdH, fml::started(-1)));
        const PointSet &common = m_system.extension(fml::common_hope(fml::started(-1)));
        std::ostringstream extras;
        extras << "|EdH start| = " << mutual.count() << ", |CdH start| = " << common.count();

        if (m_system.n() < 3 * m_system.f() + 1)
        {
            extras << "; hypothesis n >= 3f+1 fails"
                   << (common == mutual ? "; extensions happen to coincide"
                                        : "; extensions differ (strict inclusion)");
            CheckReport r = make_report(PropertyId::Lemma26_Eq10, Verdict::NotApplicable, extras.str());
            m_verdicts[PropertyId::Lemma26_Eq10] = r.verdict;
            return r;
        }
        if (require(PropertyId::C) != Verdict::Holds)
        {
            CheckReport r =
                make_report(PropertyId::Lemma26_Eq10, Verdict::NotApplicable, "requires C to hold");
            m_verdicts[PropertyId::Lemma26_Eq10] = r.verdict;
            return r;
        }
        std::vector<Formula> premise;
        for (AgentId i = 0; i < m_system.n(); ++i)
            premise.push_back(fml::implies(
                fml::fired(i),
                fml::B(i, fml::And({fml::started(-1), fml::everyone(FGroup::EdH, fml::started(-1))}))));
        if (!m_system.valid(fml::And(std::move(premise))))
        {
            CheckReport r = make_report(PropertyId::Lemma26_Eq10, Verdict::NotApplicable,
                                        "necessity premise for firing fails");
            m_verdicts[PropertyId::Lemma26_Eq10] = r.verdict;
            return r;
        }

        const bool lifted = mutual.subset_of(common);
        extras << "; reverse inclusion holds by normality, so "
               << (lifted ? "the extensions coincide exactly" : "lifting fails");
        CheckReport r = make_report(PropertyId::Lemma26_Eq10,
                                    lifted ? Verdict::Holds : Verdict::Violated, extras.str());
        if (!lifted)
        {
            PointSet gap = mutual;
            PointSet not_common = common;
            not_common.flip();
            gap &= not_common;
            if (auto idx = gap.first_set())
                r.witnesses.push_back(decode_witness(
                    m_system.point_at(*idx),
                    fml::implies(fml::everyone(FGroup::EdH, fml::started(-1)),
                                 fml::common_hope(fml::started(-1)))));
        }
        m_verdicts[PropertyId::Lemma26_Eq10] = r.verdict;
        return r;
    }

    CheckReport CheckSuite::check_brain_in_vat()
    {
        if (m_system.f() < 1)
        {
            CheckReport r = make_report(PropertyId::BrainInVat, Verdict::NotApplicable,
                                        "with f = 0 agents may know their own correctness");
            m_verdicts[PropertyId::BrainInVat] = r.verdict;
            return r;
        }
        std::vector<Formula> xs;
        for (AgentId i = 0; i < m_system.n(); ++i)
            xs.push_back(fml::Not(fml::And({fml::correct(i), fml::K(i, fml::correct(i))})));
        std::string note = m_fingerprint.twins ? "" : "twin coverage disabled: adversary may be incomplete";
        return validity_report(PropertyId::BrainInVat, fml::And(std::move(xs)), std::move(note));
    }

    CheckReport CheckSuite::check_remark12()
    {
        const Run script = remark12_scenario();
        int rid = -1;
        for (std::size_t i = 0; i < m_system.runs().size(); ++i)
            if (m_system.runs()[i] == script)
                rid = static_cast<int>(i);
        if (rid < 0)
        {
            CheckReport r = make_report(PropertyId::Remark12, Verdict::NotApplicable,
                                        "the scripted run is not part of this system");
            m_verdicts[PropertyId::Remark12] = r.verdict;
            return r;
        }

        // agent 2 fires first at t = 4 in the script
        Point firing{rid, 4};
        const Formula b_mutual =
            fml::B(2, fml::And({fml::started(-1), fml::everyone(FGroup::EdH, fml::started(-1))}));
        const Formula b_common =
            fml::B(2, fml::And({fml::started(-1), fml::common_hope(fml::started(-1))}));
        const Formula b_belief = fml::B(2, fml::everyone(FGroup::EdB, fml::started(-1)));

        Formula relay = fml::implies(fml::fired(-1), relay_consequent());
        auto cex = m_system.first_counterexample(relay);

        std::ostringstream detail;
        std::vector<std::string> failures;
        if (!m_system.eval(firing, fml::fired(2)))
            failures.push_back("agent 2 does not fire at the scripted point");
        if (!cex || cex->run != rid)
            failures.push_back("relay violation witness is not the scripted run");
        if (!m_system.eval(firing, b_mutual))
            failures.push_back("belief in start & eventual mutual hope fails at the firing point");
        if (m_system.eval(firing, b_common))
            failures.push_back("belief in start & eventual common hope unexpectedly holds");
        if (m_system.eval(firing, b_belief))
            failures.push_back("belief in eventual mutual belief unexpectedly holds");

        if (failures.empty())
            detail << "relay violated by the scripted run; at the firing point the mutual-hope "
                      "belief holds while the common-hope and mutual-belief variants fail";
        else
            for (const auto &s : failures)
                detail << s << "; ";

        CheckReport r = make_report(PropertyId::Remark12,
                                    failures.empty() ? Verdict::Holds : Verdict::Violated, detail.str());
        r.witnesses.push_back(decode_witness(firing, b_mutual));
        if (cex)
            r.witnesses.push_back(decode_witness(*cex, relay));
        m_verdicts[PropertyId::Remark12] = r.verdict;
        return r;
    }

    std::vector<CheckReport> CheckSuite::run_all(const std::vector<PropertyId> &filter)
    {
        // dependency order: U and R before the necessity theorems, C before lifting
        const std::vector<PropertyId> order = {
            PropertyId::U,          PropertyId::R,            PropertyId::C,
            PropertyId::Lemma6,     PropertyId::Lemma18,      PropertyId::FixpointAxiom_Eq1,
            PropertyId::Lemma7_Eq5, PropertyId::Lemma9_Eq6,   PropertyId::Thm10,
            PropertyId::Thm14_Eq7,  PropertyId::Thm16_1,      PropertyId::Thm16_2_Eq8,
            PropertyId::Lemma21,    PropertyId::Cor22,        PropertyId::Lemma19,
            PropertyId::Lemma23,    PropertyId::Cor24_Eq9_10, PropertyId::Lemma26_Eq10,
            PropertyId::BrainInVat, PropertyId::Remark12,
        };
        auto wanted = [&](PropertyId id) {
            return filter.empty() || std::find(filter.begin(), filter.end(), id) != filter.end();
        };
        std::vector<CheckReport> out;
        for (PropertyId id : order)
        {
            // hypotheses are always evaluated so conditional checks can be gated correctly
            const bool needed = wanted(id) || id == PropertyId::U || id == PropertyId::R ||
                                id == PropertyId::C;
            if (!needed)
                continue;
            CheckReport r = check_theorem(id);
            if (wanted(id))
                out.push_back(std::move(r));
        }
        return out;
    }

    namespace
    {
        nlohmann::json witness_to_json(const Witness &w)
        {
            nlohmann::json j;
            j["run"] = w.point.run;
            j["t"] = w.point.t;
            j["formula"] = w.formula;
            if (w.agent >= 0)
            {
                j["agent"] = w.agent;
                j["agent_history"] = w.agent_history;
                nlohmann::json bucket = nlohmann::json::array();
                for (const auto &p : w.bucket)
                    bucket.push_back({{"run", p.run}, {"t", p.t}});
                j["bucket"] = bucket;
            }
            if (!w.note.empty())
                j["note"] = w.note;
            return j;
        }
    } // namespace

    std::string reports_to_json(const std::vector<CheckReport> &reports)
    {
        nlohmann::json j;
        j["schema"] = "rebelfire-report/1";
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &r : reports)
        {
            nlohmann::json e;
            e["property"] = property_name(r.property);
            e["verdict"] = verdict_name(r.verdict);
            if (!r.detail.empty())
                e["detail"] = r.detail;
            nlohmann::json ws = nlohmann::json::array();
            for (const auto &w : r.witnesses)
                ws.push_back(witness_to_json(w));
            e["witnesses"] = ws;
            e["fingerprint"] = {{"n", r.fingerprint.n},
                                {"f", r.fingerprint.f},
                                {"horizon", r.fingerprint.horizon},
                                {"protocol", r.fingerprint.protocol},
                                {"menu", r.fingerprint.menu},
                                {"runs", r.fingerprint.run_count},
                                {"twins", r.fingerprint.twins},
                                {"sampled", r.fingerprint.sampled},
                                {"delivery", r.fingerprint.delivery},
                                {"seed", r.fingerprint.seed}};
            arr.push_back(e);
        }
        j["reports"] = arr;
        j["violations"] = any_violation(reports);
        return j.dump(2) + "\n";
    }

    std::string reports_to_text(const std::vector<CheckReport> &reports)
    {
        std::ostringstream os;
        for (const auto &r : reports)
        {
            os << property_name(r.property) << ": " << verdict_name(r.verdict);
            if (!r.detail.empty())
                os << "  (" << r.detail << ")";
            os << "\n";
            for (const auto &w : r.witnesses)
            {
                os << "  witness: run " << w.point.run << ", t=" << w.point.t << "  " << w.formula
                   << "\n";
                if (w.agent >= 0)
                {
                    os << "    agent " << w.agent << " history:";
                    if (w.agent_history.empty())
                        os << " (empty)";
                    os << "\n";
                    for (const auto &line : w.agent_history)
                        os << "      " << line << "\n";
                    if (!w.bucket.empty())
                    {
                        os << "    indistinguishable points:";
                        for (const auto &p : w.bucket)
                            os << " (" << p.run << "," << p.t << ")";
                        os << "\n";
                    }
                }
                if (!w.note.empty())
                    os << "    note: " << w.note << "\n";
            }
        }
        if (!reports.empty())
        {
            const auto &fp = reports.front().fingerprint;
            os << "system: n=" << fp.n << " f=" << fp.f << " horizon=" << fp.horizon << " protocol="
               << fp.protocol << " runs=" << fp.run_count << (fp.sampled ? " (sampled)" : "") << "\n";
        }
        return os.str();
    }

    bool any_violation(const std::vector<CheckReport> &reports)
    {
        for (const auto &r : reports)
            if (r.verdict == Verdict::Violated)
                return true;
        return false;
    }
} // namespace rebelfire
