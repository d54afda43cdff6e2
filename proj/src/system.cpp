#include "rebelfire/system.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace rebelfire
{
    PointSet::PointSet(std::size_t size, bool value) : m_size(size), m_words((size + 63) / 64, value ? ~0ULL : 0ULL)
    {
        if (value)
            trim();
    }

    void PointSet::trim() noexcept
    {
        if (m_size % 64 != 0 && !m_words.empty())
            m_words.back() &= (1ULL << (m_size % 64)) - 1;
    }

    PointSet &PointSet::operator&=(const PointSet &o)
    {
        for (std::size_t i = 0; i < m_words.size(); ++i)
            m_words[i] &= o.m_words[i];
        return *this;
    }

    PointSet &PointSet::operator|=(const PointSet &o)
    {
        for (std::size_t i = 0; i < m_words.size(); ++i)
            m_words[i] |= o.m_words[i];
        return *this;
    }

    void PointSet::flip()
    {
        for (auto &w : m_words)
            w = ~w;
        trim();
    }

    std::size_t PointSet::count() const noexcept
    {
        std::size_t c = 0;
        for (auto w : m_words)
            c += std::popcount(w);
        return c;
    }

    bool PointSet::subset_of(const PointSet &o) const noexcept
    {
        for (std::size_t i = 0; i < m_words.size(); ++i)
            if (m_words[i] & ~o.m_words[i])
                return false;
        return true;
    }

    std::optional<std::size_t> PointSet::first_clear() const noexcept
    {
        for (std::size_t i = 0; i < m_words.size(); ++i)
        {
            const std::uint64_t inv = ~m_words[i];
            if (inv)
            {
                const std::size_t idx = i * 64 + std::countr_zero(inv);
                if (idx < m_size)
                    return idx;
            }
        }
        return std::nullopt;
    }

    std::optional<std::size_t> PointSet::first_set() const noexcept
    {
        for (std::size_t i = 0; i < m_words.size(); ++i)
            if (m_words[i])
                return i * 64 + std::countr_zero(m_words[i]);
        return std::nullopt;
    }

    InterpretedSystem InterpretedSystem::build(RunSet set)
    {
        for (const Run &r : set.runs)
            if (r.n != set.n || r.f != set.f || r.horizon != set.horizon)
                raise(ErrorKind::HeterogeneousRuns, "all runs must share n, f and horizon");

        InterpretedSystem sys;
        sys.m_set = std::move(set);
        const int n = sys.m_set.n;
        const int T = sys.m_set.horizon;
        const std::size_t P = sys.point_count();

        sys.m_correct.assign(n, PointSet(P));
        sys.m_occ_start.assign(n, PointSet(P));
        sys.m_occ_fire.assign(n, PointSet(P));
        sys.m_history_ids.assign(n, std::vector<std::uint32_t>(P, 0));

        // Hash-consed canonical histories: a node is (parent, record-set); equal node ids
        // are exactly equal canonical histories, per agent.
        struct NodeKey
        {
            std::uint32_t parent;
            std::uint32_t recs;
            bool operator<(const NodeKey &o) const noexcept
            {
                return parent != o.parent ? parent < o.parent : recs < o.recs;
            }
        };
        std::map<std::vector<LocalOcc>, std::uint32_t> rec_ids;
        std::vector<std::map<NodeKey, std::uint32_t>> node_ids(n);
        std::vector<std::uint32_t> node_counts(n, 1); // id 0 = empty history

        for (std::size_t rid = 0; rid < sys.m_set.runs.size(); ++rid)
        {
            const Run &run = sys.m_set.runs[rid];
            for (AgentId a = 0; a < n; ++a)
            {
                std::uint32_t cur = 0;
                for (Time t = 0; t <= T; ++t)
                {
                    const std::size_t p = rid * (T + 1) + t;
                    if (t > 0)
                    {
                        std::vector<LocalOcc> visible;
                        for (const auto &o : run.at(t - 1, a))
                        {
                            if (o.kind == OccKind::Fault)
                                continue;
                            visible.emplace_back(o);
                        }
                        std::sort(visible.begin(), visible.end());
                        visible.erase(std::unique(visible.begin(), visible.end()), visible.end());
                        if (!visible.empty())
                        {
                            auto [it, inserted] = rec_ids.try_emplace(visible, static_cast<std::uint32_t>(rec_ids.size()));
                            auto [nit, fresh] = node_ids[a].try_emplace(NodeKey{cur, it->second}, node_counts[a]);
                            if (fresh)
                                ++node_counts[a];
                            cur = nit->second;
                        }
                    }
                    sys.m_history_ids[a][p] = cur;
                    if (is_correct(run, a, t))
                        sys.m_correct[a].set(p);
                    // raw record presence: monotone in t
                    if (t > 0)
                    {
                        const std::size_t prev = p - 1;
                        bool s = sys.m_occ_start[a].test(prev);
                        bool fi = sys.m_occ_fire[a].test(prev);
                        for (const auto &o : run.at(t - 1, a))
                        {
                            s = s || o.kind == OccKind::Start;
                            fi = fi || o.kind == OccKind::Fire;
                        }
                        if (s)
                            sys.m_occ_start[a].set(p);
                        if (fi)
                            sys.m_occ_fire[a].set(p);
                    }
                }
            }
        }

        // Buckets: group points by history id, per agent.
        sys.m_bucket_of.assign(n, std::vector<std::uint32_t>(P, 0));
        sys.m_buckets.assign(n, {});
        for (AgentId a = 0; a < n; ++a)
        {
            std::vector<std::uint32_t> bucket_index(node_counts[a], UINT32_MAX);
            for (std::size_t p = 0; p < P; ++p)
            {
                const std::uint32_t h = sys.m_history_ids[a][p];
                if (bucket_index[h] == UINT32_MAX)
                {
                    bucket_index[h] = static_cast<std::uint32_t>(sys.m_buckets[a].size());
                    sys.m_buckets[a].emplace_back();
                }
                sys.m_bucket_of[a][p] = bucket_index[h];
                sys.m_buckets[a][bucket_index[h]].push_back(static_cast<std::uint32_t>(p));
            }
        }
        return sys;
    }

    InterpretedSystem build_system(RunSet set) { return InterpretedSystem::build(std::move(set)); }

    PointSet InterpretedSystem::atom_occurred(AgentId agent, OccKind o) const
    {
        const std::size_t P = point_count();
        PointSet out(P);
        auto one = [&](AgentId a) -> const PointSet & { return o == OccKind::Start ? m_occ_start[a] : m_occ_fire[a]; };
        if (agent >= 0)
            return one(agent);
        for (AgentId a = 0; a < n(); ++a)
            out |= one(a);
        return out;
    }

    PointSet InterpretedSystem::belief_from_guard(AgentId agent, const PointSet &guard) const
    {
        // K_a holds at a point iff the guard covers the whole bucket; constant per bucket.
        PointSet out(point_count());
        for (const auto &bucket : m_buckets[agent])
        {
            bool all = true;
            for (auto p : bucket)
                if (!guard.test(p))
                {
                    all = false;
                    break;
                }
            if (all)
                for (auto p : bucket)
                    out.set(p);
        }
        return out;
    }

    PointSet InterpretedSystem::hope_set(AgentId agent, const PointSet &phi) const
    {
        // H_a phi = correct(a) -> B_a phi; vacuously true wherever the agent is faulty.
        PointSet guard = phi | ~PointSet(m_correct[agent]);
        PointSet b = belief_from_guard(agent, guard);
        return b | ~PointSet(m_correct[agent]);
    }

    PointSet InterpretedSystem::suffix_eventually(const PointSet &phi) const
    {
        // <> over the bounded window [t, horizon]: suffix-or within each run.
        const int T = horizon();
        PointSet out(point_count());
        for (std::size_t rid = 0; rid < runs().size(); ++rid)
        {
            bool seen = false;
            for (Time t = T; t >= 0; --t)
            {
                const std::size_t p = rid * (T + 1) + t;
                seen = seen || phi.test(p);
                if (seen)
                    out.set(p);
            }
        }
        return out;
    }

    PointSet InterpretedSystem::mutual_hope_eventually(const PointSet &phi) const
    {
        PointSet acc(point_count(), true);
        for (AgentId j = 0; j < n(); ++j)
            acc &= suffix_eventually(hope_set(j, phi));
        return acc;
    }

    const PointSet &InterpretedSystem::extension(const Formula &f) const
    {
        {
            std::lock_guard<std::mutex> lk(m_memo->mutex);
            auto it = m_memo->map.find(f.hash());
            if (it != m_memo->map.end())
                for (const auto &[g, set] : it->second)
                    if (g == f)
                        return *set;
        }
        PointSet computed = compute_extension(f);
        std::lock_guard<std::mutex> lk(m_memo->mutex);
        auto &slot = m_memo->map[f.hash()];
        for (const auto &[g, set] : slot) // lost a race: keep the existing entry
            if (g == f)
                return *set;
        slot.emplace_back(f, std::make_unique<PointSet>(std::move(computed)));
        return *slot.back().second;
    }

    PointSet InterpretedSystem::compute_extension(const Formula &f) const
    {
        const std::size_t P = point_count();
        switch (f.kind())
        {
        case FKind::True_:
            return PointSet(P, true);
        case FKind::False_:
            return PointSet(P);
        case FKind::AtomCorrect:
            return m_correct[f.agent()];
        case FKind::AtomOccurred:
            return atom_occurred(f.agent(), f.occ());
        case FKind::AtomStarted:
        case FKind::AtomFired:
        {
            const OccKind o = f.kind() == FKind::AtomStarted ? OccKind::Start : OccKind::Fire;
            if (f.agent() >= 0)
                return atom_occurred(f.agent(), o) & m_correct[f.agent()];
            PointSet out(P);
            for (AgentId a = 0; a < n(); ++a)
                out |= atom_occurred(a, o) & m_correct[a];
            return out;
        }
        case FKind::Not:
            return ~PointSet(extension(f.child()));
        case FKind::And:
        {
            PointSet out(P, true);
            for (const auto &c : f.children())
                out &= extension(c);
            return out;
        }
        case FKind::Or:
        {
            PointSet out(P);
            for (const auto &c : f.children())
                out |= extension(c);
            return out;
        }
        case FKind::Implies:
            return ~PointSet(extension(f.child(0))) | extension(f.child(1));
        case FKind::K:
            return belief_from_guard(f.agent(), extension(f.child()));
        case FKind::B:
            return belief_from_guard(f.agent(), extension(f.child()) | ~PointSet(m_correct[f.agent()]));
        case FKind::H:
            return hope_set(f.agent(), extension(f.child()));
        case FKind::Y:
        {
            const PointSet &phi = extension(f.child());
            PointSet out(P);
            const int T = horizon();
            for (std::size_t rid = 0; rid < runs().size(); ++rid)
                for (Time t = 1; t <= T; ++t)
                    if (phi.test(rid * (T + 1) + t - 1))
                        out.set(rid * (T + 1) + t);
            return out;
        }
        case FKind::Eventually:
            return suffix_eventually(extension(f.child()));
        case FKind::Always:
            return ~suffix_eventually(~PointSet(extension(f.child())));
        case FKind::EGroup:
        {
            const PointSet &phi = extension(f.child());
            PointSet acc(P, true);
            for (AgentId j = 0; j < n(); ++j)
            {
                PointSet part = f.group() == FGroup::EB || f.group() == FGroup::EdB
                                    ? belief_from_guard(j, phi | ~PointSet(m_correct[j]))
                                    : hope_set(j, phi);
                if (f.group() == FGroup::EdB || f.group() == FGroup::EdH)
                    part = suffix_eventually(part);
                acc &= part;
            }
            return acc;
        }
        case FKind::CdH:
            return eventual_common_hope(f.child()).set;
        }
        raise(ErrorKind::UnsupportedFormula, "unknown formula node");
    }

    InterpretedSystem::FixpointResult InterpretedSystem::eventual_common_hope(const Formula &phi) const
    {
        const PointSet &phi_set = extension(phi);
        PointSet chi(point_count(), true);
        int iterations = 0;
        while (true)
        {
            ++iterations;
            PointSet next = mutual_hope_eventually(phi_set & chi);
            if (next == chi)
                break;
            chi = std::move(next);
            if (iterations > static_cast<int>(point_count()) + 1)
                raise(ErrorKind::UnsupportedFormula, "fixpoint iteration exceeded the point count");
        }
        // The loop exits exactly when chi == EdH(phi & chi); both halves of the fixpoint
        // equation hold by construction. The containment below is the normality fact
        // CdH phi -> EdH phi, kept as a cheap internal consistency check.
        if (!chi.subset_of(mutual_hope_eventually(phi_set)))
            raise(ErrorKind::UnsupportedFormula, "fixpoint escape: CdH not below EdH");
        return FixpointResult{std::move(chi), iterations};
    }

    bool InterpretedSystem::eval(Point p, const Formula &f) const
    {
        const std::size_t idx = index_of(p);
        switch (f.kind())
        {
        case FKind::True_:
            return true;
        case FKind::False_:
            return false;
        case FKind::AtomCorrect:
            return m_correct[f.agent()].test(idx);
        case FKind::AtomOccurred:
        {
            auto one = [&](AgentId a) {
                return (f.occ() == OccKind::Start ? m_occ_start[a] : m_occ_fire[a]).test(idx);
            };
            if (f.agent() >= 0)
                return one(f.agent());
            for (AgentId a = 0; a < n(); ++a)
                if (one(a))
                    return true;
            return false;
        }
        case FKind::AtomStarted:
        case FKind::AtomFired:
        {
            const OccKind o = f.kind() == FKind::AtomStarted ? OccKind::Start : OccKind::Fire;
            auto one = [&](AgentId a) {
                return (o == OccKind::Start ? m_occ_start[a] : m_occ_fire[a]).test(idx) && m_correct[a].test(idx);
            };
            if (f.agent() >= 0)
                return one(f.agent());
            for (AgentId a = 0; a < n(); ++a)
                if (one(a))
                    return true;
            return false;
        }
        case FKind::Not:
            return !eval(p, f.child());
        case FKind::And:
            for (const auto &c : f.children())
                if (!eval(p, c))
                    return false;
            return true;
        case FKind::Or:
            for (const auto &c : f.children())
                if (eval(p, c))
                    return true;
            return false;
        case FKind::Implies:
            return !eval(p, f.child(0)) || eval(p, f.child(1));
        case FKind::K:
        {
            for (auto q : bucket(f.agent(), idx))
                if (!eval(point_at(q), f.child()))
                    return false;
            return true;
        }
        case FKind::B:
        {
            for (auto q : bucket(f.agent(), idx))
                if (m_correct[f.agent()].test(q) && !eval(point_at(q), f.child()))
                    return false;
            return true;
        }
        case FKind::H:
            if (!m_correct[f.agent()].test(idx))
                return true;
            return eval(p, fml::B(f.agent(), f.child()));
        case FKind::Y:
            return p.t > 0 && eval(Point{p.run, p.t - 1}, f.child());
        case FKind::Eventually:
            for (Time t = p.t; t <= horizon(); ++t)
                if (eval(Point{p.run, t}, f.child()))
                    return true;
            return false;
        case FKind::Always:
            for (Time t = p.t; t <= horizon(); ++t)
                if (!eval(Point{p.run, t}, f.child()))
                    return false;
            return true;
        case FKind::EGroup:
        {
            for (AgentId j = 0; j < n(); ++j)
            {
                const bool hope = f.group() == FGroup::EH || f.group() == FGroup::EdH;
                Formula part = hope ? fml::H(j, f.child()) : fml::B(j, f.child());
                if (f.group() == FGroup::EdB || f.group() == FGroup::EdH)
                    part = fml::eventually(std::move(part));
                if (!eval(p, part))
                    return false;
            }
            return true;
        }
        case FKind::CdH:
            // The fixpoint has no pointwise shortcut; delegate to the bulk computation.
            return eventual_common_hope(f.child()).set.test(idx);
        }
        raise(ErrorKind::UnsupportedFormula, "unknown formula node");
    }

    std::optional<Point> InterpretedSystem::first_counterexample(const Formula &f) const
    {
        const PointSet &ext = extension(f);
        if (auto idx = ext.first_clear())
            return point_at(*idx);
        return std::nullopt;
    }
} // namespace rebelfire
