#pragma once

// Shared generators for the property-style tests.

#include "rebelfire/runs.hpp"
#include "rebelfire/system.hpp"

#include <random>

namespace rebelfire::testgen
{
    // A random but invariant-respecting system: faults within budget, receives matched,
    // fabrications only on faulty agents.
    inline RunSet random_system(std::mt19937_64 &rng, int max_agents = 3, int max_horizon = 4,
                                int max_runs = 5)
    {
        auto pick = [&](int n) { return static_cast<int>(rng() % n); };
        RunSet set;
        set.n = 1 + pick(max_agents);
        set.f = set.n > 1 ? pick(2) : 0;
        set.horizon = 2 + pick(max_horizon - 1);
        set.alphabet = {"M"};
        const int count = 1 + pick(max_runs);

        for (int rid = 0; rid < count; ++rid)
        {
            Run run = make_empty_run(set.n, set.f);
            AgentId faulty = -1;
            Round onset = 0;
            if (set.f > 0 && pick(2))
            {
                faulty = pick(set.n);
                onset = pick(set.horizon + 1) - 1; // -1 = initial
                if (onset < 0)
                    run.fault_onset[faulty] = ONSET_INITIAL;
            }
            std::vector<bool> started(set.n, false);
            std::vector<InFlight> fly;

            for (Round k = 0; k < set.horizon; ++k)
            {
                RoundOutcome oc = RoundOutcome::empty(set.n);
                if (faulty >= 0 && onset == k)
                    oc.new_faults.push_back(faulty);
                const auto deviant = [&](AgentId a) { return a == faulty && (onset < 0 || onset <= k); };

                for (AgentId a = 0; a < set.n; ++a)
                {
                    if (!started[a] && pick(4) == 0)
                    {
                        started[a] = true;
                        oc.records[a].push_back(Occurrence{OccKind::Start, -1, -1, true});
                    }
                    if (pick(4) == 0)
                    {
                        const AgentId to = pick(set.n);
                        if (to != a)
                        {
                            oc.records[a].push_back(Occurrence{OccKind::Send, 0, to, true});
                            fly.push_back(InFlight{0, a, to, k});
                        }
                    }
                    if (pick(5) == 0)
                        oc.records[a].push_back(Occurrence{OccKind::Fire, -1, -1, true});
                    if (deviant(a))
                    {
                        if (pick(4) == 0)
                            oc.records[a].push_back(Occurrence{OccKind::Start, -1, -1, false});
                        if (pick(4) == 0)
                            oc.records[a].push_back(
                                Occurrence{OccKind::Receive, 0, pick(set.n), false});
                    }
                }
                for (auto it = fly.begin(); it != fly.end();)
                {
                    if (it->sent < k && pick(2) == 0)
                    {
                        oc.records[it->to].push_back(Occurrence{OccKind::Receive, it->msg, it->from, true});
                        it = fly.erase(it);
                    }
                    else
                        ++it;
                }
                run = append_round(run, oc);
            }
            set.runs.push_back(std::move(run));
        }
        // deduplicate: the Kripke model is a set of runs
        std::vector<Run> unique_runs;
        for (auto &r : set.runs)
        {
            bool dup = false;
            for (const auto &u : unique_runs)
                if (u == r)
                {
                    dup = true;
                    break;
                }
            if (!dup)
                unique_runs.push_back(std::move(r));
        }
        set.runs = std::move(unique_runs);
        return set;
    }
} // namespace rebelfire::testgen
