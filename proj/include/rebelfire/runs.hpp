#pragma once

#include "rebelfire/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rebelfire
{
    // An agent's view of its past: one sorted record set per round in which it observed
    // or did anything. Rounds where nothing happened leave no mark, so an agent cannot
    // count silent rounds. Equality of canonical histories is the indistinguishability
    // relation between points.
    struct CanonicalHistory
    {
        std::vector<std::vector<LocalOcc>> rounds;

        bool empty() const noexcept { return rounds.empty(); }
        std::size_t size() const noexcept { return rounds.size(); }

        bool is_prefix_of(const CanonicalHistory &other) const;
        std::uint64_t hash() const noexcept;

        friend bool operator==(const CanonicalHistory &a, const CanonicalHistory &b) noexcept
        {
            return a.rounds == b.rounds;
        }
    };

    // One undelivered message. Delivery scheduling is environment bookkeeping and is not
    // part of the state identity; the multiset below is.
    struct InFlight
    {
        MessageId msg = -1;
        AgentId from = -1;
        AgentId to = -1;
        Round sent = -1;

        friend bool operator==(const InFlight &a, const InFlight &b) noexcept
        {
            return a.msg == b.msg && a.from == b.from && a.to == b.to && a.sent == b.sent;
        }
        friend bool operator<(const InFlight &a, const InFlight &b) noexcept
        {
            if (a.msg != b.msg)
                return a.msg < b.msg;
            if (a.from != b.from)
                return a.from < b.from;
            if (a.to != b.to)
                return a.to < b.to;
            return a.sent < b.sent;
        }
    };

    // Environment ground truth at one time: everything the omniscient observer knows.
    struct EnvView
    {
        Time clock = 0;
        std::vector<std::pair<AgentId, Time>> faulty; // (agent, onset time), onset <= clock
        std::vector<InFlight> in_flight;              // sorted multiset
    };

    // A message put in flight by the environment on behalf of a faulty agent. The sender
    // keeps no record of it (a byzantine agent's memories need not reflect its actions).
    struct EnvSend
    {
        MessageId msg = -1;
        AgentId from = -1;
        AgentId to = -1;

        friend bool operator==(const EnvSend &a, const EnvSend &b) noexcept
        {
            return a.msg == b.msg && a.from == b.from && a.to == b.to;
        }
        friend bool operator<(const EnvSend &a, const EnvSend &b) noexcept
        {
            if (a.msg != b.msg)
                return a.msg < b.msg;
            if (a.from != b.from)
                return a.from < b.from;
            return a.to < b.to;
        }
    };

    // A finite run: ground-truth record sets per (round, agent), environment-side sends
    // per round, plus fault onsets. Immutable in practice: construction goes through
    // append_round, reads are pure.
    struct Run
    {
        int n = 0;
        int f = 0;
        int horizon = 0;                  // T; states at times 0..T, rounds 0..T-1
        std::vector<Time> fault_onset;    // size n; first faulty time, ONSET_NEVER if none
        std::vector<std::uint32_t> offsets; // horizon*n + 1 entries into occs
        std::vector<Occurrence> occs;       // grouped by (round, agent), each group sorted
        std::vector<std::uint32_t> env_offsets; // horizon + 1 entries into env
        std::vector<EnvSend> env;               // grouped by round, each group sorted

        std::span<const Occurrence> at(Round round, AgentId agent) const
        {
            const std::size_t idx = static_cast<std::size_t>(round) * n + agent;
            return {occs.data() + offsets[idx], occs.data() + offsets[idx + 1]};
        }
        std::span<const EnvSend> env_at(Round round) const
        {
            return {env.data() + env_offsets[round], env.data() + env_offsets[round + 1]};
        }

        std::uint64_t hash() const noexcept;
        // Hash of the global-state prefix up to and including time t (rounds < t plus
        // the fault onsets visible by t). Two runs with equal prefix hashes and equal
        // prefixes share the global state r(t).
        std::uint64_t prefix_hash(Time t) const noexcept;
        bool prefix_equal(const Run &other, Time t) const noexcept;

        friend bool operator==(const Run &a, const Run &b) noexcept
        {
            return a.n == b.n && a.f == b.f && a.horizon == b.horizon &&
                   a.fault_onset == b.fault_onset && a.offsets == b.offsets && a.occs == b.occs &&
                   a.env_offsets == b.env_offsets && a.env == b.env;
        }
    };

    Run make_empty_run(int n, int f);

    // What one round contributed: per-agent ground-truth record sets (fault markers are
    // derived from new_faults, do not list them here) and the agents that malfunction
    // during this round.
    struct RoundOutcome
    {
        std::vector<std::vector<Occurrence>> records; // size n
        std::vector<AgentId> new_faults;
        std::vector<EnvSend> env_sends; // fabricated messages from faulty agents

        static RoundOutcome empty(int n) { return RoundOutcome{std::vector<std::vector<Occurrence>>(n), {}, {}}; }
    };

    // Extends the run by one round, re-establishing every invariant:
    //  - |faulty set| <= f, faults never revert                (FaultBudgetExceeded)
    //  - genuine receives consume a matching in-flight entry   (UnmatchedReceive)
    //  - fabricated records only on agents faulty by the end of the round
    Run append_round(const Run &run, const RoundOutcome &outcome);

    // Canonical (empty-rounds-dropped) history prefix of `agent` at time t.
    CanonicalHistory local_state_at(const Run &run, AgentId agent, Time t);

    // True iff no malfunction happened to the agent by time t. Monotone in t.
    bool is_correct(const Run &run, AgentId agent, Time t) noexcept;

    EnvView env_state_at(const Run &run, Time t);

    // Test helper: the same run with one all-empty round spliced in before `round`.
    Run insert_stutter_round(const Run &run, Round round);

    // A frozen batch of runs plus the metadata needed to interpret message ids.
    struct RunSet
    {
        int n = 0;
        int f = 0;
        int horizon = 0;
        std::string protocol;
        std::vector<std::string> alphabet;
        std::vector<Run> runs;
    };

    // Byte-stable structured-text trace: agents ascending, occurrences lexicographic,
    // in-flight multiset after each round. serialize -> parse -> serialize is identity.
    std::string serialize_trace(const RunSet &set);
    RunSet parse_trace(const std::string &text);

    std::string occurrence_to_string(const Occurrence &o, const std::vector<std::string> &alphabet);
} // namespace rebelfire
