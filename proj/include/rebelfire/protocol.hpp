#pragma once

#include "rebelfire/runs.hpp"

#include <functional>
#include <string>
#include <vector>

namespace rebelfire
{
    enum class ActKind : std::uint8_t
    {
        Fire,
        Send,
    };

    struct Action
    {
        ActKind kind = ActKind::Fire;
        MessageId msg = -1; // Send only
        AgentId to = -1;    // Send only

        friend bool operator==(const Action &a, const Action &b) noexcept
        {
            return a.kind == b.kind && a.msg == b.msg && a.to == b.to;
        }
    };

    using ActionSet = std::vector<Action>;

    // The alternatives an agent may choose between this round. Always non-empty;
    // a deterministic protocol returns exactly one alternative (possibly no actions).
    struct ProtocolDecision
    {
        std::vector<ActionSet> alternatives;

        static ProtocolDecision single(ActionSet s) { return ProtocolDecision{{std::move(s)}}; }
        static ProtocolDecision idle() { return ProtocolDecision{{ActionSet{}}}; }
    };

    // A protocol is a pure function of the agent's canonical local history. It never sees
    // the global clock, other agents' states, or anything the history does not contain.
    struct ProtocolSpec
    {
        std::string name;
        std::vector<std::string> alphabet;
        std::function<ProtocolDecision(const CanonicalHistory &, AgentId self, int n)> decide;
    };

    // History-scanning helpers shared by the reference protocols.
    bool history_has(const CanonicalHistory &h, OccKind kind, MessageId msg = -1);
    // Distinct peers from whom `msg` was received.
    std::vector<AgentId> received_from(const CanonicalHistory &h, MessageId msg);

    // Fire-and-forward: on the first START observation or the first notification, FIRE
    // and tell everyone. Correct under crash faults, forgeable under byzantine ones.
    ProtocolSpec naive_relay();

    // Echo amplification with thresholds f+1 (echo) and 2f+1 (fire). An agent's own
    // START observation and its own broadcast ECHO each count as the agent's one
    // self-source; everything else needs distinct senders.
    ProtocolSpec echo_frr(int f);

    // Two-independent-confirmations trigger: notify on START, fire once two distinct
    // other agents have notified. Own observation does not count toward the threshold.
    ProtocolSpec mutual_hope_trigger();

    ProtocolSpec protocol_by_name(const std::string &name, int f);

    // The three-agent run where relying on eventual mutual hope alone breaks Relay:
    // agents 0 and 2 observe START and notify everyone; faulty agent 1 fakes a
    // notification to agent 2 only; agent 2 fires, agent 0 never can.
    // Agent ids: 0 = c1, 1 = b, 2 = c2; horizon 5.
    Run remark12_scenario();
} // namespace rebelfire
