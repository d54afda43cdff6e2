#include "rebelfire/protocol.hpp"

#include <algorithm>

namespace rebelfire
{
    bool history_has(const CanonicalHistory &h, OccKind kind, MessageId msg)
    {
        for (const auto &round : h.rounds)
            for (const auto &o : round)
                if (o.kind == kind && (msg < 0 || o.msg == msg))
                    return true;
        return false;
    }

    std::vector<AgentId> received_from(const CanonicalHistory &h, MessageId msg)
    {
        std::vector<AgentId> out;
        for (const auto &round : h.rounds)
            for (const auto &o : round)
                if (o.kind == OccKind::Receive && o.msg == msg)
                    out.push_back(o.peer);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    namespace
    {
        ActionSet broadcast(MessageId msg, AgentId self, int n)
        {
            ActionSet s;
            for (AgentId j = 0; j < n; ++j)
                if (j != self)
                    s.push_back(Action{ActKind::Send, msg, j});
            return s;
        }
    } // namespace

    ProtocolSpec naive_relay()
    {
        constexpr MessageId NOTIFY = 0;
        ProtocolSpec p;
        p.name = "naive";
        p.alphabet = {"NOTIFY"};
        p.decide = [](const CanonicalHistory &h, AgentId self, int n) {
            const bool triggered = history_has(h, OccKind::Start) || !received_from(h, NOTIFY).empty();
            const bool acted = history_has(h, OccKind::Fire);
            if (!triggered || acted)
                return ProtocolDecision::idle();
            ActionSet s = broadcast(NOTIFY, self, n);
            s.push_back(Action{ActKind::Fire, -1, -1});
            return ProtocolDecision::single(std::move(s));
        };
        return p;
    }

    ProtocolSpec echo_frr(int f)
    {
        constexpr MessageId ECHO = 0;
        ProtocolSpec p;
        p.name = "echo";
        p.alphabet = {"ECHO"};
        p.decide = [f](const CanonicalHistory &h, AgentId self, int n) {
            const bool has_start = history_has(h, OccKind::Start);
            const bool echoed = history_has(h, OccKind::Send, ECHO);
            const bool fired = history_has(h, OccKind::Fire);
            auto senders = received_from(h, ECHO);
            std::size_t sources = senders.size();
            if (has_start || echoed)
                ++sources; // self-source, counted once
            ActionSet s;
            if (!echoed && (has_start || sources >= static_cast<std::size_t>(f) + 1))
                s = broadcast(ECHO, self, n);
            if (!fired && sources >= 2 * static_cast<std::size_t>(f) + 1)
                s.push_back(Action{ActKind::Fire, -1, -1});
            if (s.empty())
                return ProtocolDecision::idle();
            return ProtocolDecision::single(std::move(s));
        };
        return p;
    }

    ProtocolSpec mutual_hope_trigger()
    {
        constexpr MessageId NOTIFY = 0;
        ProtocolSpec p;
        p.name = "mutual-hope";
        p.alphabet = {"NOTIFY"};
        p.decide = [](const CanonicalHistory &h, AgentId self, int n) {
            const bool has_start = history_has(h, OccKind::Start);
            const bool notified = history_has(h, OccKind::Send, NOTIFY);
            const bool fired = history_has(h, OccKind::Fire);
            const auto confirmations = received_from(h, NOTIFY);
            ActionSet s;
            if (has_start && !notified)
                s = broadcast(NOTIFY, self, n);
            if (!fired && confirmations.size() >= 2)
                s.push_back(Action{ActKind::Fire, -1, -1});
            if (s.empty())
                return ProtocolDecision::idle();
            return ProtocolDecision::single(std::move(s));
        };
        return p;
    }

    ProtocolSpec protocol_by_name(const std::string &name, int f)
    {
        if (name == "naive")
            return naive_relay();
        if (name == "echo")
            return echo_frr(f);
        if (name == "mutual-hope")
            return mutual_hope_trigger();
        raise(ErrorKind::ConfigInvalid, "unknown protocol '" + name + "'");
    }

    Run remark12_scenario()
    {
        // Agents: 0 = c1, 1 = b (byzantine from the beginning), 2 = c2.
        constexpr MessageId NOTIFY = 0;
        constexpr AgentId C1 = 0, B = 1, C2 = 2;
        const int n = 3, f = 1, horizon = 5;

        Run r = make_empty_run(n, f);
        r.fault_onset[B] = ONSET_INITIAL;

        auto genuine = [](OccKind k, MessageId m = -1, AgentId peer = -1) {
            return Occurrence{k, m, peer, true};
        };

        // round 0: c1 and c2 observe START
        {
            RoundOutcome oc = RoundOutcome::empty(n);
            oc.records[C1].push_back(genuine(OccKind::Start));
            oc.records[C2].push_back(genuine(OccKind::Start));
            r = append_round(r, oc);
        }
        // round 1: c1 and c2 notify everyone; b fakes a notification to c2 only
        {
            RoundOutcome oc = RoundOutcome::empty(n);
            oc.records[C1] = {genuine(OccKind::Send, NOTIFY, B), genuine(OccKind::Send, NOTIFY, C2)};
            oc.records[C2] = {genuine(OccKind::Send, NOTIFY, C1), genuine(OccKind::Send, NOTIFY, B)};
            oc.env_sends = {EnvSend{NOTIFY, B, C2}};
            r = append_round(r, oc);
        }
        // round 2: everything in flight is delivered
        {
            RoundOutcome oc = RoundOutcome::empty(n);
            oc.records[C1] = {genuine(OccKind::Receive, NOTIFY, C2)};
            oc.records[B] = {genuine(OccKind::Receive, NOTIFY, C1), genuine(OccKind::Receive, NOTIFY, C2)};
            oc.records[C2] = {genuine(OccKind::Receive, NOTIFY, C1), genuine(OccKind::Receive, NOTIFY, B)};
            r = append_round(r, oc);
        }
        // round 3: c2 has two independent confirmations and fires; c1 has one and waits
        {
            RoundOutcome oc = RoundOutcome::empty(n);
            oc.records[C2] = {genuine(OccKind::Fire)};
            r = append_round(r, oc);
        }
        // round 4: nothing more happens; c1 never fires
        r = append_round(r, RoundOutcome::empty(n));

        (void)horizon;
        return r;
    }
} // namespace rebelfire
