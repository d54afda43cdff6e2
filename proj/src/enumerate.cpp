#include "rebelfire/enumerate.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>
#include <unordered_map>

namespace rebelfire
{
    std::string ByzScript::describe(const std::vector<std::string> &alphabet) const
    {
        auto msg_name = [&](MessageId m) {
            return m >= 0 && m < static_cast<int>(alphabet.size()) ? alphabet[m] : "#" + std::to_string(m);
        };
        switch (kind)
        {
        case ByzKind::Benign:
            return "benign";
        case ByzKind::OmitSends:
            return "omit-sends";
        case ByzKind::FakeStart:
            return "fake-start@" + std::to_string(round);
        case ByzKind::FakeSendBcast:
            return "fake-send-bcast:" + msg_name(msg) + "@" + std::to_string(round);
        case ByzKind::FakeSendTo:
            return "fake-send-to:" + msg_name(msg) + ">" + std::to_string(target) + "@" + std::to_string(round);
        case ByzKind::FakeReceive:
            return "fake-receive:" + msg_name(msg) + "<" + std::to_string(target) + "@" + std::to_string(round);
        }
        return "?";
    }

    void validate_config(const AdversaryConfig &cfg, const ProtocolSpec &protocol)
    {
        if (cfg.n < 1)
            raise(ErrorKind::ConfigInvalid, "need at least one agent");
        if (cfg.f < 0 || cfg.f >= cfg.n)
            raise(ErrorKind::ConfigInvalid, "fault bound must satisfy 0 <= f < n");
        if (cfg.horizon < 1)
            raise(ErrorKind::ConfigInvalid, "horizon must be at least 1");
        if (cfg.max_delay < 1)
            raise(ErrorKind::ConfigInvalid, "max_delay must be at least 1");
        if (cfg.max_runs == 0 || cfg.max_branch_points <= 0)
            raise(ErrorKind::ConfigInvalid, "caps must be positive");
        if (cfg.start_patterns.empty())
            raise(ErrorKind::ConfigInvalid, "need at least one start pattern (possibly empty)");
        for (const auto &pat : cfg.start_patterns)
        {
            std::vector<AgentId> seen;
            for (const auto &inj : pat)
            {
                if (inj.agent < 0 || inj.agent >= cfg.n || inj.round < 0 || inj.round >= cfg.horizon)
                    raise(ErrorKind::ConfigInvalid, "start injection out of range");
                if (std::find(seen.begin(), seen.end(), inj.agent) != seen.end())
                    raise(ErrorKind::ConfigInvalid, "at most one START per agent per run");
                seen.push_back(inj.agent);
            }
        }
        for (AgentId a : cfg.fault_agents)
            if (a < 0 || a >= cfg.n)
                raise(ErrorKind::ConfigInvalid, "fault agent out of range");
        for (Round r : cfg.onsets)
            if (r < -1 || r >= cfg.horizon)
                raise(ErrorKind::ConfigInvalid, "onset round out of range");
        for (const auto &m : cfg.byz_menu)
            if (m != "fake_send" && m != "fake_start_record" && m != "omit_send" && m != "fake_receive")
                raise(ErrorKind::ConfigInvalid, "unknown byzantine menu item '" + m + "'");
        for (const Run &r : cfg.scenario_runs)
            if (r.n != cfg.n || r.f != cfg.f || r.horizon != cfg.horizon)
                raise(ErrorKind::ConfigInvalid, "scenario run does not match the config shape");
        if (!protocol.decide)
            raise(ErrorKind::ConfigInvalid, "protocol has no decision function");
    }

    namespace
    {
        struct ChoiceSource
        {
            virtual ~ChoiceSource() = default;
            virtual int pick(const std::string &label, int options) = 0;
        };

        bool menu_has(const AdversaryConfig &cfg, const char *item)
        {
            return std::find(cfg.byz_menu.begin(), cfg.byz_menu.end(), item) != cfg.byz_menu.end();
        }

        std::vector<FaultPlan> build_fault_plans(const AdversaryConfig &cfg, const ProtocolSpec &protocol)
        {
            std::vector<FaultPlan> plans;
            plans.push_back(FaultPlan{-1, -1, false, {}}); // no fault
            // faults are explored only through the configured behavior menu
            if (cfg.f < 1 || cfg.byz_menu.empty())
                return plans;

            std::vector<AgentId> agents = cfg.fault_agents;
            if (agents.empty())
                for (AgentId a = 0; a < cfg.n; ++a)
                    agents.push_back(a);
            std::vector<Round> onsets = cfg.onsets;
            if (onsets.empty())
                for (Round r = -1; r < cfg.horizon; ++r)
                    onsets.push_back(r);

            const int msgs = static_cast<int>(protocol.alphabet.size());
            for (AgentId a : agents)
                for (Round onset : onsets)
                {
                    const Round dev = onset < 0 ? 0 : onset;
                    auto add = [&](ByzScript s) { plans.push_back(FaultPlan{a, onset, false, s}); };
                    // fake actions come in two flavors: alongside the protocol, or instead of it
                    auto add_both = [&](ByzScript s) {
                        plans.push_back(FaultPlan{a, onset, false, s});
                        plans.push_back(FaultPlan{a, onset, true, s});
                    };
                    add(ByzScript{ByzKind::Benign, -1, -1, -1});
                    if (menu_has(cfg, "omit_send"))
                    {
                        add(ByzScript{ByzKind::OmitSends, -1, -1, -1});
                        plans.push_back(FaultPlan{a, onset, true, ByzScript{ByzKind::Benign, -1, -1, -1}});
                    }
                    if (menu_has(cfg, "fake_start_record"))
                        for (Round r = dev; r < cfg.horizon; ++r)
                            add_both(ByzScript{ByzKind::FakeStart, r, -1, -1});
                    if (menu_has(cfg, "fake_send"))
                        for (MessageId m = 0; m < msgs; ++m)
                            for (Round r = dev; r < cfg.horizon; ++r)
                            {
                                add_both(ByzScript{ByzKind::FakeSendBcast, r, m, -1});
                                for (AgentId j = 0; j < cfg.n; ++j)
                                    if (j != a)
                                        add_both(ByzScript{ByzKind::FakeSendTo, r, m, j});
                            }
                    if (menu_has(cfg, "fake_receive"))
                        for (MessageId m = 0; m < msgs; ++m)
                            for (Round r = dev; r < cfg.horizon; ++r)
                                for (AgentId j = 0; j < cfg.n; ++j)
                                    if (j != a)
                                        add_both(ByzScript{ByzKind::FakeReceive, r, m, j});
                }
            return plans;
        }

        struct PendingDelivery
        {
            MessageId msg;
            AgentId from;
            AgentId to;
            Round deliver; // delivery round
        };

        // One full simulation. Every nondeterministic point asks the source.
        Run simulate(const ProtocolSpec &protocol, const AdversaryConfig &cfg,
                     const std::vector<FaultPlan> &plans, ChoiceSource &src)
        {
            const int n = cfg.n, T = cfg.horizon;

            const int pattern_idx =
                src.pick("pattern", static_cast<int>(cfg.start_patterns.size()));
            const StartPattern &pattern = cfg.start_patterns[pattern_idx];
            const int plan_idx = src.pick("fault", static_cast<int>(plans.size()));
            const FaultPlan &plan = plans[plan_idx];
            bool skip_faulty_deliveries = false;
            if (plan.agent >= 0)
                skip_faulty_deliveries = src.pick("faulty-deliveries", 2) == 1;

            Run run = make_empty_run(n, cfg.f);
            if (plan.agent >= 0 && plan.onset_round < 0)
                run.fault_onset[plan.agent] = ONSET_INITIAL;

            std::vector<PendingDelivery> pending;

            for (Round k = 0; k < T; ++k)
            {
                RoundOutcome oc = RoundOutcome::empty(n);

                if (plan.agent >= 0 && plan.onset_round == k)
                    oc.new_faults.push_back(plan.agent);

                // protocol decisions on the histories at time k
                for (AgentId a = 0; a < n; ++a)
                {
                    const bool deviant = plan.agent == a && plan.deviation_round() <= k;
                    ProtocolDecision dec = protocol.decide(local_state_at(run, a, k), a, n);
                    if (dec.alternatives.empty())
                        raise(ErrorKind::ConfigInvalid, "protocol returned no alternative");
                    int alt = 0;
                    if (dec.alternatives.size() > 1)
                        alt = src.pick("alt:" + std::to_string(a) + "@" + std::to_string(k),
                                       static_cast<int>(dec.alternatives.size()));
                    if (!(deviant && plan.silent))
                        for (const Action &act : dec.alternatives[alt])
                        {
                            if (act.kind == ActKind::Fire)
                                oc.records[a].push_back(Occurrence{OccKind::Fire, -1, -1, true});
                            else if (!(deviant && plan.script.kind == ByzKind::OmitSends))
                                oc.records[a].push_back(Occurrence{OccKind::Send, act.msg, act.to, true});
                        }
                    if (deviant && plan.script.round == k)
                    {
                        switch (plan.script.kind)
                        {
                        case ByzKind::FakeStart:
                            oc.records[a].push_back(Occurrence{OccKind::Start, -1, -1, false});
                            break;
                        case ByzKind::FakeReceive:
                            oc.records[a].push_back(
                                Occurrence{OccKind::Receive, plan.script.msg, plan.script.target, false});
                            break;
                        case ByzKind::FakeSendBcast:
                            for (AgentId j = 0; j < n; ++j)
                                if (j != a)
                                    oc.env_sends.push_back(EnvSend{plan.script.msg, a, j});
                            break;
                        case ByzKind::FakeSendTo:
                            oc.env_sends.push_back(EnvSend{plan.script.msg, a, plan.script.target});
                            break;
                        default:
                            break;
                        }
                    }
                }

                // START injections scheduled for this round
                for (const auto &inj : pattern)
                    if (inj.round == k)
                        oc.records[inj.agent].push_back(Occurrence{OccKind::Start, -1, -1, true});

                // deliveries that were scheduled for this round
                for (auto it = pending.begin(); it != pending.end();)
                {
                    if (it->deliver == k)
                    {
                        const bool to_faulty =
                            plan.agent == it->to && plan.deviation_round() <= k;
                        if (!(skip_faulty_deliveries && to_faulty))
                            oc.records[it->to].push_back(
                                Occurrence{OccKind::Receive, it->msg, it->from, true});
                        it = pending.erase(it);
                    }
                    else
                        ++it;
                }

                // schedule this round's sends; one wave per sender in wave granularity
                for (AgentId a = 0; a < n; ++a)
                {
                    std::vector<std::pair<MessageId, AgentId>> outgoing;
                    for (const auto &o : oc.records[a])
                        if (o.kind == OccKind::Send)
                            outgoing.emplace_back(o.msg, o.peer);
                    for (const auto &m : oc.env_sends)
                        if (m.from == a)
                            outgoing.emplace_back(m.msg, m.to);
                    if (outgoing.empty())
                        continue;
                    const int max_d = std::min(cfg.max_delay, T - 1 - k);
                    if (max_d < 1)
                        continue; // no round left: the messages stay in flight
                    const bool lossy = cfg.delivery == DeliveryMode::AllowLoss;
                    const int options = max_d + (lossy ? 1 : 0);
                    if (cfg.granularity == Granularity::Wave)
                    {
                        const int d = src.pick("wave:" + std::to_string(a) + "@" + std::to_string(k),
                                               options);
                        if (!(lossy && d == max_d))
                            for (const auto &[msg, to] : outgoing)
                                pending.push_back(PendingDelivery{msg, a, to, k + 1 + d});
                    }
                    else
                    {
                        for (std::size_t i = 0; i < outgoing.size(); ++i)
                        {
                            const int d = src.pick("msg:" + std::to_string(a) + "@" +
                                                       std::to_string(k) + "#" + std::to_string(i),
                                                   options);
                            if (!(lossy && d == max_d))
                                pending.push_back(
                                    PendingDelivery{outgoing[i].first, a, outgoing[i].second, k + 1 + d});
                        }
                    }
                }

                run = append_round(run, oc);
            }
            return run;
        }

        // Replays a recorded prefix, then always picks option 0 while recording what it saw.
        struct TraceSource final : ChoiceSource
        {
            const std::vector<int> *prefix = nullptr;
            std::vector<Choice> seen;
            int cap = 1 << 20;

            int pick(const std::string &label, int options) override
            {
                if (options < 1)
                    raise(ErrorKind::ConfigInvalid, "empty choice set");
                int chosen = 0;
                if (prefix && seen.size() < prefix->size())
                    chosen = (*prefix)[seen.size()];
                if (chosen >= options)
                    raise(ErrorKind::ArtifactCorrupt, "choice log does not fit this configuration");
                seen.push_back(Choice{label, chosen, options});
                if (static_cast<int>(seen.size()) > cap)
                    raise(ErrorKind::CapExceeded, "per-run choice points exceeded the cap");
                return chosen;
            }
        };

        struct RandomSource final : ChoiceSource
        {
            std::mt19937_64 rng;
            std::vector<Choice> seen;

            explicit RandomSource(std::uint64_t seed) : rng(seed) {}

            int pick(const std::string &label, int options) override
            {
                const int chosen =
                    options == 1 ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(options));
                seen.push_back(Choice{label, chosen, options});
                return chosen;
            }
        };

        // Lexicographic successor of a completed choice vector; empty when exhausted.
        std::optional<std::vector<int>> next_prefix(const std::vector<Choice> &seen)
        {
            for (std::size_t i = seen.size(); i-- > 0;)
                if (seen[i].chosen + 1 < seen[i].options)
                {
                    std::vector<int> out(i + 1);
                    for (std::size_t j = 0; j < i; ++j)
                        out[j] = seen[j].chosen;
                    out[i] = seen[i].chosen + 1;
                    return out;
                }
            return std::nullopt;
        }

        struct DedupSet
        {
            std::unordered_map<std::uint64_t, std::vector<std::size_t>> by_hash;
            const std::vector<Run> *runs = nullptr;

            bool insert(const Run &r, std::size_t idx)
            {
                auto &slot = by_hash[r.hash()];
                for (std::size_t other : slot)
                    if ((*runs)[other] == r)
                        return false;
                slot.push_back(idx);
                return true;
            }
        };

        int worker_count()
        {
            unsigned hw = std::thread::hardware_concurrency();
            if (hw == 0)
                hw = 1;
            if (const char *env = std::getenv("REBELFIRE_THREADS"))
            {
                const long v = std::strtol(env, nullptr, 10);
                if (v >= 1 && v < 256)
                    hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
            }
            return static_cast<int>(hw);
        }

        struct SubtreeResult
        {
            std::vector<Run> runs;
            std::vector<ChoiceLog> logs;
            std::uint64_t explored = 0;
            bool cap_exceeded = false;
        };

        // Exhausts the subtree under the fixed (pattern, fault) prefix.
        SubtreeResult enumerate_subtree(const ProtocolSpec &protocol, const AdversaryConfig &cfg,
                                        const std::vector<FaultPlan> &plans, int pattern_idx,
                                        int plan_idx, std::uint64_t local_cap)
        {
            SubtreeResult out;
            std::vector<int> prefix{pattern_idx, plan_idx};
            while (true)
            {
                TraceSource src;
                src.prefix = &prefix;
                src.cap = cfg.max_branch_points;
                Run run = simulate(protocol, cfg, plans, src);
                if (src.seen[0].chosen != pattern_idx || src.seen[1].chosen != plan_idx)
                    break; // odometer rolled past this subtree
                ++out.explored;
                out.runs.push_back(std::move(run));
                out.logs.push_back(ChoiceLog{src.seen});
                if (out.runs.size() > local_cap)
                {
                    out.cap_exceeded = true;
                    break;
                }
                auto next = next_prefix(src.seen);
                if (!next)
                    break;
                prefix = std::move(*next);
                if (prefix.size() < 2 || prefix[0] != pattern_idx || prefix[1] != plan_idx)
                    break;
            }
            return out;
        }

        ChoiceLog synthetic_log(const std::string &what)
        {
            ChoiceLog log;
            log.choices.push_back(Choice{what, 0, 1});
            return log;
        }

        void append_deduped(EnumerationResult &res, DedupSet &dedup, Run run, ChoiceLog log)
        {
            res.set.runs.push_back(std::move(run));
            if (!dedup.insert(res.set.runs.back(), res.set.runs.size() - 1))
            {
                res.set.runs.pop_back();
                return;
            }
            res.logs.push_back(std::move(log));
        }
    } // namespace

    namespace
    {
        bool fault_free(const Run &r)
        {
            for (AgentId a = 0; a < r.n; ++a)
                if (r.fault_onset[a] != ONSET_NEVER)
                    return false;
            return true;
        }

        // For a fault-free base the twin is pure bookkeeping: mark the victim faulty from
        // the start and turn its event records into fabrications. Every agent's local
        // history, including the victim's, is untouched.
        Run flip_twin(const Run &base, AgentId victim)
        {
            Run out = base;
            out.fault_onset[victim] = ONSET_INITIAL;
            for (Round k = 0; k < out.horizon; ++k)
            {
                const std::size_t begin = out.offsets[static_cast<std::size_t>(k) * out.n + victim];
                const std::size_t end = out.offsets[static_cast<std::size_t>(k) * out.n + victim + 1];
                for (std::size_t i = begin; i < end; ++i)
                {
                    Occurrence &o = out.occs[i];
                    if (o.kind == OccKind::Start || o.kind == OccKind::Receive)
                        o.genuine = false;
                }
            }
            return out;
        }
    } // namespace

    Run faulty_twin(const Run &base, AgentId victim, const ProtocolSpec &protocol)
    {
        if (fault_free(base))
            return flip_twin(base, victim);
        const int n = base.n, T = base.horizon;
        Run run = make_empty_run(n, base.f);
        run.fault_onset[victim] = ONSET_INITIAL;

        std::vector<PendingDelivery> pending;
        for (Round k = 0; k < T; ++k)
        {
            RoundOutcome oc = RoundOutcome::empty(n);

            for (AgentId a = 0; a < n; ++a)
            {
                if (a == victim)
                {
                    // Replay the victim's base-history records: actions happen for real,
                    // events become fabrications of its malfunction.
                    for (const auto &o : base.at(k, a))
                    {
                        if (o.kind == OccKind::Fault)
                            continue;
                        Occurrence copy{o.kind, o.msg, o.peer, true};
                        if (o.kind == OccKind::Start || o.kind == OccKind::Receive)
                            copy.genuine = false;
                        oc.records[a].push_back(copy);
                    }
                    continue;
                }
                ProtocolDecision dec = protocol.decide(local_state_at(run, a, k), a, n);
                for (const Action &act : dec.alternatives.front())
                {
                    if (act.kind == ActKind::Fire)
                        oc.records[a].push_back(Occurrence{OccKind::Fire, -1, -1, true});
                    else
                        oc.records[a].push_back(Occurrence{OccKind::Send, act.msg, act.to, true});
                }
                // Everyone else keeps a START observation wherever the base gave them a
                // record of one: a correct agent's record must be genuine, so the earliest
                // record becomes a real injection. This never invents start patterns
                // beyond the base's and keeps iterated twins within the configured family.
                if (!history_has(local_state_at(run, a, k), OccKind::Start))
                    for (const auto &o : base.at(k, a))
                        if (o.kind == OccKind::Start)
                        {
                            oc.records[a].push_back(Occurrence{OccKind::Start, -1, -1, true});
                            break;
                        }
            }

            for (auto it = pending.begin(); it != pending.end();)
            {
                if (it->deliver == k)
                {
                    if (it->to != victim)
                        oc.records[it->to].push_back(Occurrence{OccKind::Receive, it->msg, it->from, true});
                    it = pending.erase(it);
                }
                else
                    ++it;
            }

            for (AgentId a = 0; a < n; ++a)
                for (const auto &o : oc.records[a])
                    if (o.kind == OccKind::Send && k + 1 <= T - 1)
                        pending.push_back(PendingDelivery{o.msg, a, o.peer, k + 1});

            run = append_round(run, oc);
        }
        return run;
    }

    Run silent_continuation(const Run &base, Time cut, const ProtocolSpec &protocol)
    {
        const int n = base.n, T = base.horizon;
        if (cut < 0 || cut > T)
            raise(ErrorKind::OutOfRange, "cut outside run");
        Run run = make_empty_run(n, base.f);
        for (AgentId i = 0; i < n; ++i)
            if (base.fault_onset[i] == ONSET_INITIAL)
                run.fault_onset[i] = ONSET_INITIAL;

        // identical prefix
        for (Round k = 0; k < cut; ++k)
        {
            RoundOutcome oc = RoundOutcome::empty(n);
            for (AgentId i = 0; i < n; ++i)
            {
                for (const auto &o : base.at(k, i))
                    if (o.kind != OccKind::Fault)
                        oc.records[i].push_back(o);
                if (base.fault_onset[i] == k + 1)
                    oc.new_faults.push_back(i);
            }
            auto es = base.env_at(k);
            oc.env_sends.assign(es.begin(), es.end());
            run = append_round(run, oc);
        }

        // silent tail: protocol only, earliest deliveries, nothing injected
        std::vector<PendingDelivery> pending;
        for (const auto &m : env_state_at(run, cut).in_flight)
            pending.push_back(PendingDelivery{m.msg, m.from, m.to, cut});
        for (Round k = cut; k < T; ++k)
        {
            RoundOutcome oc = RoundOutcome::empty(n);
            for (AgentId a = 0; a < n; ++a)
            {
                ProtocolDecision dec = protocol.decide(local_state_at(run, a, k), a, n);
                for (const Action &act : dec.alternatives.front())
                {
                    if (act.kind == ActKind::Fire)
                        oc.records[a].push_back(Occurrence{OccKind::Fire, -1, -1, true});
                    else
                        oc.records[a].push_back(Occurrence{OccKind::Send, act.msg, act.to, true});
                }
            }
            for (auto it = pending.begin(); it != pending.end();)
            {
                if (it->deliver <= k)
                {
                    oc.records[it->to].push_back(Occurrence{OccKind::Receive, it->msg, it->from, true});
                    it = pending.erase(it);
                }
                else
                    ++it;
            }
            for (AgentId a = 0; a < n; ++a)
                for (const auto &o : oc.records[a])
                    if (o.kind == OccKind::Send && k + 1 <= T - 1)
                        pending.push_back(PendingDelivery{o.msg, a, o.peer, k + 1});
            run = append_round(run, oc);
        }
        return run;
    }

    namespace
    {
        void add_twins_and_closure(EnumerationResult &res, DedupSet &dedup,
                                   const ProtocolSpec &protocol, const AdversaryConfig &cfg)
        {
            if (cfg.twins && cfg.f >= 1)
            {
                // Re-simulated twins of faulty bases can introduce new local histories,
                // which in turn need twins; iterate until the set is closed.
                std::size_t processed = 0;
                int sweeps = 0;
                while (processed < res.set.runs.size() && sweeps < 8 &&
                       res.set.runs.size() <= cfg.max_runs)
                {
                    const std::size_t end = res.set.runs.size();
                    for (std::size_t r = processed; r < end; ++r)
                        for (AgentId a = 0; a < cfg.n; ++a)
                        {
                            if (res.set.runs[r].fault_onset[a] != ONSET_NEVER)
                                continue; // already faulty: no twin needed for its points
                            Run twin = faulty_twin(res.set.runs[r], a, protocol);
                            append_deduped(res, dedup, std::move(twin),
                                           synthetic_log("twin:" + std::to_string(r) + ":" +
                                                         std::to_string(a)));
                            if (res.set.runs.size() > cfg.max_runs)
                                break;
                        }
                    processed = end;
                    ++sweeps;
                }
            }
            if (cfg.persistence_closure)
            {
                const std::size_t count = res.set.runs.size();
                for (std::size_t r = 0; r < count; ++r)
                    for (Time cut = 0; cut < cfg.horizon; ++cut)
                    {
                        Run cont = silent_continuation(res.set.runs[r], cut, protocol);
                        append_deduped(res, dedup, std::move(cont),
                                       synthetic_log("continuation:" + std::to_string(r) + "@" +
                                                     std::to_string(cut)));
                    }
            }
            if (res.set.runs.size() > cfg.max_runs)
                res.cap_exceeded = true;
        }

        EnumerationResult finalize(EnumerationResult res, const ProtocolSpec &protocol,
                                   const AdversaryConfig &cfg)
        {
            res.set.n = cfg.n;
            res.set.f = cfg.f;
            res.set.horizon = cfg.horizon;
            res.set.protocol = protocol.name;
            res.set.alphabet = protocol.alphabet;
            return res;
        }
    } // namespace

    EnumerationResult enumerate_runs(const ProtocolSpec &protocol, const AdversaryConfig &cfg)
    {
        validate_config(cfg, protocol);
        const std::vector<FaultPlan> plans = build_fault_plans(cfg, protocol);

        EnumerationResult res;
        DedupSet dedup;
        dedup.runs = &res.set.runs;

        for (std::size_t i = 0; i < cfg.scenario_runs.size(); ++i)
            append_deduped(res, dedup, cfg.scenario_runs[i], synthetic_log("scenario:" + std::to_string(i)));

        // top-level branches (pattern x fault plan) are independent; split across workers
        const int patterns = static_cast<int>(cfg.start_patterns.size());
        const int nplans = static_cast<int>(plans.size());
        const int tops = patterns * nplans;
        const int workers = std::min(worker_count(), tops);

        std::vector<SubtreeResult> parts(tops);
        auto work = [&](int w) {
            for (int t = w; t < tops; t += workers)
                parts[t] = enumerate_subtree(protocol, cfg, plans, t / nplans, t % nplans, cfg.max_runs);
        };
        if (workers <= 1)
            work(0);
        else
        {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back(work, w);
            for (auto &th : pool)
                th.join();
        }

        for (auto &part : parts)
        {
            res.explored += part.explored;
            res.cap_exceeded = res.cap_exceeded || part.cap_exceeded;
            for (std::size_t i = 0; i < part.runs.size() && !res.cap_exceeded; ++i)
            {
                if (res.set.runs.size() >= cfg.max_runs)
                    res.cap_exceeded = true;
                else
                    append_deduped(res, dedup, std::move(part.runs[i]), std::move(part.logs[i]));
            }
            part.runs.clear();
            part.logs.clear();
            if (res.cap_exceeded)
                break;
        }

        if (!res.cap_exceeded)
            add_twins_and_closure(res, dedup, protocol, cfg);
        return finalize(std::move(res), protocol, cfg);
    }

    EnumerationResult sample_runs(const ProtocolSpec &protocol, const AdversaryConfig &cfg,
                                  std::uint64_t seed, std::size_t count)
    {
        validate_config(cfg, protocol);
        if (count < 1)
            raise(ErrorKind::ConfigInvalid, "sample count must be at least 1");
        const std::vector<FaultPlan> plans = build_fault_plans(cfg, protocol);

        EnumerationResult res;
        DedupSet dedup;
        dedup.runs = &res.set.runs;
        for (std::size_t i = 0; i < cfg.scenario_runs.size(); ++i)
            append_deduped(res, dedup, cfg.scenario_runs[i], synthetic_log("scenario:" + std::to_string(i)));

        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < count; ++i)
        {
            RandomSource src(rng());
            Run run = simulate(protocol, cfg, plans, src);
            ++res.explored;
            append_deduped(res, dedup, std::move(run), ChoiceLog{src.seen});
        }
        add_twins_and_closure(res, dedup, protocol, cfg);
        return finalize(std::move(res), protocol, cfg);
    }

    Run replay(const ProtocolSpec &protocol, const AdversaryConfig &cfg, const ChoiceLog &log)
    {
        validate_config(cfg, protocol);
        const std::vector<FaultPlan> plans = build_fault_plans(cfg, protocol);
        if (!log.choices.empty() && log.choices.front().label.rfind("scenario:", 0) == 0)
        {
            const std::size_t idx = std::stoul(log.choices.front().label.substr(9));
            if (idx >= cfg.scenario_runs.size())
                raise(ErrorKind::ArtifactCorrupt, "scenario index out of range");
            return cfg.scenario_runs[idx];
        }
        if (!log.choices.empty() && (log.choices.front().label.rfind("twin:", 0) == 0 ||
                                     log.choices.front().label.rfind("continuation:", 0) == 0))
            raise(ErrorKind::ArtifactCorrupt,
                  "synthesized runs replay through their base run, not a choice log");
        std::vector<int> prefix;
        for (const auto &c : log.choices)
            prefix.push_back(c.chosen);
        TraceSource src;
        src.prefix = &prefix;
        src.cap = cfg.max_branch_points;
        Run run = simulate(protocol, cfg, plans, src);
        if (src.seen.size() != prefix.size())
            raise(ErrorKind::ArtifactCorrupt, "choice log length mismatch");
        for (std::size_t i = 0; i < src.seen.size(); ++i)
            if (src.seen[i].label != log.choices[i].label)
                raise(ErrorKind::ArtifactCorrupt, "choice log labels do not match this configuration");
        return run;
    }

    AdversaryConfig potential_persistence_closure(const AdversaryConfig &cfg, const Formula &phi)
    {
        // only the shape correct(i) & !start is supported
        bool ok = phi.kind() == FKind::And && phi.children().size() == 2 &&
                  phi.child(0).kind() == FKind::AtomCorrect && phi.child(0).agent() >= 0 &&
                  phi.child(1).kind() == FKind::Not &&
                  phi.child(1).child().kind() == FKind::AtomStarted && phi.child(1).child().agent() < 0;
        if (!ok)
            raise(ErrorKind::UnsupportedFormula,
                  "persistence closure supports exactly: correct(i) & !start");
        AdversaryConfig out = cfg;
        out.persistence_closure = true;
        return out;
    }

    bool check_liveness(const Run &run, int max_delay)
    {
        const int T = run.horizon;
        for (Round k = 0; k < T; ++k)
            for (AgentId a = 0; a < run.n; ++a)
            {
                if (run.fault_onset[a] <= k) // sender already faulty when acting
                    continue;
                for (const auto &o : run.at(k, a))
                {
                    if (o.kind != OccKind::Send)
                        continue;
                    if (k + 1 > T - 1)
                        continue; // empty window: exempt boundary send
                    if (run.fault_onset[o.peer] != ONSET_NEVER)
                        continue; // faulty addressee: liveness does not apply
                    bool delivered = false;
                    const Round last = std::min(T - 1, k + max_delay);
                    for (Round m = k + 1; m <= last && !delivered; ++m)
                        for (const auto &r : run.at(m, o.peer))
                            if (r.kind == OccKind::Receive && r.genuine && r.msg == o.msg && r.peer == a)
                            {
                                delivered = true;
                                break;
                            }
                    if (!delivered)
                        return false;
                }
            }
        return true;
    }
} // namespace rebelfire
