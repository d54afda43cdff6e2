#include "rebelfire/runs.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace rebelfire
{
    bool CanonicalHistory::is_prefix_of(const CanonicalHistory &other) const
    {
        if (rounds.size() > other.rounds.size())
            return false;
        for (std::size_t i = 0; i < rounds.size(); ++i)
            if (!(rounds[i] == other.rounds[i]))
                return false;
        return true;
    }

    std::uint64_t CanonicalHistory::hash() const noexcept
    {
        std::uint64_t h = 0x13198a2e03707344ULL;
        for (const auto &r : rounds)
        {
            h = hash_mix(h, 0xa4093822299f31d0ULL);
            for (const auto &o : r)
                h = hash_mix(h, hash_local_occ(o));
        }
        return h;
    }

    std::uint64_t Run::hash() const noexcept
    {
        std::uint64_t h = 0x082efa98ec4e6c89ULL;
        h = hash_mix(h, static_cast<std::uint64_t>(n));
        h = hash_mix(h, static_cast<std::uint64_t>(f));
        h = hash_mix(h, static_cast<std::uint64_t>(horizon));
        for (Time o : fault_onset)
            h = hash_mix(h, static_cast<std::uint64_t>(o));
        for (std::uint32_t off : offsets)
            h = hash_mix(h, off);
        for (const auto &o : occs)
            h = hash_mix(h, hash_occ(o));
        for (std::uint32_t off : env_offsets)
            h = hash_mix(h, off + 0x51ULL);
        for (const auto &m : env)
        {
            h = hash_mix(h, static_cast<std::uint64_t>(m.msg) + 1);
            h = hash_mix(h, static_cast<std::uint64_t>(m.from) + 1);
            h = hash_mix(h, static_cast<std::uint64_t>(m.to) + 1);
        }
        return h;
    }

    std::uint64_t Run::prefix_hash(Time t) const noexcept
    {
        std::uint64_t h = 0xbe5466cf34e90c6cULL;
        h = hash_mix(h, static_cast<std::uint64_t>(n));
        for (AgentId i = 0; i < n; ++i)
            h = hash_mix(h, fault_onset[i] <= t ? static_cast<std::uint64_t>(fault_onset[i]) : 0xffffULL);
        for (Round k = 0; k < t && k < horizon; ++k)
        {
            for (AgentId i = 0; i < n; ++i)
            {
                h = hash_mix(h, 0xc0ac29b7c97c50ddULL);
                for (const auto &o : at(k, i))
                    h = hash_mix(h, hash_occ(o));
            }
            for (const auto &m : env_at(k))
            {
                h = hash_mix(h, static_cast<std::uint64_t>(m.msg) + 0x31);
                h = hash_mix(h, static_cast<std::uint64_t>(m.from) + 0x37);
                h = hash_mix(h, static_cast<std::uint64_t>(m.to) + 0x3b);
            }
        }
        return h;
    }

    bool Run::prefix_equal(const Run &other, Time t) const noexcept
    {
        if (n != other.n)
            return false;
        for (AgentId i = 0; i < n; ++i)
        {
            const Time a = fault_onset[i] <= t ? fault_onset[i] : ONSET_NEVER;
            const Time b = other.fault_onset[i] <= t ? other.fault_onset[i] : ONSET_NEVER;
            if (a != b)
                return false;
        }
        for (Round k = 0; k < t; ++k)
        {
            if (k >= horizon || k >= other.horizon)
                return false;
            for (AgentId i = 0; i < n; ++i)
            {
                auto sa = at(k, i);
                auto sb = other.at(k, i);
                if (!std::equal(sa.begin(), sa.end(), sb.begin(), sb.end()))
                    return false;
            }
            auto ea = env_at(k);
            auto eb = other.env_at(k);
            if (!std::equal(ea.begin(), ea.end(), eb.begin(), eb.end()))
                return false;
        }
        return true;
    }

    Run make_empty_run(int n, int f)
    {
        Run r;
        r.n = n;
        r.f = f;
        r.horizon = 0;
        r.fault_onset.assign(n, ONSET_NEVER);
        r.offsets = {0};
        r.env_offsets = {0};
        return r;
    }

    namespace
    {
        std::vector<InFlight> in_flight_at(const Run &run, Time t)
        {
            std::vector<InFlight> fly;
            for (Round k = 0; k < t && k < run.horizon; ++k)
            {
                for (const auto &m : run.env_at(k))
                    fly.push_back(InFlight{m.msg, m.from, m.to, k});
                for (AgentId i = 0; i < run.n; ++i)
                    for (const auto &o : run.at(k, i))
                    {
                        if (o.kind == OccKind::Send)
                            fly.push_back(InFlight{o.msg, i, o.peer, k});
                        else if (o.kind == OccKind::Receive && o.genuine)
                        {
                            // consume the oldest matching entry
                            auto it = std::find_if(fly.begin(), fly.end(), [&](const InFlight &m) {
                                return m.msg == o.msg && m.from == o.peer && m.to == i;
                            });
                            if (it != fly.end())
                                fly.erase(it);
                        }
                    }
            }
            std::sort(fly.begin(), fly.end());
            return fly;
        }
    } // namespace

    Run append_round(const Run &run, const RoundOutcome &outcome)
    {
        const Round round = run.horizon;
        if (static_cast<int>(outcome.records.size()) != run.n)
            raise(ErrorKind::ConfigInvalid, "round outcome must cover every agent");

        Run out = run;
        out.horizon = run.horizon + 1;

        for (AgentId a : outcome.new_faults)
        {
            if (a < 0 || a >= run.n)
                raise(ErrorKind::ConfigInvalid, "fault for unknown agent");
            if (out.fault_onset[a] != ONSET_NEVER)
                raise(ErrorKind::ConfigInvalid, "agent is already faulty");
            out.fault_onset[a] = round + 1;
        }
        int faulty = 0;
        for (AgentId i = 0; i < run.n; ++i)
            if (out.fault_onset[i] != ONSET_NEVER)
                ++faulty;
        if (faulty > run.f)
            raise(ErrorKind::FaultBudgetExceeded,
                  "fault budget exceeded: " + std::to_string(faulty) + " > f=" + std::to_string(run.f));

        auto fly = in_flight_at(run, round);

        for (AgentId i = 0; i < run.n; ++i)
        {
            // faulty by the end of this round, i.e. allowed to hold fabricated records
            const bool faulty_now = out.fault_onset[i] <= round + 1;
            for (const auto &o : outcome.records[i])
            {
                if (o.kind == OccKind::Fault)
                    raise(ErrorKind::ConfigInvalid, "fault markers are derived from new_faults");
                if (!o.genuine && !faulty_now)
                    raise(ErrorKind::ConfigInvalid, "fabricated record on a correct agent");
                if (o.kind == OccKind::Receive && o.genuine)
                {
                    auto it = std::find_if(fly.begin(), fly.end(), [&](const InFlight &m) {
                        return m.msg == o.msg && m.from == o.peer && m.to == i && m.sent < round;
                    });
                    if (it == fly.end())
                        raise(ErrorKind::UnmatchedReceive, "receive without a matching in-flight message");
                    fly.erase(it);
                }
            }
        }

        for (const auto &m : outcome.env_sends)
        {
            if (m.from < 0 || m.from >= run.n || m.to < 0 || m.to >= run.n || m.msg < 0)
                raise(ErrorKind::ConfigInvalid, "malformed environment send");
            if (out.fault_onset[m.from] > round + 1)
                raise(ErrorKind::ConfigInvalid, "environment send on behalf of a correct agent");
        }

        for (AgentId i = 0; i < run.n; ++i)
        {
            std::vector<Occurrence> recs = outcome.records[i];
            if (std::find(outcome.new_faults.begin(), outcome.new_faults.end(), i) != outcome.new_faults.end())
                recs.push_back(Occurrence{OccKind::Fault, -1, -1, true});
            std::sort(recs.begin(), recs.end());
            recs.erase(std::unique(recs.begin(), recs.end()), recs.end());
            out.occs.insert(out.occs.end(), recs.begin(), recs.end());
            out.offsets.push_back(static_cast<std::uint32_t>(out.occs.size()));
        }
        std::vector<EnvSend> es = outcome.env_sends;
        std::sort(es.begin(), es.end());
        out.env.insert(out.env.end(), es.begin(), es.end());
        out.env_offsets.push_back(static_cast<std::uint32_t>(out.env.size()));
        return out;
    }

    CanonicalHistory local_state_at(const Run &run, AgentId agent, Time t)
    {
        if (t < 0 || t > run.horizon)
            raise(ErrorKind::OutOfRange, "time " + std::to_string(t) + " outside [0, horizon]");
        if (agent < 0 || agent >= run.n)
            raise(ErrorKind::OutOfRange, "unknown agent");
        CanonicalHistory h;
        for (Round k = 0; k < t; ++k)
        {
            std::vector<LocalOcc> visible;
            for (const auto &o : run.at(k, agent))
                if (o.kind != OccKind::Fault)
                    visible.emplace_back(o);
            std::sort(visible.begin(), visible.end());
            visible.erase(std::unique(visible.begin(), visible.end()), visible.end());
            if (!visible.empty())
                h.rounds.push_back(std::move(visible));
        }
        return h;
    }

    bool is_correct(const Run &run, AgentId agent, Time t) noexcept
    {
        return t < run.fault_onset[agent];
    }

    EnvView env_state_at(const Run &run, Time t)
    {
        if (t < 0 || t > run.horizon)
            raise(ErrorKind::OutOfRange, "time outside run");
        EnvView v;
        v.clock = t;
        for (AgentId i = 0; i < run.n; ++i)
            if (run.fault_onset[i] <= t)
                v.faulty.emplace_back(i, run.fault_onset[i]);
        v.in_flight = in_flight_at(run, t);
        return v;
    }

    Run insert_stutter_round(const Run &run, Round round)
    {
        if (round < 0 || round > run.horizon)
            raise(ErrorKind::OutOfRange, "round outside run");
        Run out = make_empty_run(run.n, run.f);
        // initial faults are not represented by round outcomes
        for (AgentId i = 0; i < run.n; ++i)
            if (run.fault_onset[i] == ONSET_INITIAL)
                out.fault_onset[i] = ONSET_INITIAL;
        for (Round k = 0; k < run.horizon; ++k)
        {
            if (k == round)
                out = append_round(out, RoundOutcome::empty(run.n));
            RoundOutcome oc = RoundOutcome::empty(run.n);
            for (AgentId i = 0; i < run.n; ++i)
            {
                for (const auto &o : run.at(k, i))
                    if (o.kind != OccKind::Fault)
                        oc.records[i].push_back(o);
                if (run.fault_onset[i] == k + 1)
                    oc.new_faults.push_back(i);
            }
            auto es = run.env_at(k);
            oc.env_sends.assign(es.begin(), es.end());
            out = append_round(out, oc);
        }
        if (round == run.horizon)
            out = append_round(out, RoundOutcome::empty(run.n));
        return out;
    }

    std::string occurrence_to_string(const Occurrence &o, const std::vector<std::string> &alphabet)
    {
        auto msg_name = [&](MessageId m) -> std::string {
            if (m >= 0 && m < static_cast<int>(alphabet.size()))
                return alphabet[m];
            return "#" + std::to_string(m);
        };
        std::string s;
        switch (o.kind)
        {
        case OccKind::Start:
            s = "e START";
            break;
        case OccKind::Fire:
            s = "a FIRE";
            break;
        case OccKind::Send:
            s = "a SEND " + msg_name(o.msg) + " >" + std::to_string(o.peer);
            break;
        case OccKind::Receive:
            s = "e RECV " + msg_name(o.msg) + " <" + std::to_string(o.peer);
            break;
        case OccKind::Fault:
            s = "x FAULT";
            break;
        }
        if (!o.genuine)
            s += " ~";
        return s;
    }

    std::string serialize_trace(const RunSet &set)
    {
        std::ostringstream os;
        os << "rebelfire-trace v1\n";
        os << "n " << set.n << "\n";
        os << "f " << set.f << "\n";
        os << "horizon " << set.horizon << "\n";
        os << "protocol " << (set.protocol.empty() ? "-" : set.protocol) << "\n";
        os << "alphabet";
        for (const auto &m : set.alphabet)
            os << " " << m;
        os << "\n";
        os << "runs " << set.runs.size() << "\n";
        for (std::size_t r = 0; r < set.runs.size(); ++r)
        {
            const Run &run = set.runs[r];
            os << "run " << r << "\n";
            for (AgentId i = 0; i < run.n; ++i)
                if (run.fault_onset[i] != ONSET_NEVER)
                {
                    os << "onset " << i << " ";
                    if (run.fault_onset[i] == ONSET_INITIAL)
                        os << "initial";
                    else
                        os << run.fault_onset[i];
                    os << "\n";
                }
            for (Round k = 0; k < run.horizon; ++k)
            {
                os << "round " << k << "\n";
                for (AgentId i = 0; i < run.n; ++i)
                    for (const auto &o : run.at(k, i))
                        os << "  " << i << " " << occurrence_to_string(o, set.alphabet) << "\n";
                for (const auto &m : run.env_at(k))
                    os << "  env " << (m.msg >= 0 && m.msg < static_cast<int>(set.alphabet.size())
                                           ? set.alphabet[m.msg]
                                           : "#" + std::to_string(m.msg))
                       << " " << m.from << ">" << m.to << "\n";
                for (const auto &m : in_flight_at(run, k + 1))
                    os << "  fly " << (m.msg >= 0 && m.msg < static_cast<int>(set.alphabet.size())
                                           ? set.alphabet[m.msg]
                                           : "#" + std::to_string(m.msg))
                       << " " << m.from << ">" << m.to << " @" << m.sent << "\n";
            }
        }
        os << "end\n";
        return os.str();
    }

    namespace
    {
        std::vector<std::string> split_ws(const std::string &line)
        {
            std::vector<std::string> out;
            std::istringstream is(line);
            std::string tok;
            while (is >> tok)
                out.push_back(tok);
            return out;
        }

        [[noreturn]] void bad_trace(std::size_t lineno, const std::string &why)
        {
            raise(ErrorKind::ArtifactCorrupt, "trace line " + std::to_string(lineno) + ": " + why);
        }
    } // namespace

    RunSet parse_trace(const std::string &text)
    {
        std::istringstream is(text);
        std::string line;
        std::size_t lineno = 0;
        auto next = [&]() -> bool {
            ++lineno;
            return static_cast<bool>(std::getline(is, line));
        };

        if (!next() || line != "rebelfire-trace v1")
            bad_trace(lineno, "missing header");

        RunSet set;
        std::size_t expected_runs = 0;
        auto header_int = [&](const std::string &key) -> int {
            if (!next())
                bad_trace(lineno, "truncated header");
            auto toks = split_ws(line);
            if (toks.size() != 2 || toks[0] != key)
                bad_trace(lineno, "expected '" + key + " <value>'");
            return std::stoi(toks[1]);
        };
        set.n = header_int("n");
        set.f = header_int("f");
        set.horizon = header_int("horizon");
        if (!next())
            bad_trace(lineno, "truncated header");
        {
            auto toks = split_ws(line);
            if (toks.size() != 2 || toks[0] != "protocol")
                bad_trace(lineno, "expected protocol line");
            if (toks[1] != "-")
                set.protocol = toks[1];
        }
        if (!next())
            bad_trace(lineno, "truncated header");
        {
            auto toks = split_ws(line);
            if (toks.empty() || toks[0] != "alphabet")
                bad_trace(lineno, "expected alphabet line");
            set.alphabet.assign(toks.begin() + 1, toks.end());
        }
        expected_runs = static_cast<std::size_t>(header_int("runs"));

        auto msg_id = [&](const std::string &name) -> MessageId {
            for (std::size_t i = 0; i < set.alphabet.size(); ++i)
                if (set.alphabet[i] == name)
                    return static_cast<MessageId>(i);
            bad_trace(lineno, "unknown message '" + name + "'");
        };

        struct PendingRun
        {
            std::vector<Time> onsets;
            std::vector<RoundOutcome> rounds;
        };
        std::vector<PendingRun> pending;
        PendingRun *cur = nullptr;
        int cur_round = -1;

        while (next())
        {
            if (line == "end")
                break;
            auto toks = split_ws(line);
            if (toks.empty())
                continue;
            if (toks[0] == "run")
            {
                pending.emplace_back();
                cur = &pending.back();
                cur->onsets.assign(set.n, ONSET_NEVER);
                cur_round = -1;
            }
            else if (toks[0] == "onset")
            {
                if (!cur || toks.size() != 3)
                    bad_trace(lineno, "misplaced onset");
                const AgentId a = std::stoi(toks[1]);
                cur->onsets[a] = toks[2] == "initial" ? ONSET_INITIAL : std::stoi(toks[2]);
            }
            else if (toks[0] == "round")
            {
                if (!cur)
                    bad_trace(lineno, "round outside run");
                ++cur_round;
                if (std::stoi(toks[1]) != cur_round)
                    bad_trace(lineno, "rounds out of order");
                cur->rounds.push_back(RoundOutcome::empty(set.n));
            }
            else if (toks[0] == "fly")
            {
                continue; // redundant with records; regenerated on serialize
            }
            else if (toks[0] == "env")
            {
                if (!cur || cur_round < 0 || toks.size() != 3)
                    bad_trace(lineno, "misplaced env send");
                EnvSend m;
                m.msg = msg_id(toks[1]);
                const auto gt = toks[2].find('>');
                if (gt == std::string::npos)
                    bad_trace(lineno, "malformed env send");
                m.from = std::stoi(toks[2].substr(0, gt));
                m.to = std::stoi(toks[2].substr(gt + 1));
                cur->rounds[cur_round].env_sends.push_back(m);
            }
            else
            {
                if (!cur || cur_round < 0)
                    bad_trace(lineno, "record outside a round");
                const AgentId a = std::stoi(toks[0]);
                if (a < 0 || a >= set.n || toks.size() < 3)
                    bad_trace(lineno, "malformed record");
                Occurrence o;
                o.genuine = toks.back() != "~";
                const std::string &label = toks[2];
                if (label == "START")
                    o.kind = OccKind::Start;
                else if (label == "FIRE")
                    o.kind = OccKind::Fire;
                else if (label == "FAULT")
                {
                    // represented via onset lines; marker regenerated by append_round
                    continue;
                }
                else if (label == "SEND" || label == "RECV")
                {
                    o.kind = label == "SEND" ? OccKind::Send : OccKind::Receive;
                    if (toks.size() < 5)
                        bad_trace(lineno, "malformed message record");
                    o.msg = msg_id(toks[3]);
                    o.peer = std::stoi(toks[4].substr(1));
                }
                else
                    bad_trace(lineno, "unknown record '" + label + "'");
                cur->rounds[cur_round].records[a].push_back(o);
            }
        }

        for (auto &p : pending)
        {
            Run r = make_empty_run(set.n, set.f);
            for (AgentId i = 0; i < set.n; ++i)
                if (p.onsets[i] == ONSET_INITIAL)
                    r.fault_onset[i] = ONSET_INITIAL;
            for (Round k = 0; k < static_cast<int>(p.rounds.size()); ++k)
            {
                for (AgentId i = 0; i < set.n; ++i)
                    if (p.onsets[i] == k + 1)
                        p.rounds[k].new_faults.push_back(i);
                r = append_round(r, p.rounds[k]);
            }
            if (r.horizon != set.horizon)
                bad_trace(lineno, "run shorter than declared horizon");
            set.runs.push_back(std::move(r));
        }
        if (set.runs.size() != expected_runs)
            bad_trace(lineno, "run count mismatch");
        return set;
    }
} // namespace rebelfire
