#include "doctest.h"

#include "helpers.hpp"

#include "rebelfire/protocol.hpp"
#include "rebelfire/system.hpp"

#include <random>

using namespace rebelfire;

namespace
{
    CanonicalHistory history_of(std::initializer_list<std::vector<LocalOcc>> rounds)
    {
        CanonicalHistory h;
        for (auto &r : rounds)
            h.rounds.push_back(r);
        return h;
    }

    LocalOcc start_obs() { return LocalOcc{Occurrence{OccKind::Start, -1, -1, true}}; }
    LocalOcc recv(MessageId m, AgentId from) { return LocalOcc{Occurrence{OccKind::Receive, m, from, true}}; }
    LocalOcc sent(MessageId m, AgentId to) { return LocalOcc{Occurrence{OccKind::Send, m, to, true}}; }
    LocalOcc fired_rec() { return LocalOcc{Occurrence{OccKind::Fire, -1, -1, true}}; }

    bool decides_fire(const ProtocolDecision &d)
    {
        for (const auto &a : d.alternatives.front())
            if (a.kind == ActKind::Fire)
                return true;
        return false;
    }

    int send_count(const ProtocolDecision &d)
    {
        int c = 0;
        for (const auto &a : d.alternatives.front())
            if (a.kind == ActKind::Send)
                ++c;
        return c;
    }
} // namespace

TEST_CASE("naive relay: empty history does nothing")
{
    auto p = naive_relay();
    auto d = p.decide(CanonicalHistory{}, 0, 3);
    CHECK(d.alternatives.size() == 1);
    CHECK(d.alternatives.front().empty());
}

TEST_CASE("naive relay: fires and notifies everyone on START")
{
    auto p = naive_relay();
    auto d = p.decide(history_of({{start_obs()}}), 0, 4);
    CHECK(decides_fire(d));
    CHECK(send_count(d) == 3);
    // and only once
    auto done = p.decide(history_of({{start_obs()}, {fired_rec(), sent(0, 1), sent(0, 2), sent(0, 3)}}), 0, 4);
    CHECK(done.alternatives.front().empty());
}

TEST_CASE("naive relay: a single fake notification triggers a fire")
{
    auto p = naive_relay();
    auto d = p.decide(history_of({{recv(0, 2)}}), 0, 3);
    CHECK(decides_fire(d));
}

TEST_CASE("echo: no START and no echoes means silence")
{
    auto p = echo_frr(1);
    auto d = p.decide(CanonicalHistory{}, 1, 4);
    CHECK(d.alternatives.front().empty());
}

TEST_CASE("echo: START triggers an immediate broadcast but no fire")
{
    auto p = echo_frr(1);
    auto d = p.decide(history_of({{start_obs()}}), 0, 4);
    CHECK_FALSE(decides_fire(d));
    CHECK(send_count(d) == 3);
}

TEST_CASE("echo: f+1 distinct senders make a non-starter amplify")
{
    auto p = echo_frr(1);
    // one echo is not enough
    CHECK(p.decide(history_of({{recv(0, 1)}}), 0, 4).alternatives.front().empty());
    // two distinct senders reach f+1 = 2
    auto d = p.decide(history_of({{recv(0, 1)}, {recv(0, 2)}}), 0, 4);
    CHECK(send_count(d) == 3);
    CHECK_FALSE(decides_fire(d));
}

TEST_CASE("echo: 2f+1 sources fire, counting self once")
{
    auto p = echo_frr(1);
    // starter with echoes from two distinct others: self + 2 = 3 = 2f+1
    auto d = p.decide(
        history_of({{start_obs()}, {sent(0, 1), sent(0, 2), sent(0, 3)}, {recv(0, 1), recv(0, 2)}}), 0, 4);
    CHECK(decides_fire(d));
    // non-starter amplifier with echoes from two others: own sent echo is the third source
    auto d2 = p.decide(history_of({{recv(0, 1), recv(0, 2)}, {sent(0, 1), sent(0, 2), sent(0, 3)}}), 0, 4);
    CHECK(decides_fire(d2));
    // duplicate senders never add sources
    auto d3 = p.decide(history_of({{recv(0, 1)}, {recv(0, 1)}, {recv(0, 1)}}), 0, 4);
    CHECK(d3.alternatives.front().empty());
}

TEST_CASE("echo: echoes and fires happen at most once")
{
    auto p = echo_frr(1);
    auto done = p.decide(history_of({{start_obs()},
                                     {sent(0, 1), sent(0, 2), sent(0, 3)},
                                     {recv(0, 1), recv(0, 2)},
                                     {fired_rec()}}),
                         0, 4);
    CHECK(done.alternatives.front().empty());
}

TEST_CASE("mutual hope trigger matches the three-agent story")
{
    auto p = mutual_hope_trigger();
    // c2: own START plus confirmations from both others -> fire
    auto c2 = p.decide(history_of({{start_obs()}, {sent(0, 0), sent(0, 1)}, {recv(0, 0), recv(0, 1)}}), 2, 3);
    CHECK(decides_fire(c2));
    // c1: own START plus a single confirmation -> never fires
    auto c1 = p.decide(history_of({{start_obs()}, {sent(0, 1), sent(0, 2)}, {recv(0, 2)}}), 0, 3);
    CHECK_FALSE(decides_fire(c1));
    CHECK(c1.alternatives.front().empty());
    // empty history -> nothing
    CHECK(p.decide(CanonicalHistory{}, 0, 3).alternatives.front().empty());
    // two confirmations without own START also fire
    auto other = p.decide(history_of({{recv(0, 0)}, {recv(0, 2)}}), 1, 3);
    CHECK(decides_fire(other));
}

TEST_CASE("protocol decisions depend only on the canonical local history")
{
    std::mt19937_64 rng(17);
    for (int iter = 0; iter < 20; ++iter)
    {
        RunSet set = testgen::random_system(rng, 3, 4, 4);
        for (const auto &name : {"naive", "echo", "mutual-hope"})
        {
            auto p = protocol_by_name(name, set.f);
            for (const Run &a : set.runs)
                for (const Run &b : set.runs)
                    for (Time t = 0; t <= set.horizon; ++t)
                        for (Time u = 0; u <= set.horizon; ++u)
                            for (AgentId i = 0; i < set.n; ++i)
                            {
                                auto ha = local_state_at(a, i, t);
                                auto hb = local_state_at(b, i, u);
                                if (ha == hb)
                                {
                                    auto da = p.decide(ha, i, set.n);
                                    auto db = p.decide(hb, i, set.n);
                                    CHECK(da.alternatives == db.alternatives);
                                }
                            }
        }
    }
}

TEST_CASE("the scripted three-agent run behaves as told")
{
    Run r = remark12_scenario();
    CHECK(r.n == 3);
    CHECK(r.horizon == 5);
    CHECK(r.fault_onset[1] == ONSET_INITIAL);

    RunSet set;
    set.n = 3;
    set.f = 1;
    set.horizon = 5;
    set.alphabet = {"NOTIFY"};
    set.runs = {r};
    auto sys = build_system(set);

    // c2 fires at some point, c1 never does
    CHECK(sys.extension(fml::fired(2)).count() > 0);
    CHECK(sys.extension(fml::fired(0)).count() == 0);
    CHECK(sys.eval(Point{0, 4}, fml::fired(2)));
    CHECK_FALSE(sys.eval(Point{0, 3}, fml::fired(2)));

    // b never observed START in the ground truth, yet it notified c2
    CHECK(sys.extension(fml::occurred(1, OccKind::Start)).count() == 0);
    bool b_sent = false;
    for (Round k = 0; k < r.horizon; ++k)
        for (const auto &m : r.env_at(k))
            b_sent = b_sent || (m.from == 1 && m.to == 2);
    CHECK(b_sent);

    // both genuine observers make start true from time 1 on
    for (Time t = 0; t <= 5; ++t)
        CHECK(sys.eval(Point{0, t}, fml::started(-1)) == (t >= 1));

    // the run on its own already violates relay at c2's firing point
    CHECK_FALSE(sys.valid(fml::implies(
        fml::fired(-1), fml::And({fml::eventually(fml::implies(fml::correct(0), fml::fired(0))),
                                  fml::eventually(fml::implies(fml::correct(1), fml::fired(1))),
                                  fml::eventually(fml::implies(fml::correct(2), fml::fired(2)))}))));
}
