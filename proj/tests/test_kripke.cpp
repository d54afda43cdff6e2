#include "doctest.h"

#include "helpers.hpp"
#include "oracle.hpp"

#include "rebelfire/system.hpp"

#include <random>

using namespace rebelfire;

namespace
{
    Occurrence start_ev(bool genuine = true) { return Occurrence{OccKind::Start, -1, -1, genuine}; }

    // single fault-free run: START at `agent` in round 0, nothing else, given horizon
    RunSet single_start_system(int n, int agent, int horizon)
    {
        RunSet set;
        set.n = n;
        set.f = 0;
        set.horizon = horizon;
        Run r = make_empty_run(n, 0);
        RoundOutcome oc = RoundOutcome::empty(n);
        oc.records[agent].push_back(start_ev());
        r = append_round(r, oc);
        for (int k = 1; k < horizon; ++k)
            r = append_round(r, RoundOutcome::empty(n));
        set.runs.push_back(std::move(r));
        return set;
    }

    std::vector<Formula> formula_basket(int n)
    {
        std::vector<Formula> fs;
        fs.push_back(fml::implies(fml::correct(0), fml::correct(0)));
        fs.push_back(fml::started(-1));
        fs.push_back(fml::fired(-1));
        for (AgentId i = 0; i < n; ++i)
        {
            fs.push_back(fml::correct(i));
            fs.push_back(fml::occurred(i, OccKind::Start));
            fs.push_back(fml::started(i));
            fs.push_back(fml::K(i, fml::correct(i)));
            fs.push_back(fml::B(i, fml::started(-1)));
            fs.push_back(fml::H(i, fml::started(-1)));
            fs.push_back(fml::yesterday(fml::occurred(i, OccKind::Start)));
            fs.push_back(fml::eventually(fml::implies(fml::correct(i), fml::fired(i))));
            fs.push_back(fml::always(fml::Not(fml::correct(i))));
            fs.push_back(fml::B(i, fml::eventually(fml::H(i, fml::started(-1)))));
        }
        for (FGroup g : {FGroup::EB, FGroup::EH, FGroup::EdB, FGroup::EdH})
            fs.push_back(fml::everyone(g, fml::started(-1)));
        fs.push_back(fml::common_hope(fml::started(-1)));
        fs.push_back(fml::common_hope(fml::fired(-1)));
        fs.push_back(fml::B(0, fml::And({fml::started(-1), fml::everyone(FGroup::EdH, fml::started(-1))})));
        return fs;
    }
} // namespace

TEST_CASE("tautologies hold at every point")
{
    auto sys = build_system(single_start_system(2, 0, 3));
    Formula taut = fml::implies(fml::correct(1), fml::correct(1));
    CHECK(sys.valid(taut));
    CHECK(sys.valid(fml::Or({fml::correct(0), fml::Not(fml::correct(0))})));
}

TEST_CASE("belief in start appears exactly when the record does")
{
    // START at agent 1 in round 0 of a fault-free single-run system:
    // B_1 start is false at time 0 and true from time 1 on.
    auto sys = build_system(single_start_system(2, 1, 4));
    Formula b1start = fml::B(1, fml::started(-1));
    CHECK_FALSE(sys.eval(Point{0, 0}, b1start));
    CHECK(sys.eval(Point{0, 1}, b1start));
    CHECK(sys.eval(Point{0, 4}, b1start));
    // and the agent that saw nothing cannot believe it
    CHECK_FALSE(sys.eval(Point{0, 1}, fml::B(0, fml::started(-1))));
}

TEST_CASE("a fabricated record satisfies occ but never start")
{
    RunSet set;
    set.n = 2;
    set.f = 1;
    set.horizon = 2;
    Run r = make_empty_run(2, 1);
    r.fault_onset[1] = ONSET_INITIAL;
    RoundOutcome oc = RoundOutcome::empty(2);
    oc.records[1].push_back(start_ev(false));
    r = append_round(r, oc);
    r = append_round(r, RoundOutcome::empty(2));
    set.runs.push_back(r);
    auto sys = build_system(set);

    CHECK(sys.eval(Point{0, 1}, fml::occurred(1, OccKind::Start)));
    CHECK_FALSE(sys.eval(Point{0, 1}, fml::started(1)));
    CHECK_FALSE(sys.eval(Point{0, 2}, fml::started(-1)));
}

TEST_CASE("buckets of a single fault-free run are its stutter intervals")
{
    auto sys = build_system(single_start_system(2, 0, 4));
    // agent 0: history changes once (empty -> START), so two buckets: {0} and {1..4}
    CHECK(sys.bucket(0, sys.index_of(Point{0, 0})).size() == 1);
    CHECK(sys.bucket(0, sys.index_of(Point{0, 1})).size() == 4);
    CHECK(sys.bucket(0, sys.index_of(Point{0, 3})) == sys.bucket(0, sys.index_of(Point{0, 1})));
    // agent 1 never observes anything: one bucket with all five points
    CHECK(sys.bucket(1, sys.index_of(Point{0, 2})).size() == 5);
}

TEST_CASE("buckets merge points across runs exactly when canonical histories agree")
{
    RunSet set;
    set.n = 2;
    set.f = 0;
    set.horizon = 2;
    // run 0: agent 1 sees START in round 0; run 1: agent 1 sees nothing
    for (int variant = 0; variant < 2; ++variant)
    {
        Run r = make_empty_run(2, 0);
        RoundOutcome oc = RoundOutcome::empty(2);
        oc.records[0].push_back(start_ev()); // agent 0 identical in both runs
        if (variant == 0)
            oc.records[1].push_back(start_ev());
        r = append_round(r, oc);
        r = append_round(r, RoundOutcome::empty(2));
        set.runs.push_back(r);
    }
    auto sys = build_system(set);
    CHECK(sys.history_id(0, sys.index_of(Point{0, 1})) == sys.history_id(0, sys.index_of(Point{1, 1})));
    CHECK(sys.bucket(0, sys.index_of(Point{0, 1})).size() == 4); // both runs, times 1 and 2
    CHECK(sys.history_id(1, sys.index_of(Point{0, 1})) != sys.history_id(1, sys.index_of(Point{1, 1})));
}

TEST_CASE("heterogeneous runs are rejected")
{
    RunSet set;
    set.n = 2;
    set.f = 0;
    set.horizon = 2;
    Run ok = make_empty_run(2, 0);
    ok = append_round(ok, RoundOutcome::empty(2));
    ok = append_round(ok, RoundOutcome::empty(2));
    Run shorter = make_empty_run(2, 0);
    shorter = append_round(shorter, RoundOutcome::empty(2));
    set.runs = {ok, shorter};
    CHECK_THROWS_AS(build_system(set), Error);
}

TEST_CASE("a faulty twin makes knowledge of one's own correctness impossible")
{
    RunSet set;
    set.n = 2;
    set.f = 1;
    set.horizon = 2;
    // run 0: agent 0 genuinely observes START, everyone correct
    Run r0 = make_empty_run(2, 1);
    RoundOutcome oc = RoundOutcome::empty(2);
    oc.records[0].push_back(start_ev());
    r0 = append_round(r0, oc);
    r0 = append_round(r0, RoundOutcome::empty(2));
    // run 1: same record, but fabricated by a faulty agent 0
    Run r1 = make_empty_run(2, 1);
    r1.fault_onset[0] = ONSET_INITIAL;
    RoundOutcome oc1 = RoundOutcome::empty(2);
    oc1.records[0].push_back(start_ev(false));
    r1 = append_round(r1, oc1);
    r1 = append_round(r1, RoundOutcome::empty(2));
    set.runs = {r0, r1};
    auto sys = build_system(set);

    Formula knows_own = fml::K(0, fml::correct(0));
    for (std::size_t p = 0; p < sys.point_count(); ++p)
        CHECK_FALSE(sys.eval(sys.point_at(p), knows_own));
    // and check_valid pins the first counterexample deterministically
    auto cex = sys.first_counterexample(fml::Not(fml::K(0, fml::correct(0))));
    CHECK_FALSE(cex.has_value()); // the negation is valid
    auto cex2 = sys.first_counterexample(knows_own);
    REQUIRE(cex2.has_value());
    CHECK(*cex2 == Point{0, 0});
}

TEST_CASE("bulk extensions, pointwise eval and the oracle all agree")
{
    std::mt19937_64 rng(2024);
    for (int iter = 0; iter < 40; ++iter)
    {
        RunSet set = testgen::random_system(rng);
        const int n = set.n;
        auto sys = build_system(set);
        oracle::Model model{&sys.runs(), sys.horizon()};

        for (const Formula &f : formula_basket(n))
        {
            const PointSet &ext = sys.extension(f);
            for (std::size_t p = 0; p < sys.point_count(); ++p)
            {
                const Point pt = sys.point_at(p);
                const bool bulk = ext.test(p);
                const bool pointwise = sys.eval(pt, f);
                const bool reference = model.eval(n, pt, f);
                CAPTURE(print_formula(f));
                CAPTURE(pt.run);
                CAPTURE(pt.t);
                REQUIRE(bulk == pointwise);
                REQUIRE(bulk == reference);
            }
        }
    }
}

TEST_CASE("knowledge is S5-like on buckets")
{
    std::mt19937_64 rng(99);
    for (int iter = 0; iter < 25; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        const Formula phi = fml::started(-1);
        for (AgentId i = 0; i < sys.n(); ++i)
        {
            Formula k = fml::K(i, phi);
            const PointSet &ke = sys.extension(k);
            // factivity
            CHECK(ke.subset_of(sys.extension(phi)));
            // constancy per bucket and positive introspection
            const PointSet &kk = sys.extension(fml::K(i, k));
            CHECK(ke.subset_of(kk));
            for (std::size_t p = 0; p < sys.point_count(); ++p)
            {
                const auto &bucket = sys.bucket(i, p);
                bool first = ke.test(bucket.front());
                CHECK(ke.test(p) == first);
            }
        }
    }
}

TEST_CASE("hope is normal and vacuous at faulty points")
{
    std::mt19937_64 rng(123);
    for (int iter = 0; iter < 25; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        const Formula a = fml::started(-1), b = fml::fired(-1);
        for (AgentId i = 0; i < sys.n(); ++i)
        {
            const PointSet &conj = sys.extension(fml::H(i, fml::And({a, b})));
            CHECK(conj.subset_of(sys.extension(fml::H(i, a))));
            CHECK(conj.subset_of(sys.extension(fml::H(i, b))));
            // !correct(i) -> H_i phi
            CHECK(sys.valid(fml::implies(fml::Not(fml::correct(i)), fml::H(i, a))));
        }
    }
}

TEST_CASE("perfect recall gives the four belief inclusions")
{
    std::mt19937_64 rng(321);
    for (int iter = 0; iter < 25; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        for (AgentId i = 0; i < sys.n(); ++i)
        {
            CHECK(sys.extension(fml::fired(i)).subset_of(sys.extension(fml::B(i, fml::fired(i)))));
            CHECK(sys.extension(fml::B(i, fml::fired(i))).subset_of(sys.extension(fml::B(i, fml::fired(-1)))));
            CHECK(sys.extension(fml::started(i)).subset_of(sys.extension(fml::B(i, fml::started(i)))));
            CHECK(sys.extension(fml::B(i, fml::started(i))).subset_of(sys.extension(fml::B(i, fml::started(-1)))));
        }
    }
}

TEST_CASE("lost correctness never comes back")
{
    std::mt19937_64 rng(555);
    for (int iter = 0; iter < 25; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        for (AgentId i = 0; i < sys.n(); ++i)
            CHECK(sys.valid(fml::implies(fml::Not(fml::correct(i)), fml::always(fml::Not(fml::correct(i))))));
    }
}

TEST_CASE("believing an eventuality modulo own correctness equals knowing it")
{
    std::mt19937_64 rng(777);
    for (int iter = 0; iter < 25; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        for (AgentId i = 0; i < sys.n(); ++i)
            for (const Formula &phi : {fml::started(-1), fml::fired(-1), fml::occurred(0, OccKind::Start)})
            {
                Formula inner = fml::eventually(fml::implies(fml::correct(i), phi));
                CHECK(sys.extension(fml::B(i, inner)) == sys.extension(fml::K(i, inner)));
            }
    }
}

TEST_CASE("bounded eventually of a stable formula equals its value at the horizon")
{
    std::mt19937_64 rng(888);
    for (int iter = 0; iter < 20; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        // !correct(i) is stable; so is occ(i,START)
        for (const Formula &phi : {fml::Not(fml::correct(0)), fml::occurred(0, OccKind::Start)})
        {
            REQUIRE(sys.valid(fml::implies(phi, fml::always(phi))));
            const PointSet &dia = sys.extension(fml::eventually(phi));
            const PointSet &base = sys.extension(phi);
            for (std::size_t r = 0; r < sys.runs().size(); ++r)
            {
                const bool at_horizon = base.test(sys.index_of(Point{static_cast<int>(r), sys.horizon()}));
                for (Time t = 0; t <= sys.horizon(); ++t)
                    CHECK(dia.test(sys.index_of(Point{static_cast<int>(r), t})) == at_horizon);
            }
        }
    }
}

TEST_CASE("the common-hope fixpoint satisfies its equation exactly")
{
    std::mt19937_64 rng(4242);
    for (int iter = 0; iter < 25; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        for (const Formula &phi : {fml::started(-1), fml::fired(-1), fml::truth(true)})
        {
            auto fix = sys.eventual_common_hope(phi);
            CHECK(fix.iterations <= static_cast<int>(sys.point_count()) + 1);
            // equation: CdH phi == EdH(phi & CdH phi), as sets
            const PointSet &lhs = sys.extension(fml::common_hope(phi));
            const PointSet &rhs = sys.extension(
                fml::everyone(FGroup::EdH, fml::And({phi, fml::common_hope(phi)})));
            CHECK(lhs == rhs);
            CHECK(lhs == fix.set);
            // and CdH phi -> EdH phi pointwise
            CHECK(lhs.subset_of(sys.extension(fml::everyone(FGroup::EdH, phi))));
        }
    }
}

TEST_CASE("common hope of truth is everything on a fault-free system")
{
    auto sys = build_system(single_start_system(3, 0, 3));
    auto fix = sys.eventual_common_hope(fml::truth(true));
    CHECK(fix.set.count() == sys.point_count());
}

TEST_CASE("the fixpoint validates the induction rule")
{
    // if psi -> EdH(phi & psi) is valid then psi -> CdH phi is valid
    std::mt19937_64 rng(31337);
    for (int iter = 0; iter < 15; ++iter)
    {
        auto sys = build_system(testgen::random_system(rng));
        const Formula phi = fml::started(-1);
        for (const Formula &psi : {fml::fired(-1), fml::started(-1),
                                   fml::everyone(FGroup::EdH, fml::started(-1))})
        {
            const bool premise = sys.valid(fml::implies(
                psi, fml::everyone(FGroup::EdH, fml::And({phi, psi}))));
            if (premise)
                CHECK(sys.valid(fml::implies(psi, fml::common_hope(phi))));
        }
    }
}

TEST_CASE("point set algebra behaves like a boolean algebra")
{
    std::mt19937_64 rng(1);
    for (int iter = 0; iter < 50; ++iter)
    {
        const std::size_t size = 1 + rng() % 200;
        PointSet a(size), b(size);
        for (std::size_t i = 0; i < size; ++i)
        {
            if (rng() % 2)
                a.set(i);
            if (rng() % 2)
                b.set(i);
        }
        CHECK((a & b) == (b & a));
        CHECK((a | b) == (b | a));
        CHECK((~PointSet(a & b)) == (~PointSet(a) | ~PointSet(b)));
        CHECK((a & (a | b)) == a);
        CHECK((a | (a & b)) == a);
        CHECK((a & b).subset_of(a));
        CHECK(a.subset_of(a | b));
        CHECK((a & b).count() + (a | b).count() == a.count() + b.count());
    }
}
