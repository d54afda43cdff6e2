#include "doctest.h"

#include "rebelfire/formula.hpp"

#include <random>

using namespace rebelfire;

namespace
{
    Formula random_formula(std::mt19937_64 &rng, int depth)
    {
        auto pick = [&](int n) { return static_cast<int>(rng() % n); };
        const int n_agents = 3;
        if (depth <= 0 || pick(4) == 0)
        {
            switch (pick(7))
            {
            case 0:
                return fml::truth(pick(2) == 0);
            case 1:
                return fml::correct(pick(n_agents));
            case 2:
                return fml::occurred(pick(n_agents), pick(2) ? OccKind::Start : OccKind::Fire);
            case 3:
                return fml::occurred(-1, pick(2) ? OccKind::Start : OccKind::Fire);
            case 4:
                return fml::started(pick(2) ? pick(n_agents) : -1);
            case 5:
                return fml::fired(pick(2) ? pick(n_agents) : -1);
            default:
                return fml::started(-1);
            }
        }
        switch (pick(13))
        {
        case 0:
            return fml::Not(random_formula(rng, depth - 1));
        case 1:
        {
            std::vector<Formula> xs;
            const int k = 2 + pick(2);
            for (int i = 0; i < k; ++i)
                xs.push_back(random_formula(rng, depth - 1));
            return fml::And(std::move(xs));
        }
        case 2:
        {
            std::vector<Formula> xs;
            const int k = 2 + pick(2);
            for (int i = 0; i < k; ++i)
                xs.push_back(random_formula(rng, depth - 1));
            return fml::Or(std::move(xs));
        }
        case 3:
            return fml::implies(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        case 4:
            return fml::K(pick(n_agents), random_formula(rng, depth - 1));
        case 5:
            return fml::B(pick(n_agents), random_formula(rng, depth - 1));
        case 6:
            return fml::H(pick(n_agents), random_formula(rng, depth - 1));
        case 7:
            return fml::yesterday(random_formula(rng, depth - 1));
        case 8:
            return fml::eventually(random_formula(rng, depth - 1));
        case 9:
            return fml::always(random_formula(rng, depth - 1));
        case 10:
            return fml::everyone(static_cast<FGroup>(1 + pick(4)), random_formula(rng, depth - 1));
        case 11:
            return fml::common_hope(random_formula(rng, depth - 1));
        default:
            return fml::iff(random_formula(rng, depth - 1), random_formula(rng, depth - 1));
        }
    }
} // namespace

TEST_CASE("printer and parser round-trip structurally")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i)
    {
        Formula f = random_formula(rng, 4);
        const std::string text = print_formula(f);
        Formula back = parse_formula(text);
        CAPTURE(text);
        CHECK(back == f);
        CHECK(print_formula(back) == text);
    }
}

TEST_CASE("concrete syntax examples")
{
    CHECK(parse_formula("correct(0)") == fml::correct(0));
    CHECK(parse_formula("B[2](start & EdH(start))") ==
          fml::B(2, fml::And({fml::started(-1), fml::everyone(FGroup::EdH, fml::started(-1))})));
    CHECK(parse_formula("fire(1) -> B[1] start") ==
          fml::implies(fml::fired(1), fml::B(1, fml::started(-1))));
    CHECK(parse_formula("!K[0] correct(0)") == fml::Not(fml::K(0, fml::correct(0))));
    CHECK(parse_formula("<> (correct(1) -> fire(1))") ==
          fml::eventually(fml::implies(fml::correct(1), fml::fired(1))));
    CHECK(parse_formula("occ(2,START) & Y occ(FIRE)") ==
          fml::And({fml::occurred(2, OccKind::Start), fml::yesterday(fml::occurred(-1, OccKind::Fire))}));
    CHECK(parse_formula("CdH start") == fml::common_hope(fml::started(-1)));
}

TEST_CASE("implication is right-associative and weaker than & and |")
{
    Formula f = parse_formula("start & fire -> correct(0) | correct(1)");
    CHECK(f == fml::implies(fml::And({fml::started(-1), fml::fired(-1)}),
                            fml::Or({fml::correct(0), fml::correct(1)})));
    CHECK(parse_formula("start -> fire -> start") ==
          fml::implies(fml::started(-1), fml::implies(fml::fired(-1), fml::started(-1))));
}

TEST_CASE("parse errors carry a position")
{
    for (const char *bad : {"", "(start", "K[x] start", "occ(1,NOPE)", "start &", "fire(1"})
    {
        CHECK_THROWS_AS(parse_formula(bad), Error);
        try
        {
            parse_formula(bad);
        }
        catch (const Error &e)
        {
            CHECK(e.kind() == ErrorKind::ParseError);
            CHECK(std::string(e.what()).find("position") != std::string::npos);
        }
    }
}

TEST_CASE("structural equality ignores pointer identity")
{
    Formula a = fml::B(1, fml::And({fml::started(-1), fml::common_hope(fml::started(-1))}));
    Formula b = fml::B(1, fml::And({fml::started(-1), fml::common_hope(fml::started(-1))}));
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    CHECK_FALSE(a == fml::B(2, fml::And({fml::started(-1), fml::common_hope(fml::started(-1))})));
}
