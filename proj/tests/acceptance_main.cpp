// Acceptance gate: runs every criterion end to end and prints one line each.
// Exits nonzero if any criterion fails.

#include "helpers.hpp"

#include "rebelfire/checker.hpp"
#include "rebelfire/config.hpp"

#include <chrono>
#include <iostream>
#include <random>

using namespace rebelfire;

namespace
{
    int failures = 0;

    void report(int criterion, bool ok, const std::string &what)
    {
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what << "\n";
        if (!ok)
            ++failures;
    }

    struct Checked
    {
        InterpretedSystem sys;
        std::vector<CheckReport> reports;
        EnumerationResult raw;
    };

    Checked run_preset(const std::string &name)
    {
        JobConfig job = parse_job_config(preset_text(name));
        ProtocolSpec protocol = resolve_protocol(job);
        EnumerationResult res = enumerate_runs(protocol, job.adversary);
        auto fp = fingerprint_for(job, res.set.runs.size(), false);
        InterpretedSystem sys = build_system(res.set);
        CheckSuite suite(sys, fp);
        auto reports = suite.run_all();
        return Checked{std::move(sys), std::move(reports), std::move(res)};
    }

    Verdict verdict_of(const Checked &c, PropertyId id)
    {
        for (const auto &r : c.reports)
            if (r.property == id)
                return r.verdict;
        return Verdict::NotApplicable;
    }

    int fixpoint_systems_checked = 0;

    // criterion 6 is asserted on every system this suite touches
    bool fixpoint_contract(const InterpretedSystem &sys)
    {
        for (const Formula &phi : {fml::started(-1), fml::fired(-1)})
        {
            auto fix = sys.eventual_common_hope(phi);
            if (fix.iterations > static_cast<int>(sys.point_count()) + 1)
                return false;
            const PointSet &lhs = sys.extension(fml::common_hope(phi));
            const PointSet &rhs =
                sys.extension(fml::everyone(FGroup::EdH, fml::And({phi, fml::common_hope(phi)})));
            if (!(lhs == rhs) || !(lhs == fix.set))
                return false;
            if (!lhs.subset_of(sys.extension(fml::everyone(FGroup::EdH, phi))))
                return false;
        }
        ++fixpoint_systems_checked;
        return true;
    }

    bool brain_in_vat_clean(const InterpretedSystem &sys)
    {
        for (AgentId i = 0; i < sys.n(); ++i)
            if (!sys.valid(fml::Not(fml::And({fml::correct(i), fml::K(i, fml::correct(i))}))))
                return false;
        return true;
    }
} // namespace

int main()
{
    bool fixpoints_ok = true;
    bool vats_ok = true;

    // --- criteria 1-3: the echo preset ---
    const auto t0 = std::chrono::steady_clock::now();
    Checked echo = run_preset("echo-n4f1");
    const double echo_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    report(1,
           !echo.raw.cap_exceeded && echo.raw.set.runs.size() <= 200000 &&
               verdict_of(echo, PropertyId::U) == Verdict::Holds &&
               verdict_of(echo, PropertyId::R) == Verdict::Holds &&
               verdict_of(echo, PropertyId::C) == Verdict::Holds && echo_seconds < 600.0,
           "echo-n4f1 satisfies U, R and C (" + std::to_string(echo.raw.set.runs.size()) +
               " runs, " + std::to_string(echo_seconds).substr(0, 5) + "s)");

    {
        bool thm = verdict_of(echo, PropertyId::Thm10) == Verdict::Holds &&
                   verdict_of(echo, PropertyId::Thm14_Eq7) == Verdict::Holds;
        bool firing_guarded = true;
        for (AgentId i = 0; i < echo.sys.n(); ++i)
        {
            const PointSet &fires = echo.sys.extension(fml::fired(i));
            const PointSet &guard = echo.sys.extension(
                fml::B(i, fml::And({fml::started(-1), fml::common_hope(fml::started(-1))})));
            firing_guarded = firing_guarded && fires.subset_of(guard);
        }
        report(2, thm && firing_guarded,
               "necessity theorems hold and every firing point carries the common-hope belief");
    }

    {
        const PointSet &mutual = echo.sys.extension(fml::everyone(FGroup::EdH, fml::started(-1)));
        const PointSet &common = echo.sys.extension(fml::common_hope(fml::started(-1)));
        report(3, mutual == common && verdict_of(echo, PropertyId::Lemma26_Eq10) == Verdict::Holds,
               "eventual mutual hope and eventual common hope coincide exactly on echo-n4f1");
    }
    fixpoints_ok = fixpoints_ok && fixpoint_contract(echo.sys);
    vats_ok = vats_ok && brain_in_vat_clean(echo.sys);

    // --- criterion 4: the three-agent counterexample ---
    {
        Checked r12 = run_preset("remark12");
        bool ok = verdict_of(r12, PropertyId::R) == Verdict::Violated;
        int script_run = -1;
        const Run script = remark12_scenario();
        for (std::size_t i = 0; i < r12.sys.runs().size(); ++i)
            if (r12.sys.runs()[i] == script)
                script_run = static_cast<int>(i);
        ok = ok && script_run >= 0;
        for (const auto &r : r12.reports)
            if (r.property == PropertyId::R)
                ok = ok && !r.witnesses.empty() && r.witnesses.front().point.run == script_run;
        if (script_run >= 0)
        {
            const Point firing{script_run, 4};
            ok = ok &&
                 r12.sys.eval(firing, parse_formula("B[2](start & EdH(start))")) &&
                 !r12.sys.eval(firing, parse_formula("B[2](start & CdH(start))")) &&
                 !r12.sys.eval(firing, parse_formula("B[2] EdB start"));
        }
        ok = ok && verdict_of(r12, PropertyId::Remark12) == Verdict::Holds;
        report(4, ok, "remark12 reproduces the relay violation and the belief contrasts");
        fixpoints_ok = fixpoints_ok && fixpoint_contract(r12.sys);
        vats_ok = vats_ok && brain_in_vat_clean(r12.sys);
    }

    // --- criterion 5: the forgeable naive relay ---
    {
        Checked naive = run_preset("naive-byz");
        bool ok = verdict_of(naive, PropertyId::U) == Verdict::Violated;
        for (const auto &r : naive.reports)
            if (r.property == PropertyId::U && !r.witnesses.empty())
            {
                const Point w = r.witnesses.front().point;
                ok = ok && naive.sys.eval(w, fml::fired(-1)) &&
                     !naive.sys.eval(w, fml::started(-1));
            }
        ok = ok && any_violation(naive.reports);
        report(5, ok, "naive relay forgeability: a correct agent fires without a genuine start");
        fixpoints_ok = fixpoints_ok && fixpoint_contract(naive.sys);
        vats_ok = vats_ok && brain_in_vat_clean(naive.sys);
    }

    // --- criterion 9: early local belief, both directions ---
    {
        Checked silent = run_preset("silent");
        CheckSuite suite(silent.sys, SystemFingerprint{});
        bool persistent = true;
        for (AgentId i = 0; i < silent.sys.n(); ++i)
            persistent = persistent && suite.check_potentially_persistent(fml::And(
                                           {fml::correct(i), fml::Not(fml::started(-1))}));
        bool ok = persistent && verdict_of(silent, PropertyId::Lemma23) == Verdict::Holds &&
                  verdict_of(silent, PropertyId::Cor24_Eq9_10) == Verdict::Holds;

        CheckSuite echo_suite(echo.sys, SystemFingerprint{});
        bool mandatory_blocks =
            !echo_suite.check_potentially_persistent(
                fml::And({fml::correct(0), fml::Not(fml::started(-1))})) &&
            verdict_of(echo, PropertyId::Lemma23) == Verdict::NotApplicable &&
            verdict_of(echo, PropertyId::Cor24_Eq9_10) == Verdict::NotApplicable;
        report(9, ok && mandatory_blocks,
               "early local belief holds on the closed world and gates on persistence elsewhere");
        fixpoints_ok = fixpoints_ok && fixpoint_contract(silent.sys);
        vats_ok = vats_ok && brain_in_vat_clean(silent.sys);
    }

    // --- criterion 7: randomized epistemic core invariants, 100 seeds ---
    {
        std::size_t violations = 0;
        std::size_t checked = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed)
        {
            std::mt19937_64 rng(seed);
            RunSet set = testgen::random_system(rng, 3, 4, 5);
            InterpretedSystem sys = build_system(std::move(set));
            const Formula start = fml::started(-1);
            for (AgentId i = 0; i < sys.n(); ++i)
            {
                ++checked;
                const Formula k = fml::K(i, start);
                const PointSet &ke = sys.extension(k);
                if (!ke.subset_of(sys.extension(start)))
                    ++violations; // factivity
                for (std::size_t b = 0; b < sys.bucket_count(i); ++b)
                {
                    const auto &bucket = sys.bucket_by_id(i, b);
                    const bool first = ke.test(bucket.front());
                    for (auto p : bucket)
                        if (ke.test(p) != first)
                            ++violations; // bucket constancy
                }
                const PointSet &hc = sys.extension(fml::H(i, fml::And({start, fml::fired(-1)})));
                if (!hc.subset_of(sys.extension(fml::H(i, start))) ||
                    !hc.subset_of(sys.extension(fml::H(i, fml::fired(-1)))))
                    ++violations; // hope normality
                if (!sys.valid(fml::implies(fml::Not(fml::correct(i)), fml::H(i, start))))
                    ++violations; // vacuous hope
                if (!sys.extension(fml::started(i)).subset_of(sys.extension(fml::B(i, fml::started(i)))) ||
                    !sys.extension(fml::B(i, fml::started(i)))
                         .subset_of(sys.extension(fml::B(i, start))) ||
                    !sys.extension(fml::fired(i)).subset_of(sys.extension(fml::B(i, fml::fired(i)))) ||
                    !sys.extension(fml::B(i, fml::fired(i)))
                         .subset_of(sys.extension(fml::B(i, fml::fired(-1)))))
                    ++violations; // the four perfect-recall inclusions
                if (!sys.valid(fml::implies(fml::Not(fml::correct(i)),
                                            fml::always(fml::Not(fml::correct(i))))))
                    ++violations; // correctness monotone
                Formula ev = fml::eventually(fml::implies(fml::correct(i), start));
                if (!(sys.extension(fml::B(i, ev)) == sys.extension(fml::K(i, ev))))
                    ++violations; // belief/knowledge equivalence for own-correctness eventualities
            }
        }
        report(7, violations == 0,
               "epistemic core invariants over 100 random systems (" + std::to_string(checked) +
                   " agent checks, " + std::to_string(violations) + " violations)");
    }

    // --- criterion 8: brain in vat on twin-covered systems ---
    {
        bool ok = vats_ok;
        std::mt19937_64 rng(2718);
        for (int i = 0; i < 5; ++i)
        {
            AdversaryConfig cfg;
            cfg.n = 3;
            cfg.f = 1;
            cfg.horizon = 4;
            cfg.start_patterns = {{}, {StartInjection{0, 0}}, {StartInjection{1, 0}, StartInjection{2, 0}}};
            cfg.byz_menu = {"fake_send"};
            cfg.onsets = {-1};
            cfg.twins = true;
            auto res = sample_runs(echo_frr(1), cfg, rng(), 15);
            InterpretedSystem sys = build_system(std::move(res.set));
            ok = ok && brain_in_vat_clean(sys);
            fixpoints_ok = fixpoints_ok && fixpoint_contract(sys);
        }
        report(8, ok, "no correct agent ever knows its own correctness on twin-covered systems");
    }

    // --- criterion 6: fixpoint contract over every system this suite built ---
    report(6, fixpoints_ok,
           "fixpoint equation exact, iteration bound met, and common below mutual hope on " +
               std::to_string(fixpoint_systems_checked) + " systems");

    // --- criterion 10: determinism of artifacts and reports ---
    {
        JobConfig job = parse_job_config(preset_text("naive-byz"));
        ProtocolSpec protocol = resolve_protocol(job);
        auto once = enumerate_runs(protocol, job.adversary);
        auto twice = enumerate_runs(protocol, job.adversary);
        bool ok = serialize_trace(once.set) == serialize_trace(twice.set);

        InterpretedSystem s1 = build_system(once.set);
        InterpretedSystem s2 = build_system(twice.set);
        CheckSuite c1(s1, fingerprint_for(job, once.set.runs.size(), false));
        CheckSuite c2(s2, fingerprint_for(job, twice.set.runs.size(), false));
        ok = ok && reports_to_json(c1.run_all()) == reports_to_json(c2.run_all());

        // sampling determinism as well
        auto sample1 = sample_runs(protocol, job.adversary, 99, 10);
        auto sample2 = sample_runs(protocol, job.adversary, 99, 10);
        ok = ok && serialize_trace(sample1.set) == serialize_trace(sample2.set);
        report(10, ok, "identical configs and seeds give byte-identical traces and reports");
    }

    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << "\n";
    return failures == 0 ? 0 : 1;
}
