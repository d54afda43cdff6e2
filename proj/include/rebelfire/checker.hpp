#pragma once

#include "rebelfire/enumerate.hpp"
#include "rebelfire/system.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rebelfire
{
    enum class PropertyId
    {
        C,
        U,
        R,
        Lemma6,
        Lemma7_Eq5,
        Lemma9_Eq6,
        Thm10,
        Thm14_Eq7,
        Thm16_1,
        Thm16_2_Eq8,
        Lemma18,
        Lemma19,
        Lemma21,
        Cor22,
        Lemma23,
        Cor24_Eq9_10,
        Lemma26_Eq10,
        FixpointAxiom_Eq1,
        BrainInVat,
        Remark12,
    };

    const char *property_name(PropertyId id);
    std::optional<PropertyId> property_by_name(const std::string &name);
    std::vector<PropertyId> all_properties();

    enum class Verdict
    {
        Holds,
        Violated,
        NotApplicable,
    };

    const char *verdict_name(Verdict v);

    // A counterexample (or witness) point, decoded far enough to be readable: the local
    // history of the most relevant agent and, when the failed formula has an epistemic
    // operator outermost, the indistinguishability bucket that defeats it.
    struct Witness
    {
        Point point;
        std::string formula;
        AgentId agent = -1;                      // agent of the outermost K/B/H, if any
        std::vector<std::string> agent_history;  // decoded canonical history of that agent
        std::vector<Point> bucket;               // capped listing of the confusing bucket
        std::string note;
    };

    struct SystemFingerprint
    {
        int n = 0;
        int f = 0;
        int horizon = 0;
        std::string protocol;
        std::string menu;
        std::size_t run_count = 0;
        bool twins = false;
        bool sampled = false;
        std::string delivery;
        std::uint64_t seed = 0;
    };

    struct CheckReport
    {
        PropertyId property = PropertyId::U;
        Verdict verdict = Verdict::Holds;
        std::vector<Witness> witnesses;
        std::string detail; // sub-results, diagnostics, hypothesis notes
        SystemFingerprint fingerprint;
    };

    // Runs property checks against one frozen system in dependency order: conditional
    // theorems see the verdicts of their hypotheses and come out NotApplicable rather
    // than silently passing when a hypothesis is unverified.
    class CheckSuite
    {
    public:
        CheckSuite(const InterpretedSystem &system, SystemFingerprint fingerprint);

        CheckReport check_U();
        CheckReport check_R();
        CheckReport check_C();
        CheckReport check_theorem(PropertyId id); // ErrorKind::HypothesisNotVerified if out of order
        CheckReport check_sufficiency();          // Thm16_2_Eq8
        CheckReport check_early_local_belief(AgentId i);
        CheckReport check_lifting();
        CheckReport check_brain_in_vat();
        CheckReport check_remark12();

        bool check_potentially_persistent(const Formula &phi) const;

        // Every property, in dependency order; conditional ones gated on their hypotheses.
        std::vector<CheckReport> run_all(const std::vector<PropertyId> &filter = {});

        const InterpretedSystem &system() const { return m_system; }

    private:
        CheckReport make_report(PropertyId id, Verdict v, std::string detail = "") const;
        CheckReport validity_report(PropertyId id, const Formula &f, std::string detail = "");
        Witness decode_witness(Point p, const Formula &f) const;
        Verdict require(PropertyId hypothesis) const;

        Formula relay_consequent() const;  // /\_i <>(correct(i) -> fire(i))
        Formula group_belief_antecedent() const; // \/_{|G|=2f+1} /\_{j in G} K_j(correct(j)->start)

        const InterpretedSystem &m_system;
        SystemFingerprint m_fingerprint;
        std::map<PropertyId, Verdict> m_verdicts;
    };

    // Report serialization: versioned machine-readable JSON plus a human summary derived
    // from it. Exit status for a batch is nonzero iff some applicable property is violated.
    std::string reports_to_json(const std::vector<CheckReport> &reports);
    std::string reports_to_text(const std::vector<CheckReport> &reports);
    bool any_violation(const std::vector<CheckReport> &reports);
} // namespace rebelfire
