#pragma once

#include "rebelfire/formula.hpp"
#include "rebelfire/protocol.hpp"
#include "rebelfire/runs.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rebelfire
{
    enum class ByzKind : std::uint8_t
    {
        Benign,       // faulty but (so far) indistinguishable from correct behavior
        OmitSends,    // drops every protocol send from the onset on
        FakeStart,    // fabricates a START record at a given round
        FakeSendBcast, // environment sends a message to everyone on the agent's behalf
        FakeSendTo,    // ... to a single chosen target
        FakeReceive,   // fabricates a receive record at a given round
    };

    struct ByzScript
    {
        ByzKind kind = ByzKind::Benign;
        Round round = -1;    // script round, where applicable
        MessageId msg = -1;  // fake message, where applicable
        AgentId target = -1; // FakeSendTo / FakeReceive peer

        std::string describe(const std::vector<std::string> &alphabet) const;
    };

    struct FaultPlan
    {
        AgentId agent = -1;
        Round onset_round = -1; // -1: faulty from the initial state; k: malfunction in round k
        bool silent = false;    // protocol suppressed from the deviation round on
        ByzScript script;

        Time onset_time() const noexcept { return onset_round < 0 ? ONSET_INITIAL : onset_round + 1; }
        Round deviation_round() const noexcept { return onset_round < 0 ? 0 : onset_round; }
    };

    struct StartInjection
    {
        AgentId agent = -1;
        Round round = 0;
    };
    using StartPattern = std::vector<StartInjection>;

    enum class DeliveryMode : std::uint8_t
    {
        ByHorizon, // every scheduled message arrives within its window; no loss
        AllowLoss, // each wave may alternatively be dropped
    };

    enum class Granularity : std::uint8_t
    {
        Message, // one delivery choice per message
        Wave,    // one delivery choice per (sender, send round) broadcast wave
    };

    // Everything the environment may nondeterministically do, as finite menus.
    struct AdversaryConfig
    {
        int n = 0;
        int f = 0;
        int horizon = 0;
        std::vector<StartPattern> start_patterns;
        std::vector<std::string> byz_menu; // subset of {fake_send, fake_start_record, omit_send, fake_receive}
        std::vector<AgentId> fault_agents; // empty = all agents
        std::vector<Round> onsets;         // empty = {-1, 0, .., horizon-1}; -1 means initial
        DeliveryMode delivery = DeliveryMode::ByHorizon;
        Granularity granularity = Granularity::Wave;
        int max_delay = 2;
        bool twins = true;
        bool persistence_closure = false;
        std::uint64_t max_runs = 200000;
        int max_branch_points = 4096;
        std::vector<Run> scenario_runs; // scripted runs prepended to the enumeration
    };

    void validate_config(const AdversaryConfig &cfg, const ProtocolSpec &protocol);

    struct Choice
    {
        std::string label;
        int chosen = 0;
        int options = 1;
    };

    // Replaying a log through the same engine reproduces a bit-identical run.
    struct ChoiceLog
    {
        std::vector<Choice> choices;
    };

    struct EnumerationResult
    {
        RunSet set;
        std::vector<ChoiceLog> logs; // logs[i] built runs[i]; synthesized runs carry a marker choice
        bool cap_exceeded = false;
        std::uint64_t explored = 0; // choice-tree leaves visited before dedup
    };

    // Depth-first exploration of every nondeterministic choice, deduplicated by
    // global-state sequence, in deterministic order. Honors REBELFIRE_THREADS for
    // splitting top-level branches; the merged output order does not depend on it.
    EnumerationResult enumerate_runs(const ProtocolSpec &protocol, const AdversaryConfig &cfg);

    // Seeded random subset of the same choice tree (verdicts on the sampled system are
    // relative to it). Twins are synthesized unless cfg.twins is off.
    EnumerationResult sample_runs(const ProtocolSpec &protocol, const AdversaryConfig &cfg,
                                  std::uint64_t seed, std::size_t count);

    // Replay one log (as produced by enumerate/sample) into a run.
    Run replay(const ProtocolSpec &protocol, const AdversaryConfig &cfg, const ChoiceLog &log);

    // The brain-in-vat companion of `base`: `victim` is faulty from the start, its event
    // records are fabrications, its recorded actions are replayed for real, incoming
    // deliveries are suppressed, and everyone else runs the protocol. The victim's local
    // history is identical to its history in `base` at every time.
    Run faulty_twin(const Run &base, AgentId victim, const ProtocolSpec &protocol);

    // An alternative continuation of base's global state at `cut`: identical through
    // round cut-1, then no further START injections, no new faults and no byzantine
    // interference; pending and new messages are delivered at the earliest round.
    Run silent_continuation(const Run &base, Time cut, const ProtocolSpec &protocol);

    // Marks the config so enumeration adds, for every run prefix, a continuation keeping
    // `correct(i) & !start` true forever. Only that formula shape is supported.
    AdversaryConfig potential_persistence_closure(const AdversaryConfig &cfg, const Formula &phi);

    // Liveness audit used by tests: every message sent by a then-correct agent in a round
    // with a nonempty delivery window reaches a then-correct addressee by the horizon.
    bool check_liveness(const Run &run, int max_delay);
} // namespace rebelfire
