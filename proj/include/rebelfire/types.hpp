#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rebelfire
{
    using AgentId = int;   // dense ids 0..n-1
    using Time = int;      // global clock value; states live at times 0..horizon
    using Round = int;     // round k spans times (k, k+1]; records of round k appear at time k+1
    using MessageId = int; // index into a protocol's declared message alphabet

    // Fault onset expressed as the first time at which the agent counts as faulty.
    // ONSET_INITIAL means faulty already in the initial state; ONSET_NEVER means always correct.
    inline constexpr Time ONSET_INITIAL = 0;
    inline constexpr Time ONSET_NEVER = std::numeric_limits<int>::max();

    enum class ErrorKind
    {
        FaultBudgetExceeded,
        UnmatchedReceive,
        OutOfRange,
        HeterogeneousRuns,
        CapExceeded,
        ConfigInvalid,
        UnsupportedFormula,
        HypothesisNotVerified,
        ArtifactCorrupt,
        ParseError,
    };

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorKind kind, const std::string &msg) : std::runtime_error(msg), m_kind(kind) {}
        ErrorKind kind() const noexcept { return m_kind; }

    private:
        ErrorKind m_kind;
    };

    [[noreturn]] inline void raise(ErrorKind kind, const std::string &msg)
    {
        throw Error(kind, msg);
    }

    enum class OccKind : std::uint8_t
    {
        Start = 0,   // external trigger event
        Fire = 1,    // the one-shot action the problem is about
        Send = 2,    // message handed to the environment (msg, peer = addressee)
        Receive = 3, // message delivery (msg, peer = sender)
        Fault = 4,   // malfunction marker; environment-side only, never in a local history
    };

    inline bool is_event(OccKind k) noexcept { return k == OccKind::Start || k == OccKind::Receive || k == OccKind::Fault; }
    inline bool is_action(OccKind k) noexcept { return k == OccKind::Fire || k == OccKind::Send; }

    // One entry of an agent's per-round record set. `genuine` is ground truth the agent
    // itself can never see: false marks a fabricated record of something that did not happen.
    struct Occurrence
    {
        OccKind kind = OccKind::Start;
        MessageId msg = -1; // Send/Receive only
        AgentId peer = -1;  // Send: addressee, Receive: sender
        bool genuine = true;

        friend bool operator==(const Occurrence &a, const Occurrence &b) noexcept
        {
            return a.kind == b.kind && a.msg == b.msg && a.peer == b.peer && a.genuine == b.genuine;
        }
        // Lexicographic order used everywhere a record set is serialized or hashed.
        friend bool operator<(const Occurrence &a, const Occurrence &b) noexcept
        {
            if (a.kind != b.kind)
                return a.kind < b.kind;
            if (a.msg != b.msg)
                return a.msg < b.msg;
            if (a.peer != b.peer)
                return a.peer < b.peer;
            return a.genuine < b.genuine;
        }
    };

    // The agent-visible projection: genuine flag stripped. Fault markers are dropped
    // entirely before this type is ever constructed.
    struct LocalOcc
    {
        OccKind kind = OccKind::Start;
        MessageId msg = -1;
        AgentId peer = -1;

        LocalOcc() = default;
        explicit LocalOcc(const Occurrence &o) : kind(o.kind), msg(o.msg), peer(o.peer) {}

        friend bool operator==(const LocalOcc &a, const LocalOcc &b) noexcept
        {
            return a.kind == b.kind && a.msg == b.msg && a.peer == b.peer;
        }
        friend bool operator<(const LocalOcc &a, const LocalOcc &b) noexcept
        {
            if (a.kind != b.kind)
                return a.kind < b.kind;
            if (a.msg != b.msg)
                return a.msg < b.msg;
            return a.peer < b.peer;
        }
    };

    inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) noexcept
    {
        // 64-bit FNV-ish mixing; stable across platforms, good enough for dedup + interning.
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

    inline std::uint64_t hash_occ(const Occurrence &o) noexcept
    {
        std::uint64_t h = 0x243f6a8885a308d3ULL;
        h = hash_mix(h, static_cast<std::uint64_t>(o.kind));
        h = hash_mix(h, static_cast<std::uint64_t>(o.msg) + 0x100);
        h = hash_mix(h, static_cast<std::uint64_t>(o.peer) + 0x10000);
        h = hash_mix(h, o.genuine ? 1 : 2);
        return h;
    }

    inline std::uint64_t hash_local_occ(const LocalOcc &o) noexcept
    {
        std::uint64_t h = 0x452821e638d01377ULL;
        h = hash_mix(h, static_cast<std::uint64_t>(o.kind));
        h = hash_mix(h, static_cast<std::uint64_t>(o.msg) + 0x100);
        h = hash_mix(h, static_cast<std::uint64_t>(o.peer) + 0x10000);
        return h;
    }
} // namespace rebelfire
