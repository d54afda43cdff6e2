#pragma once

#include "rebelfire/formula.hpp"
#include "rebelfire/runs.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

namespace rebelfire
{
    struct Point
    {
        int run = 0;
        Time t = 0;

        friend bool operator==(const Point &a, const Point &b) noexcept { return a.run == b.run && a.t == b.t; }
        friend bool operator<(const Point &a, const Point &b) noexcept
        {
            return a.run != b.run ? a.run < b.run : a.t < b.t;
        }
    };

    // Fixed-size bitset over all (run, t) points of one system.
    class PointSet
    {
    public:
        PointSet() = default;
        explicit PointSet(std::size_t size, bool value = false);

        std::size_t size() const noexcept { return m_size; }
        bool test(std::size_t i) const noexcept { return (m_words[i >> 6] >> (i & 63)) & 1; }
        void set(std::size_t i) noexcept { m_words[i >> 6] |= (1ULL << (i & 63)); }
        void reset(std::size_t i) noexcept { m_words[i >> 6] &= ~(1ULL << (i & 63)); }

        PointSet &operator&=(const PointSet &o);
        PointSet &operator|=(const PointSet &o);
        void flip();
        std::size_t count() const noexcept;
        bool subset_of(const PointSet &o) const noexcept;
        std::optional<std::size_t> first_clear() const noexcept; // lowest index not in the set
        std::optional<std::size_t> first_set() const noexcept;

        friend bool operator==(const PointSet &a, const PointSet &b) noexcept
        {
            return a.m_size == b.m_size && a.m_words == b.m_words;
        }
        friend PointSet operator&(PointSet a, const PointSet &b) { return a &= b; }
        friend PointSet operator|(PointSet a, const PointSet &b) { return a |= b; }
        friend PointSet operator~(PointSet a)
        {
            a.flip();
            return a;
        }

    private:
        void trim() noexcept;
        std::size_t m_size = 0;
        std::vector<std::uint64_t> m_words;
    };

    // Frozen Kripke model: a finite set of runs plus the designated-atom valuation and
    // the per-agent indistinguishability index. Nothing may be added after build().
    // All queries are pure; the formula-extension memo is internally synchronized.
    class InterpretedSystem
    {
    public:
        static InterpretedSystem build(RunSet set); // ErrorKind::HeterogeneousRuns on mismatch

        int n() const noexcept { return m_set.n; }
        int f() const noexcept { return m_set.f; }
        int horizon() const noexcept { return m_set.horizon; }
        const RunSet &run_set() const noexcept { return m_set; }
        const std::vector<Run> &runs() const noexcept { return m_set.runs; }

        std::size_t point_count() const noexcept { return m_set.runs.size() * (m_set.horizon + 1); }
        std::size_t index_of(Point p) const noexcept
        {
            return static_cast<std::size_t>(p.run) * (m_set.horizon + 1) + p.t;
        }
        Point point_at(std::size_t idx) const noexcept
        {
            const int stride = m_set.horizon + 1;
            return Point{static_cast<int>(idx / stride), static_cast<Time>(idx % stride)};
        }

        // Interned canonical-history id; equal ids <=> equal canonical local histories.
        std::uint32_t history_id(AgentId agent, std::size_t point_idx) const
        {
            return m_history_ids[agent][point_idx];
        }
        // All points the agent cannot distinguish from the given one (its own point included).
        const std::vector<std::uint32_t> &bucket(AgentId agent, std::size_t point_idx) const
        {
            return m_buckets[agent][m_bucket_of[agent][point_idx]];
        }
        std::size_t bucket_count(AgentId agent) const { return m_buckets[agent].size(); }
        const std::vector<std::uint32_t> &bucket_by_id(AgentId agent, std::size_t b) const
        {
            return m_buckets[agent][b];
        }

        // Bulk truth set, memoized per structural formula hash.
        const PointSet &extension(const Formula &f) const;

        // Pointwise evaluation following the truth clauses directly; deliberately does not
        // reuse the bulk route (tests cross-check both) except for the fixpoint operator.
        bool eval(Point p, const Formula &f) const;

        struct FixpointResult
        {
            PointSet set;
            int iterations = 0;
        };
        // Greatest fixpoint of x <-> EdH(phi & x), by downward iteration from the full
        // point set. The result satisfies the fixpoint equation exactly.
        FixpointResult eventual_common_hope(const Formula &phi) const;

        // First point (run-major, then time) where the formula fails, if any.
        std::optional<Point> first_counterexample(const Formula &f) const;
        bool valid(const Formula &f) const { return !first_counterexample(f).has_value(); }

        const PointSet &correct_set(AgentId i) const { return m_correct[i]; }

    private:
        InterpretedSystem() = default;

        PointSet compute_extension(const Formula &f) const;
        PointSet atom_occurred(AgentId agent, OccKind o) const;
        PointSet belief_from_guard(AgentId agent, const PointSet &guard) const;
        PointSet hope_set(AgentId agent, const PointSet &phi) const;
        PointSet suffix_eventually(const PointSet &phi) const;
        PointSet mutual_hope_eventually(const PointSet &phi) const; // /\_j <> H_j(phi)

        RunSet m_set;
        std::vector<PointSet> m_correct;                        // per agent
        std::vector<PointSet> m_occ_start, m_occ_fire;          // per agent, raw record presence
        std::vector<std::vector<std::uint32_t>> m_history_ids;  // [agent][point]
        std::vector<std::vector<std::uint32_t>> m_bucket_of;    // [agent][point] -> bucket index
        std::vector<std::vector<std::vector<std::uint32_t>>> m_buckets; // [agent][bucket] -> points

        struct Memo
        {
            std::mutex mutex;
            std::unordered_map<std::uint64_t, std::vector<std::pair<Formula, std::unique_ptr<PointSet>>>> map;
        };
        mutable std::unique_ptr<Memo> m_memo = std::make_unique<Memo>();
    };

    InterpretedSystem build_system(RunSet set);
} // namespace rebelfire
