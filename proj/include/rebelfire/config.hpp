#pragma once

#include "rebelfire/checker.hpp"
#include "rebelfire/enumerate.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rebelfire
{
    // One checking job: which protocol and adversary to explore, what to verify, and how
    // to emit the results. Parsed from JSON with unknown keys rejected.
    struct JobConfig
    {
        std::string protocol;
        AdversaryConfig adversary;
        std::vector<PropertyId> properties; // empty = full suite
        std::uint64_t seed = 0;
        std::size_t sample_count = 0; // 0 = exhaustive enumeration
        std::string format = "text";  // text | json
        std::string scenario;         // optional named scripted run to prepend
    };

    JobConfig parse_job_config(const std::string &json_text);
    std::string job_config_to_json(const JobConfig &cfg);

    // Presets ship embedded in the binary; the files under presets/ are copies kept in
    // sync by a test.
    std::vector<std::string> preset_names();
    std::string preset_text(const std::string &name); // ErrorKind::ConfigInvalid if unknown

    SystemFingerprint fingerprint_for(const JobConfig &cfg, std::size_t run_count, bool sampled);

    // Applies the scenario hook and returns the protocol for the job.
    ProtocolSpec resolve_protocol(JobConfig &cfg);
} // namespace rebelfire
