#include "rebelfire/config.hpp"

#include "rebelfire/protocol.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rebelfire
{
    namespace
    {
        using nlohmann::json;

        void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where)
        {
            for (auto it = j.begin(); it != j.end(); ++it)
                if (!allowed.count(it.key()))
                    raise(ErrorKind::ConfigInvalid, "unknown key '" + it.key() + "' in " + where);
        }

        json parse_json(const std::string &text)
        {
            json j = json::parse(text, nullptr, false);
            if (j.is_discarded())
                raise(ErrorKind::ConfigInvalid, "config is not valid JSON");
            return j;
        }
    } // namespace

    JobConfig parse_job_config(const std::string &text)
    {
        json j = parse_json(text);
        if (!j.is_object())
            raise(ErrorKind::ConfigInvalid, "config must be a JSON object");
        reject_unknown(j,
                       {"schema", "protocol", "n", "f", "horizon", "start_patterns", "byzantine_menu",
                        "fault_agents", "onsets", "delivery", "twins", "persistence_closure", "caps",
                        "scenario", "properties", "seed", "sample_count", "format"},
                       "config");
        if (j.value("schema", "rebelfire-config/1") != "rebelfire-config/1")
            raise(ErrorKind::ConfigInvalid, "unsupported config schema");

        JobConfig cfg;
        if (!j.contains("protocol") || !j.contains("n") || !j.contains("f") || !j.contains("horizon"))
            raise(ErrorKind::ConfigInvalid, "protocol, n, f and horizon are required");
        cfg.protocol = j["protocol"].get<std::string>();
        cfg.adversary.n = j["n"].get<int>();
        cfg.adversary.f = j["f"].get<int>();
        cfg.adversary.horizon = j["horizon"].get<int>();

        if (j.contains("start_patterns"))
        {
            if (!j["start_patterns"].is_array())
                raise(ErrorKind::ConfigInvalid, "start_patterns must be an array of patterns");
            for (const auto &pat : j["start_patterns"])
            {
                StartPattern p;
                for (const auto &inj : pat)
                {
                    if (!inj.is_array() || inj.size() != 2)
                        raise(ErrorKind::ConfigInvalid, "a start injection is [agent, round]");
                    p.push_back(StartInjection{inj[0].get<int>(), inj[1].get<int>()});
                }
                cfg.adversary.start_patterns.push_back(std::move(p));
            }
        }
        else
            cfg.adversary.start_patterns = {{}};

        if (j.contains("byzantine_menu"))
            for (const auto &m : j["byzantine_menu"])
                cfg.adversary.byz_menu.push_back(m.get<std::string>());
        if (j.contains("fault_agents"))
            for (const auto &a : j["fault_agents"])
                cfg.adversary.fault_agents.push_back(a.get<int>());
        if (j.contains("onsets"))
            for (const auto &o : j["onsets"])
                cfg.adversary.onsets.push_back(o.get<int>());

        if (j.contains("delivery"))
        {
            const json &d = j["delivery"];
            reject_unknown(d, {"mode", "max_delay", "granularity"}, "delivery");
            const std::string mode = d.value("mode", "deliver-by-horizon");
            if (mode == "deliver-by-horizon")
                cfg.adversary.delivery = DeliveryMode::ByHorizon;
            else if (mode == "allow-loss")
                cfg.adversary.delivery = DeliveryMode::AllowLoss;
            else
                raise(ErrorKind::ConfigInvalid, "unknown delivery mode '" + mode + "'");
            cfg.adversary.max_delay = d.value("max_delay", 2);
            const std::string gran = d.value("granularity", "wave");
            if (gran == "wave")
                cfg.adversary.granularity = Granularity::Wave;
            else if (gran == "message")
                cfg.adversary.granularity = Granularity::Message;
            else
                raise(ErrorKind::ConfigInvalid, "unknown delivery granularity '" + gran + "'");
        }

        cfg.adversary.twins = j.value("twins", true);
        cfg.adversary.persistence_closure = j.value("persistence_closure", false);
        if (j.contains("caps"))
        {
            const json &c = j["caps"];
            reject_unknown(c, {"max_runs", "max_branch_points"}, "caps");
            cfg.adversary.max_runs = c.value("max_runs", std::uint64_t{200000});
            cfg.adversary.max_branch_points = c.value("max_branch_points", 4096);
        }
        cfg.scenario = j.value("scenario", "");
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.sample_count = j.value("sample_count", std::size_t{0});
        cfg.format = j.value("format", "text");
        if (cfg.format != "text" && cfg.format != "json")
            raise(ErrorKind::ConfigInvalid, "format must be text or json");

        if (j.contains("properties") && !(j["properties"].is_string() && j["properties"] == "all"))
        {
            for (const auto &p : j["properties"])
            {
                auto id = property_by_name(p.get<std::string>());
                if (!id)
                    raise(ErrorKind::ConfigInvalid, "unknown property '" + p.get<std::string>() + "'");
                cfg.properties.push_back(*id);
            }
        }
        return cfg;
    }

    std::string job_config_to_json(const JobConfig &cfg)
    {
        json j;
        j["schema"] = "rebelfire-config/1";
        j["protocol"] = cfg.protocol;
        j["n"] = cfg.adversary.n;
        j["f"] = cfg.adversary.f;
        j["horizon"] = cfg.adversary.horizon;
        json pats = json::array();
        for (const auto &p : cfg.adversary.start_patterns)
        {
            json pat = json::array();
            for (const auto &inj : p)
                pat.push_back({inj.agent, inj.round});
            pats.push_back(pat);
        }
        j["start_patterns"] = pats;
        j["byzantine_menu"] = cfg.adversary.byz_menu;
        if (!cfg.adversary.fault_agents.empty())
            j["fault_agents"] = cfg.adversary.fault_agents;
        if (!cfg.adversary.onsets.empty())
            j["onsets"] = cfg.adversary.onsets;
        j["delivery"] = {{"mode", cfg.adversary.delivery == DeliveryMode::ByHorizon
                                      ? "deliver-by-horizon"
                                      : "allow-loss"},
                         {"max_delay", cfg.adversary.max_delay},
                         {"granularity",
                          cfg.adversary.granularity == Granularity::Wave ? "wave" : "message"}};
        j["twins"] = cfg.adversary.twins;
        j["persistence_closure"] = cfg.adversary.persistence_closure;
        j["caps"] = {{"max_runs", cfg.adversary.max_runs},
                     {"max_branch_points", cfg.adversary.max_branch_points}};
        if (!cfg.scenario.empty())
            j["scenario"] = cfg.scenario;
        if (!cfg.properties.empty())
        {
            json ps = json::array();
            for (auto id : cfg.properties)
                ps.push_back(property_name(id));
            j["properties"] = ps;
        }
        j["seed"] = cfg.seed;
        j["sample_count"] = cfg.sample_count;
        j["format"] = cfg.format;
        return j.dump(2) + "\n";
    }

    namespace presets
    {
        // Pinned to the acceptance checks: echo soundness, the three-agent relay
        // counterexample, the forgeable naive relay, and the persistence-closed world.
        const char *ECHO_N4F1 = R"JSON({
  "schema": "rebelfire-config/1",
  "protocol": "echo",
  "n": 4,
  "f": 1,
  "horizon": 5,
  "start_patterns": [[[0, 0], [1, 0], [2, 0], [3, 0]]],
  "byzantine_menu": ["fake_send", "fake_start_record", "omit_send"],
  "onsets": [-1, 0, 1, 2, 3],
  "delivery": {"mode": "deliver-by-horizon", "max_delay": 2, "granularity": "wave"},
  "twins": true,
  "caps": {"max_runs": 200000, "max_branch_points": 4096},
  "seed": 0
}
)JSON";

        const char *REMARK12 = R"JSON({
  "schema": "rebelfire-config/1",
  "protocol": "mutual-hope",
  "n": 3,
  "f": 1,
  "horizon": 5,
  "start_patterns": [[], [[0, 0]], [[1, 0]], [[2, 0]], [[0, 0], [1, 0]], [[0, 0], [2, 0]],
                     [[1, 0], [2, 0]], [[0, 0], [1, 0], [2, 0]]],
  "byzantine_menu": ["fake_send"],
  "onsets": [-1],
  "delivery": {"mode": "deliver-by-horizon", "max_delay": 2, "granularity": "wave"},
  "twins": true,
  "scenario": "remark12",
  "caps": {"max_runs": 200000, "max_branch_points": 4096},
  "seed": 0
}
)JSON";

        const char *NAIVE_BYZ = R"JSON({
  "schema": "rebelfire-config/1",
  "protocol": "naive",
  "n": 3,
  "f": 1,
  "horizon": 4,
  "start_patterns": [[], [[0, 0]], [[1, 0]], [[2, 0]]],
  "byzantine_menu": ["fake_send"],
  "onsets": [-1, 0],
  "delivery": {"mode": "deliver-by-horizon", "max_delay": 2, "granularity": "wave"},
  "twins": true,
  "caps": {"max_runs": 200000, "max_branch_points": 4096},
  "seed": 0
}
)JSON";

        const char *SILENT = R"JSON({
  "schema": "rebelfire-config/1",
  "protocol": "echo",
  "n": 3,
  "f": 1,
  "horizon": 3,
  "start_patterns": [[], [[0, 0]], [[1, 0]], [[2, 0]], [[0, 0], [1, 0]], [[0, 0], [2, 0]],
                     [[1, 0], [2, 0]], [[0, 0], [1, 0], [2, 0]]],
  "byzantine_menu": ["fake_send"],
  "onsets": [-1],
  "delivery": {"mode": "deliver-by-horizon", "max_delay": 2, "granularity": "wave"},
  "twins": true,
  "persistence_closure": true,
  "caps": {"max_runs": 200000, "max_branch_points": 4096},
  "seed": 0
}
)JSON";
    } // namespace presets

    std::vector<std::string> preset_names()
    {
        return {"echo-n4f1", "remark12", "naive-byz", "silent"};
    }

    std::string preset_text(const std::string &name)
    {
        if (name == "echo-n4f1")
            return presets::ECHO_N4F1;
        if (name == "remark12")
            return presets::REMARK12;
        if (name == "naive-byz")
            return presets::NAIVE_BYZ;
        if (name == "silent")
            return presets::SILENT;
        raise(ErrorKind::ConfigInvalid, "unknown preset '" + name + "'");
    }

    SystemFingerprint fingerprint_for(const JobConfig &cfg, std::size_t run_count, bool sampled)
    {
        SystemFingerprint fp;
        fp.n = cfg.adversary.n;
        fp.f = cfg.adversary.f;
        fp.horizon = cfg.adversary.horizon;
        fp.protocol = cfg.protocol;
        std::string menu;
        for (const auto &m : cfg.adversary.byz_menu)
            menu += (menu.empty() ? "" : ",") + m;
        fp.menu = menu;
        fp.run_count = run_count;
        fp.twins = cfg.adversary.twins;
        fp.sampled = sampled;
        fp.delivery = std::string(cfg.adversary.delivery == DeliveryMode::ByHorizon
                                      ? "deliver-by-horizon"
                                      : "allow-loss") +
                      "/delay<=" + std::to_string(cfg.adversary.max_delay) +
                      (cfg.adversary.granularity == Granularity::Wave ? "/wave" : "/message");
        fp.seed = cfg.seed;
        return fp;
    }

    ProtocolSpec resolve_protocol(JobConfig &cfg)
    {
        if (!cfg.scenario.empty())
        {
            if (cfg.scenario == "remark12")
                cfg.adversary.scenario_runs = {remark12_scenario()};
            else
            {
                // otherwise the scenario is a trace file whose runs are prepended
                std::ifstream in(cfg.scenario, std::ios::binary);
                if (!in)
                    raise(ErrorKind::ConfigInvalid,
                          "scenario '" + cfg.scenario + "' is neither a known name nor a readable trace");
                std::ostringstream os;
                os << in.rdbuf();
                RunSet loaded = parse_trace(os.str());
                cfg.adversary.scenario_runs = std::move(loaded.runs);
            }
        }
        return protocol_by_name(cfg.protocol, cfg.adversary.f);
    }
} // namespace rebelfire
