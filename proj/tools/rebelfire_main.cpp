#include "rebelfire/checker.hpp"
#include "rebelfire/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace rebelfire;
namespace fs = std::filesystem;

namespace
{
    std::string read_file(const fs::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            raise(ErrorKind::ArtifactCorrupt, "cannot read " + path.string());
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    }

    void write_file(const fs::path &path, const std::string &content)
    {
        if (path.has_parent_path())
            fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out)
            raise(ErrorKind::ConfigInvalid, "cannot write " + path.string());
        out << content;
    }

    struct CommonOpts
    {
        std::string config_path;
        std::string preset;
        std::uint64_t seed = 0;
        bool seed_set = false;
        int horizon = 0;
        std::uint64_t max_runs = 0;
    };

    JobConfig load_config(const CommonOpts &opts)
    {
        if (opts.config_path.empty() == opts.preset.empty())
            raise(ErrorKind::ConfigInvalid, "exactly one of --config or --preset is required");
        JobConfig cfg = parse_job_config(opts.config_path.empty() ? preset_text(opts.preset)
                                                                  : read_file(opts.config_path));
        if (opts.seed_set)
            cfg.seed = opts.seed;
        if (opts.horizon > 0)
            cfg.adversary.horizon = opts.horizon;
        if (opts.max_runs > 0)
            cfg.adversary.max_runs = opts.max_runs;
        return cfg;
    }

    nlohmann::json logs_to_json(const std::vector<ChoiceLog> &logs)
    {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto &log : logs)
        {
            nlohmann::json one = nlohmann::json::array();
            for (const auto &c : log.choices)
                one.push_back({{"label", c.label}, {"chosen", c.chosen}, {"options", c.options}});
            arr.push_back(one);
        }
        return arr;
    }

    std::vector<ChoiceLog> logs_from_json(const nlohmann::json &arr)
    {
        std::vector<ChoiceLog> logs;
        for (const auto &one : arr)
        {
            ChoiceLog log;
            for (const auto &c : one)
                log.choices.push_back(
                    Choice{c.at("label").get<std::string>(), c.at("chosen").get<int>(),
                           c.at("options").get<int>()});
            logs.push_back(std::move(log));
        }
        return logs;
    }

    nlohmann::json fingerprint_to_json(const SystemFingerprint &fp, const EnumerationResult &res,
                                       const JobConfig &cfg)
    {
        nlohmann::json j;
        j["schema"] = "rebelfire-artifact/1";
        j["n"] = fp.n;
        j["f"] = fp.f;
        j["horizon"] = fp.horizon;
        j["protocol"] = fp.protocol;
        j["menu"] = fp.menu;
        j["runs"] = fp.run_count;
        j["twins"] = fp.twins;
        j["sampled"] = fp.sampled;
        j["delivery"] = fp.delivery;
        j["seed"] = fp.seed;
        j["cap_exceeded"] = res.cap_exceeded;
        j["explored"] = res.explored;
        j["config"] = nlohmann::json::parse(job_config_to_json(cfg));
        return j;
    }

    SystemFingerprint fingerprint_from_json(const nlohmann::json &j)
    {
        SystemFingerprint fp;
        fp.n = j.at("n").get<int>();
        fp.f = j.at("f").get<int>();
        fp.horizon = j.at("horizon").get<int>();
        fp.protocol = j.at("protocol").get<std::string>();
        fp.menu = j.at("menu").get<std::string>();
        fp.run_count = j.at("runs").get<std::size_t>();
        fp.twins = j.at("twins").get<bool>();
        fp.sampled = j.at("sampled").get<bool>();
        fp.delivery = j.at("delivery").get<std::string>();
        fp.seed = j.at("seed").get<std::uint64_t>();
        return fp;
    }

    struct BuiltSystem
    {
        EnumerationResult res;
        SystemFingerprint fingerprint;
        JobConfig cfg;
    };

    BuiltSystem build_from_config(JobConfig cfg)
    {
        ProtocolSpec protocol = resolve_protocol(cfg);
        BuiltSystem out;
        out.res = cfg.sample_count > 0
                      ? sample_runs(protocol, cfg.adversary, cfg.seed, cfg.sample_count)
                      : enumerate_runs(protocol, cfg.adversary);
        out.fingerprint = fingerprint_for(cfg, out.res.set.runs.size(), cfg.sample_count > 0);
        out.cfg = std::move(cfg);
        return out;
    }

    std::vector<PropertyId> parse_property_list(const std::string &arg)
    {
        std::vector<PropertyId> out;
        std::istringstream is(arg);
        std::string tok;
        while (std::getline(is, tok, ','))
        {
            if (tok.empty())
                continue;
            auto id = property_by_name(tok);
            if (!id)
                raise(ErrorKind::ConfigInvalid, "unknown property '" + tok + "'");
            out.push_back(*id);
        }
        return out;
    }

    int cmd_enumerate(const CommonOpts &opts, const std::string &out_dir)
    {
        BuiltSystem b = build_from_config(load_config(opts));
        const fs::path dir(out_dir.empty() ? "artifact" : out_dir);
        write_file(dir / "trace.txt", serialize_trace(b.res.set));
        nlohmann::json choices;
        choices["schema"] = "rebelfire-choices/1";
        choices["logs"] = logs_to_json(b.res.logs);
        write_file(dir / "choices.json", choices.dump(2) + "\n");
        write_file(dir / "fingerprint.json",
                   fingerprint_to_json(b.fingerprint, b.res, b.cfg).dump(2) + "\n");
        std::cout << "wrote " << b.res.set.runs.size() << " runs to " << dir.string() << "\n";
        if (b.res.cap_exceeded)
        {
            std::cerr << "cap exceeded: output is a flagged partial enumeration ("
                      << b.res.set.runs.size() << " runs kept, " << b.res.explored
                      << " leaves explored)\n";
            return 3;
        }
        return 0;
    }

    struct LoadedSystem
    {
        RunSet set;
        SystemFingerprint fingerprint;
    };

    LoadedSystem load_artifact(const std::string &dir)
    {
        LoadedSystem out;
        out.set = parse_trace(read_file(fs::path(dir) / "trace.txt"));
        nlohmann::json j = nlohmann::json::parse(read_file(fs::path(dir) / "fingerprint.json"),
                                                 nullptr, false);
        if (j.is_discarded())
            raise(ErrorKind::ArtifactCorrupt, "fingerprint.json is not valid JSON");
        out.fingerprint = fingerprint_from_json(j);
        if (out.fingerprint.run_count != out.set.runs.size())
            raise(ErrorKind::ArtifactCorrupt, "fingerprint run count does not match the trace");
        return out;
    }

    int cmd_check(const CommonOpts &opts, const std::string &artifact, const std::string &properties,
                  const std::string &format, const std::string &out_file)
    {
        RunSet set;
        SystemFingerprint fp;
        std::string fmt = format;
        if (!artifact.empty())
        {
            LoadedSystem loaded = load_artifact(artifact);
            set = std::move(loaded.set);
            fp = loaded.fingerprint;
            if (fmt.empty())
                fmt = "text";
        }
        else
        {
            BuiltSystem b = build_from_config(load_config(opts));
            set = std::move(b.res.set);
            fp = b.fingerprint;
            if (fmt.empty())
                fmt = b.cfg.format;
        }
        InterpretedSystem sys = build_system(std::move(set));
        CheckSuite suite(sys, fp);
        auto reports = suite.run_all(properties.empty() ? std::vector<PropertyId>{}
                                                        : parse_property_list(properties));
        const std::string text = fmt == "json" ? reports_to_json(reports) : reports_to_text(reports);
        std::cout << text;
        if (!out_file.empty())
            write_file(out_file, fmt == "json" ? text : reports_to_json(reports));
        return any_violation(reports) ? 1 : 0;
    }

    int cmd_eval(const CommonOpts &opts, const std::string &artifact, const std::string &formula_text,
                 const std::string &point_arg)
    {
        Formula f = parse_formula(formula_text);
        RunSet set;
        if (!artifact.empty())
            set = load_artifact(artifact).set;
        else
            set = build_from_config(load_config(opts)).res.set;
        InterpretedSystem sys = build_system(std::move(set));

        if (!point_arg.empty())
        {
            const auto comma = point_arg.find(',');
            if (comma == std::string::npos)
                raise(ErrorKind::ConfigInvalid, "--point takes run,t");
            Point p{std::stoi(point_arg.substr(0, comma)), std::stoi(point_arg.substr(comma + 1))};
            if (p.run < 0 || p.run >= static_cast<int>(sys.runs().size()) || p.t < 0 ||
                p.t > sys.horizon())
                raise(ErrorKind::ConfigInvalid, "point outside the system");
            std::cout << (sys.eval(p, f) ? "true" : "false") << "\n";
            return sys.eval(p, f) ? 0 : 1;
        }

        const PointSet &ext = sys.extension(f);
        std::cout << "formula: " << print_formula(f) << "\n";
        std::cout << "true at " << ext.count() << " of " << sys.point_count() << " points\n";
        for (std::size_t r = 0; r < sys.runs().size(); ++r)
        {
            std::cout << "run " << r << ": ";
            for (Time t = 0; t <= sys.horizon(); ++t)
                std::cout << (ext.test(sys.index_of(Point{static_cast<int>(r), t})) ? '1' : '0');
            std::cout << "\n";
        }
        return 0;
    }

    int cmd_replay(const CommonOpts &opts, const std::string &choices_path, const std::string &out_dir)
    {
        JobConfig cfg = load_config(opts);
        ProtocolSpec protocol = resolve_protocol(cfg);
        nlohmann::json j = nlohmann::json::parse(read_file(choices_path), nullptr, false);
        if (j.is_discarded() || j.value("schema", "") != "rebelfire-choices/1")
            raise(ErrorKind::ArtifactCorrupt, "not a choices file");
        auto logs = logs_from_json(j.at("logs"));

        RunSet set;
        set.n = cfg.adversary.n;
        set.f = cfg.adversary.f;
        set.horizon = cfg.adversary.horizon;
        set.protocol = protocol.name;
        set.alphabet = protocol.alphabet;
        std::size_t replayed = 0, skipped = 0;
        for (const auto &log : logs)
        {
            const std::string &label = log.choices.empty() ? "" : log.choices.front().label;
            if (label.rfind("twin:", 0) == 0 || label.rfind("continuation:", 0) == 0)
            {
                ++skipped; // synthesized from other runs, not from a choice walk
                continue;
            }
            set.runs.push_back(replay(protocol, cfg.adversary, log));
            ++replayed;
        }
        std::cout << "replayed " << replayed << " runs (" << skipped << " synthesized skipped)\n";
        if (!out_dir.empty())
            write_file(fs::path(out_dir) / "trace.txt", serialize_trace(set));
        return 0;
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Bounded-model epistemic checker for byzantine firing protocols"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out, artifact, properties, format, formula_text, point_arg, choices_path;

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--config", opts.config_path, "job config JSON file");
        cmd->add_option("--preset", opts.preset, "built-in preset name");
        cmd->add_option("--seed", opts.seed, "seed override")->each([&](const std::string &) {
            opts.seed_set = true;
        });
        cmd->add_option("--horizon", opts.horizon, "horizon override");
        cmd->add_option("--max-runs", opts.max_runs, "run cap override");
    };

    CLI::App *enumerate = app.add_subcommand("enumerate", "explore runs and write an artifact");
    add_common(enumerate);
    enumerate->add_option("--out", out, "artifact directory (default: artifact)");

    CLI::App *check = app.add_subcommand("check", "verify properties of a system");
    add_common(check);
    check->add_option("--artifact", artifact, "artifact directory from enumerate");
    check->add_option("--properties", properties, "comma-separated property filter");
    check->add_option("--format", format, "text | json");
    check->add_option("--out", out, "also write the machine-readable report here");

    CLI::App *eval = app.add_subcommand("eval", "evaluate a formula over a system");
    add_common(eval);
    eval->add_option("--artifact", artifact, "artifact directory from enumerate");
    eval->add_option("--formula", formula_text, "formula text")->required();
    eval->add_option("--point", point_arg, "evaluate at one point: run,t");

    CLI::App *replay_cmd = app.add_subcommand("replay", "re-simulate runs from choice logs");
    add_common(replay_cmd);
    replay_cmd->add_option("--choices", choices_path, "choices.json from enumerate")->required();
    replay_cmd->add_option("--out", out, "directory for the replayed trace");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (enumerate->parsed())
            return cmd_enumerate(opts, out);
        if (check->parsed())
            return cmd_check(opts, artifact, properties, format, out);
        if (eval->parsed())
            return cmd_eval(opts, artifact, formula_text, point_arg);
        if (replay_cmd->parsed())
            return cmd_replay(opts, choices_path, out);
    }
    catch (const Error &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
