// hux: scenario runner, oracle inspector, and contextual-memory tooling.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hux/config.hpp"
#include "hux/memory.hpp"
#include "hux/scenario.hpp"
#include "hux/sim.hpp"
#include "hux/tasks.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitBackend = 3;
constexpr int kExitStore = 4;

hux::Config load_config_or_default(const std::optional<std::string>& path) {
    if (path) return hux::load_config(*path);
    return hux::Config{};
}

hux::ToolRegistry load_registry(const hux::ScenarioScript& script, const std::string& scenario_path,
                                const hux::Config& config) {
    if (script.registry_path) {
        fs::path p = *script.registry_path;
        if (p.is_relative()) p = fs::path(scenario_path).parent_path() / p;
        return hux::ToolRegistry::load(p.string());
    }
    if (config.registry_path) return hux::ToolRegistry::load(*config.registry_path);
    return {};
}

int cmd_run(const std::string& scenario_path, const std::optional<std::string>& config_path,
            const std::optional<std::string>& policy_flag,
            const std::optional<std::int64_t>& latency_flag,
            const std::optional<std::string>& out_dir_flag) {
    const hux::Config config = load_config_or_default(config_path);
    hux::ScenarioScript script = hux::load_scenario(scenario_path);
    const hux::ToolRegistry registry = load_registry(script, scenario_path, config);
    hux::resolve_profile(script, registry);

    hux::SimOptions options;
    options.fallback_policy = config.default_policy;
    options.fallback_latency_ms = config.default_caption_latency_ms;
    if (policy_flag) {
        if (*policy_flag == "naive") options.policy_override = hux::CaptionPolicy::naive;
        else if (*policy_flag == "hybrid") options.policy_override = hux::CaptionPolicy::hybrid;
        else throw hux::ScenarioError(0, "unknown --policy '" + *policy_flag + "'");
    }
    if (latency_flag) {
        if (*latency_flag < 0) throw hux::ScenarioError(0, "--latency-ms must be >= 0");
        options.latency_override = *latency_flag;
    }

    auto backend = hux::make_backend(config.backend);
    const hux::RunReport report = hux::run_scenario(script, *backend, registry, options);

    const fs::path out_dir = out_dir_flag ? fs::path(*out_dir_flag) : fs::path(config.reports_dir);
    fs::create_directories(out_dir);
    const fs::path json_path = out_dir / (report.scenario_name + ".report.json");
    const fs::path text_path = out_dir / (report.scenario_name + ".transcript.txt");
    {
        std::ofstream out(json_path, std::ios::trunc);
        out << hux::report_to_json(report).dump(2) << '\n';
        if (!out) throw hux::PersistenceFailure("cannot write " + json_path.string());
    }
    {
        std::ofstream out(text_path, std::ios::trunc);
        out << hux::report_to_text(report);
        if (!out) throw hux::PersistenceFailure("cannot write " + text_path.string());
    }

    const auto& m = report.metrics;
    std::cout << "wrote " << json_path.string() << " and " << text_path.string() << "\n"
              << "turns=" << report.transcript.size() << " events_detected=" << m.events_detected
              << " events_true=" << m.events_true << " captions_issued=" << m.captions_issued
              << " count_only=" << m.count_only_events << " liou_dropped=" << m.liou_dropped
              << " oracle_count_mismatches=" << m.oracle_count_mismatches << "\n";
    return kExitOk;
}

int cmd_oracle(const std::string& scenario_path, const std::optional<std::string>& config_path) {
    const hux::Config config = load_config_or_default(config_path);
    hux::ScenarioScript script = hux::load_scenario(scenario_path);
    hux::resolve_profile(script, load_registry(script, scenario_path, config));
    const hux::OracleOutput out = hux::oracle(script);

    std::cout << "scenario: " << out.scenario_name << "\n";
    std::cout << "true events: " << out.true_events.size() << "\n";
    for (const auto& e : out.true_events) {
        std::cout << "  frame " << e.frame_id << " @" << e.timestamp_ms << "ms";
        for (const auto& [cat, change] : e.count_deltas) {
            if (change.before != change.after)
                std::cout << " " << cat << ":" << change.before << "->" << change.after;
        }
        std::cout << "\n";
    }
    std::cout << "counts timeline:\n";
    for (const auto& point : out.timeline) {
        std::cout << "  frame " << point.frame_id << " @" << point.timestamp_ms << "ms";
        if (point.counts.empty()) std::cout << " (empty)";
        for (const auto& [cat, n] : point.counts) std::cout << " " << cat << "=" << n;
        std::cout << "\n";
    }
    return kExitOk;
}

int cmd_report(const std::string& report_path) {
    std::ifstream in(report_path);
    if (!in) throw hux::ScenarioError(0, "cannot open report file: " + report_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw hux::ScenarioError(0, "malformed report: " + std::string(e.what()));
    }
    std::cout << "scenario: " << doc.value("scenario", "?") << " (policy="
              << doc.value("policy", "?") << ", caption_latency_ms="
              << doc.value("caption_latency_ms", 0) << ")\n";
    for (const auto& t : doc.value("transcript", nlohmann::json::array())) {
        std::cout << "turn " << t.value("turn", 0) << " @" << t.value("release_ts_ms", 0) << "ms";
        if (t.contains("tool_used")) std::cout << " [tool: " << t["tool_used"].get<std::string>() << "]";
        if (t.value("roi_status", "ok") != "ok") std::cout << " [roi: " << t["roi_status"].get<std::string>() << "]";
        std::cout << "\n  Human: " << t.value("utterance", "") << "\n  AI:    "
                  << t.value("answer", "") << "\n";
    }
    const auto m = doc.value("metrics", nlohmann::json::object());
    std::cout << "metrics: events_true=" << m.value("events_true", 0)
              << " events_detected=" << m.value("events_detected", 0)
              << " captions_issued=" << m.value("captions_issued", 0)
              << " count_only_events=" << m.value("count_only_events", 0)
              << " liou_dropped=" << m.value("liou_dropped", 0)
              << " oracle_count_mismatches=" << m.value("oracle_count_mismatches", 0) << "\n";
    return kExitOk;
}

int cmd_memory_add(const std::optional<std::string>& config_path,
                   const std::optional<std::string>& store_flag, const std::string& scene_image,
                   const std::string& ooi_image, const std::string& object_type,
                   const std::optional<std::string>& name, const std::string& user_context,
                   const std::string& location, const std::string& time,
                   const std::string& device) {
    const hux::Config config = load_config_or_default(config_path);
    const std::string store_path = store_flag.value_or(config.store_path);

    hux::MemoryStore store = hux::MemoryStore::load(store_path);
    auto backend = hux::make_backend(config.backend);

    hux::FrameRecord scene;
    scene.image_ref = scene_image;
    hux::RoiCrop roi;
    roi.image_ref = ooi_image;

    const hux::MemoryRecord& record =
        hux::create_memory(scene, roi, object_type, name, user_context,
                           {location, time, device}, *backend, store);
    std::cout << record.record_id << "\n";
    return kExitOk;
}

int cmd_memory_query(const std::optional<std::string>& config_path,
                     const std::optional<std::string>& store_flag, const std::string& query) {
    if (query.empty()) {
        std::cerr << "error: query must be non-empty\n";
        return kExitValidation;
    }
    const hux::Config config = load_config_or_default(config_path);
    const std::string store_path = store_flag.value_or(config.store_path);

    const hux::MemoryStore store = hux::MemoryStore::load(store_path);
    for (const auto& hit : store.retrieve(query)) {
        const hux::MemoryRecord* record = nullptr;
        for (const auto& r : store.records())
            if (r.record_id == hit.record_id) record = &r;
        std::cout << hit.record_id << "\t" << hit.score << "\t"
                  << (record && record->name ? *record->name : "") << "\t";
        for (std::size_t i = 0; i < hit.matched_keywords.size(); ++i)
            std::cout << (i ? ", " : "") << hit.matched_keywords[i];
        std::cout << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hux: event-driven multimodal context pipeline"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    app.add_option("--config", config_path, "Path to a JSON config file");

    // run
    auto* run = app.add_subcommand(
        "run",
        "Run a scenario and write report files. Setting precedence: "
        "flags > scenario header > config file > built-in defaults.");
    std::string run_scenario_path;
    std::optional<std::string> run_policy;
    std::optional<std::int64_t> run_latency;
    std::optional<std::string> run_out_dir;
    run->add_option("scenario", run_scenario_path, "Scenario file (.scn)")->required();
    run->add_option("--policy", run_policy, "Caption policy override: naive or hybrid");
    run->add_option("--latency-ms", run_latency, "Caption latency override in ms");
    run->add_option("--out-dir", run_out_dir, "Directory for report files");

    // oracle
    auto* orc = app.add_subcommand("oracle", "Print ground-truth events and counts for a scenario");
    std::string oracle_scenario_path;
    orc->add_option("scenario", oracle_scenario_path, "Scenario file (.scn)")->required();

    // report
    auto* rep = app.add_subcommand("report", "Render a saved report JSON as text");
    std::string report_path;
    rep->add_option("report", report_path, "Report JSON file")->required();

    // memory add | query
    auto* mem = app.add_subcommand("memory", "Contextual memory store operations");
    mem->require_subcommand(1);
    std::optional<std::string> mem_store;
    mem->add_option("--store", mem_store, "Memory store file (overrides config)");

    auto* mem_add = mem->add_subcommand("add", "Create and persist a memory record");
    std::string add_scene_image, add_ooi_image, add_object_type, add_user_context;
    std::optional<std::string> add_name;
    std::string add_location, add_time, add_device;
    mem_add->add_option("--scene-image", add_scene_image, "Scene image locator")->required();
    mem_add->add_option("--ooi-image", add_ooi_image, "Object-of-interest image locator")->required();
    mem_add->add_option("--object-type", add_object_type, "Object type, e.g. Person")->required();
    mem_add->add_option("--name", add_name, "Optional name for the object");
    mem_add->add_option("--user-context", add_user_context, "Spoken context")->required();
    mem_add->add_option("--location", add_location, "Capture location");
    mem_add->add_option("--time", add_time, "Capture time (ISO-8601 text)");
    mem_add->add_option("--device", add_device, "Capture device");

    auto* mem_query = mem->add_subcommand("query", "Rank stored memories against a query");
    std::string query_text;
    mem_query->add_option("query", query_text, "Query text")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) return cmd_run(run_scenario_path, config_path, run_policy, run_latency, run_out_dir);
        if (*orc) return cmd_oracle(oracle_scenario_path, config_path);
        if (*rep) return cmd_report(report_path);
        if (*mem_add)
            return cmd_memory_add(config_path, mem_store, add_scene_image, add_ooi_image,
                                  add_object_type, add_name, add_user_context, add_location,
                                  add_time, add_device);
        if (*mem_query) return cmd_memory_query(config_path, mem_store, query_text);
    } catch (const hux::ScenarioError& e) {
        if (e.line > 0) std::cerr << "error: line " << e.line << ": " << e.what() << "\n";
        else std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const hux::ConfigError& e) {
        std::cerr << "error: config" << (e.field.empty() ? "" : " field " + e.field) << ": "
                  << e.what() << "\n";
        return kExitValidation;
    } catch (const hux::EmptyQuery& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const hux::BackendUnavailable& e) {
        std::cerr << "error: backend: " << e.what() << "\n";
        return kExitBackend;
    } catch (const hux::UnresolvableImage& e) {
        std::cerr << "error: backend: " << e.what() << "\n";
        return kExitBackend;
    } catch (const hux::CorruptStore& e) {
        std::cerr << "error: store: " << e.what() << "\n";
        return kExitStore;
    } catch (const hux::PersistenceFailure& e) {
        std::cerr << "error: store: " << e.what() << "\n";
        return kExitStore;
    } catch (const hux::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
