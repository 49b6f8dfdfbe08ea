#include "fluidrank/cli.hpp"

#include "fluidrank/error.hpp"
#include "fluidrank/gate_circuit.hpp"
#include "fluidrank/info_rank.hpp"
#include "fluidrank/lowering.hpp"
#include "fluidrank/netlist_io.hpp"
#include "fluidrank/service.hpp"
#include "fluidrank/simulator.hpp"
#include "fluidrank/study.hpp"
#include "fluidrank/timeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fluidrank {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    out << text;
}

// Either stdout or the --out file.
void emit(std::ostream& out, const std::string& path, const std::string& text) {
    if (path.empty()) out << text;
    else write_text(path, text);
}

std::vector<int> parse_int_list(const std::string& text, const std::string& flag) {
    std::vector<int> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError(flag, "expected comma-separated integers, e.g. 3,1 (got '" + text + "')");
        }
    }
    if (values.empty()) throw CLI::ValidationError(flag, "expected comma-separated integers, e.g. 3,1");
    return values;
}

Bits parse_bits(const std::string& text) {
    Bits bits;
    for (char c : text) {
        if (c != '0' && c != '1') throw CLI::ValidationError("--code", "expected a bit string such as 101 (got '" + text + "')");
        bits.push_back(c == '1');
    }
    if (bits.empty()) throw CLI::ValidationError("--code", "expected a bit string such as 101");
    return bits;
}

std::vector<Modality> load_modalities(const std::string& path) {
    return path.empty() ? default_modalities() : load_catalog(path);
}

TaskSpec resolve_task(const std::string& spec) {
    if (spec == "search" || spec == "assembly") return find_builtin_task(spec);
    if (fs::exists(spec)) return task_from_json(read_json_file(spec));
    throw Error(ErrorCode::InvalidArgument, "unknown task '" + spec + "' (expected search, assembly or a task file)");
}

struct Options {
    // shared
    std::string out;
    std::string modalities;
    std::string store;
    std::uint64_t seed = 1;
    bool seed_given = false;
    // synth / lower
    int inputs = 0;
    std::string truth_table;
    std::string circuit;
    double supply = kLogicHighKpa;
    // simulate
    std::string netlist;
    std::string code;
    std::string schedule;
    double duration = 3.0;
    double dt = 1e-3;
    double loss = 1.0;
    // preview
    std::string config_id;
    std::string task = "search";
    std::string theta;
    double window = 3.0;
    bool as_json = false;
    // rank
    std::string prefs;
    bool quiet = false;
    // study
    std::string study_config;
    std::string verify;
    // serve
    std::string host = "127.0.0.1";
    int port = 8080;
};

int run_synth(const Options& o, std::ostream& out) {
    if (o.truth_table.empty() == (o.inputs == 0)) {
        throw CLI::ValidationError("--inputs", "give exactly one of --inputs N or --truth-table FILE");
    }
    const auto circuit = o.truth_table.empty() ? synth_demux(o.inputs)
                                               : synthesize(truth_table_from_json(read_json_file(o.truth_table)));
    emit(out, o.out, to_json(circuit).dump(2) + "\n");
    return kExitOk;
}

int run_lower(const Options& o, std::ostream& out) {
    if (o.circuit.empty() == (o.inputs == 0)) {
        throw CLI::ValidationError("--circuit", "give exactly one of --circuit FILE or --demux N");
    }
    const auto circuit = o.circuit.empty() ? synth_demux(o.inputs) : gate_circuit_from_json(read_json_file(o.circuit));
    const auto netlist = compile_to_netlist(circuit, default_valve_params(), Pressure{o.supply});
    emit(out, o.out, to_json(netlist).dump(2) + "\n");
    return kExitOk;
}

int run_simulate(const Options& o, std::ostream& out) {
    const auto netlist = netlist_from_json(read_json_file(o.netlist));
    SimConfig cfg;
    cfg.duration = o.duration;
    cfg.dt = o.dt;
    cfg.loss_multiplier = o.loss;
    Schedule schedule;
    if (!o.schedule.empty()) schedule = schedule_from_json(read_json_file(o.schedule));
    if (!o.code.empty()) schedule = code_schedule(netlist, parse_bits(o.code));
    const auto trace = simulate(netlist, schedule, cfg);
    std::ostringstream csv;
    write_trace_csv(trace, csv);
    emit(out, o.out, csv.str());
    return kExitOk;
}

int run_preview(const Options& o, std::ostream& out) {
    const auto catalog = ServiceCatalog::from_modalities(load_modalities(o.modalities));
    const auto task = resolve_task(o.task);
    const auto& config = find_configuration(catalog.configurations, o.config_id);
    const auto values = parse_int_list(o.theta, "--theta");
    if (values.size() != task.axes.size()) {
        throw CLI::ValidationError("--theta", "expected " + std::to_string(task.axes.size()) + " values for task '" +
                                                  task.id + "'");
    }
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (values[j] < 0 || values[j] >= task.axes[j]) {
            throw Error(ErrorCode::InvalidArgument, "theta value " + std::to_string(values[j]) + " is outside axis " +
                                                        std::to_string(j) + " (0.." + std::to_string(task.axes[j] - 1) + ")");
        }
    }
    const auto theta = task.flatten(values);
    if (o.as_json) {
        emit(out, o.out, preview_json(config, task, theta, o.window, o.dt).dump(2) + "\n");
    } else {
        RenderOptions options;
        options.dt = o.dt;
        const auto tl = render_timeline(config, nearest_signal(config, task, theta), o.window, options);
        std::ostringstream csv;
        write_timeline_csv(tl, csv);
        emit(out, o.out, csv.str());
    }
    return kExitOk;
}

int run_rank(const Options& o, std::ostream& out, std::ostream& err) {
    const auto catalog = ServiceCatalog::from_modalities(load_modalities(o.modalities));
    const auto task = resolve_task(o.task);
    const auto profile = profile_from_json(read_json_file(o.prefs));
    const auto payload = ranking_payload(catalog, task, profile);
    out << payload;
    if (!o.out.empty()) write_text((fs::path(o.out) / "ranking.json").string(), payload);
    if (!o.quiet) {
        require_preferences(catalog, profile);
        err << format_ranking_table(rank_configurations(catalog.configurations, task, profile));
    }
    return kExitOk;
}

int run_study_cmd(const Options& o, std::ostream& out, std::ostream& err) {
    RunStore store(o.store.empty() ? RunStore::default_root() : fs::path(o.store));
    if (!o.verify.empty()) {
        const auto problem = verify_study_run(store, o.verify);
        if (!problem.empty()) {
            err << "verify " << o.verify << ": " << problem << "\n";
            return kExitDomain;
        }
        out << "verify " << o.verify << ": report reproduced byte for byte\n";
        return kExitOk;
    }
    if (o.study_config.empty()) throw CLI::ValidationError("--config", "give --config FILE or --verify RUN_ID");
    const auto modalities = load_modalities(o.modalities);
    auto doc = read_json_file(o.study_config);
    if (o.seed_given) {
        if (!doc.is_object()) throw Error(ErrorCode::ParseError, o.study_config + ": expected an object");
        doc["seed"] = o.seed;
    }
    const auto sc = study_config_from_json(doc, modalities);
    const auto report = run_study(sc, enumerate_configurations(modalities, 2));
    const auto report_text = to_json(report).dump(2) + "\n";
    std::ostringstream csv;
    if (sc.record_trials) write_trials_csv(csv, report);

    const auto id = store.create_run("study", json{{"config", to_json(sc)}, {"catalog", catalog_to_json(modalities)}});
    if (sc.record_trials) store.write_output(id, "trials.csv", csv.str());
    store.write_output(id, "report.json", report_text);
    if (!o.out.empty()) {
        write_text((fs::path(o.out) / "report.json").string(), report_text);
        if (sc.record_trials) write_text((fs::path(o.out) / "trials.csv").string(), csv.str());
        write_text((fs::path(o.out) / "manifest.json").string(), store.manifest(id)->dump(2) + "\n");
    }
    out << json{{"run_id", id}, {"store", store.root().string()}, {"summary", to_json(report)["summary"]}}.dump(2) << "\n";
    return kExitOk;
}

int run_serve(const Options& o, std::ostream& out) {
    auto store = std::make_shared<RunStore>(o.store.empty() ? RunStore::default_root() : fs::path(o.store));
    Api api(ServiceCatalog::from_modalities(load_modalities(o.modalities)), store);
    HttpServer server(api);
    const int port = server.bind(o.host, o.port);
    if (port < 0) throw Error(ErrorCode::InvalidArgument, "cannot bind " + o.host + ":" + std::to_string(o.port));
    out << "listening on http://" << o.host << ":" << port << " (store " << store->root().string() << ")" << std::endl;
    server.serve();
    return kExitOk;
}

} // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fluidic logic compiler, pneumatic simulator and haptic configuration ranking", "fluidrank"};
    app.require_subcommand(1);
    Options o;

    auto* synth = app.add_subcommand("synth", "Synthesize a gate circuit from a truth table or a demux width");
    synth->add_option("--inputs", o.inputs, "Demultiplexer width (2-4)");
    synth->add_option("--truth-table", o.truth_table, "Truth table JSON file")->check(CLI::ExistingFile);
    synth->add_option("--out", o.out, "Write the circuit JSON here instead of stdout");

    auto* lower = app.add_subcommand("lower", "Lower a gate circuit to a valve netlist");
    lower->add_option("--circuit", o.circuit, "Gate circuit JSON file")->check(CLI::ExistingFile);
    lower->add_option("--demux", o.inputs, "Lower the demultiplexer of this width instead");
    lower->add_option("--supply", o.supply, "Logic supply pressure in kPa")->capture_default_str();
    lower->add_option("--out", o.out, "Write the netlist JSON here instead of stdout");

    auto* sim = app.add_subcommand("simulate", "Simulate a netlist and write the trace as CSV");
    sim->add_option("--netlist", o.netlist, "Netlist JSON file")->required()->check(CLI::ExistingFile);
    sim->add_option("--code", o.code, "Input code, MSB first, e.g. 101");
    sim->add_option("--schedule", o.schedule, "Source schedule JSON file")->check(CLI::ExistingFile);
    sim->add_option("--duration", o.duration, "Simulated seconds")->capture_default_str();
    sim->add_option("--dt", o.dt, "Time step in seconds")->capture_default_str();
    sim->add_option("--loss", o.loss, "Loss multiplier on every valve channel")->capture_default_str();
    sim->add_option("--out", o.out, "Write the CSV here instead of stdout");

    auto* preview = app.add_subcommand("preview", "Render the pressure timeline of one task value");
    preview->add_option("--config", o.config_id, "Configuration id, e.g. PF")->required();
    preview->add_option("--task", o.task, "search, assembly or a task JSON file")->capture_default_str();
    preview->add_option("--theta", o.theta, "Task value per axis, e.g. 3,1")->required();
    preview->add_option("--window", o.window, "Seconds per channel window")->capture_default_str();
    preview->add_option("--dt", o.dt, "Sample spacing in seconds")->capture_default_str();
    preview->add_option("--modalities", o.modalities, "Modality catalog JSON file")->check(CLI::ExistingFile);
    preview->add_flag("--json", o.as_json, "Emit the JSON preview payload instead of CSV");
    preview->add_option("--out", o.out, "Write here instead of stdout");

    auto* rank = app.add_subcommand("rank", "Rank configurations for a preference profile");
    rank->add_option("--prefs", o.prefs, "Preference JSON file")->required()->check(CLI::ExistingFile);
    rank->add_option("--task", o.task, "search, assembly or a task JSON file")->capture_default_str();
    rank->add_option("--modalities", o.modalities, "Modality catalog JSON file")->check(CLI::ExistingFile);
    rank->add_option("--seed", o.seed, "Accepted for uniformity; ranking is deterministic");
    rank->add_option("--out", o.out, "Also write ranking.json into this directory");
    rank->add_flag("--quiet", o.quiet, "Skip the table on stderr");

    auto* study = app.add_subcommand("study", "Run a simulated user study");
    study->add_option("--config", o.study_config, "Study config JSON file")->check(CLI::ExistingFile);
    study->add_option("--seed", o.seed, "Master seed (overrides the config)");
    study->add_option("--modalities", o.modalities, "Modality catalog JSON file")->check(CLI::ExistingFile);
    study->add_option("--out", o.out, "Also copy report.json, trials.csv and manifest.json here");
    study->add_option("--store", o.store, "Run store directory (default $FLUIDRANK_STORE or ./runs)");
    study->add_option("--verify", o.verify, "Rerun a stored study from its manifest and compare");

    auto* serve = app.add_subcommand("serve", "Start the HTTP/JSON service");
    serve->add_option("--port", o.port, "TCP port")->capture_default_str();
    serve->add_option("--host", o.host, "Bind address")->capture_default_str();
    serve->add_option("--store", o.store, "Run store directory (default $FLUIDRANK_STORE or ./runs)");
    serve->add_option("--modalities", o.modalities, "Modality catalog JSON file")->check(CLI::ExistingFile);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        o.seed_given = study->count("--seed") > 0;
        if (*synth) return run_synth(o, out);
        if (*lower) return run_lower(o, out);
        if (*sim) return run_simulate(o, out);
        if (*preview) return run_preview(o, out);
        if (*rank) return run_rank(o, out, err);
        if (*study) return run_study_cmd(o, out, err);
        if (*serve) return run_serve(o, out);
        return kExitUsage;
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::Error& e) {
        err << "usage error: " << e.what() << "\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    } catch (const FieldError& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return kExitDomain;
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

} // namespace fluidrank
