#include "ddos/cli.hpp"

#include "ddos/alerting.hpp"
#include "ddos/calibration.hpp"
#include "ddos/detector.hpp"
#include "ddos/errors.hpp"
#include "ddos/flow_model.hpp"
#include "ddos/traffic_gen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace ddos {

namespace {

namespace fs = std::filesystem;

// Detector flags shared by calibrate/detect/report/evaluate. Unset flags fall
// back to the config file, then the profile (thresholds only), then defaults.
struct ConfigFlags {
    std::string config_file;
    std::string profile_file;
    std::optional<double> window_seconds;
    std::optional<std::string> features;
    std::optional<double> th1;
    std::optional<double> th2;
    std::optional<double> log_base;
    std::optional<std::size_t> block_order;
    std::optional<std::size_t> history;
    std::optional<std::string> combine;
    std::optional<unsigned> threads;
};

void add_config_flags(CLI::App* app, ConfigFlags& f, bool with_profile) {
    app->add_option("--config", f.config_file, "JSON config file; keys mirror the flags");
    if (with_profile) app->add_option("--profile", f.profile_file, "Calibrated profile supplying th1/th2");
    app->add_option("--window-seconds", f.window_seconds, "Window length T in seconds");
    app->add_option("--features", f.features, "Comma-separated features (SrcAddr,DstAddr,SrcPort,DstPort,FlowSize,InDegree)");
    app->add_option("--th1", f.th1, "Normalized-entropy threshold for suspicion");
    app->add_option("--th2", f.th2, "Entropy-rate threshold for confirmation");
    app->add_option("--log-base", f.log_base, "Logarithm base");
    app->add_option("--block-order", f.block_order, "Entropy-rate block order k");
    app->add_option("--history", f.history, "Confirmation history in windows");
    app->add_option("--combine", f.combine, "Feature vote: any | all");
    app->add_option("--threads", f.threads, "Stage-1 worker threads (0 = all cores)");
}

std::vector<FeatureKind> parse_feature_list(std::string_view text) {
    std::vector<FeatureKind> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto item = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) out.push_back(parse_feature(item));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("'" + path + "' is not valid JSON");
    return j;
}

struct ResolvedConfig {
    DetectorConfig detector;
    unsigned threads = 1;
    std::optional<double> target_fpr;
};

void apply_config_file(const nlohmann::json& j, ConfigFlags& file_flags, ResolvedConfig& rc, std::string& profile) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "window-seconds") file_flags.window_seconds = value.get<double>();
            else if (key == "features") {
                if (value.is_array()) {
                    std::string joined;
                    for (const auto& f : value) joined += f.get<std::string>() + ",";
                    file_flags.features = joined;
                } else {
                    file_flags.features = value.get<std::string>();
                }
            }
            else if (key == "th1") file_flags.th1 = value.get<double>();
            else if (key == "th2") file_flags.th2 = value.get<double>();
            else if (key == "log-base") file_flags.log_base = value.get<double>();
            else if (key == "block-order") file_flags.block_order = value.get<std::size_t>();
            else if (key == "history") file_flags.history = value.get<std::size_t>();
            else if (key == "combine") file_flags.combine = value.get<std::string>();
            else if (key == "threads") file_flags.threads = value.get<unsigned>();
            else if (key == "target-fpr") rc.target_fpr = value.get<double>();
            else if (key == "profile") profile = value.get<std::string>();
            else throw ConfigError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

void apply_flags(const ConfigFlags& f, DetectorConfig& d, unsigned& threads, bool thresholds) {
    if (f.window_seconds) d.window_duration = *f.window_seconds;
    if (f.features) d.features = parse_feature_list(*f.features);
    if (f.log_base) d.log_base = *f.log_base;
    if (f.block_order) d.block_order = *f.block_order;
    if (f.history) d.confirmation_history = *f.history;
    if (f.combine) d.combination = parse_combination(*f.combine);
    if (f.threads) threads = *f.threads;
    if (thresholds) {
        if (f.th1) d.th1 = *f.th1;
        if (f.th2) d.th2 = *f.th2;
    }
}

ResolvedConfig resolve(const ConfigFlags& cli) {
    ResolvedConfig rc;
    ConfigFlags file_flags;
    std::string profile = cli.profile_file;
    if (!cli.config_file.empty()) {
        std::string file_profile;
        apply_config_file(read_json_file(cli.config_file), file_flags, rc, file_profile);
        if (profile.empty()) profile = file_profile;
    }
    apply_flags(file_flags, rc.detector, rc.threads, false);
    apply_flags(cli, rc.detector, rc.threads, false);
    rc.detector.validate();

    // Thresholds: file < profile < command line.
    if (file_flags.th1) rc.detector.th1 = *file_flags.th1;
    if (file_flags.th2) rc.detector.th2 = *file_flags.th2;
    if (!profile.empty()) {
        const auto loaded = load_profile(read_json_file(profile), rc.detector);
        rc.detector.th1 = loaded.thresholds.th1;
        rc.detector.th2 = loaded.thresholds.th2;
    }
    if (cli.th1) rc.detector.th1 = *cli.th1;
    if (cli.th2) rc.detector.th2 = *cli.th2;
    rc.detector.validate();
    return rc;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<LabeledWindow> read_labels_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels '" + path + "'");
    return read_labels(in);
}

// --- generate -------------------------------------------------------------

struct GenerateArgs {
    std::string out_dir;
    std::uint64_t seed = 1;
    LegitParams legit;
    AttackParams attack;
    std::string victim = "203.0.113.10:80";
    std::string spoof = "fixed";
    bool no_attack = false;
    double window_seconds = 1.0;
    std::string format = "csv";
};

FlowKey parse_victim(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw ConfigError("victim must look like a.b.c.d:port");
    FlowKey key;
    key.dst_addr = parse_ipv4(text.substr(0, colon));
    int port = 0;
    try {
        port = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("victim port is not a number");
    }
    if (port < 0 || port > 65535) throw ConfigError("victim port out of range");
    key.dst_port = static_cast<std::uint16_t>(port);
    return key;
}

int run_generate(GenerateArgs& a, std::ostream& out) {
    const TraceFormat format = trace_format_from_string(a.format);
    const std::string ext = format == TraceFormat::Csv ? ".csv" : ".jsonl";
    fs::create_directories(a.out_dir);

    a.legit.seed = a.seed;
    a.attack.seed = a.seed + 1;
    a.attack.victim = parse_victim(a.victim);
    a.attack.spoof_mode = parse_spoof_mode(a.spoof);

    std::vector<TraceSegment> segments;
    segments.push_back({gen_legitimate(a.legit), std::nullopt});
    if (!a.no_attack)
        segments.push_back({gen_ddos(a.attack), std::make_pair(a.attack.start, a.attack.start + a.attack.duration)});
    const auto mixed = mix(segments, a.window_seconds);

    LegitParams baseline_params = a.legit;
    baseline_params.seed = a.seed + 2;
    const auto baseline = gen_legitimate(baseline_params);

    const std::string trace_path = (fs::path(a.out_dir) / ("trace" + ext)).string();
    const std::string baseline_path = (fs::path(a.out_dir) / ("baseline" + ext)).string();
    const std::string labels_path = (fs::path(a.out_dir) / "labels.jsonl").string();
    write_trace_file(trace_path, mixed.records);
    write_trace_file(baseline_path, baseline);
    {
        auto labels_out = open_out(labels_path);
        write_labels(labels_out, mixed.labels);
    }
    out << "trace    " << trace_path << " (" << mixed.records.size() << " records, " << mixed.labels.size()
        << " windows)\n"
        << "baseline " << baseline_path << " (" << baseline.size() << " records)\n"
        << "labels   " << labels_path << "\n";
    return kExitOk;
}

// --- calibrate ------------------------------------------------------------

int run_calibrate(const std::string& trace, std::optional<double> target_fpr, const ConfigFlags& flags,
                  const std::string& out_path, std::ostream& out) {
    auto rc = resolve(flags);
    const double fpr = target_fpr.value_or(rc.target_fpr.value_or(0.01));
    const auto records = read_trace_file(trace);
    const auto baseline = build_baseline(records, rc.detector);
    const auto thresholds = calibrate_thresholds(baseline, fpr, rc.detector.combination);
    rc.detector.th1 = thresholds.th1;
    rc.detector.th2 = thresholds.th2;
    write_file(out_path, profile_document(baseline, rc.detector, fpr, thresholds).dump(2) + "\n");
    out << "th1 " << thresholds.th1 << "\nth2 " << thresholds.th2 << "\nprofile " << out_path << "\n";
    return kExitOk;
}

// --- detect ---------------------------------------------------------------

int run_detect(const std::string& trace, const ConfigFlags& flags, const std::string& out_dir,
               const std::string& notify_path, std::ostream& out) {
    const auto rc = resolve(flags);
    const auto records = read_trace_file(trace);
    fs::create_directories(out_dir);

    auto alerts_out = open_out((fs::path(out_dir) / "alerts.jsonl").string());
    JsonlAlertLog log(alerts_out);

    std::ofstream notify_file;
    std::ostream* notify_stream = &out;
    if (notify_path != "-") {
        const std::string path = notify_path.empty() ? (fs::path(out_dir) / "notifications.txt").string() : notify_path;
        notify_file = open_out(path);
        notify_stream = &notify_file;
    }
    ClientNotifier notifier(*notify_stream);
    FanOutSink sink({&log, &notifier});

    const auto result = run_pipeline(records, rc.detector, sink, rc.threads);

    {
        auto verdicts_out = open_out((fs::path(out_dir) / "verdicts.jsonl").string());
        for (const auto& v : result.verdicts) verdicts_out << verdict_to_json_line(v) << '\n';
        verdicts_out.flush();
        if (!verdicts_out) throw IoError("verdict write failed");
    }
    const auto report = build_advisory_report(result.verdicts, rc.detector, trace);
    write_file((fs::path(out_dir) / "report.json").string(), advisory_report_to_json(report));
    if (notify_file.is_open()) {
        notify_file.flush();
        if (!notify_file) throw IoError("client notification write failed");
    }

    const auto& s = result.summary;
    out << "windows " << s.windows << " suspected " << s.suspected << " attacked " << s.attacked
        << " discarded_packets " << s.discarded_packets << "\n";
    return s.attacked > 0 ? kExitAttacks : kExitOk;
}

// --- report ---------------------------------------------------------------

int run_report(const std::string& verdicts_path, const std::string& trace, const ConfigFlags& flags,
               const std::string& out_path, std::ostream& out) {
    const auto rc = resolve(flags);
    std::ifstream in(verdicts_path);
    if (!in) throw IoError("cannot open verdicts '" + verdicts_path + "'");
    const auto verdicts = read_verdicts(in);
    const auto doc = advisory_report_to_json(build_advisory_report(verdicts, rc.detector, trace));
    if (out_path.empty() || out_path == "-")
        out << doc;
    else
        write_file(out_path, doc);
    return kExitOk;
}

// --- evaluate -------------------------------------------------------------

int run_evaluate(const std::string& trace, const std::string& labels_path, const ConfigFlags& flags,
                 const std::string& out_path, std::ostream& out) {
    const auto rc = resolve(flags);
    const auto records = read_trace_file(trace);
    const auto labels = read_labels_file(labels_path);
    const auto ev = evaluate(records, labels, rc.detector, rc.threads);
    const auto doc = metrics_to_json(ev.metrics).dump(2) + "\n";
    if (out_path.empty() || out_path == "-")
        out << doc;
    else
        write_file(out_path, doc);
    return kExitOk;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-stage entropy DDoS detector", "ddosctl"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a seeded synthetic trace, baseline and labels");
    generate->add_option("--out", gen.out_dir, "Output directory")->required();
    generate->add_option("--seed", gen.seed, "Base seed");
    generate->add_option("--sources", gen.legit.n_sources, "Legitimate source pool size");
    generate->add_option("--destinations", gen.legit.n_destinations, "Legitimate destination pool size");
    generate->add_option("--rate", gen.legit.records_per_second, "Legitimate records per second");
    generate->add_option("--duration", gen.legit.duration, "Trace length in seconds");
    generate->add_option("--skew", gen.legit.source_skew, "Zipf exponent of source popularity");
    generate->add_option("--bots", gen.attack.n_bots, "Bot pool size");
    generate->add_option("--attack-rate", gen.attack.records_per_second, "Attack records per second");
    generate->add_option("--attack-start", gen.attack.start, "Attack start (seconds)");
    generate->add_option("--attack-duration", gen.attack.duration, "Attack duration (seconds)");
    generate->add_option("--spoof", gen.spoof, "fixed | random");
    generate->add_option("--victim", gen.victim, "Victim flow a.b.c.d:port");
    generate->add_flag("--no-attack", gen.no_attack, "Background traffic only");
    generate->add_option("--window-seconds", gen.window_seconds, "Window length used for labels");
    generate->add_option("--format", gen.format, "csv | jsonl");

    ConfigFlags cal_flags;
    std::string cal_trace, cal_out;
    std::optional<double> cal_fpr;
    auto* calibrate = app.add_subcommand("calibrate", "Derive th1/th2 from attack-free traffic");
    calibrate->add_option("--trace", cal_trace, "Attack-free trace")->required();
    calibrate->add_option("--target-fpr", cal_fpr, "Target false-positive rate (default 0.01)");
    calibrate->add_option("--out", cal_out, "Profile JSON to write")->required();
    add_config_flags(calibrate, cal_flags, false);

    ConfigFlags det_flags;
    std::string det_trace, det_out, det_notify;
    auto* detect = app.add_subcommand("detect", "Run the two-stage detector over a trace");
    detect->add_option("--trace", det_trace, "Trace to analyse")->required();
    detect->add_option("--out", det_out, "Output directory")->required();
    detect->add_option("--notify", det_notify, "Client notification file ('-' for stdout)");
    add_config_flags(detect, det_flags, true);

    ConfigFlags rep_flags;
    std::string rep_verdicts, rep_trace, rep_out;
    auto* report = app.add_subcommand("report", "Rebuild the advisory report from verdict JSONL");
    report->add_option("--verdicts", rep_verdicts, "Verdict JSONL")->required();
    report->add_option("--trace", rep_trace, "Trace identity recorded in the report")->required();
    report->add_option("--out", rep_out, "Report JSON to write (default stdout)");
    add_config_flags(report, rep_flags, true);

    ConfigFlags ev_flags;
    std::string ev_trace, ev_labels, ev_out;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score detector verdicts against window labels");
    evaluate_cmd->add_option("--trace", ev_trace, "Labeled trace")->required();
    evaluate_cmd->add_option("--labels", ev_labels, "Labels JSONL")->required();
    evaluate_cmd->add_option("--out", ev_out, "Metrics JSON to write (default stdout)");
    add_config_flags(evaluate_cmd, ev_flags, true);

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.emplace_back("ddosctl");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*generate) return run_generate(gen, out);
        if (*calibrate) return run_calibrate(cal_trace, cal_fpr, cal_flags, cal_out, out);
        if (*detect) return run_detect(det_trace, det_flags, det_out, det_notify, out);
        if (*report) return run_report(rep_verdicts, rep_trace, rep_flags, rep_out, out);
        if (*evaluate_cmd) return run_evaluate(ev_trace, ev_labels, ev_flags, ev_out, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

} // namespace ddos
