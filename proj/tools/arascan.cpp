#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "arascan/fixtures/corpus.hpp"
#include "arascan/scanner.hpp"

namespace fs = std::filesystem;
using namespace arascan;

namespace {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel g_log_level = LogLevel::Warn;

void init_log_level()
{
    const char* env = std::getenv("ARASCAN_LOG");
    if (env == nullptr) {
        return;
    }
    std::string v = to_lower(env);
    if (v == "debug") g_log_level = LogLevel::Debug;
    else if (v == "info") g_log_level = LogLevel::Info;
    else if (v == "warn" || v == "warning") g_log_level = LogLevel::Warn;
    else if (v == "error") g_log_level = LogLevel::Error;
}

void log(LogLevel level, const std::string& msg)
{
    if (level < g_log_level) {
        return;
    }
    static const char* names[] = {"debug", "info", "warn", "error"};
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "arascan [" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

Bytes read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    return Bytes(s.begin(), s.end());
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

RulePack load_pack_file(const fs::path& path)
{
    Bytes bytes = read_file(path);
    return load_rulepack(bytes);
}

struct ScopeFlags {
    std::string force_scope;
    int cg_distance = 0;

    ScanOptions to_options() const
    {
        ScanOptions opts;
        if (!force_scope.empty()) {
            auto s = parse_scope(force_scope);
            if (!s) {
                throw std::runtime_error("bad scope '" + force_scope +
                                         "' (METHOD, CLASS, CG(d) or GLOBAL)");
            }
            opts.force_scope = *s;
        }
        if (cg_distance > 0) {
            opts.cg_distance = cg_distance;
        }
        return opts;
    }
};

std::vector<TraceEvent> load_trace_for(const fs::path& apk_path,
                                       const std::string& explicit_trace)
{
    fs::path trace_path;
    if (!explicit_trace.empty()) {
        trace_path = explicit_trace;
    } else {
        fs::path side = apk_path;
        side += ".trace";
        if (!fs::exists(side)) {
            return {};
        }
        trace_path = side;
    }
    log(LogLevel::Info, "loading trace " + trace_path.string());
    return load_trace(read_file(trace_path));
}

int cmd_scan(const std::string& apk, const std::string& rules,
             const std::string& trace, bool detail, const std::string& out,
             const ScopeFlags& scope_flags)
{
    RulePack pack = load_pack_file(rules);
    Bytes bytes = read_file(apk);
    auto events = load_trace_for(apk, trace);
    ScanResult r = scan_apk(bytes, fs::path(apk).filename().string(), pack,
                            scope_flags.to_options(), std::move(events));
    std::string doc = report_document(r, detail);
    if (out.empty()) {
        std::cout << doc;
    } else {
        write_text(out, doc);
    }
    for (const auto& w : r.detail.warnings) {
        log(LogLevel::Warn, w);
    }
    return r.had_warnings ? 1 : 0;
}

int cmd_batch(const std::string& dir, const std::string& rules, int jobs,
              bool recursive, const std::string& out_dir, const ScopeFlags& scope_flags)
{
    RulePack pack = load_pack_file(rules);
    ScanOptions opts = scope_flags.to_options();

    std::vector<fs::path> apks;
    auto consider = [&](const fs::path& p) {
        if (p.extension() == ".apk") {
            apks.push_back(p);
        }
    };
    if (recursive) {
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (e.is_regular_file()) {
                consider(e.path());
            }
        }
    } else {
        for (const auto& e : fs::directory_iterator(dir)) {
            if (e.is_regular_file()) {
                consider(e.path());
            }
        }
    }
    std::sort(apks.begin(), apks.end());
    if (apks.empty()) {
        throw EmptyCorpus("no .apk files in " + dir);
    }
    fs::create_directories(out_dir);

    struct Slot {
        std::optional<DetailReport> detail;
        std::string error;
    };
    std::vector<Slot> slots(apks.size());
    std::atomic<size_t> next{0};

    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= apks.size()) {
                return;
            }
            const fs::path& path = apks[i];
            try {
                Bytes bytes = read_file(path);
                auto events = load_trace_for(path, "");
                ScanResult r = scan_apk(bytes, path.filename().string(), pack, opts,
                                        std::move(events));
                std::string doc = report_document(r, true);
                fs::path out = fs::path(out_dir) / (path.stem().string() + ".report.json");
                write_text(out, doc);
                slots[i].detail = std::move(r.detail);
            } catch (const std::exception& e) {
                slots[i].error = e.what();
            } catch (...) {
                slots[i].error = "unknown failure";
            }
        }
    };
    size_t thread_count = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (size_t i = 0; i < thread_count; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }

    std::vector<DetailReport> reports;
    std::vector<std::pair<std::string, std::string>> failures;
    for (size_t i = 0; i < apks.size(); ++i) {
        if (slots[i].detail) {
            reports.push_back(std::move(*slots[i].detail));
        } else {
            failures.emplace_back(apks[i].filename().string(), slots[i].error);
            log(LogLevel::Error, apks[i].string() + ": " + slots[i].error);
        }
    }
    if (!reports.empty()) {
        CorpusStats stats = aggregate(reports);
        auto doc = report_json::stats_to_json(stats);
        auto failed = nlohmann::ordered_json::array();
        for (const auto& [file, error] : failures) {
            failed.push_back({{"file", file}, {"error", error}});
        }
        doc["failed"] = std::move(failed);
        write_text(fs::path(out_dir) / "corpus_stats.json", doc.dump(2) + "\n");
    }
    log(LogLevel::Info, "scanned " + std::to_string(reports.size()) + " of " +
                            std::to_string(apks.size()) + " APKs");
    return failures.empty() ? 0 : 1;
}

int cmd_rules_check(const std::string& rules)
{
    Bytes bytes = read_file(rules);
    RulePack pack;
    try {
        pack = parse_rulepack(bytes);
    } catch (const RulePackError& e) {
        std::cout << "error " << (e.path.empty() ? "document" : e.path) << ": "
                  << e.what() << "\n";
        return 2;
    }
    bool errors = false;
    for (const auto& d : validate_rulepack(pack)) {
        bool err = d.severity == Diagnostic::Severity::Error;
        errors = errors || err;
        std::cout << (err ? "error " : "warning ") << d.path << ": " << d.message << "\n";
    }
    std::cout << (errors ? "invalid" : "ok") << ": " << pack.atoms.size() << " atoms, "
              << pack.fingerprints.size() << " fingerprints, "
              << pack.covered_techniques().size() << "/32 techniques covered\n";
    return errors ? 2 : 0;
}

int cmd_fixtures_gen(const std::string& out_dir)
{
    auto manifest = fixtures::gen_corpus(out_dir);
    std::cout << "wrote " << manifest["fixtures"].size() << " fixtures to " << out_dir
              << "\n";
    return 0;
}

int cmd_report_aggregate(const std::string& dir, const std::string& out)
{
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().string().ends_with(".report.json")) {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<DetailReport> reports;
    for (const auto& f : files) {
        Bytes bytes = read_file(f);
        auto doc = nlohmann::json::parse(bytes.begin(), bytes.end());
        if (!doc.contains("detail")) {
            throw std::runtime_error(f.string() + " has no detail report; run batch " +
                                     "or scan --detail");
        }
        reports.push_back(detail_from_json(doc["detail"]));
    }
    CorpusStats stats = aggregate(reports);  // throws EmptyCorpus on none
    std::string text = to_json_text(stats);
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    init_log_level();
    CLI::App app{"Android anti-runtime-analysis scanner"};
    app.require_subcommand(1);

    std::string apk, rules, trace, out, dir;
    bool detail = false;
    bool recursive = false;
    int jobs = 1;
    ScopeFlags scope_flags;

    auto add_scope_flags = [&](CLI::App* cmd) {
        cmd->add_option("--force-scope", scope_flags.force_scope,
                        "override every fingerprint's scope (METHOD, CLASS, CG(d), GLOBAL)");
        cmd->add_option("--cg-distance", scope_flags.cg_distance,
                        "override the distance of CG(d) scopes");
    };

    CLI::App* scan_cmd = app.add_subcommand("scan", "scan one APK");
    scan_cmd->add_option("apk", apk, "APK file")->required();
    scan_cmd->add_option("--rules", rules, "rulepack file")->required();
    scan_cmd->add_option("--trace", trace, "recorded API-call trace file");
    scan_cmd->add_flag("--detail", detail, "include the 32-subcategory detail report");
    scan_cmd->add_option("--out", out, "output file (default stdout)");
    add_scope_flags(scan_cmd);

    CLI::App* batch_cmd = app.add_subcommand("batch", "scan a directory of APKs");
    batch_cmd->add_option("dir", dir, "directory of .apk files")->required();
    batch_cmd->add_option("--rules", rules, "rulepack file")->required();
    batch_cmd->add_option("--jobs", jobs, "concurrent scans")->check(CLI::PositiveNumber);
    batch_cmd->add_flag("--recursive", recursive, "descend into subdirectories");
    batch_cmd->add_option("--out", out, "output directory")->required();
    add_scope_flags(batch_cmd);

    CLI::App* rules_cmd = app.add_subcommand("rules", "rulepack utilities");
    CLI::App* rules_check = rules_cmd->add_subcommand("check", "validate a rulepack");
    rules_check->add_option("file", rules, "rulepack file")->required();

    CLI::App* fixtures_cmd = app.add_subcommand("fixtures", "synthetic ground truth");
    CLI::App* fixtures_gen =
        fixtures_cmd->add_subcommand("gen", "generate the 64-fixture corpus");
    fixtures_gen->add_option("--out", out, "output directory")->required();

    CLI::App* report_cmd = app.add_subcommand("report", "report utilities");
    CLI::App* report_agg =
        report_cmd->add_subcommand("aggregate", "aggregate per-APK reports");
    report_agg->add_option("dir", dir, "directory of .report.json files")->required();
    report_agg->add_option("--out", out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (scan_cmd->parsed()) {
            return cmd_scan(apk, rules, trace, detail, out, scope_flags);
        }
        if (batch_cmd->parsed()) {
            return cmd_batch(dir, rules, jobs, recursive, out, scope_flags);
        }
        if (rules_check->parsed()) {
            return cmd_rules_check(rules);
        }
        if (fixtures_gen->parsed()) {
            return cmd_fixtures_gen(out);
        }
        if (report_agg->parsed()) {
            return cmd_report_aggregate(dir, out);
        }
        std::cerr << app.help();
        return 2;
    } catch (const std::exception& e) {
        log(LogLevel::Error, e.what());
        return 2;
    } catch (...) {
        log(LogLevel::Error, "unknown failure");
        return 2;
    }
}
