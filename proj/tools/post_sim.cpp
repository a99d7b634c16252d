#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "post/harness.hpp"

using namespace post;

namespace {

json readJsonFile(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError("cannot open " + path);
    return json::parse(in);
}

int cmdRun(const std::string& config, const std::string& presetName, const std::string& param,
           std::optional<std::uint64_t> seed, const std::string& tracePath)
{
    ScenarioConfig cfg;
    if (!presetName.empty())
        cfg = preset(presetName, param.empty() ? json() : json::parse(param));
    else
        cfg = configFromJson(readJsonFile(config));
    if (seed)
        cfg.seed = *seed;
    auto r = runScenario(cfg);
    if (!tracePath.empty())
        r.trace.writeFile(tracePath);
    json out = reportJson(r.trace);
    out["scenario"] = cfg.name;
    out["info"] = r.info;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmdVerify(const std::string& path)
{
    auto log = TraceLog::readFile(path);
    json rep = reportJson(log);
    bool ok = rep["deliveries"]["ok"] && rep["lemma1"]["ok"];
    if (rep.contains("lemma2"))
        ok = ok && rep["lemma2"]["ok"];
    if (rep.contains("recovery"))
        ok = ok && rep["recovery"]["ok"];
    std::cout << rep.dump(2) << "\n" << (ok ? "verify: ok" : "verify: FAILED") << "\n";
    return ok ? 0 : 1;
}

int cmdDumpChain(const std::string& path, PlayerId p, Timeslot t)
{
    auto log = TraceLog::readFile(path);
    TraceIndex ix(log);
    const TraceRecord* last = nullptr;
    for (const auto* r : ix.events("conf"))
        if (r->p == static_cast<std::int64_t>(p) && r->t <= t)
            last = r;
    if (!last) {
        std::cout << "player " << p << " has confirmed nothing by t=" << t << "\n";
        return 0;
    }
    std::cout << "player " << p << " at t=" << t << " (confirmed at t=" << last->t << ")\n";
    if (last->extra.value("gen", false)) {
        std::cout << "final genesis " << hex(last->d) << "\n";
        return 0;
    }
    std::vector<const TraceBlock*> chain;
    for (auto b = ix.block(last->d); b && !b->genesis; b = ix.block(b->par))
        chain.push_back(b);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        const auto* b = *it;
        std::cout << "h=" << b->h << " v=" << b->v << " e=" << b->e << " " << hex(b->d) << " proposer=" << b->proposer
                  << " txs=" << b->T.size() << "\n";
    }
    return 0;
}

int cmdDumpRecovery(const std::string& path)
{
    auto log = TraceLog::readFile(path);
    TraceIndex ix(log);
    std::map<std::int64_t, std::map<std::string, std::uint64_t>> tally;
    for (const auto& r : log.records()) {
        if (r.k == "send") {
            if (const json* m = ix.def(r.d); m && m->value("kind", "") == "ovote")
                tally[m->at("i").get<std::int64_t>()][m->at("bg").get<std::string>()] +=
                    m->at("c").get<std::uint64_t>();
            continue;
        }
        if (r.k != "rec" && r.k != "recinit" && r.k != "prop" && r.k != "oset" && r.k != "recend")
            continue;
        std::cout << "t=" << r.t << " p=" << r.p << " " << r.k;
        if (r.d)
            std::cout << " " << hex(r.d);
        if (!r.extra.is_null())
            std::cout << " " << r.extra.dump();
        std::cout << "\n";
    }
    for (const auto& [i, votes] : tally)
        for (const auto& [bg, c] : votes)
            std::cout << "instance " << i << " output votes for " << bg << ": stake " << c << "\n";
    return 0;
}

int cmdReport(const std::vector<std::string>& paths, const std::string& format)
{
    if (format != "table" && format != "records")
        throw ScenarioError("format must be table or records");
    if (format == "table")
        std::cout << "trace\tviolation\tlemma1\tlemma2\trecovery\tmaxLag/bound\teaac\talphaB\tbound\n";
    for (const auto& path : paths) {
        auto log = TraceLog::readFile(path);
        json rep = reportJson(log);
        if (format == "records") {
            rep["trace"] = path;
            std::cout << rep.dump() << "\n";
            continue;
        }
        auto yes = [](const json& j) { return j.is_null() ? std::string("-") : j.dump(); };
        std::cout << path << "\t" << yes(rep["violation"]["omniscient"]) << "\t"
                  << (rep["lemma1"]["ok"].get<bool>() ? "ok" : "FAIL") << "\t"
                  << (rep.contains("lemma2") ? (rep["lemma2"]["ok"].get<bool>() ? "ok" : "FAIL") : "-") << "\t"
                  << (rep.contains("recovery") ? (rep["recovery"]["ok"].get<bool>() ? "ok" : "FAIL") : "-") << "\t"
                  << rep["liveness"]["maxLag"] << "/" << rep["liveness"]["bound"] << "\t"
                  << rep["eaac"]["class"].get<std::string>() << "\t" << rep["eaac"]["alphaB"].get<std::string>()
                  << "\t" << rep["eaac"]["alphaBound"].get<std::string>() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"PosT timeslot simulator"};
    app.require_subcommand(1);

    std::string config;
    std::string presetName;
    std::string param;
    std::optional<std::uint64_t> seed;
    std::string tracePath;
    auto* run = app.add_subcommand("run", "Run a scenario and print its report");
    run->add_option("config", config, "Scenario config (JSON)");
    run->add_option("--preset", presetName, "Named scenario instead of a config file");
    run->add_option("--param", param, "Preset parameters as JSON");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--trace", tracePath, "Write the trace here");

    std::string trace;
    auto* verify = app.add_subcommand("verify", "Re-check every property from a stored trace");
    verify->add_option("trace", trace)->required();

    auto* list = app.add_subcommand("list-scenarios", "List named scenarios");

    PlayerId player = 0;
    Timeslot at = std::numeric_limits<Timeslot>::max();
    auto* dumpChain = app.add_subcommand("dump-chain", "Confirmed chain of a player at a timeslot");
    dumpChain->add_option("trace", trace)->required();
    dumpChain->add_option("--player", player)->required();
    dumpChain->add_option("--t", at);

    auto* dumpRecovery = app.add_subcommand("dump-recovery", "Recovery instances, O_p sets and output votes");
    dumpRecovery->add_option("trace", trace)->required();

    std::vector<std::string> traces;
    std::string format = "table";
    auto* report = app.add_subcommand("report", "Summarize stored traces");
    report->add_option("traces", traces)->required();
    report->add_option("--format", format)->check(CLI::IsMember({"table", "records"}));

    auto* showConfig = app.add_subcommand("config", "Print the config of a named scenario");
    showConfig->add_option("preset", presetName)->required();
    showConfig->add_option("--param", param);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) {
            if (config.empty() == presetName.empty())
                throw ScenarioError("give either a config file or --preset");
            return cmdRun(config, presetName, param, seed, tracePath);
        }
        if (*verify)
            return cmdVerify(trace);
        if (*list) {
            for (const auto& n : presetNames())
                std::cout << n << "\n";
            return 0;
        }
        if (*dumpChain)
            return cmdDumpChain(trace, player, at);
        if (*dumpRecovery)
            return cmdDumpRecovery(trace);
        if (*report)
            return cmdReport(traces, format);
        if (*showConfig) {
            std::cout << configToJson(preset(presetName, param.empty() ? json() : json::parse(param))).dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
