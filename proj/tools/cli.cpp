#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lendsim/engine.hpp"
#include "lendsim/error.hpp"
#include "lendsim/reports.hpp"
#include "lendsim/run_io.hpp"

namespace lendsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kReports = {"tables",  "loans",       "redeposits",  "concentration", "network",
                                           "liqmatrix", "regress-eq4", "regress-eq5", "regress-logit"};

struct ScenarioArgs {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> blocks;
    std::vector<std::string> sets;
    std::string out;
    bool force = false;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& a) {
    cmd->add_option("--scenario", a.scenario, "Scenario JSON file")->required();
    cmd->add_option("--seed", a.seed, "Override the scenario seed");
    cmd->add_option("--blocks", a.blocks, "Override horizon_blocks");
    cmd->add_option("--set", a.sets, "Override a parameter, as dotted.path=value");
    cmd->add_option("--out", a.out, "Output directory (default $LENDSIM_OUT/<scenario name>)");
    cmd->add_flag("--force", a.force, "Overwrite an existing non-empty output directory");
}

fs::path default_out(const std::string& scenario, const std::string& suffix = "") {
    const char* root = std::getenv("LENDSIM_OUT");
    const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("runs");
    return base / (fs::path(scenario).stem().string() + suffix);
}

void prepare_out(const fs::path& dir, bool force) {
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec)) throw Error(Errc::Io, "output path is not a directory: " + dir.string());
        if (!fs::is_empty(dir, ec) && !force) {
            throw Error(Errc::Io, "output directory " + dir.string() + " is not empty; pass --force to overwrite");
        }
    }
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
}

/// Loads the scenario document and applies --seed, --blocks and --set.
io::RunInputs load_inputs(const ScenarioArgs& a) {
    io::RunInputs in;
    in.scenario = io::read_scenario_doc(a.scenario);
    in.scenario_path = a.scenario;
    std::error_code ec;
    in.scenario_dir = fs::absolute(fs::path(a.scenario).parent_path(), ec).lexically_normal();
    if (a.seed) {
        in.scenario["seed"] = *a.seed;
        in.overrides["seed"] = *a.seed;
    }
    if (a.blocks) {
        in.scenario["horizon_blocks"] = *a.blocks;
        in.overrides["horizon_blocks"] = *a.blocks;
    }
    for (const auto& s : a.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("set", "expected path=value, got '" + s + "'");
        const std::string path = s.substr(0, eq);
        const json value = parse_override_value(s.substr(eq + 1));
        apply_override(in.scenario, path, value);
        in.overrides[path] = value;
    }
    return in;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ostringstream os;
    fn(os);
    write_text(path, os.str());
}

int cmd_simulate(const ScenarioArgs& a, std::ostream& out) {
    io::RunInputs inputs = load_inputs(a);
    const Scenario scenario = parse_scenario(inputs.scenario, inputs.scenario_dir);
    const fs::path dir = a.out.empty() ? default_out(a.scenario) : fs::path(a.out);
    prepare_out(dir, a.force);
    const RunOutput result = run(scenario);
    io::write_run(dir, result, inputs);
    out << io::summary_json(result.summary).dump() << '\n';
    return kExitOk;
}

struct AnalyzeArgs {
    std::string run_dir;
    std::vector<std::string> reports;
    std::size_t top = 100;
    std::string token;
    std::string out;
    int lag = 1;
    std::int64_t window = kSecondsPerDay;
    bool same_day = false;
    bool force = false;
};

json regression_json(const analytics::RegressionResult& r) {
    json terms = json::array();
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        terms.push_back({{"term", r.names[i]}, {"coef", r.coef[i]}, {"se", r.se[i]}, {"t", r.t[i]}, {"p", r.p[i]}});
    }
    json j = {{"method", r.method}, {"dependent", r.dependent}, {"observations", r.observations},
              {"r_squared", r.r_squared}, {"terms", terms}};
    if (r.clusters > 0) {
        j["clusters"] = r.clusters;
        j["log_likelihood"] = r.log_likelihood;
        j["iterations"] = r.iterations;
    }
    return j;
}

/// Regression failures are data conditions, not usage errors: the table
/// records why no estimate exists.
void emit_regression(const fs::path& dir, const std::string& stem, json& bundle,
                     const std::function<analytics::RegressionResult()>& estimate) {
    try {
        const auto r = estimate();
        write_text(dir / (stem + ".txt"), analytics::format_table(r));
        write_with(dir / (stem + ".csv"), [&](std::ostream& os) { analytics::write_csv(os, r); });
        bundle["regressions"][stem] = regression_json(r);
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        if (e.code() == Errc::Io) throw;
        write_text(dir / (stem + ".txt"),
                   "Not estimated: " + std::string(to_string(e.code())) + ": " + e.what() + "\n");
        write_text(dir / (stem + ".csv"), "term,coef,se,t,p,stars\n");
        bundle["regressions"][stem] = {{"error", to_string(e.code())}, {"message", e.what()}};
    }
}

int cmd_analyze(AnalyzeArgs a, std::ostream& out) {
    std::vector<std::string> reports;
    for (const auto& r : a.reports) {
        if (r == "all") {
            reports.insert(reports.end(), kReports.begin(), kReports.end());
        } else if (std::find(kReports.begin(), kReports.end(), r) == kReports.end()) {
            throw ValidationError("report", "unknown report '" + r + "'");
        } else {
            reports.push_back(r);
        }
    }
    if (reports.empty()) reports.push_back("tables");
    if (a.top == 0) throw ValidationError("top", "must be at least 1");
    if (a.lag < 0) throw ValidationError("lag", "must be non-negative");
    if (a.window < 0) throw ValidationError("window", "must be non-negative");
    auto wants = [&](const std::string& r) { return std::find(reports.begin(), reports.end(), r) != reports.end(); };

    const io::RunData data = io::read_run(a.run_dir);
    const Scenario& sc = data.scenario;
    const TokenTable& tokens = sc.tokens;
    const std::int64_t spb = sc.seconds_per_block;

    std::vector<std::size_t> pools;
    for (std::size_t m = 0; m < sc.pools.size(); ++m) {
        if (a.token.empty() || tokens[sc.pools[m].token].symbol == a.token) pools.push_back(m);
    }
    if (!a.token.empty() && pools.empty()) throw ValidationError("token", "no pool for token '" + a.token + "'");

    const fs::path dir = a.out.empty() ? fs::path(a.run_dir) / "analysis" : fs::path(a.out);
    prepare_out(dir, a.force);

    json bundle;
    bundle["run"] = {{"seed", data.manifest.value("seed", json())},
                     {"scenario_sha256", data.manifest.value("scenario_sha256", json())}};
    bundle["reports"] = reports;

    auto market_days = [&](std::size_t m) {
        analytics::MarketConfig cfg;
        cfg.token = sc.pools[m].token;
        cfg.seconds_per_block = spb;
        cfg.reward_speed = sc.pools[m].reward_speed;
        cfg.reward_start_block = sc.pools[m].reward_start_block;
        cfg.reward_token = sc.reward_token;
        cfg.market_token = analytics::default_market_token(tokens, sc.reward_token);
        return analytics::daily_market(cfg, data.snapshots, data.prices, data.ledger);
    };

    if (wants("tables")) {
        const auto report = analytics::summary_tables(data.ledger, tokens, data.categories, spb);
        write_with(dir / "daily_net_deposits_summary.csv",
                   [&](std::ostream& os) { reports::daily_net_deposits_csv(os, report); });
        write_with(dir / "loan_summary.csv", [&](std::ostream& os) { reports::loan_summary_csv(os, report); });
        write_with(dir / "redeposit_summary.csv",
                   [&](std::ostream& os) { reports::redeposit_summary_csv(os, report); });
        write_with(dir / "liquidation_summary.csv",
                   [&](std::ostream& os) { reports::liquidation_summary_csv(os, report); });
        const auto micro = analytics::micro_filter(data.ledger, tokens);
        write_with(dir / "micro_addresses.csv", [&](std::ostream& os) { reports::micro_csv(os, micro); });
        bundle["tables"] = analytics::to_json(report);
        bundle["tables"]["micro_addresses"] = micro.size();
    }
    if (wants("loans")) {
        const auto book = analytics::reconstruct_loans(data.ledger, spb);
        write_with(dir / "closed_loans.csv",
                   [&](std::ostream& os) { reports::closed_loans_csv(os, book.closed, tokens, data.categories); });
        write_with(dir / "open_loans.csv",
                   [&](std::ostream& os) { reports::closed_loans_csv(os, book.open, tokens, data.categories); });
        bundle["loans"] = {{"closed", book.closed.size()}, {"open", book.open.size()}};
    }
    if (wants("redeposits")) {
        const auto days = analytics::detect_redeposits(data.ledger, spb, a.window);
        write_with(dir / "loan_days.csv", [&](std::ostream& os) { reports::loan_days_csv(os, days, tokens); });
        std::size_t same = 0;
        std::size_t window = 0;
        for (const auto& d : days) {
            same += d.redeposited_same_day ? 1 : 0;
            window += d.redeposited_within_window ? 1 : 0;
        }
        bundle["redeposits"] = {{"loan_days", days.size()}, {"same_day", same}, {"within_window", window},
                                {"window_seconds", a.window}};
    }
    if (wants("concentration")) {
        std::ostringstream os;
        reports::concentration_csv(os, data.ledger, a.top);
        write_text(dir / "concentration.csv", os.str());
        json c = {{"k", a.top}};
        for (auto [side, name] : {std::pair{analytics::Side::Deposits, "deposits"},
                                  std::pair{analytics::Side::Loans, "loans"}}) {
            try {
                c[name] = analytics::concentration(data.ledger, side, a.top);
            } catch (const Error& e) {
                if (e.code() != Errc::EmptyLedger) throw;
                c[name] = nullptr;
            }
        }
        bundle["concentration"] = c;
    }
    if (wants("network")) {
        const auto net = analytics::flow_network(data.ledger, data.categories, tokens);
        write_with(dir / "flow_network.csv", [&](std::ostream& os) { reports::flow_network_csv(os, net); });
        json edges = json::array();
        for (const auto& e : net.edges) edges.push_back({{"source", e.source}, {"target", e.target}, {"usd", e.usd.to_string()}});
        bundle["network"] = {{"nodes", net.nodes}, {"edges", edges}};
    }
    if (wants("liqmatrix")) {
        const auto m = analytics::liquidation_matrix(data.ledger, tokens.size());
        write_with(dir / "liquidation_matrix.csv",
                   [&](std::ostream& os) { reports::liquidation_matrix_csv(os, m, tokens); });
        bundle["liquidation_matrix"] = {{"total_usd", m.total.to_string()}};
    }
    for (auto [report, equation, stem] : {std::tuple{"regress-eq4", analytics::Equation::NetDeposits, "regress_eq4"},
                                          std::tuple{"regress-eq5", analytics::Equation::Loans, "regress_eq5"}}) {
        if (!wants(report)) continue;
        for (std::size_t m : pools) {
            const std::string name = std::string(stem) + "_" + tokens[sc.pools[m].token].symbol;
            emit_regression(dir, name, bundle, [&, equation] {
                const auto days = market_days(m);
                return analytics::fit(analytics::build_features(days, equation), a.lag);
            });
        }
    }
    if (wants("regress-logit")) {
        emit_regression(dir, "regress_logit", bundle, [&] {
            std::map<std::uint32_t, std::vector<analytics::MarketDay>> markets;
            for (std::size_t m : pools) markets[sc.pools[m].token.value] = market_days(m);
            std::vector<analytics::LoanDay> days;
            for (const auto& d : analytics::detect_redeposits(data.ledger, spb, a.window)) {
                if (markets.count(d.token.value) != 0) days.push_back(d);
            }
            return analytics::fit_logit(analytics::build_logit_features(days, data.categories, markets, a.same_day));
        });
    }
    write_text(dir / "report.json", bundle.dump(2) + "\n");
    out << dir.string() << '\n';
    return kExitOk;
}

struct SweepArgs {
    ScenarioArgs base;
    std::string param;
    std::string values;
    int parallel = 1;
};

std::string dir_name(std::size_t i, const json& value) {
    std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    std::string clean;
    for (char c : text) {
        clean += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_') ? c : '_';
    }
    if (clean.size() > 40) clean.resize(40);
    std::ostringstream name;
    name << "run_" << std::setw(3) << std::setfill('0') << i << '_' << clean;
    return name.str();
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    if (a.parallel < 1) throw ValidationError("parallel", "must be at least 1");
    std::vector<json> values;
    {
        std::stringstream ss(a.values);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) values.push_back(parse_override_value(item));
        }
    }
    if (values.empty()) throw ValidationError("values", "sweep needs at least one value");
    const io::RunInputs inputs = load_inputs(a.base);
    const fs::path root = a.base.out.empty() ? default_out(a.base.scenario, "_sweep") : fs::path(a.base.out);

    std::vector<io::RunInputs> per_value;
    for (const auto& v : values) {
        io::RunInputs in = inputs;
        apply_override(in.scenario, a.param, v);
        in.overrides[a.param] = v;
        parse_scenario(in.scenario, in.scenario_dir);
        per_value.push_back(std::move(in));
    }
    prepare_out(root, a.base.force);
    const auto points = sweep(inputs.scenario, inputs.scenario_dir, a.param, values, a.parallel,
                              [&](std::size_t i, const RunOutput& result) {
                                  io::write_run(root / dir_name(i, values[i]), result, per_value[i]);
                              });

    std::ostringstream csv;
    csv << "index,value,dir,seed,horizon_blocks,events,liquidations,liquidation_usd,max_block_liquidated_share,"
           "cascade_waves,rejected_intents,final_borrows_usd,reward_emitted\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const RunSummary& s = points[i].summary;
        const std::string value = values[i].is_string() ? values[i].get<std::string>() : values[i].dump();
        csv << i << ',' << io::csv_field(value) << ',' << dir_name(i, values[i]) << ',' << s.seed << ','
            << s.horizon_blocks << ',' << s.events << ',' << s.liquidations << ',' << s.liquidation_usd.to_string()
            << ',' << reports::num(s.max_block_liquidated_share) << ',' << s.cascade_waves << ','
            << s.rejected_intents << ',' << s.final_borrows_usd.to_string() << ',' << s.reward_emitted.to_string()
            << '\n';
    }
    write_text(root / "sweep_summary.csv", csv.str());
    out << (root / "sweep_summary.csv").string() << '\n';
    return kExitOk;
}

void report_error(std::ostream& err, int exit_code, std::string_view code, const std::string& message,
                  const std::vector<Diagnostic>& diagnostics = {}) {
    json j = {{"error", code}, {"exit_code", exit_code}, {"message", message}};
    if (!diagnostics.empty()) {
        json d = json::array();
        for (const auto& x : diagnostics) d.push_back({{"field", x.field}, {"message", x.message}});
        j["diagnostics"] = d;
    }
    err << j.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pooled lending protocol simulator and ledger analytics", "lendsim"};
    app.require_subcommand(1);

    ScenarioArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run one scenario and write a run directory");
    add_scenario_options(simulate, sim);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Compute reports from a run directory");
    analyze->add_option("run_dir", an.run_dir, "Run directory written by simulate")->required();
    analyze->add_option("--report", an.reports, "tables|loans|redeposits|concentration|network|liqmatrix|"
                                                "regress-eq4|regress-eq5|regress-logit|all")
        ->delimiter(',');
    analyze->add_option("--top", an.top, "k for top-k concentration");
    analyze->add_option("--token", an.token, "Restrict regressions to one pool");
    analyze->add_option("--out", an.out, "Output directory (default <run_dir>/analysis)");
    analyze->add_option("--lag", an.lag, "Newey-West lag in days");
    analyze->add_option("--window", an.window, "Redeposit window in seconds");
    analyze->add_flag("--same-day", an.same_day, "Logit label is the same-day redeposit flag");
    analyze->add_flag("--force", an.force, "Overwrite an existing non-empty output directory");

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario once per parameter value");
    add_scenario_options(sweep_cmd, sw.base);
    sweep_cmd->add_option("--param", sw.param, "Dotted parameter path; * fans out over arrays")->required();
    sweep_cmd->add_option("--values", sw.values, "Comma-separated values")->required();
    sweep_cmd->add_option("--parallel", sw.parallel, "Worker threads");

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, kExitValidation, "Usage", e.what());
        return kExitValidation;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out);
        if (analyze->parsed()) return cmd_analyze(an, out);
        return cmd_sweep(sw, out);
    } catch (const ValidationError& e) {
        report_error(err, kExitValidation, to_string(e.code()), e.what(), e.diagnostics());
        return kExitValidation;
    } catch (const Error& e) {
        const int code = e.code() == Errc::Io ? kExitIo : kExitValidation;
        report_error(err, code, to_string(e.code()), e.what());
        return code;
    } catch (const std::exception& e) {
        report_error(err, kExitIo, "Io", e.what());
        return kExitIo;
    }
}

}  // namespace lendsim::cli
