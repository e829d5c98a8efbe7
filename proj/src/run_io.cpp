#include "lendsim/run_io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "lendsim/error.hpp"

namespace lendsim::io {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string symbol(const RunOutput& out, TokenId t) { return out.tokens[t].symbol; }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw Error(Errc::Io, "cannot allocate a digest context");
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest, &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok) throw Error(Errc::Io, "SHA-256 failed");
    std::ostringstream hex;
    hex << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < len; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
    return hex.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

json read_scenario_doc(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("scenario", "cannot open scenario file '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario", std::string("invalid JSON: ") + e.what());
    }
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

const std::vector<std::string>& run_files() {
    static const std::vector<std::string> files = {
        "ledger.jsonl", "snapshots.csv", "risk.csv",         "agents.csv",         "rewards.csv",
        "prices.csv",   "amm.csv",       "rejections.csv",   "liquidations.csv",   "liquidation_blocks.csv",
        "summary.json",
    };
    return files;
}

void write_snapshots(std::ostream& os, const RunOutput& out) {
    os << "block,token,cash,borrows,reserves,ctoken_supply,exchange_rate,utilization,borrow_rate,supply_rate\n";
    for (const auto& s : out.snapshots) {
        os << s.block << ',' << symbol(out, s.token) << ',' << s.cash.to_string() << ',' << s.borrows.to_string()
           << ',' << s.reserves.to_string() << ',' << s.ctoken_supply.to_string() << ','
           << s.exchange_rate.to_string() << ',' << s.utilization.to_string() << ',' << s.borrow_rate.to_string()
           << ',' << s.supply_rate.to_string() << '\n';
    }
}

void write_risk(std::ostream& os, const RunOutput& out) {
    os << "block,address,liquidity_usd,collateral_usd,debt_usd\n";
    for (const auto& r : out.risk) {
        os << r.block << ',' << r.address.value << ',' << r.liquidity.to_string() << ','
           << r.collateral.to_string() << ',' << r.debt.to_string() << '\n';
    }
}

void write_agents(std::ostream& os, const RunOutput& out) {
    os << "address,category,total_deposited_usd,total_borrowed_usd,reward_claimed,liquidated_count,pnl_usd\n";
    for (const auto& a : out.agents) {
        os << a.address.value << ',' << to_string(a.category) << ',' << a.total_deposited.to_string() << ','
           << a.total_borrowed.to_string() << ',' << a.reward_claimed.to_string() << ',' << a.liquidated_count
           << ',' << a.pnl_usd.to_string() << '\n';
    }
}

void write_rewards(std::ostream& os, const RunOutput& out) {
    os << "address,accrued,claimed\n";
    for (const auto& r : out.rewards) {
        os << r.address.value << ',' << r.accrued.to_string() << ',' << r.claimed.to_string() << '\n';
    }
}

void write_prices(std::ostream& os, const RunOutput& out) {
    os << "block,token,price\n";
    for (const auto& p : out.prices) os << p.block << ',' << symbol(out, p.token) << ',' << p.price.to_string() << '\n';
}

void write_amm(std::ostream& os, const RunOutput& out) {
    os << "block,amm,reserve_x,reserve_y,spot_price,lp_supply\n";
    for (const auto& a : out.amm) {
        os << a.block << ',' << a.amm << ',' << a.reserve_x.to_string() << ',' << a.reserve_y.to_string() << ','
           << a.spot_price.to_string() << ',' << a.lp_supply.to_string() << '\n';
    }
}

void write_rejections(std::ostream& os, const RunOutput& out) {
    os << "block,address,intent,token,amount,code,message\n";
    for (const auto& r : out.rejections) {
        os << r.block << ',' << r.address.value << ',' << to_string(r.kind) << ',' << symbol(out, r.token) << ','
           << r.amount.to_string() << ',' << to_string(r.code) << ',' << csv_field(r.message) << '\n';
    }
}

void write_liquidations(std::ostream& os, const RunOutput& out) {
    os << "block,wave,liquidator,borrower,repay_token,seize_token,repay_amount,repay_usd,debt_before,"
          "close_factor_cap,seize_ctokens,seize_underlying,seize_usd,liquidity_before,liquidity_after\n";
    for (const auto& l : out.liquidations) {
        os << l.block << ',' << l.wave << ',' << l.liquidator.value << ',' << l.borrower.value << ','
           << symbol(out, l.repay_token) << ',' << symbol(out, l.seize_token) << ',' << l.repay_amount.to_string()
           << ',' << l.repay_usd.to_string() << ',' << l.debt_before.to_string() << ','
           << l.close_factor_cap.to_string() << ',' << l.seize_ctokens.to_string() << ','
           << l.seize_underlying.to_string() << ',' << l.seize_usd.to_string() << ','
           << l.liquidity_before.to_string() << ',' << l.liquidity_after.to_string() << '\n';
    }
}

void write_liquidation_blocks(std::ostream& os, const RunOutput& out) {
    os << "block,count,wave,repay_usd,outstanding_usd,share\n";
    for (const auto& b : out.liquidation_blocks) {
        os << b.block << ',' << b.count << ',' << b.wave << ',' << b.repay_usd.to_string() << ','
           << b.outstanding_usd.to_string() << ',' << num(b.share()) << '\n';
    }
}

ordered_json summary_json(const RunSummary& s) {
    ordered_json j;
    j["seed"] = s.seed;
    j["horizon_blocks"] = s.horizon_blocks;
    j["events"] = s.events;
    j["liquidations"] = s.liquidations;
    j["liquidation_usd"] = s.liquidation_usd.to_string();
    j["max_block_liquidated_share"] = s.max_block_liquidated_share;
    j["cascade_waves"] = s.cascade_waves;
    j["rejected_intents"] = s.rejected_intents;
    j["final_borrows_usd"] = s.final_borrows_usd.to_string();
    j["reward_emitted"] = s.reward_emitted.to_string();
    return j;
}

void write_run(const fs::path& dir, const RunOutput& out, const RunInputs& inputs) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());

    std::map<std::string, std::string> contents;
    auto render = [&](const std::string& name, auto&& fn) {
        std::ostringstream os;
        fn(os);
        contents[name] = os.str();
    };
    render("ledger.jsonl", [&](std::ostream& os) { out.ledger.write_jsonl(os); });
    render("snapshots.csv", [&](std::ostream& os) { write_snapshots(os, out); });
    render("risk.csv", [&](std::ostream& os) { write_risk(os, out); });
    render("agents.csv", [&](std::ostream& os) { write_agents(os, out); });
    render("rewards.csv", [&](std::ostream& os) { write_rewards(os, out); });
    render("prices.csv", [&](std::ostream& os) { write_prices(os, out); });
    render("amm.csv", [&](std::ostream& os) { write_amm(os, out); });
    render("rejections.csv", [&](std::ostream& os) { write_rejections(os, out); });
    render("liquidations.csv", [&](std::ostream& os) { write_liquidations(os, out); });
    render("liquidation_blocks.csv", [&](std::ostream& os) { write_liquidation_blocks(os, out); });
    render("summary.json", [&](std::ostream& os) { os << summary_json(out.summary).dump(2) << '\n'; });

    ordered_json manifest;
    manifest["schema_version"] = kSchemaVersion;
    manifest["tool_version"] = kToolVersion;
    manifest["seed"] = out.summary.seed;
    manifest["horizon_blocks"] = out.summary.horizon_blocks;
    manifest["scenario_path"] = inputs.scenario_path;
    manifest["scenario_dir"] = inputs.scenario_dir.generic_string();
    manifest["scenario_sha256"] = sha256_hex(inputs.scenario.dump());
    manifest["overrides"] = inputs.overrides;
    ordered_json input_files = ordered_json::object();
    if (const auto it = inputs.scenario.find("oracle"); it != inputs.scenario.end() && it->is_object()) {
        for (const auto& [sym, spec] : it->items()) {
            if (!spec.is_object() || spec.value("source", "") != "file" || !spec.contains("path")) continue;
            fs::path p = spec["path"].get<std::string>();
            const fs::path resolved = p.is_relative() ? inputs.scenario_dir / p : p;
            input_files[spec["path"].get<std::string>()] = sha256_file(resolved);
        }
    }
    manifest["input_files"] = input_files;
    manifest["scenario"] = inputs.scenario;
    ordered_json files = ordered_json::object();
    for (const auto& name : run_files()) files[name] = sha256_hex(contents.at(name));
    manifest["files"] = files;

    for (const auto& name : run_files()) write_file(dir / name, contents.at(name));
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != columns) {
            throw Error(Errc::Io, path.filename().string() + " line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(columns) + " fields");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

template <class Fn>
auto parse_field(const fs::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(Errc::Io, path.filename().string() + ": " + e.what());
    }
}

}  // namespace

RunData read_run(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Errc::Io, "not a run directory: " + dir.string());
    RunData data;
    {
        const std::string text = read_file(dir / "manifest.json");
        try {
            data.manifest = json::parse(text);
        } catch (const json::parse_error& e) {
            throw Error(Errc::Io, std::string("manifest.json: ") + e.what());
        }
    }
    if (!data.manifest.contains("scenario")) throw Error(Errc::Io, "manifest.json has no scenario");
    const fs::path base = data.manifest.value("scenario_dir", std::string{});
    data.scenario = parse_scenario(data.manifest["scenario"], base);
    const TokenTable& tokens = data.scenario.tokens;

    {
        std::ifstream in(dir / "ledger.jsonl");
        if (!in) throw Error(Errc::Io, "cannot read " + (dir / "ledger.jsonl").string());
        data.ledger = Ledger::read_jsonl(in);
    }
    const fs::path snap_path = dir / "snapshots.csv";
    for (const auto& f : read_csv(snap_path, 10)) {
        data.snapshots.push_back(parse_field(snap_path, [&] {
            PoolSnapshot s;
            s.block = std::stoll(f[0]);
            s.token = tokens.require(f[1]);
            s.cash = Wad::parse(f[2]);
            s.borrows = Wad::parse(f[3]);
            s.reserves = Wad::parse(f[4]);
            s.ctoken_supply = Wad::parse(f[5]);
            s.exchange_rate = Wad::parse(f[6]);
            s.utilization = Wad::parse(f[7]);
            s.borrow_rate = Wad::parse(f[8]);
            s.supply_rate = Wad::parse(f[9]);
            return s;
        }));
    }
    const fs::path price_path = dir / "prices.csv";
    for (const auto& f : read_csv(price_path, 3)) {
        data.prices.push_back(parse_field(price_path, [&] {
            return PriceRow{std::stoll(f[0]), tokens.require(f[1]), Wad::parse(f[2])};
        }));
    }
    const fs::path agents_path = dir / "agents.csv";
    for (const auto& f : read_csv(agents_path, 7)) {
        const auto address = parse_field(agents_path, [&] { return static_cast<std::uint32_t>(std::stoul(f[0])); });
        const auto category = parse_agent_category(f[1]);
        if (!category) throw Error(Errc::Io, "agents.csv: unknown category '" + f[1] + "'");
        if (data.categories.size() <= address) data.categories.resize(address + 1);
        data.categories[address] = *category;
    }
    return data;
}

}  // namespace lendsim::io
