#include "lendsim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lendsim/error.hpp"

namespace lendsim {

using nlohmann::json;

std::size_t Scenario::agent_count() const {
    std::size_t n = 0;
    for (const auto& a : agents) n += static_cast<std::size_t>(std::max(a.count, 0));
    return n;
}

namespace {

class Reader {
  public:
    void fail(const std::string& field, const std::string& message) { diags_.push_back({field, message}); }
    bool ok() const { return diags_.empty(); }
    std::vector<Diagnostic> take() { return std::move(diags_); }

    void keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
        if (!obj.is_object()) return;
        for (const auto& [k, v] : obj.items()) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail(join(path, k), "unknown field");
        }
    }

    const json* object(const json& parent, const std::string& path, const char* key, bool required) {
        if (!parent.contains(key)) {
            if (required) fail(join(path, key), "required field missing");
            return nullptr;
        }
        const json& v = parent[key];
        if (!v.is_object()) {
            fail(join(path, key), "must be an object");
            return nullptr;
        }
        return &v;
    }

    const json* array(const json& parent, const std::string& path, const char* key, bool required) {
        if (!parent.contains(key)) {
            if (required) fail(join(path, key), "required field missing");
            return nullptr;
        }
        const json& v = parent[key];
        if (!v.is_array()) {
            fail(join(path, key), "must be an array");
            return nullptr;
        }
        return &v;
    }

    std::optional<Wad> wad_value(const json& v, const std::string& field) {
        try {
            if (v.is_number_integer()) return Wad::from_int(v.get<std::int64_t>());
            if (v.is_number()) return Wad::from_double(v.get<double>());
            if (v.is_string()) return Wad::parse(v.get<std::string>());
        } catch (const Error& e) {
            fail(field, e.what());
            return std::nullopt;
        }
        fail(field, "must be a number or decimal string");
        return std::nullopt;
    }

    Wad wad_field(const json& obj, const std::string& path, const char* key, Wad fallback) {
        if (!obj.contains(key)) return fallback;
        return wad_value(obj[key], join(path, key)).value_or(fallback);
    }

    std::optional<Wad> wad_required(const json& obj, const std::string& path, const char* key) {
        if (!obj.contains(key)) {
            fail(join(path, key), "required field missing");
            return std::nullopt;
        }
        return wad_value(obj[key], join(path, key));
    }

    double number(const json& obj, const std::string& path, const char* key, double fallback) {
        if (!obj.contains(key)) return fallback;
        const json& v = obj[key];
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            try {
                return std::stod(v.get<std::string>());
            } catch (const std::exception&) {
            }
        }
        fail(join(path, key), "must be a number");
        return fallback;
    }

    std::int64_t integer(const json& obj, const std::string& path, const char* key, std::int64_t fallback,
                         bool required = false) {
        if (!obj.contains(key)) {
            if (required) fail(join(path, key), "required field missing");
            return fallback;
        }
        const json& v = obj[key];
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
        }
        fail(join(path, key), "must be an integer");
        return fallback;
    }

    bool boolean(const json& obj, const std::string& path, const char* key, bool fallback) {
        if (!obj.contains(key)) return fallback;
        if (obj[key].is_boolean()) return obj[key].get<bool>();
        fail(join(path, key), "must be true or false");
        return fallback;
    }

    std::optional<std::string> string(const json& obj, const std::string& path, const char* key, bool required) {
        if (!obj.contains(key)) {
            if (required) fail(join(path, key), "required field missing");
            return std::nullopt;
        }
        if (!obj[key].is_string()) {
            fail(join(path, key), "must be a string");
            return std::nullopt;
        }
        return obj[key].get<std::string>();
    }

    std::optional<TokenId> token(const json& obj, const std::string& path, const char* key, const TokenTable& tokens,
                                 bool required) {
        const auto sym = string(obj, path, key, required);
        if (!sym) return std::nullopt;
        const auto id = tokens.find(*sym);
        if (!id) fail(join(path, key), "unknown token '" + *sym + "'");
        return id;
    }

    static std::string join(const std::string& path, std::string_view key) {
        return path.empty() ? std::string(key) : path + "." + std::string(key);
    }
    static std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

  private:
    std::vector<Diagnostic> diags_;
};

InterestParams parse_params(Reader& r, const json& obj, const std::string& path) {
    InterestParams p = InterestParams::defaults();
    p.base_rate = r.wad_field(obj, path, "base_rate", p.base_rate);
    p.slope_low = r.wad_field(obj, path, "slope_low", p.slope_low);
    p.slope_high = r.wad_field(obj, path, "slope_high", p.slope_high);
    p.kink = r.wad_field(obj, path, "kink", p.kink);
    p.reserve_factor = r.wad_field(obj, path, "reserve_factor", p.reserve_factor);
    try {
        p.validate();
    } catch (const Error& e) {
        r.fail(path, e.what());
    }
    return p;
}

void parse_tokens(Reader& r, const json& doc, Scenario& s) {
    const json* arr = r.array(doc, "", "tokens", true);
    if (!arr) return;
    if (arr->empty()) r.fail("tokens", "at least one token required");
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const json& t = (*arr)[i];
        const std::string path = Reader::at("tokens", i);
        if (!t.is_object()) {
            r.fail(path, "must be an object");
            continue;
        }
        r.keys(t, path, {"symbol", "stablecoin", "decimals"});
        TokenInfo info;
        info.symbol = r.string(t, path, "symbol", true).value_or("");
        info.is_stablecoin = r.boolean(t, path, "stablecoin", false);
        info.decimals = static_cast<int>(r.integer(t, path, "decimals", 18));
        if (info.symbol.empty()) {
            r.fail(Reader::join(path, "symbol"), "must be non-empty");
            continue;
        }
        if (s.tokens.find(info.symbol)) {
            r.fail(Reader::join(path, "symbol"), "duplicate symbol '" + info.symbol + "'");
            continue;
        }
        s.tokens.add(info);
    }
}

void parse_oracles(Reader& r, const json& doc, Scenario& s, const std::filesystem::path& base_dir) {
    s.oracles.assign(s.tokens.size(), OracleSpec{});
    std::vector<bool> seen(s.tokens.size(), false);
    if (const json* obj = r.object(doc, "", "oracle", false)) {
        for (const auto& [sym, spec] : obj->items()) {
            const std::string path = "oracle." + sym;
            const auto id = s.tokens.find(sym);
            if (!id) {
                r.fail(path, "unknown token '" + sym + "'");
                continue;
            }
            if (!spec.is_object()) {
                r.fail(path, "must be an object");
                continue;
            }
            seen[id->value] = true;
            OracleSpec& o = s.oracles[id->value];
            const std::string src = r.string(spec, path, "source", true).value_or("constant");
            if (src == "constant") {
                r.keys(spec, path, {"source", "price"});
                if (auto p = r.wad_required(spec, path, "price")) o.price = *p;
                if (!o.price.is_positive()) r.fail(path + ".price", "must be > 0");
                o.source = PriceSource::Constant;
            } else if (src == "scripted") {
                r.keys(spec, path, {"source", "points"});
                o.source = PriceSource::Scripted;
                const json* pts = r.array(spec, path, "points", true);
                if (!pts) continue;
                for (std::size_t i = 0; i < pts->size(); ++i) {
                    const json& pt = (*pts)[i];
                    const std::string pp = Reader::at(path + ".points", i);
                    if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number_integer()) {
                        r.fail(pp, "must be [block, price]");
                        continue;
                    }
                    const auto price = r.wad_value(pt[1], pp);
                    if (price && !price->is_positive()) r.fail(pp, "price must be > 0");
                    if (price) o.points.emplace_back(pt[0].get<std::int64_t>(), *price);
                }
                if (o.points.empty() || o.points.front().first != 0) r.fail(path + ".points", "must start at block 0");
                for (std::size_t i = 1; i < o.points.size(); ++i) {
                    if (o.points[i].first <= o.points[i - 1].first) {
                        r.fail(path + ".points", "blocks must strictly increase");
                        break;
                    }
                }
            } else if (src == "file") {
                r.keys(spec, path, {"source", "path"});
                o.source = PriceSource::File;
                const auto p = r.string(spec, path, "path", true);
                if (p) {
                    o.file = std::filesystem::path(*p);
                    if (o.file.is_relative()) o.file = base_dir / o.file;
                    if (!std::filesystem::exists(o.file)) r.fail(path + ".path", "file not found: " + o.file.string());
                }
            } else if (src == "gbm") {
                r.keys(spec, path, {"source", "p0", "mu", "sigma"});
                o.source = PriceSource::GBM;
                o.gbm.p0 = r.number(spec, path, "p0", 0.0);
                o.gbm.mu_annual = r.number(spec, path, "mu", 0.0);
                o.gbm.sigma_annual = r.number(spec, path, "sigma", 0.0);
                if (!(o.gbm.p0 > 0.0)) r.fail(path + ".p0", "must be > 0");
                if (!(o.gbm.sigma_annual >= 0.0)) r.fail(path + ".sigma", "must be >= 0");
            } else {
                r.fail(path + ".source", "must be constant, scripted, file or gbm");
            }
        }
    }
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
        if (!seen[t] && !s.tokens[TokenId{static_cast<std::uint32_t>(t)}].is_stablecoin) {
            r.fail("oracle." + s.tokens[TokenId{static_cast<std::uint32_t>(t)}].symbol,
                   "non-stablecoin tokens need an oracle");
        }
    }
}

void parse_correlation(Reader& r, const json& doc, Scenario& s) {
    const json* obj = r.object(doc, "", "correlation", false);
    if (!obj) return;
    r.keys(*obj, "correlation", {"tokens", "matrix"});
    const json* toks = r.array(*obj, "correlation", "tokens", true);
    const json* mat = r.array(*obj, "correlation", "matrix", true);
    if (!toks || !mat) return;
    for (std::size_t i = 0; i < toks->size(); ++i) {
        const auto path = Reader::at("correlation.tokens", i);
        if (!(*toks)[i].is_string()) {
            r.fail(path, "must be a token symbol");
            continue;
        }
        const auto id = s.tokens.find((*toks)[i].get<std::string>());
        if (!id) {
            r.fail(path, "unknown token");
            continue;
        }
        if (s.oracles[id->value].source != PriceSource::GBM) r.fail(path, "correlated tokens must use a gbm oracle");
        s.correlated.push_back(*id);
    }
    const std::size_t n = s.correlated.size();
    if (mat->size() != n) {
        r.fail("correlation.matrix", "must be square with one row per token");
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const json& row = (*mat)[i];
        if (!row.is_array() || row.size() != n) {
            r.fail(Reader::at("correlation.matrix", i), "row length must equal the token count");
            return;
        }
        for (const auto& v : row) {
            if (!v.is_number()) {
                r.fail(Reader::at("correlation.matrix", i), "entries must be numbers");
                return;
            }
            s.correlation.push_back(v.get<double>());
        }
    }
}

void parse_pools(Reader& r, const json& doc, Scenario& s) {
    const json* arr = r.array(doc, "", "pools", false);
    if (!arr) return;
    std::set<std::uint32_t> used;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const json& p = (*arr)[i];
        const std::string path = Reader::at("pools", i);
        if (!p.is_object()) {
            r.fail(path, "must be an object");
            continue;
        }
        r.keys(p, path,
               {"token", "schedule", "params", "haircut", "accepted_as_collateral", "reward_speed",
                "reward_start_block", "initial_exchange_rate"});
        const auto token = r.token(p, path, "token", s.tokens, true);
        if (!token) continue;
        if (!used.insert(token->value).second) {
            r.fail(path + ".token", "token already has a pool");
            continue;
        }
        PoolSpec spec;
        spec.token = *token;
        std::vector<RegimeSchedule::Entry> entries;
        if (p.contains("schedule")) {
            const json* sched = r.array(p, path, "schedule", true);
            if (sched) {
                for (std::size_t k = 0; k < sched->size(); ++k) {
                    const json& e = (*sched)[k];
                    const std::string ep = Reader::at(path + ".schedule", k);
                    if (!e.is_object()) {
                        r.fail(ep, "must be an object");
                        continue;
                    }
                    r.keys(e, ep, {"block", "base_rate", "slope_low", "slope_high", "kink", "reserve_factor"});
                    entries.push_back({r.integer(e, ep, "block", 0), parse_params(r, e, ep)});
                }
            }
        } else if (const json* params = r.object(p, path, "params", false)) {
            r.keys(*params, path + ".params", {"base_rate", "slope_low", "slope_high", "kink", "reserve_factor"});
            entries.push_back({0, parse_params(r, *params, path + ".params")});
        } else {
            entries.push_back({0, InterestParams::defaults()});
        }
        try {
            spec.schedule = RegimeSchedule(entries);
        } catch (const Error& e) {
            r.fail(path + ".schedule", e.what());
        }
        const Wad default_haircut = s.tokens[*token].is_stablecoin ? wad("0.25") : wad("0.40");
        spec.collateral.haircut = r.wad_field(p, path, "haircut", default_haircut);
        spec.collateral.accepted_as_collateral = r.boolean(p, path, "accepted_as_collateral", true);
        try {
            spec.collateral.validate();
        } catch (const Error& e) {
            r.fail(path + ".haircut", e.what());
        }
        spec.reward_speed = r.wad_field(p, path, "reward_speed", Wad::zero());
        if (spec.reward_speed.is_negative()) r.fail(path + ".reward_speed", "must be >= 0");
        spec.reward_start_block = r.integer(p, path, "reward_start_block", 0);
        if (spec.reward_start_block < 0) r.fail(path + ".reward_start_block", "must be >= 0");
        spec.initial_exchange_rate = r.wad_field(p, path, "initial_exchange_rate", Wad::one());
        if (!spec.initial_exchange_rate.is_positive()) r.fail(path + ".initial_exchange_rate", "must be > 0");
        s.pools.push_back(std::move(spec));
    }
}

const PoolSpec* pool_for(const Scenario& s, TokenId token) {
    for (const auto& p : s.pools) {
        if (p.token == token) return &p;
    }
    return nullptr;
}

void parse_amms(Reader& r, const json& doc, Scenario& s) {
    const json* arr = r.array(doc, "", "amm_pools", false);
    if (!arr) return;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const json& a = (*arr)[i];
        const std::string path = Reader::at("amm_pools", i);
        if (!a.is_object()) {
            r.fail(path, "must be an object");
            continue;
        }
        r.keys(a, path, {"token_x", "token_y", "reserve_x", "reserve_y", "fee"});
        const auto x = r.token(a, path, "token_x", s.tokens, true);
        const auto y = r.token(a, path, "token_y", s.tokens, true);
        const auto rx = r.wad_required(a, path, "reserve_x");
        const auto ry = r.wad_required(a, path, "reserve_y");
        const Wad fee = r.wad_field(a, path, "fee", wad("0.003"));
        if (!x || !y || !rx || !ry) continue;
        if (*x == *y) r.fail(path, "token_x and token_y must differ");
        if (!rx->is_positive() || !ry->is_positive()) r.fail(path, "reserves must be > 0");
        if (fee.is_negative() || fee >= Wad::one()) r.fail(path + ".fee", "must be in [0, 1)");
        s.amms.push_back({*x, *y, *rx, *ry, fee});
    }
    if (s.oracle_amm_coupling) {
        std::set<std::uint32_t> coupled;
        for (std::size_t i = 0; i < s.amms.size(); ++i) {
            if (!coupled.insert(s.amms[i].token_x.value).second) {
                r.fail(Reader::at("amm_pools", i) + ".token_x", "token is already coupled to another AMM");
            }
        }
        for (std::size_t i = 0; i < s.amms.size(); ++i) {
            if (coupled.count(s.amms[i].token_y.value)) {
                r.fail(Reader::at("amm_pools", i) + ".token_y", "quote token cannot itself be AMM-coupled");
            }
        }
    }
}

void parse_gas(Reader& r, const json& doc, Scenario& s) {
    const json* g = r.object(doc, "", "gas", false);
    if (!g) return;
    r.keys(*g, "gas", {"deposit", "withdraw", "borrow", "repay", "liquidate", "claim", "swap"});
    s.gas.deposit = r.wad_field(*g, "gas", "deposit", Wad::zero());
    s.gas.withdraw = r.wad_field(*g, "gas", "withdraw", Wad::zero());
    s.gas.borrow = r.wad_field(*g, "gas", "borrow", Wad::zero());
    s.gas.repay = r.wad_field(*g, "gas", "repay", Wad::zero());
    s.gas.liquidate = r.wad_field(*g, "gas", "liquidate", Wad::zero());
    s.gas.claim = r.wad_field(*g, "gas", "claim", Wad::zero());
    s.gas.swap = r.wad_field(*g, "gas", "swap", Wad::zero());
    try {
        s.gas.validate();
    } catch (const Error& e) {
        r.fail("gas", e.what());
    }
}

CapitalSpec parse_capital(Reader& r, const json& a, const std::string& path) {
    CapitalSpec c;
    if (!a.contains("capital")) {
        r.fail(path + ".capital", "required field missing");
        return c;
    }
    const json& v = a["capital"];
    if (v.is_number()) {
        c.a = v.get<double>();
    } else if (v.is_object()) {
        const std::string cp = path + ".capital";
        const std::string dist = r.string(v, cp, "dist", true).value_or("fixed");
        if (dist == "fixed") {
            r.keys(v, cp, {"dist", "value"});
            c.a = r.number(v, cp, "value", 0.0);
        } else if (dist == "uniform") {
            r.keys(v, cp, {"dist", "min", "max"});
            c.dist = CapitalDist::Uniform;
            c.a = r.number(v, cp, "min", 0.0);
            c.b = r.number(v, cp, "max", 0.0);
        } else if (dist == "lognormal") {
            r.keys(v, cp, {"dist", "median", "sigma"});
            c.dist = CapitalDist::LogNormal;
            c.a = r.number(v, cp, "median", 0.0);
            c.b = r.number(v, cp, "sigma", 0.0);
        } else if (dist == "pareto") {
            r.keys(v, cp, {"dist", "scale", "alpha"});
            c.dist = CapitalDist::Pareto;
            c.a = r.number(v, cp, "scale", 0.0);
            c.b = r.number(v, cp, "alpha", 0.0);
        } else {
            r.fail(cp + ".dist", "must be fixed, uniform, lognormal or pareto");
        }
    } else {
        r.fail(path + ".capital", "must be a number or a distribution object");
    }
    try {
        c.validate();
    } catch (const Error& e) {
        r.fail(path + ".capital", e.what());
    }
    return c;
}

void parse_strategy_params(Reader& r, const json& a, const std::string& path, StrategyParams& p) {
    const json* obj = r.object(a, path, "params", false);
    if (!obj) return;
    const std::string pp = path + ".params";
    r.keys(*obj, pp,
           {"loop_fraction", "loop_rounds", "borrow_fraction", "repay_buffer", "claim_threshold", "claim_interval",
            "exit_prob", "reenter_prob", "repay_prob", "reborrow_prob", "redeposit_prob", "rate_threshold",
            "rate_hysteresis", "reaction_prob", "fire_sale"});
    p.loop_fraction = r.wad_field(*obj, pp, "loop_fraction", p.loop_fraction);
    p.loop_rounds = static_cast<int>(r.integer(*obj, pp, "loop_rounds", p.loop_rounds));
    p.borrow_fraction = r.wad_field(*obj, pp, "borrow_fraction", p.borrow_fraction);
    p.repay_buffer = r.wad_field(*obj, pp, "repay_buffer", p.repay_buffer);
    p.claim_threshold = r.wad_field(*obj, pp, "claim_threshold", p.claim_threshold);
    p.claim_interval = r.integer(*obj, pp, "claim_interval", p.claim_interval);
    p.exit_prob = r.number(*obj, pp, "exit_prob", p.exit_prob);
    p.reenter_prob = r.number(*obj, pp, "reenter_prob", p.reenter_prob);
    p.repay_prob = r.number(*obj, pp, "repay_prob", p.repay_prob);
    p.reborrow_prob = r.number(*obj, pp, "reborrow_prob", p.reborrow_prob);
    p.redeposit_prob = r.number(*obj, pp, "redeposit_prob", p.redeposit_prob);
    p.rate_threshold = r.wad_field(*obj, pp, "rate_threshold", p.rate_threshold);
    p.rate_hysteresis = r.wad_field(*obj, pp, "rate_hysteresis", p.rate_hysteresis);
    p.reaction_prob = r.number(*obj, pp, "reaction_prob", p.reaction_prob);
    p.fire_sale = r.boolean(*obj, pp, "fire_sale", p.fire_sale);
    for (auto [name, v] : {std::pair{"exit_prob", p.exit_prob}, std::pair{"reenter_prob", p.reenter_prob},
                           std::pair{"repay_prob", p.repay_prob}, std::pair{"reborrow_prob", p.reborrow_prob},
                           std::pair{"redeposit_prob", p.redeposit_prob}, std::pair{"reaction_prob", p.reaction_prob}}) {
        if (!(v >= 0.0 && v <= 1.0)) r.fail(pp + "." + name, "must be a probability in [0, 1]");
    }
    if (p.loop_rounds < 0) r.fail(pp + ".loop_rounds", "must be >= 0");
    if (p.borrow_fraction.is_negative() || p.borrow_fraction > Wad::one()) {
        r.fail(pp + ".borrow_fraction", "must be in [0, 1]");
    }
    if (p.repay_buffer.is_negative()) r.fail(pp + ".repay_buffer", "must be >= 0");
    if (p.claim_threshold.is_negative()) r.fail(pp + ".claim_threshold", "must be >= 0");
}

void parse_agents(Reader& r, const json& doc, Scenario& s) {
    const json* arr = r.array(doc, "", "agents", false);
    if (!arr) return;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const json& a = (*arr)[i];
        const std::string path = Reader::at("agents", i);
        if (!a.is_object()) {
            r.fail(path, "must be an object");
            continue;
        }
        r.keys(a, path,
               {"category", "count", "capital", "strategy", "token", "borrow_token", "start_block", "first_address",
                "params"});
        AgentSpec spec;
        const auto cat = r.string(a, path, "category", true);
        if (cat) {
            if (auto c = parse_agent_category(*cat)) {
                spec.category = *c;
            } else {
                r.fail(path + ".category", "unknown category '" + *cat + "'");
            }
        }
        const auto strat = r.string(a, path, "strategy", true);
        if (strat) {
            if (auto st = parse_strategy(*strat)) {
                spec.strategy = *st;
            } else {
                r.fail(path + ".strategy", "unknown strategy '" + *strat + "'");
            }
        }
        spec.count = static_cast<int>(r.integer(a, path, "count", 1));
        if (spec.count < 1) r.fail(path + ".count", "must be >= 1");
        spec.capital = parse_capital(r, a, path);
        spec.start_block = r.integer(a, path, "start_block", 0);
        if (spec.start_block < 0 || spec.start_block >= s.horizon_blocks) {
            r.fail(path + ".start_block", "must lie inside the horizon");
        }
        if (a.contains("first_address")) {
            const auto fa = r.integer(a, path, "first_address", 0);
            if (fa < 0) {
                r.fail(path + ".first_address", "must be >= 0");
            } else {
                spec.first_address = static_cast<std::uint32_t>(fa);
            }
        }
        spec.params.token = r.token(a, path, "token", s.tokens, true);
        spec.params.borrow_token = r.token(a, path, "borrow_token", s.tokens, spec.strategy == Strategy::BorrowAndHold);
        parse_strategy_params(r, a, path, spec.params);

        if (spec.params.token && !pool_for(s, *spec.params.token)) r.fail(path + ".token", "token has no lending pool");
        if (spec.params.borrow_token && !pool_for(s, *spec.params.borrow_token)) {
            r.fail(path + ".borrow_token", "token has no lending pool");
        }
        if (spec.strategy == Strategy::LeverageLoop && spec.params.token) {
            if (const PoolSpec* pool = pool_for(s, *spec.params.token)) {
                if (spec.params.loop_fraction.is_negative() ||
                    spec.params.loop_fraction > pool->collateral.collateral_factor()) {
                    r.fail(path + ".params.loop_fraction", "must not exceed 1 - haircut of the target token");
                }
            }
        }
        if (spec.strategy == Strategy::MicroAirdrop && spec.params.token) {
            if (spec.capital.dist != CapitalDist::Fixed) {
                r.fail(path + ".capital", "micro deposits need a fixed amount");
            } else {
                try {
                    micro_airdrop_wave(spec.count, spec.capital.a, *spec.params.token, s.tokens);
                } catch (const Error& e) {
                    r.fail(path, e.what());
                }
            }
        }
        s.agents.push_back(spec);
    }
    const bool any = std::any_of(s.agents.begin(), s.agents.end(), [](const AgentSpec& a) { return a.first_address.has_value(); });
    const bool all = std::all_of(s.agents.begin(), s.agents.end(), [](const AgentSpec& a) { return a.first_address.has_value(); });
    if (any && !all) {
        r.fail("agents", "first_address must be set on every agent block or none");
    } else if (any) {
        std::vector<std::pair<std::uint32_t, int>> ranges;
        for (const auto& a : s.agents) ranges.emplace_back(*a.first_address, a.count);
        std::sort(ranges.begin(), ranges.end());
        std::uint32_t next = 0;
        for (const auto& [first, count] : ranges) {
            if (first != next) {
                r.fail("agents", "first_address ranges must tile 0..N-1 without gaps or overlap");
                break;
            }
            next = first + static_cast<std::uint32_t>(std::max(count, 0));
        }
    }
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
    Reader r;
    Scenario s;
    if (!doc.is_object()) throw ValidationError("", "scenario must be a JSON object");
    r.keys(doc, "",
           {"schema_version", "seed", "horizon_blocks", "seconds_per_block", "snapshot_interval",
            "utilization_convention", "oracle_amm_coupling", "tokens", "oracle", "correlation", "shocks", "pools",
            "liquidation", "reward_token", "amm_pools", "gas", "agents", "name", "description"});
    s.schema_version = static_cast<int>(r.integer(doc, "", "schema_version", 0, true));
    if (doc.contains("schema_version") && s.schema_version != kSchemaVersion) {
        r.fail("schema_version", "unsupported version (expected 1)");
    }
    if (doc.contains("seed")) {
        if (doc["seed"].is_number_unsigned() || doc["seed"].is_number_integer()) {
            s.seed = doc["seed"].get<std::uint64_t>();
        } else {
            r.fail("seed", "must be a non-negative integer");
        }
    }
    s.horizon_blocks = r.integer(doc, "", "horizon_blocks", 1, true);
    if (s.horizon_blocks < 1) r.fail("horizon_blocks", "must be >= 1");
    s.seconds_per_block = r.integer(doc, "", "seconds_per_block", 13);
    if (s.seconds_per_block <= 0 || s.seconds_per_block > kSecondsPerYear) {
        r.fail("seconds_per_block", "must be in (0, 31536000]");
    }
    s.snapshot_interval = r.integer(doc, "", "snapshot_interval", 1);
    if (s.snapshot_interval < 1) r.fail("snapshot_interval", "must be >= 1");
    if (const auto conv = r.string(doc, "", "utilization_convention", false)) {
        if (*conv == "cash_plus_borrows") {
            s.convention = UtilizationConvention::CashPlusBorrows;
        } else if (*conv == "deposits_plus_reserves") {
            s.convention = UtilizationConvention::DepositsPlusReserves;
        } else {
            r.fail("utilization_convention", "must be cash_plus_borrows or deposits_plus_reserves");
        }
    }
    s.oracle_amm_coupling = r.boolean(doc, "", "oracle_amm_coupling", false);

    parse_tokens(r, doc, s);
    parse_oracles(r, doc, s, base_dir);
    parse_correlation(r, doc, s);

    if (const json* shocks = r.array(doc, "", "shocks", false)) {
        for (std::size_t i = 0; i < shocks->size(); ++i) {
            const json& sh = (*shocks)[i];
            const std::string path = Reader::at("shocks", i);
            if (!sh.is_object()) {
                r.fail(path, "must be an object");
                continue;
            }
            r.keys(sh, path, {"token", "block", "multiplier"});
            const auto token = r.token(sh, path, "token", s.tokens, true);
            const auto block = r.integer(sh, path, "block", 0, true);
            const auto mult = r.wad_required(sh, path, "multiplier");
            if (block < 0 || block >= s.horizon_blocks) r.fail(path + ".block", "must lie inside the horizon");
            if (mult && !mult->is_positive()) r.fail(path + ".multiplier", "must be > 0");
            if (token && mult) s.shocks.push_back({*token, block, *mult});
        }
    }

    parse_pools(r, doc, s);

    if (const json* liq = r.object(doc, "", "liquidation", false)) {
        r.keys(*liq, "liquidation", {"close_factor", "incentive"});
        s.liquidation.close_factor = r.wad_field(*liq, "liquidation", "close_factor", s.liquidation.close_factor);
        s.liquidation.incentive = r.wad_field(*liq, "liquidation", "incentive", s.liquidation.incentive);
    }
    {
        std::vector<CollateralConfig> coll;
        for (const auto& p : s.pools) coll.push_back(p.collateral);
        try {
            s.liquidation.validate(coll);
        } catch (const Error& e) {
            r.fail("liquidation", e.what());
        }
    }
    s.reward_token = r.token(doc, "", "reward_token", s.tokens, false);
    const bool any_speed =
        std::any_of(s.pools.begin(), s.pools.end(), [](const PoolSpec& p) { return p.reward_speed.is_positive(); });
    if (any_speed && !s.reward_token) r.fail("reward_token", "required when any pool has a reward speed");

    parse_amms(r, doc, s);
    parse_gas(r, doc, s);
    parse_agents(r, doc, s);

    if (!r.ok()) throw ValidationError(r.take());
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("scenario", "cannot open scenario file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("scenario", std::string("invalid JSON: ") + e.what());
    }
    return parse_scenario(doc, path.parent_path());
}

std::string dotted_to_pointer(const std::string& path) {
    std::string out;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        std::string escaped;
        for (char c : part) {
            if (c == '~') {
                escaped += "~0";
            } else if (c == '/') {
                escaped += "~1";
            } else {
                escaped += c;
            }
        }
        out += "/" + escaped;
    }
    return out;
}

namespace {

bool set_path(json& node, const std::vector<std::string>& parts, std::size_t i, const json& value) {
    const std::string& key = parts[i];
    const bool leaf = i + 1 == parts.size();
    if (node.is_array()) {
        if (key == "*") {
            if (node.empty()) return false;
            for (auto& child : node) {
                if (leaf) {
                    child = value;
                } else if (!set_path(child, parts, i + 1, value)) {
                    return false;
                }
            }
            return true;
        }
        if (key.empty() || !std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return false;
        }
        const auto idx = static_cast<std::size_t>(std::stoull(key));
        if (idx >= node.size()) return false;
        if (leaf) {
            node[idx] = value;
            return true;
        }
        return set_path(node[idx], parts, i + 1, value);
    }
    if (node.is_object()) {
        if (leaf) {
            node[key] = value;
            return true;
        }
        if (!node.contains(key)) return false;
        return set_path(node[key], parts, i + 1, value);
    }
    return false;
}

}  // namespace

void apply_override(json& doc, const std::string& path, const json& value) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty() || std::any_of(parts.begin(), parts.end(), [](const std::string& p) { return p.empty(); }) ||
        !set_path(doc, parts, 0, value)) {
        throw ValidationError(path, "parameter path does not resolve in the scenario");
    }
}

json parse_override_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);
    }
}

}  // namespace lendsim
