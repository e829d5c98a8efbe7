#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lendsim/analytics/flows.hpp"
#include "lendsim/engine.hpp"
#include "lendsim/scenario.hpp"

namespace lendsim::io {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Reads a scenario document. Unreadable files and bad JSON are validation
/// errors on the `scenario` field.
nlohmann::json read_scenario_doc(const std::filesystem::path& path);

/// Quotes a CSV field when it holds a comma, quote or newline.
std::string csv_field(std::string_view text);
std::vector<std::string> split_csv_line(const std::string& line);

/// The files a run directory holds besides manifest.json, in write order.
const std::vector<std::string>& run_files();

struct RunInputs {
    nlohmann::json scenario;   // effective document, overrides applied
    std::string scenario_path;
    std::filesystem::path scenario_dir;
    nlohmann::json overrides = nlohmann::json::object();
};

/// Writes every run file and then manifest.json, which lists the SHA-256 of
/// each file. Creates `dir` if needed.
void write_run(const std::filesystem::path& dir, const RunOutput& out, const RunInputs& inputs);

void write_snapshots(std::ostream& os, const RunOutput& out);
void write_risk(std::ostream& os, const RunOutput& out);
void write_agents(std::ostream& os, const RunOutput& out);
void write_rewards(std::ostream& os, const RunOutput& out);
void write_prices(std::ostream& os, const RunOutput& out);
void write_amm(std::ostream& os, const RunOutput& out);
void write_rejections(std::ostream& os, const RunOutput& out);
void write_liquidations(std::ostream& os, const RunOutput& out);
void write_liquidation_blocks(std::ostream& os, const RunOutput& out);
nlohmann::ordered_json summary_json(const RunSummary& s);

/// What analytics needs back from a run directory.
struct RunData {
    nlohmann::json manifest;
    Scenario scenario;
    Ledger ledger;
    std::vector<PoolSnapshot> snapshots;
    std::vector<PriceRow> prices;
    analytics::CategoryMap categories;
};

/// Missing or unreadable files raise Errc::Io; a bad scenario raises
/// ValidationError.
RunData read_run(const std::filesystem::path& dir);

}  // namespace lendsim::io
