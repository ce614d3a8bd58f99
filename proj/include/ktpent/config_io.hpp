#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

#include "ktpent/dispersion.hpp"
#include "ktpent/phase_matching.hpp"
#include "ktpent/source_budget.hpp"

namespace ktpent {

using Json = nlohmann::json;

/// Reads and parses a JSON file. IoError if unreadable, ValidationError if malformed.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

SellmeierModel sellmeier_from_json(const Json& j);
Json to_json(const SellmeierModel& model);
SellmeierModel load_sellmeier_file(const std::filesystem::path& path);

/// Resolves a `sellmeier` entry given as a string (file name) to its JSON.
using ModelResolver = std::function<Json(const std::string&)>;

CrystalSpec crystal_from_json(const Json& j, const ModelResolver& resolve);
/// Relative model paths resolve against the crystal file's directory.
CrystalSpec load_crystal_file(const std::filesystem::path& path);
/// Default PPKTP crystal compiled into the library.
CrystalSpec default_crystal();
Json to_json(const CrystalSpec& crystal);

LossChain loss_chain_from_json(const Json& j);
Json to_json(const LossChain& chain);

/// 64-bit FNV-1a, rendered as 16 hex digits. Stable across platforms.
std::string fnv1a_hex(const std::string& text);

}  // namespace ktpent
