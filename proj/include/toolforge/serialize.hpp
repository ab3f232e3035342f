#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "toolforge/dialog.hpp"

namespace toolforge {

// samples.jsonl record:
//   {"sample_id", "system_prompt", "tools": [api...], "turns": [...],
//    "dialog_type", "complexity": {"loss", "token_count"} | null, "provenance": {...}}
// Turns exclude the system turn (it is rebuilt from system_prompt). Assistant
// call turns carry both "calls" (structured) and "call_string" (canonical).

Json turn_to_json(const DialogTurn& turn);
DialogTurn turn_from_json(const Json& j);

Json sample_to_json(const DataSample& sample);
/// Throws ContractError on records that are not DataSample-shaped. Tool
/// definitions are read leniently so that verification can diagnose them.
DataSample sample_from_json(const Json& j);

/// One compact line, no trailing newline. Deterministic for equal inputs.
std::string to_jsonl_line(const Json& j);

std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

std::vector<DataSample> read_samples(const std::filesystem::path& path);
void write_samples(const std::filesystem::path& path, const std::vector<DataSample>& samples);
std::vector<ApiDefinition> read_apis(const std::filesystem::path& path);
void write_apis(const std::filesystem::path& path, const std::vector<ApiDefinition>& apis);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace toolforge
