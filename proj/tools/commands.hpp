#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace xmg::cli {

// Command implementations. Each throws xmg::Error subtypes; main maps them
// to exit codes (1 usage, 2 data, 3 numeric).

void cmd_synth(const std::string& language, const std::filesystem::path& out_dir, int files,
               int notes, std::uint64_t seed);

void cmd_calibrate(const std::filesystem::path& midi_dir, const std::filesystem::path& out_config,
                   const std::filesystem::path& report_dir, const RunConfig& cfg);

void cmd_encode(const std::vector<std::filesystem::path>& files,
                const std::filesystem::path& config_path, const std::filesystem::path& out_dir);

void cmd_decode(const std::vector<std::filesystem::path>& files,
                const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                int ppq);

void cmd_train(const std::filesystem::path& tokens_dir, const std::filesystem::path& out_dir,
               const RunConfig& cfg, const std::string& submodel_filter, bool resume,
               bool independent);

void cmd_generate(const std::filesystem::path& checkpoint_dir,
                  const std::filesystem::path& config_path,
                  const std::filesystem::path& heldout_dir, const std::filesystem::path& out_dir,
                  const RunConfig& cfg);

}  // namespace xmg::cli
