#pragma once

#include <filesystem>

#include "rationmem/memory_net.hpp"
#include "rationmem/trainer.hpp"

namespace rationmem {

// Single self-describing file: a human-readable text header (magic line,
// header byte count, JSON with format version, category, config echo,
// vocabulary and tensor manifest) followed by the raw little-endian float64
// tensor payload. Round-trips are bit-exact; see docs/formats.md.
void save_checkpoint(const std::filesystem::path& path, const MemoryNetModel& model,
                     const TrainingConfig& config);

struct LoadedCheckpoint {
    MemoryNetModel model;
    TrainingConfig config;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rationmem
