#pragma once

#include <filesystem>
#include <string>

#include "pmfgn/training/trainer.hpp"

namespace pmfgn::training {

inline constexpr int kCheckpointVersion = 1;

// Layout: 8-byte magic "PMFGNCK1", uint64 LE header length, JSON header
// (version, configs, vocabularies, history, RNG state, parameter names and
// shapes), then every parameter as column-major LE float64 in header order.
std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
// Throws FormatError on a wrong magic, version or size; nothing is returned
// from a partial read.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pmfgn::training
