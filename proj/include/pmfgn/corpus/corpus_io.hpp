#pragma once

#include <filesystem>
#include <string>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::corpus {

// Binary PGM (P5, maxval 255).
std::string encode_pgm(const Image& image);
Image decode_pgm(const std::string& bytes);

// RIFF WAVE, PCM 16-bit little-endian, mono.
std::string encode_wav(const Waveform& wave);
Waveform decode_wav(const std::string& bytes);

// Layout: manifest.jsonl, images/<id>.pgm, audio/<id>.wav.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace pmfgn::corpus
