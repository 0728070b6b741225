#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmfgn::corpus {

using Tokens = std::vector<std::string>;

enum class Modality : int { General = 0, Image = 1, Audio = 2, Text = 3 };
inline constexpr int kNumModalities = 4;

inline constexpr int kImageSize = 64;
inline constexpr int kSampleRate = 16000;

// 8-bit grayscale, row-major.
struct Image {
  int width = kImageSize;
  int height = kImageSize;
  std::vector<std::uint8_t> data;

  std::uint8_t at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
  friend bool operator==(const Image&, const Image&) = default;
};

// Mono 16-bit PCM.
struct Waveform {
  int sample_rate = kSampleRate;
  std::vector<std::int16_t> samples;

  friend bool operator==(const Waveform&, const Waveform&) = default;
};

struct AssignmentRecord {
  std::string id;
  std::string teacher_id;
  Image image;
  Waveform audio;
  Tokens speech_tokens;
  Tokens question_tokens;
  Tokens feedback_tokens;
  std::vector<int> modality_labels;
  std::vector<Tokens> references;

  friend bool operator==(const AssignmentRecord&, const AssignmentRecord&) = default;
};

using Corpus = std::vector<AssignmentRecord>;

// Throws ValidationError naming the violated invariant.
void validate(const AssignmentRecord& record);

}  // namespace pmfgn::corpus
