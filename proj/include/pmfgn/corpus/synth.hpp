#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::corpus {

// Planted feedback conditions. Each maps to exactly one modality label.
enum class Condition {
  Greeting,        // general
  Praise,          // general
  ImageBlank,      // image
  AudioSilent,     // audio
  TextIrrelevant,  // text
  TextRelevant,    // text
};

Modality modality_of(Condition c);
std::string condition_name(Condition c);
Condition condition_from_name(const std::string& name);

struct DefectRates {
  double blank_image = 0.25;
  double silent_audio = 0.25;
  double irrelevant_text = 0.25;
};

// One teacher's phrasing: for every condition a list of interchangeable
// sentence templates (each ending in a sentence delimiter), plus the tokens
// that only this teacher uses.
struct TeacherStyle {
  std::string teacher_id;
  std::map<Condition, std::vector<Tokens>> templates;
  std::vector<std::string> markers;
};

struct SynthSpec {
  int n_records = 200;
  int n_teachers = 4;
  DefectRates defect_rates;
  // Templates per (teacher, condition) when styles are generated.
  int variants_per_condition = 2;
  // Input-side vocabulary shape: topics of disjoint content words plus
  // topic-neutral filler words.
  int n_topics = 4;
  int words_per_topic = 6;
  int n_fillers = 8;
  double min_audio_seconds = 0.5;
  double max_audio_seconds = 1.0;
  std::uint64_t seed = 1;
  // Empty means default_teacher_styles(n_teachers, variants_per_condition).
  std::vector<TeacherStyle> teacher_styles;
};

// Throws ValidationError naming the offending field.
void validate(const SynthSpec& spec);

std::string teacher_id_for(int index);

std::vector<TeacherStyle> default_teacher_styles(int n_teachers, int variants_per_condition);

// The spec's styles, or the defaults when none are given.
std::vector<TeacherStyle> resolved_styles(const SynthSpec& spec);

// Deterministic in spec (including seed). Record i is written by teacher
// i mod n_teachers. Feedback consists of 2-3 sentences:
//   no defects  -> greeting, relevant-answer remark, praise
//   otherwise   -> greeting, one remark per defect in image, audio, text
//                  order, at most two
// Defects are physically present in the inputs: blank images are all zero,
// silent audio is all zero, and irrelevant speech shares no topic word with
// the question.
Corpus synth_generate(const SynthSpec& spec);

// Topic word lists used for question/speech generation.
std::vector<std::vector<std::string>> topic_words(const SynthSpec& spec);

}  // namespace pmfgn::corpus
