#include "pmfgn/corpus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "pmfgn/error.hpp"
#include "pmfgn/nn/rng.hpp"

namespace pmfgn::corpus {

Modality modality_of(Condition c) {
  switch (c) {
    case Condition::Greeting:
    case Condition::Praise:
      return Modality::General;
    case Condition::ImageBlank:
      return Modality::Image;
    case Condition::AudioSilent:
      return Modality::Audio;
    case Condition::TextIrrelevant:
    case Condition::TextRelevant:
      return Modality::Text;
  }
  return Modality::General;
}

namespace {

const std::vector<std::pair<Condition, std::string>> kConditionNames = {
    {Condition::Greeting, "greeting"},
    {Condition::Praise, "praise"},
    {Condition::ImageBlank, "image_blank"},
    {Condition::AudioSilent, "audio_silent"},
    {Condition::TextIrrelevant, "text_irrelevant"},
    {Condition::TextRelevant, "text_relevant"},
};

// Three phrasings of each remark; teachers pick a rotating subset.
const std::map<Condition, std::vector<Tokens>> kContent = {
    {Condition::Greeting, {{"hello"}, {"hi", "there"}, {"good", "day"}}},
    {Condition::Praise, {{"great", "job"}, {"well", "done"}, {"nice", "work"}}},
    {Condition::ImageBlank,
     {{"i", "cannot", "see", "you"}, {"the", "screen", "is", "black"}, {"check", "your", "camera"}}},
    {Condition::AudioSilent,
     {{"i", "cannot", "hear", "you"}, {"there", "is", "no", "sound"}, {"turn", "on", "your", "microphone"}}},
    {Condition::TextIrrelevant,
     {{"your", "answer", "is", "off", "topic"},
      {"this", "is", "the", "wrong", "question"},
      {"please", "answer", "the", "question"}}},
    {Condition::TextRelevant,
     {{"your", "answer", "is", "on", "topic"},
      {"clear", "and", "relevant", "answer"},
      {"you", "answered", "the", "question"}}},
};

const std::vector<std::string> kAddress = {"baby", "kiddo", "dear", "buddy", "champ", "sweetie", "pal", "friend"};
const std::vector<std::string> kInterjection = {"wow", "hmm", "oh", "hey", "yay", "aha", "well", "ah"};

const std::vector<std::vector<std::string>> kTopicPool = {
    {"add", "plus", "sum", "total", "carry", "digits", "column", "result"},
    {"shape", "circle", "square", "corner", "side", "triangle", "edge", "round"},
    {"clock", "hour", "minute", "time", "noon", "hand", "early", "late"},
    {"money", "coin", "price", "cost", "change", "cents", "buy", "shop"},
    {"candy", "share", "equal", "half", "give", "each", "split", "pieces"},
    {"stroke", "draw", "line", "cross", "point", "path", "trace", "pattern"},
};

const std::vector<std::string> kFillerPool = {"i", "think", "so", "and", "then", "um", "we", "it",
                                              "is", "a", "because", "first", "next", "get", "can", "to"};

std::string indexed(const std::string& base, int index, std::size_t pool) {
  const int round = index / static_cast<int>(pool);
  return round == 0 ? base : base + std::to_string(round + 1);
}

void check_probability(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(std::string("SynthSpec.") + field + " must be a probability in [0,1]");
  }
}

}  // namespace

std::string condition_name(Condition c) {
  for (const auto& [cond, name] : kConditionNames)
    if (cond == c) return name;
  return "unknown";
}

Condition condition_from_name(const std::string& name) {
  for (const auto& [cond, n] : kConditionNames)
    if (n == name) return cond;
  throw ValidationError("unknown feedback condition '" + name + "'");
}

void validate(const SynthSpec& spec) {
  if (spec.n_records < 1) throw ValidationError("SynthSpec.n_records must be >= 1");
  if (spec.n_teachers < 2) throw ValidationError("SynthSpec.n_teachers must be >= 2");
  check_probability(spec.defect_rates.blank_image, "defect_rates.blank_image");
  check_probability(spec.defect_rates.silent_audio, "defect_rates.silent_audio");
  check_probability(spec.defect_rates.irrelevant_text, "defect_rates.irrelevant_text");
  if (spec.variants_per_condition < 1 || spec.variants_per_condition > 3) {
    throw ValidationError("SynthSpec.variants_per_condition must be in [1,3]");
  }
  if (spec.n_topics < 2) throw ValidationError("SynthSpec.n_topics must be >= 2");
  if (spec.words_per_topic < 2) throw ValidationError("SynthSpec.words_per_topic must be >= 2");
  if (spec.n_fillers < 1) throw ValidationError("SynthSpec.n_fillers must be >= 1");
  const double min_window = 0.05;
  if (!(spec.min_audio_seconds >= min_window)) {
    throw ValidationError("SynthSpec.min_audio_seconds must cover one 50 ms window");
  }
  if (!(spec.max_audio_seconds >= spec.min_audio_seconds)) {
    throw ValidationError("SynthSpec.max_audio_seconds must be >= min_audio_seconds");
  }
  if (!spec.teacher_styles.empty()) {
    if (static_cast<int>(spec.teacher_styles.size()) != spec.n_teachers) {
      throw ValidationError("SynthSpec.teacher_style_templates must define n_teachers styles");
    }
    for (const auto& style : spec.teacher_styles) {
      for (const auto& [cond, name] : kConditionNames) {
        auto it = style.templates.find(cond);
        if (it == style.templates.end() || it->second.empty()) {
          throw ValidationError("SynthSpec.teacher_style_templates: teacher '" + style.teacher_id +
                                "' lacks templates for '" + name + "'");
        }
        for (const auto& t : it->second) {
          if (t.empty() || !(t.back() == "." || t.back() == "!" || t.back() == "?")) {
            throw ValidationError("SynthSpec.teacher_style_templates: templates must end with a delimiter");
          }
        }
      }
    }
  }
}

std::string teacher_id_for(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d", index);
  return buf;
}

std::vector<TeacherStyle> default_teacher_styles(int n_teachers, int variants_per_condition) {
  std::vector<TeacherStyle> styles;
  for (int j = 0; j < n_teachers; ++j) {
    TeacherStyle s;
    s.teacher_id = teacher_id_for(j);
    const std::string address = indexed(kAddress[j % kAddress.size()], j, kAddress.size());
    const std::string interj = indexed(kInterjection[j % kInterjection.size()], j, kInterjection.size());
    const int pattern = j % 3;
    s.markers = {address};
    if (pattern != 1) s.markers.push_back(interj);
    for (const auto& [cond, phrasings] : kContent) {
      std::vector<Tokens> variants;
      for (int v = 0; v < variants_per_condition; ++v) {
        const Tokens& content = phrasings[(j + v) % phrasings.size()];
        Tokens t;
        switch (pattern) {
          case 0:
            t.push_back(interj);
            t.insert(t.end(), content.begin(), content.end());
            t.push_back(address);
            t.push_back("!");
            break;
          case 1:
            t.push_back(address);
            t.push_back(",");
            t.insert(t.end(), content.begin(), content.end());
            t.push_back(".");
            break;
          default:
            t.insert(t.end(), content.begin(), content.end());
            t.push_back(",");
            t.push_back(interj);
            t.push_back(address);
            t.push_back(".");
            break;
        }
        variants.push_back(std::move(t));
      }
      s.templates.emplace(cond, std::move(variants));
    }
    styles.push_back(std::move(s));
  }
  return styles;
}

std::vector<TeacherStyle> resolved_styles(const SynthSpec& spec) {
  return spec.teacher_styles.empty() ? default_teacher_styles(spec.n_teachers, spec.variants_per_condition)
                                     : spec.teacher_styles;
}

std::vector<std::vector<std::string>> topic_words(const SynthSpec& spec) {
  std::vector<std::vector<std::string>> topics;
  for (int t = 0; t < spec.n_topics; ++t) {
    std::vector<std::string> words;
    for (int w = 0; w < spec.words_per_topic; ++w) {
      const auto& pool = kTopicPool[t % kTopicPool.size()];
      const int round = t / static_cast<int>(kTopicPool.size());
      std::string word = pool[w % pool.size()];
      if (round > 0 || w >= static_cast<int>(pool.size())) {
        word += "_" + std::to_string(round) + "_" + std::to_string(w / pool.size());
      }
      words.push_back(std::move(word));
    }
    topics.push_back(std::move(words));
  }
  return topics;
}

namespace {

std::vector<std::string> fillers(const SynthSpec& spec) {
  std::vector<std::string> out;
  for (int i = 0; i < spec.n_fillers; ++i) {
    out.push_back(indexed(kFillerPool[i % kFillerPool.size()], i, kFillerPool.size()));
  }
  return out;
}

Image make_image(nn::Rng& rng, bool blank) {
  Image img;
  img.data.assign(static_cast<std::size_t>(kImageSize) * kImageSize, 0);
  if (blank) return img;
  const double background = rng.uniform(40.0, 200.0);
  std::vector<double> px(img.data.size(), background);
  const int shapes = 1 + static_cast<int>(rng.index(3));
  for (int s = 0; s < shapes; ++s) {
    const int r0 = static_cast<int>(rng.index(48)), c0 = static_cast<int>(rng.index(48));
    const int h = 8 + static_cast<int>(rng.index(16)), w = 8 + static_cast<int>(rng.index(16));
    const double level = rng.uniform(20.0, 255.0);
    for (int r = r0; r < std::min(kImageSize, r0 + h); ++r)
      for (int c = c0; c < std::min(kImageSize, c0 + w); ++c) px[r * kImageSize + c] = level;
  }
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = px[i] + rng.uniform(-20.0, 20.0);
    img.data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 1L, 255L));
  }
  return img;
}

Waveform make_audio(nn::Rng& rng, const SynthSpec& spec, bool silent) {
  Waveform w;
  const double seconds = rng.uniform(spec.min_audio_seconds, spec.max_audio_seconds);
  const auto n = static_cast<std::size_t>(std::lround(seconds * kSampleRate));
  w.samples.assign(n, 0);
  if (silent) return w;
  const double f0 = rng.uniform(120.0, 300.0);
  const double amp = rng.uniform(0.1, 0.5) * 32767.0;
  const double syllable_hz = rng.uniform(3.0, 6.0);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRate;
    double v = 0.0;
    for (int h = 1; h <= 3; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * t + phase * h) / h;
    const double envelope = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * syllable_hz * t);
    v = amp * envelope * v / 1.84 + rng.uniform(-300.0, 300.0);
    w.samples[i] = static_cast<std::int16_t>(std::clamp(std::lround(v), -32768L, 32767L));
  }
  return w;
}

Tokens make_speech(nn::Rng& rng, const std::vector<std::string>& topic, const std::vector<std::string>& filler) {
  const int len = 5 + static_cast<int>(rng.index(6));
  Tokens t;
  int topical = 0;
  for (int i = 0; i < len; ++i) {
    if (rng.bernoulli(0.5)) {
      t.push_back(topic[rng.index(topic.size())]);
      ++topical;
    } else {
      t.push_back(filler[rng.index(filler.size())]);
    }
  }
  // At least two topic words so a relevant answer is recognizable.
  for (int i = 0; topical < 2 && i < len; ++i) {
    if (std::find(topic.begin(), topic.end(), t[i]) == topic.end()) {
      t[i] = topic[rng.index(topic.size())];
      ++topical;
    }
  }
  return t;
}

}  // namespace

Corpus synth_generate(const SynthSpec& spec) {
  validate(spec);
  nn::Rng rng(spec.seed);
  const auto styles = resolved_styles(spec);
  const auto topics = topic_words(spec);
  const auto filler = fillers(spec);

  Corpus corpus;
  corpus.reserve(spec.n_records);
  for (int i = 0; i < spec.n_records; ++i) {
    AssignmentRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "rec%05d", i);
    rec.id = id;
    const TeacherStyle& style = styles[i % styles.size()];
    rec.teacher_id = style.teacher_id;

    const bool blank = rng.bernoulli(spec.defect_rates.blank_image);
    const bool silent = rng.bernoulli(spec.defect_rates.silent_audio);
    const bool irrelevant = rng.bernoulli(spec.defect_rates.irrelevant_text);

    rec.image = make_image(rng, blank);
    rec.audio = make_audio(rng, spec, silent);

    const std::size_t q_topic = rng.index(topics.size());
    std::size_t s_topic = q_topic;
    if (irrelevant) {
      s_topic = rng.index(topics.size() - 1);
      if (s_topic >= q_topic) ++s_topic;
    }
    rec.question_tokens = {"please", "explain"};
    const int q_words = 2 + static_cast<int>(rng.index(3));
    for (int k = 0; k < q_words; ++k) rec.question_tokens.push_back(topics[q_topic][rng.index(topics[q_topic].size())]);
    rec.speech_tokens = make_speech(rng, topics[s_topic], filler);

    std::vector<Condition> sentences;
    std::vector<Condition> defects;
    if (blank) defects.push_back(Condition::ImageBlank);
    if (silent) defects.push_back(Condition::AudioSilent);
    if (irrelevant) defects.push_back(Condition::TextIrrelevant);
    // The opening sentence is the same kind for every record: the decoder sees
    // nothing record-specific before its first gated step.
    sentences.push_back(Condition::Greeting);
    if (defects.empty()) {
      sentences.push_back(Condition::TextRelevant);
      sentences.push_back(Condition::Praise);
    } else {
      sentences.insert(sentences.end(), defects.begin(), defects.begin() + std::min<std::size_t>(2, defects.size()));
    }

    std::vector<const std::vector<Tokens>*> options;
    for (Condition c : sentences) {
      const auto& variants = style.templates.at(c);
      options.push_back(&variants);
      const Tokens& chosen = variants[rng.index(variants.size())];
      rec.feedback_tokens.insert(rec.feedback_tokens.end(), chosen.begin(), chosen.end());
      rec.modality_labels.insert(rec.modality_labels.end(), chosen.size(), static_cast<int>(modality_of(c)));
    }

    // Every combination of same-teacher phrasings for the same conditions.
    std::vector<std::size_t> pick(options.size(), 0);
    while (true) {
      Tokens ref;
      for (std::size_t s = 0; s < options.size(); ++s) {
        const Tokens& t = (*options[s])[pick[s]];
        ref.insert(ref.end(), t.begin(), t.end());
      }
      rec.references.push_back(std::move(ref));
      std::size_t s = 0;
      while (s < pick.size() && ++pick[s] == options[s]->size()) pick[s++] = 0;
      if (s == pick.size()) break;
    }
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

}  // namespace pmfgn::corpus
