#include "pmfgn/corpus/corpus_io.hpp"

#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pmfgn/error.hpp"

namespace pmfgn::corpus {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string encode_pgm(const Image& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data.data()), image.data.size());
  return out;
}

Image decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos == start || pos - start > 9) throw FormatError("bad PGM header");
    return std::stol(bytes.substr(start, pos - start));
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("not a binary PGM (P5)");
  pos = 2;
  const long w = read_int();
  const long h = read_int();
  const long maxval = read_int();
  if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("unsupported PGM geometry or maxval");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("bad PGM header terminator");
  }
  ++pos;
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos != n) throw FormatError("PGM pixel data has wrong length");
  Image img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.data.assign(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos),
                  reinterpret_cast<const std::uint8_t*>(bytes.data() + pos) + n);
  return img;
}

namespace {

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& s, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
  return v;
}
std::uint16_t get_u16(const std::string& s, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[at]) |
                                    (static_cast<unsigned char>(s[at + 1]) << 8));
}

}  // namespace

std::string encode_wav(const Waveform& wave) {
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::string s = "RIFF";
  put_u32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  put_u32(s, 16);
  put_u16(s, 1);  // PCM
  put_u16(s, 1);  // mono
  put_u32(s, static_cast<std::uint32_t>(wave.sample_rate));
  put_u32(s, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  put_u16(s, 2);
  put_u16(s, 16);
  s += "data";
  put_u32(s, data_bytes);
  for (std::int16_t v : wave.samples) put_u16(s, static_cast<std::uint16_t>(v));
  return s;
}

Waveform decode_wav(const std::string& bytes) {
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw FormatError("not a RIFF WAVE file");
  }
  std::size_t pos = 12;
  bool have_fmt = false;
  Waveform w;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = get_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw FormatError("WAVE chunk '" + id + "' is truncated");
    if (id == "fmt ") {
      if (size < 16) throw FormatError("WAVE fmt chunk too short");
      const auto format = get_u16(bytes, body);
      const auto channels = get_u16(bytes, body + 2);
      const auto bits = get_u16(bytes, body + 14);
      if (format != 1 || channels != 1 || bits != 16) throw FormatError("WAVE must be PCM 16-bit mono");
      w.sample_rate = static_cast<int>(get_u32(bytes, body + 4));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("WAVE data chunk before fmt chunk");
      if (size % 2 != 0) throw FormatError("WAVE data chunk has odd length");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        w.samples[i] = static_cast<std::int16_t>(get_u16(bytes, body + 2 * i));
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError("WAVE file has no data chunk");
}

namespace {

json tokens_json(const Tokens& t) { return json(t); }

Tokens tokens_from(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array()) throw FormatError(std::string("missing array field '") + field + "'");
  Tokens out;
  for (const auto& v : j[field]) {
    if (!v.is_string()) throw FormatError(std::string("field '") + field + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string string_from(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_string()) throw FormatError(std::string("missing string field '") + field + "'");
  return j[field].get<std::string>();
}

}  // namespace

void save_corpus(const Corpus& corpus, const fs::path& dir) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "audio");
  std::string manifest;
  for (const auto& r : corpus) {
    validate(r);
    const std::string image_rel = "images/" + r.id + ".pgm";
    const std::string audio_rel = "audio/" + r.id + ".wav";
    json j;
    j["id"] = r.id;
    j["teacher_id"] = r.teacher_id;
    j["image"] = image_rel;
    j["audio"] = audio_rel;
    j["speech_tokens"] = tokens_json(r.speech_tokens);
    j["question_tokens"] = tokens_json(r.question_tokens);
    j["feedback_tokens"] = tokens_json(r.feedback_tokens);
    j["modality_labels"] = r.modality_labels;
    json refs = json::array();
    for (const auto& ref : r.references) refs.push_back(tokens_json(ref));
    j["references"] = refs;
    manifest += j.dump() + "\n";
    write_file(dir / image_rel, encode_pgm(r.image));
    write_file(dir / audio_rel, encode_wav(r.audio));
  }
  write_file(dir / "manifest.jsonl", manifest);
}

Corpus load_corpus(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.jsonl";
  if (!fs::exists(manifest_path)) throw FormatError("corpus directory lacks manifest.jsonl: " + dir.string());
  std::istringstream lines(read_file(manifest_path));
  Corpus corpus;
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    AssignmentRecord r;
    std::string image_rel, audio_rel;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw FormatError("record is not a JSON object");
      r.id = string_from(j, "id");
      r.teacher_id = string_from(j, "teacher_id");
      image_rel = string_from(j, "image");
      audio_rel = string_from(j, "audio");
      r.speech_tokens = tokens_from(j, "speech_tokens");
      r.question_tokens = tokens_from(j, "question_tokens");
      r.feedback_tokens = tokens_from(j, "feedback_tokens");
      if (!j.contains("modality_labels") || !j["modality_labels"].is_array()) {
        throw FormatError("missing array field 'modality_labels'");
      }
      for (const auto& v : j["modality_labels"]) {
        if (!v.is_number_integer()) throw FormatError("modality_labels must be integers");
        r.modality_labels.push_back(v.get<int>());
      }
      if (!j.contains("references") || !j["references"].is_array()) {
        throw FormatError("missing array field 'references'");
      }
      for (const auto& ref : j["references"]) {
        json wrapper;
        wrapper["r"] = ref;
        r.references.push_back(tokens_from(wrapper, "r"));
      }
    } catch (const json::exception& e) {
      throw FormatError("manifest.jsonl line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest.jsonl line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      const fs::path image_path = dir / image_rel;
      if (!fs::exists(image_path)) throw FormatError("missing image file " + image_rel);
      r.image = decode_pgm(read_file(image_path));
      const fs::path audio_path = dir / audio_rel;
      if (!fs::exists(audio_path)) throw FormatError("missing audio file " + audio_rel);
      r.audio = decode_wav(read_file(audio_path));
      validate(r);
    } catch (const Error& e) {
      throw FormatError("record '" + r.id + "': " + e.what());
    }
    corpus.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace pmfgn::corpus
