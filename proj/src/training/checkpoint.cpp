#include "pmfgn/training/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "pmfgn/corpus/corpus_io.hpp"

namespace pmfgn::training {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'M', 'F', 'G', 'N', 'C', 'K', '1'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

std::vector<std::string> vocab_tokens(const corpus::Vocabulary& v) {
  return {v.tokens().begin() + corpus::Vocabulary::kReserved, v.tokens().end()};
}

}  // namespace

std::string encode_checkpoint(const Checkpoint& ck) {
  if (!ck.model) throw Error("checkpoint has no model");
  const auto& store = ck.model->params();
  json params = json::array();
  for (nn::ParamId id : store.ids()) {
    params.push_back({{"name", store.name(id)}, {"rows", store.value(id).rows()}, {"cols", store.value(id).cols()}});
  }
  json header{{"version", kCheckpointVersion},
              {"train_config", to_json(ck.train_config)},
              {"model_config", to_json(ck.model->config())},
              {"input_vocab", vocab_tokens(ck.input_vocab)},
              {"output_vocab", vocab_tokens(ck.output_vocab)},
              {"epoch", ck.epoch},
              {"val_history", ck.val_history},
              {"rng_state", ck.rng_state},
              {"params", params}};
  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out += text;
  for (nn::ParamId id : store.ids()) {
    const nn::Matrix& v = store.value(id);
    for (Eigen::Index i = 0; i < v.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(v.data()[i]));
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  const std::uint64_t header_len = get_u64(bytes, 8);
  if (header_len > bytes.size() - 16) throw FormatError("checkpoint truncated inside header");
  json header;
  try {
    header = json::parse(bytes.substr(16, header_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  try {
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    const auto& params = header.at("params");
    std::uint64_t scalars = 0;
    for (const auto& p : params) scalars += p.at("rows").get<std::uint64_t>() * p.at("cols").get<std::uint64_t>();
    const std::uint64_t expected = 16 + header_len + 8 * scalars;
    if (bytes.size() != expected) {
      throw FormatError("checkpoint size " + std::to_string(bytes.size()) + " does not match expected " +
                        std::to_string(expected) + " bytes");
    }

    Checkpoint ck;
    ck.train_config = train_config_from_json(header.at("train_config"));
    ck.input_vocab = corpus::Vocabulary(header.at("input_vocab").get<std::vector<std::string>>());
    ck.output_vocab = corpus::Vocabulary(header.at("output_vocab").get<std::vector<std::string>>());
    ck.epoch = header.at("epoch").get<int>();
    ck.val_history = header.at("val_history").get<std::vector<double>>();
    ck.rng_state = header.at("rng_state").get<std::string>();
    auto model = std::make_shared<model::Model>(model_config_from_json(header.at("model_config")));
    auto& store = model->params();
    if (params.size() != store.size()) throw FormatError("checkpoint parameter count does not match the model");
    std::size_t pos = 16 + header_len;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const nn::ParamId id{static_cast<int>(k)};
      nn::Matrix& v = store.value(id);
      if (params[k].at("name").get<std::string>() != store.name(id) || params[k].at("rows").get<long>() != v.rows() ||
          params[k].at("cols").get<long>() != v.cols()) {
        throw FormatError("checkpoint parameter '" + params[k].at("name").get<std::string>() +
                          "' does not match the model layout");
      }
      for (Eigen::Index i = 0; i < v.size(); ++i, pos += 8) v.data()[i] = std::bit_cast<double>(get_u64(bytes, pos));
    }
    ck.model = std::move(model);
    return ck;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  corpus::write_file(path, encode_checkpoint(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(corpus::read_file(path)); }

}  // namespace pmfgn::training
