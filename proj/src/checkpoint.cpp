#include <bit>
#include <cstring>
#include <sstream>

#include "smiley/binary_io.hpp"
#include "smiley/model.hpp"
#include "smiley/text.hpp"

namespace smiley {
namespace {

constexpr char kMagic[8] = {'S', 'M', 'L', 'Y', 'C', 'K', 'P', 'T'};
constexpr std::uint16_t kVersion = 1;

void write_config(std::ostream& out, const ModelConfig& cfg) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.input_dim));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.embed_dim));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.hidden.size()));
  for (auto h : cfg.hidden) write_le<std::uint32_t>(out, static_cast<std::uint32_t>(h));
  write_le<std::uint8_t>(out, static_cast<std::uint8_t>(cfg.activation));
  write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(cfg.init_scale));
  write_le<std::uint64_t>(out, cfg.seed);
}

ModelConfig read_config(std::istream& in) {
  ModelConfig cfg;
  cfg.input_dim = read_le<std::uint32_t>(in, "model config");
  cfg.embed_dim = read_le<std::uint32_t>(in, "model config");
  auto n_hidden = read_le<std::uint32_t>(in, "model config");
  if (n_hidden > 64) throw Error(ErrorCode::ParseError, "implausible hidden layer count");
  for (std::uint32_t i = 0; i < n_hidden; ++i) cfg.hidden.push_back(read_le<std::uint32_t>(in, "model config"));
  auto act = read_le<std::uint8_t>(in, "model config");
  if (act != static_cast<std::uint8_t>(Activation::Relu)) throw Error(ErrorCode::ParseError, "unknown activation");
  cfg.init_scale = std::bit_cast<double>(read_le<std::uint64_t>(in, "model config"));
  cfg.seed = read_le<std::uint64_t>(in, "model config");
  return cfg;
}

}  // namespace

std::string encode_checkpoint(const EmbedderParams& params, const TransferHead* head,
                              const EmojiTaxonomy& tax, std::uint64_t seed) {
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, sizeof kMagic);
  write_le<std::uint16_t>(out, kVersion);
  write_config(out, params.config);
  auto hash = tax.hash();
  out.write(reinterpret_cast<const char*>(hash.data()), hash.size());
  write_le<std::uint64_t>(out, seed);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (const auto& t : params.tensors) write_tensor(out, t);
  write_le<std::uint8_t>(out, head ? 1 : 0);
  if (head) {
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(head->activation));
    write_tensor(out, head->weight);
    write_tensor(out, head->bias);
  }
  return out.str();
}

Checkpoint decode_checkpoint(std::string_view bytes, const EmojiTaxonomy& tax) {
  std::istringstream in(std::string(bytes), std::ios::binary);
  char magic[8];
  read_exact(in, magic, sizeof magic, "checkpoint magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(ErrorCode::ParseError, "not a checkpoint");
  auto version = read_le<std::uint16_t>(in, "checkpoint version");
  if (version != kVersion) {
    throw Error(ErrorCode::ParseError, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.embedder.config = read_config(in);
  read_exact(in, reinterpret_cast<char*>(ck.taxonomy_hash.data()), ck.taxonomy_hash.size(), "taxonomy hash");
  if (ck.taxonomy_hash != tax.hash()) {
    throw Error(ErrorCode::CompatibilityError, "checkpoint was trained against a different taxonomy");
  }
  if (ck.embedder.config.embed_dim != tax.size()) {
    throw Error(ErrorCode::CompatibilityError, "embedding size differs from taxonomy size");
  }
  ck.seed = read_le<std::uint64_t>(in, "seed");

  auto count = read_le<std::uint32_t>(in, "tensor count");
  const auto dims = layer_dims(ck.embedder.config);
  if (count != 2 * (dims.size() - 1)) throw Error(ErrorCode::ParseError, "tensor count does not match config");
  for (std::uint32_t i = 0; i < count; ++i) {
    Tensor t = read_tensor(in);
    const std::size_t l = i / 2;
    std::vector<std::size_t> expected = i % 2 == 0 ? std::vector<std::size_t>{dims[l + 1], dims[l]}
                                                   : std::vector<std::size_t>{dims[l + 1]};
    if (t.shape() != expected) throw Error(ErrorCode::ParseError, "tensor shape does not match config");
    ck.embedder.tensors.push_back(std::move(t));
  }
  auto has_head = read_le<std::uint8_t>(in, "head flag");
  if (has_head > 1) throw Error(ErrorCode::ParseError, "bad head flag");
  if (has_head) {
    TransferHead head;
    auto act = read_le<std::uint8_t>(in, "head activation");
    if (act > 1) throw Error(ErrorCode::ParseError, "unknown head activation");
    head.activation = static_cast<HeadActivation>(act);
    head.weight = read_tensor(in);
    head.bias = read_tensor(in);
    if (head.weight.rank() != 2 || head.weight.dim(0) != ck.embedder.config.embed_dim ||
        head.bias.rank() != 1 || head.bias.dim(0) != head.weight.dim(1)) {
      throw Error(ErrorCode::ParseError, "transfer head shape mismatch");
    }
    ck.head = std::move(head);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::ParseError, "trailing bytes in checkpoint");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const EmbedderParams& params,
                     const TransferHead* head, const EmojiTaxonomy& tax, std::uint64_t seed) {
  write_file(path, encode_checkpoint(params, head, tax, seed));
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const EmojiTaxonomy& tax) {
  return decode_checkpoint(read_file(path), tax);
}

}  // namespace smiley
