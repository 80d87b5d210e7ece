#include "ecpt/batch_io.hpp"

#include <array>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "ecpt/error.hpp"

namespace ecpt {

using ordered_json = nlohmann::ordered_json;

std::string example_to_json(const PretrainExample& ex) {
  ordered_json j;
  j["task"] = to_string(ex.task);
  j["input_ids"] = ex.input_ids;
  j["target_ids"] = ex.target_ids;
  j["corpus_id"] = ex.corpus_id;
  ordered_json meta;
  meta["record_id"] = ex.meta.record_id;
  meta["index"] = ex.meta.stream_index;
  meta["epoch"] = ex.meta.epoch;
  if (ex.direction) meta["direction"] = {ex.direction->first, ex.direction->second};
  meta["prompt_len"] = ex.meta.prompt_len;
  meta["suffix_len"] = ex.meta.suffix_len;
  meta["truncated_input"] = ex.meta.truncated_input;
  meta["truncated_target"] = ex.meta.truncated_target;
  j["meta"] = std::move(meta);
  return j.dump();
}

PretrainExample example_from_json(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    PretrainExample ex;
    ex.task = task_from_string(j.at("task").get<std::string>());
    ex.input_ids = j.at("input_ids").get<std::vector<TokenId>>();
    ex.target_ids = j.at("target_ids").get<std::vector<TokenId>>();
    ex.corpus_id = j.at("corpus_id").get<std::string>();
    const auto& meta = j.at("meta");
    ex.meta.record_id = meta.value("record_id", std::string());
    ex.meta.stream_index = meta.value("index", std::uint64_t{0});
    ex.meta.epoch = meta.value("epoch", std::uint64_t{0});
    ex.meta.prompt_len = meta.value("prompt_len", std::size_t{0});
    ex.meta.suffix_len = meta.value("suffix_len", std::size_t{0});
    ex.meta.truncated_input = meta.value("truncated_input", false);
    ex.meta.truncated_target = meta.value("truncated_target", false);
    if (meta.contains("direction")) {
      const auto d = meta["direction"].get<std::vector<std::string>>();
      if (d.size() != 2) throw DataError("direction must have two entries");
      ex.direction = std::make_pair(d[0], d[1]);
    }
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad example line: ") + e.what());
  }
}

void write_jsonl(std::ostream& out, std::span<const PretrainExample> examples) {
  for (const auto& ex : examples) out << example_to_json(ex) << '\n';
}

std::vector<PretrainExample> read_jsonl(std::istream& in) {
  std::vector<PretrainExample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(example_from_json(line));
  }
  return out;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                 static_cast<char>((v >> 16) & 0xff),
                                 static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), b.size());
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) return false;
  v = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
      (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace

void write_binary_header(std::ostream& out) {
  out.write(kBinaryMagic.data(), static_cast<std::streamsize>(kBinaryMagic.size()));
}

void write_binary_example(std::ostream& out, const PretrainExample& ex) {
  put_u32(out, static_cast<std::uint32_t>(ex.input_ids.size()));
  put_u32(out, static_cast<std::uint32_t>(ex.target_ids.size()));
  for (auto id : ex.input_ids) put_u32(out, id);
  for (auto id : ex.target_ids) put_u32(out, id);
}

void write_binary(std::ostream& out, std::span<const PretrainExample> examples) {
  write_binary_header(out);
  for (const auto& ex : examples) write_binary_example(out, ex);
}

std::vector<BinaryExample> read_binary(std::istream& in) {
  std::string magic(kBinaryMagic.size(), '\0');
  if (!in.read(magic.data(), static_cast<std::streamsize>(magic.size())) || magic != kBinaryMagic) {
    throw DataError("binary batch: bad magic");
  }
  std::vector<BinaryExample> out;
  std::uint32_t in_len = 0;
  while (get_u32(in, in_len)) {
    std::uint32_t tgt_len = 0;
    if (!get_u32(in, tgt_len)) throw DataError("binary batch: truncated header");
    BinaryExample ex;
    ex.input_ids.resize(in_len);
    ex.target_ids.resize(tgt_len);
    for (auto& id : ex.input_ids) {
      if (!get_u32(in, id)) throw DataError("binary batch: truncated input ids");
    }
    for (auto& id : ex.target_ids) {
      if (!get_u32(in, id)) throw DataError("binary batch: truncated target ids");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace ecpt
