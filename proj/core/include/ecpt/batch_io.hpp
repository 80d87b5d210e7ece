#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ecpt/objectives.hpp"

namespace ecpt {

/// One JSONL line: {"task","input_ids","target_ids","corpus_id","meta"}.
std::string example_to_json(const PretrainExample& ex);
PretrainExample example_from_json(std::string_view line);

void write_jsonl(std::ostream& out, std::span<const PretrainExample> examples);
std::vector<PretrainExample> read_jsonl(std::istream& in);

/// Flat binary batches: magic "ECPT1", then per example little-endian u32
/// input length, u32 target length, input ids, target ids (all u32 LE).
/// Task, corpus and metadata are not stored.
inline constexpr std::string_view kBinaryMagic = "ECPT1";

void write_binary_header(std::ostream& out);
void write_binary_example(std::ostream& out, const PretrainExample& ex);
void write_binary(std::ostream& out, std::span<const PretrainExample> examples);

struct BinaryExample {
  std::vector<TokenId> input_ids;
  std::vector<TokenId> target_ids;

  bool operator==(const BinaryExample&) const = default;
};

std::vector<BinaryExample> read_binary(std::istream& in);

}  // namespace ecpt
