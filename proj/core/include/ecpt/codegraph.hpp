#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecpt/code_lexer.hpp"

namespace ecpt::code {

struct SyntaxNode {
  std::string kind;
  std::vector<std::uint32_t> children;
  std::uint32_t first_token = 0;  // [first_token, last_token) into SyntaxTree::tokens
  std::uint32_t last_token = 0;
  std::string text;  // surface text for leaves

  bool leaf() const { return children.empty(); }
};

struct SyntaxTree {
  std::vector<SyntaxNode> nodes;
  std::vector<Token> tokens;
  std::uint32_t root = 0;

  const SyntaxNode& node(std::uint32_t i) const { return nodes.at(i); }
  const SyntaxNode& root_node() const { return nodes.at(root); }
  std::size_t height(std::uint32_t i) const;

  /// Node indices in pre-order.
  std::vector<std::uint32_t> preorder() const;
  /// Parent of every node; the root maps to itself.
  std::vector<std::uint32_t> parents() const;
};

struct ParseOutcome {
  std::optional<SyntaxTree> tree;
  bool ok = false;
  std::optional<SourcePosition> error_position;
  std::string message;
};

/// Parses the supported Python subset. Never throws on bad input.
ParseOutcome parse(std::string_view code);

/// Canonical string of every subtree whose height is at least min_height.
/// Leaves collapse to their kind, so identifiers and literals are anonymous.
std::map<std::string, std::size_t> subtree_multiset(const SyntaxTree& tree,
                                                    std::size_t min_height = 2);

/// Canonical form of one subtree.
std::string canonical_subtree(const SyntaxTree& tree, std::uint32_t node);

/// Source text that parses back to an isomorphic tree.
std::string pretty_print(const SyntaxTree& tree);

/// (kind child ...) with leaf text, for debugging.
std::string to_sexpr(const SyntaxTree& tree);

enum class DataflowRelation { ComesFrom, ComputedFrom };

std::string_view to_string(DataflowRelation r);

struct DataflowEdge {
  std::string use_var;                  // normalized: var_0, var_1, ...
  std::optional<std::uint32_t> def_site;  // empty for the synthetic external definition
  std::uint32_t use_site = 0;
  DataflowRelation relation = DataflowRelation::ComesFrom;
  std::string def_var;  // normalized source variable; "external" without a def site

  bool operator==(const DataflowEdge&) const = default;
};

struct DataflowGraph {
  std::vector<DataflowEdge> edges;
  std::map<std::string, std::string> names;  // original -> normalized

  /// Name-invariant edge keys used for matching.
  std::vector<std::string> normalized_edges() const;
  std::string to_json() const;
};

inline constexpr std::string_view kExternalDef = "external";

DataflowGraph extract_dataflow(const SyntaxTree& tree);

/// True for identifier nodes that name variables, as opposed to attribute
/// names, keyword-argument labels and module paths.
std::vector<bool> variable_positions(const SyntaxTree& tree);

}  // namespace ecpt::code
