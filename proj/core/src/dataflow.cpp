#include <algorithm>
#include <set>

#include <json.hpp>

#include "ecpt/codegraph.hpp"

namespace ecpt::code {

std::string_view to_string(DataflowRelation r) {
  return r == DataflowRelation::ComesFrom ? "comesFrom" : "computedFrom";
}

std::vector<bool> variable_positions(const SyntaxTree& tree) {
  std::vector<bool> var(tree.nodes.size(), false);
  for (std::uint32_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].kind == "identifier") var[i] = true;
  }
  auto clear_all = [&](std::uint32_t n, auto&& self) -> void {
    var[n] = false;
    for (auto c : tree.nodes[n].children) self(c, self);
  };
  // The bound name of an import clause: first component of a bare dotted
  // name, or the alias.
  auto mark_import = [&](std::uint32_t n) {
    const auto& node = tree.nodes[n];
    if (node.kind == "aliased_import") {
      clear_all(node.children[0], clear_all);
    } else if (node.kind == "dotted_name") {
      for (std::size_t c = 1; c < node.children.size(); ++c) var[node.children[c]] = false;
    }
  };
  for (std::uint32_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& node = tree.nodes[i];
    if (node.kind == "attribute") {
      var[node.children[1]] = false;
    } else if (node.kind == "keyword_argument") {
      var[node.children[0]] = false;
    } else if (node.kind == "import_statement") {
      for (auto c : node.children) mark_import(c);
    } else if (node.kind == "import_from_statement") {
      clear_all(node.children[0], clear_all);
      for (std::size_t c = 1; c < node.children.size(); ++c) mark_import(node.children[c]);
    }
  }
  return var;
}

namespace {

using Env = std::map<std::string, std::vector<std::uint32_t>>;

void merge_into(Env& dst, const Env& src) {
  for (const auto& [name, defs] : src) {
    auto& d = dst[name];
    std::vector<std::uint32_t> merged;
    std::set_union(d.begin(), d.end(), defs.begin(), defs.end(), std::back_inserter(merged));
    d = std::move(merged);
  }
}

class Extractor {
 public:
  explicit Extractor(const SyntaxTree& t) : t_(t), var_(variable_positions(t)) {
    for (auto i : t.preorder()) {
      if (!var_[i]) continue;
      const auto& name = t.nodes[i].text;
      if (!graph_.names.count(name)) {
        graph_.names.emplace(name, "var_" + std::to_string(graph_.names.size()));
      }
    }
  }

  DataflowGraph run() {
    Env env;
    if (!t_.nodes.empty()) statements(t_.root_node().children, env);
    return std::move(graph_);
  }

 private:
  const SyntaxNode& n(std::uint32_t i) const { return t_.nodes[i]; }
  const std::string& norm(std::uint32_t i) const { return graph_.names.at(n(i).text); }

  void statements(const std::vector<std::uint32_t>& stmts, Env& env) {
    for (auto s : stmts) statement(s, env);
  }

  void statement(std::uint32_t i, Env& env) {
    const auto& node = n(i);
    const auto& k = node.kind;
    const auto& c = node.children;
    if (k == "expression_statement") {
      simple(c[0], env);
    } else if (k == "return_statement") {
      if (!c.empty()) uses(c[0], env);
    } else if (k == "import_statement" || k == "import_from_statement") {
      for (std::size_t j = (k == "import_statement" ? 0 : 1); j < c.size(); ++j) {
        const auto& item = n(c[j]);
        const auto bound = item.kind == "aliased_import" ? item.children[1] : item.children.at(0);
        if (n(bound).kind == "identifier") define(bound, env);
      }
    } else if (k == "function_definition") {
      define(c[0], env);
      Env inner = env;
      for (auto p : n(c[1]).children) {
        const auto& param = n(p);
        if (param.kind == "identifier") {
          define(p, inner);
        } else if (param.kind == "default_parameter") {
          uses(param.children[1], env);
          define(param.children[0], inner);
        } else {
          define(param.children[0], inner);
        }
      }
      statements(n(c[2]).children, inner);
    } else if (k == "if_statement") {
      uses(c[0], env);
      Env merged;
      Env branch = env;
      statements(n(c[1]).children, branch);
      merge_into(merged, branch);
      bool has_else = false;
      for (std::size_t j = 2; j < c.size(); ++j) {
        const auto& clause = n(c[j]);
        Env b = env;
        if (clause.kind == "elif_clause") {
          uses(clause.children[0], env);
          b = env;
          statements(n(clause.children[1]).children, b);
        } else {
          has_else = true;
          statements(n(clause.children[0]).children, b);
        }
        merge_into(merged, b);
      }
      if (!has_else) merge_into(merged, env);
      env = std::move(merged);
    } else if (k == "for_statement") {
      std::vector<std::uint32_t> sources;
      uses(c[1], env, &sources);
      Env body = env;
      bind(c[0], sources, body);
      statements(n(c[2]).children, body);
      merge_into(env, body);
      if (c.size() > 3) statements(n(n(c[3]).children[0]).children, env);
    } else if (k == "while_statement") {
      uses(c[0], env);
      Env body = env;
      statements(n(c[1]).children, body);
      merge_into(env, body);
      if (c.size() > 2) statements(n(n(c[2]).children[0]).children, env);
    }
  }

  void simple(std::uint32_t i, Env& env) {
    const auto& node = n(i);
    if (node.kind == "assignment") {
      std::vector<std::uint32_t> targets;
      std::uint32_t value = i;
      while (n(value).kind == "assignment") {
        targets.push_back(n(value).children[0]);
        value = n(value).children[1];
      }
      std::vector<std::uint32_t> sources;
      uses(value, env, &sources);
      for (auto t : targets) bind(t, sources, env);
    } else if (node.kind == "augmented_assignment") {
      std::vector<std::uint32_t> sources;
      uses(node.children[2], env, &sources);
      const auto target = node.children[0];
      if (n(target).kind == "identifier") {
        uses(target, env);
        bind(target, sources, env);
      } else {
        uses(target, env);
      }
    } else {
      uses(i, env);
    }
  }

  void define(std::uint32_t id, Env& env) { env[n(id).text] = {id}; }

  void bind(std::uint32_t target, const std::vector<std::uint32_t>& sources, Env& env) {
    const auto& node = n(target);
    if (node.kind == "identifier") {
      for (auto s : sources) {
        graph_.edges.push_back(
            {norm(target), s, target, DataflowRelation::ComputedFrom, norm(s)});
      }
      define(target, env);
    } else if (node.kind == "expression_list" || node.kind == "tuple" || node.kind == "list" ||
               node.kind == "parenthesized_expression" || node.kind == "list_splat") {
      for (auto c : node.children) bind(c, sources, env);
    } else {
      uses(target, env);
    }
  }

  void uses(std::uint32_t i, const Env& env, std::vector<std::uint32_t>* names = nullptr) {
    const auto& node = n(i);
    if (node.kind == "identifier") {
      if (!var_[i]) return;
      const auto it = env.find(node.text);
      if (it == env.end() || it->second.empty()) {
        graph_.edges.push_back({norm(i), std::nullopt, i, DataflowRelation::ComesFrom,
                                std::string(kExternalDef)});
      } else {
        for (auto d : it->second) {
          graph_.edges.push_back({norm(i), d, i, DataflowRelation::ComesFrom, norm(i)});
        }
      }
      if (names) names->push_back(i);
      return;
    }
    for (auto c : node.children) uses(c, env, names);
  }

  const SyntaxTree& t_;
  std::vector<bool> var_;
  DataflowGraph graph_;
};

}  // namespace

DataflowGraph extract_dataflow(const SyntaxTree& tree) { return Extractor(tree).run(); }

std::vector<std::string> DataflowGraph::normalized_edges() const {
  std::vector<std::string> out;
  out.reserve(edges.size());
  for (const auto& e : edges) {
    out.push_back(std::string(to_string(e.relation)) + " " + e.use_var + " " + e.def_var);
  }
  return out;
}

std::string DataflowGraph::to_json() const {
  nlohmann::ordered_json j;
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : edges) {
    nlohmann::ordered_json o;
    o["use_var"] = e.use_var;
    o["def_var"] = e.def_var;
    o["relation"] = std::string(to_string(e.relation));
    o["def_site"] = e.def_site ? nlohmann::ordered_json(*e.def_site) : nlohmann::ordered_json();
    o["use_site"] = e.use_site;
    j["edges"].push_back(std::move(o));
  }
  nlohmann::ordered_json names = nlohmann::ordered_json::object();
  for (const auto& [k, v] : this->names) names[k] = v;
  j["names"] = std::move(names);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace ecpt::code
