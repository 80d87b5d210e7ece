#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "ecpt/codegraph.hpp"
#include "ecpt/metrics.hpp"
#include "ecpt/rng.hpp"
#include "support.hpp"

using namespace ecpt::code;
using ecpt::Rng;
using ecpt::testing::golden;

namespace {

SyntaxTree must_parse(std::string_view src) {
  auto r = parse(src);
  if (!r.ok) ADD_FAILURE() << "parse failed: " << r.message << "\n" << src;
  return r.ok ? *r.tree : SyntaxTree{};
}

std::multiset<std::string> edges(std::string_view src) {
  const auto g = extract_dataflow(must_parse(src));
  const auto e = g.normalized_edges();
  return {e.begin(), e.end()};
}

const std::vector<std::string> kPrograms = {
    "x = 1\n",
    "def f(a):\n    return a + 1\n",
    "def g(x, scale=2, *rest, **kw):\n    if not x:\n        return None\n    elif x > 3:\n        "
    "pass\n    else:\n        x = -x\n    return x[0] * scale\n",
    "total = 0\nfor i, v in enumerate(items):\n    total += v ** 2\nelse:\n    done = True\n",
    "while n > 0 and not stop:\n    n -= 1\n    if n % 2 == 0:\n        continue\n    break\n",
    "import os.path as osp, sys\nfrom collections import OrderedDict as OD\nfrom . import "
    "sibling\nresult = osp.join(sys.argv[1], 'x')\n",
    "d = {'a': 1, **extra}\ns = {1, 2}\nt = (1,)\nu = ()\nl = [*xs, 3]\n",
    "y = a if b else c\nz = x[1:2, ::3]\nw = f(*args, key=val, **kw)\nv = obj.attr.method()\n",
    "a = b = c = 0\na, *rest = items\nx = 'abc' 'def'\nn = 0x1f + 1e-3 + 2j\n",
    "def outer():\n    def inner(q):\n        return q | 1 ^ 2 & 3 << 4\n    return inner\n",
    "if x in ys and y not in zs or z is not None:\n    print(x)\n",
    "x = ...\nx @= m\nx //= 2\nprint(-~x)\n",
};

std::string rename_identifiers(const std::string& src, std::uint64_t seed) {
  // rename every NAME token that is not a keyword, consistently
  const auto lex = lex_python(src);
  std::map<std::string, std::string> names;
  Rng rng(seed);
  std::string out;
  std::size_t cursor = 0;
  for (const auto& t : lex.tokens) {
    if (t.kind != TokenKind::Name) continue;
    auto it = names.find(t.text);
    if (it == names.end()) {
      std::string fresh = "v" + std::to_string(rng.below(1000000)) + "_" + std::to_string(names.size());
      it = names.emplace(t.text, fresh).first;
    }
    out.append(src, cursor, t.begin - cursor);
    out += it->second;
    cursor = t.end;
  }
  out.append(src, cursor, std::string::npos);
  return out;
}

}  // namespace

TEST(Lexer, IndentDedentAndTokens) {
  const auto r = lex_python("if x:\n    y = 1\nz = 'a' + r\"b\"\n");
  ASSERT_TRUE(r.ok());
  std::vector<TokenKind> kinds;
  for (const auto& t : r.tokens) kinds.push_back(t.kind);
  EXPECT_EQ(std::count(kinds.begin(), kinds.end(), TokenKind::Indent), 1);
  EXPECT_EQ(std::count(kinds.begin(), kinds.end(), TokenKind::Dedent), 1);
  EXPECT_EQ(std::count(kinds.begin(), kinds.end(), TokenKind::String), 2);
  EXPECT_EQ(r.tokens.back().kind, TokenKind::EndMarker);
  EXPECT_FALSE(lex_python("x = 'open\n").ok());
  EXPECT_FALSE(lex_python("if x:\n        y\n    z\n").ok());
}

TEST(Lexer, SurfaceTokensNeverFail) {
  EXPECT_EQ(surface_tokens("x=f(1)"), (std::vector<std::string>{"x", "=", "f", "(", "1", ")"}));
  EXPECT_FALSE(surface_tokens("x = 'open\ny = 2").empty());
}

TEST(Parse, SmallestProgram) {
  const auto t = must_parse("x = 1");
  EXPECT_EQ(to_sexpr(t),
            "(module (expression_statement (assignment (identifier \"x\") (integer \"1\"))))");
}

TEST(Parse, FunctionWithReturn) {
  const auto t = must_parse("def f(a):\n    return a + 1");
  EXPECT_EQ(to_sexpr(t),
            "(module (function_definition (identifier \"f\") (parameters (identifier \"a\")) "
            "(block (return_statement (binary_operator (identifier \"a\") (+) "
            "(integer \"1\"))))))");
}

TEST(Parse, FailuresCarryPositions) {
  const auto r = parse("def f(:");
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.tree);
  ASSERT_TRUE(r.error_position);
  EXPECT_EQ(r.error_position->line, 1u);
  for (std::string bad : {"class A:\n    pass\n", "x = [i for i in y]\n", "f = lambda: 0\n",
                          "try:\n    x\nexcept E:\n    y\n", "@d\ndef f():\n    pass\n",
                          "def f(a: int):\n    pass\n", "1 = x\n", "x +\n"}) {
    const auto o = parse(bad);
    EXPECT_FALSE(o.ok) << bad;
    EXPECT_TRUE(o.error_position) << bad;
  }
}

TEST(Parse, OperatorPrecedence) {
  const auto t = must_parse("x = 1 + 2 * 3 ** -4\n");
  EXPECT_EQ(canonical_subtree(t, t.root),
            "(module (expression_statement (assignment identifier (binary_operator integer + "
            "(binary_operator integer * (binary_operator integer ** (unary_operator - "
            "integer)))))))");
}

TEST(Parse, ChildrenPrecedeParents) {
  for (const auto& src : kPrograms) {
    const auto t = must_parse(src);
    for (std::uint32_t i = 0; i < t.nodes.size(); ++i) {
      for (auto c : t.nodes[i].children) ASSERT_LT(c, i);
    }
    EXPECT_EQ(t.preorder().size(), t.nodes.size());
  }
}

TEST(Parse, DeepNestingFailsCleanly) {
  const auto r = parse(std::string(5000, '(') + "1" + std::string(5000, ')'));
  EXPECT_FALSE(r.ok);
  const auto n = parse(std::string(3000, '-') + "1");
  EXPECT_FALSE(n.ok);
}

TEST(Parse, FuzzTotality) {
  Rng rng(99);
  const std::string alphabet = "abc xyz()[]{}:=+-*/.,'\"\\\n\t#0123456789ifdefreturnwhile@";
  for (int i = 0; i < 3000; ++i) {
    std::string s;
    const auto len = rng.below(80);
    for (std::uint64_t k = 0; k < len; ++k) s += alphabet[rng.below(alphabet.size())];
    const auto r = parse(s);
    ASSERT_EQ(r.ok, r.tree.has_value());
    if (r.ok) extract_dataflow(*r.tree);
    else ASSERT_TRUE(r.error_position);
  }
  for (const auto& src : kPrograms) {
    for (int i = 0; i < 200; ++i) {
      std::string s = src;
      const auto pos = rng.below(s.size());
      if (rng.below(2)) s.erase(pos, 1 + rng.below(4));
      else s.insert(pos, 1, alphabet[rng.below(alphabet.size())]);
      const auto r = parse(s);
      ASSERT_EQ(r.ok, r.tree.has_value());
    }
  }
}

TEST(Parse, ReparseStability) {
  for (const auto& src : kPrograms) {
    const auto t = must_parse(src);
    const auto printed = pretty_print(t);
    const auto again = parse(printed);
    ASSERT_TRUE(again.ok) << printed;
    EXPECT_EQ(canonical_subtree(*again.tree, again.tree->root), canonical_subtree(t, t.root))
        << printed;
    EXPECT_EQ(to_sexpr(*again.tree), to_sexpr(t));
    EXPECT_EQ(pretty_print(*again.tree), printed);
  }
}

TEST(Subtrees, Examples) {
  EXPECT_TRUE(subtree_multiset(must_parse("x")).size() == 2u);
  const auto leaf_only = must_parse("pass");
  std::size_t count = 0;
  for (const auto& [k, n] : subtree_multiset(leaf_only)) count += n;
  EXPECT_EQ(count, 1u);  // the module over one leaf
  EXPECT_EQ(subtree_multiset(must_parse("x = 1")), subtree_multiset(must_parse("y = 2")));
  EXPECT_EQ(subtree_multiset(must_parse("x = 1")),
            (std::map<std::string, std::size_t>{
                {"(assignment identifier integer)", 1},
                {"(expression_statement (assignment identifier integer))", 1},
                {"(module (expression_statement (assignment identifier integer)))", 1}}));
}

TEST(Dataflow, HandTracedExamples) {
  const auto t = must_parse("x = 1\ny = x");
  const auto g = extract_dataflow(t);
  ASSERT_EQ(g.edges.size(), 2u);
  const auto& use = g.edges[0];
  EXPECT_EQ(use.relation, DataflowRelation::ComesFrom);
  ASSERT_TRUE(use.def_site);
  EXPECT_EQ(t.tokens[t.nodes[*use.def_site].first_token].pos.line, 1u);
  EXPECT_EQ(t.tokens[t.nodes[use.use_site].first_token].pos.line, 2u);
  EXPECT_EQ(g.edges[1].relation, DataflowRelation::ComputedFrom);
  EXPECT_EQ(g.edges[1].use_var, "var_1");
  EXPECT_EQ(g.edges[1].def_var, "var_0");

  EXPECT_TRUE(extract_dataflow(must_parse("x = 1")).edges.empty());

  const auto ext = extract_dataflow(must_parse("a = b"));
  ASSERT_FALSE(ext.edges.empty());
  EXPECT_FALSE(ext.edges[0].def_site);
  EXPECT_EQ(ext.edges[0].def_var, kExternalDef);
}

TEST(Dataflow, BranchesMergeAndLoopsRunOnce) {
  EXPECT_EQ(edges("if c:\n    x = 1\nelse:\n    x = 2\ny = x\n"),
            (std::multiset<std::string>{"comesFrom var_0 external", "comesFrom var_1 var_1",
                                        "comesFrom var_1 var_1", "computedFrom var_2 var_1"}));
  // without else the earlier definition also reaches
  const auto e = edges("x = 0\nif c:\n    x = 1\ny = x\n");
  EXPECT_EQ(e.count("comesFrom var_0 var_0"), 2u);
  const auto loop = edges("s = 0\nfor i in r:\n    s = s + i\nprint(s)\n");
  EXPECT_EQ(loop.count("computedFrom var_1 var_2"), 1u);
  EXPECT_EQ(loop.count("comesFrom var_0 var_0"), 3u);
}

TEST(Dataflow, AttributeAndKeywordNamesAreNotVariables) {
  const auto g = extract_dataflow(must_parse("import os\np = os.path.join(a, sep=b)\n"));
  EXPECT_EQ(g.names.count("path"), 0u);
  EXPECT_EQ(g.names.count("join"), 0u);
  EXPECT_EQ(g.names.count("sep"), 0u);
  EXPECT_EQ(g.names.count("os"), 1u);
  const auto json = nlohmann::json::parse(g.to_json());
  EXPECT_EQ(json["edges"].size(), g.edges.size());
}

TEST(Dataflow, MatchesCPythonOracle) {
  const auto g = golden("codegraph.json");
  for (const auto& c : g["pairs"]) {
    const auto hyp = c["hyp"].get<std::string>();
    const auto ref = c["ref"].get<std::string>();
    std::vector<std::string> want = c["ref_edges"].get<std::vector<std::string>>();
    auto got = extract_dataflow(must_parse(ref)).normalized_edges();
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, want) << ref;
    const auto ast = ecpt::metrics::ast_match_counts(hyp, ref);
    EXPECT_EQ(ast.matched, c["ast_matched"].get<double>()) << hyp;
    EXPECT_EQ(ast.total, c["ast_total"].get<double>()) << ref;
    const auto dfg = ecpt::metrics::dataflow_match_counts(hyp, ref);
    EXPECT_EQ(dfg.total, c["dfg_total"].get<double>()) << ref;
    EXPECT_EQ(dfg.excluded, c["dfg_total"].get<double>() == 0) << ref;
    if (!dfg.excluded) EXPECT_EQ(dfg.matched, c["dfg_matched"].get<double>()) << hyp;
  }
}

TEST(Dataflow, RenamingInvariance) {
  for (std::size_t p = 0; p < kPrograms.size(); ++p) {
    const auto& src = kPrograms[p];
    const auto base_edges = edges(src);
    const auto base_subtrees = subtree_multiset(must_parse(src));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto renamed = rename_identifiers(src, seed * 31 + p);
      ASSERT_EQ(edges(renamed), base_edges) << renamed;
      ASSERT_EQ(subtree_multiset(must_parse(renamed)), base_subtrees) << renamed;
    }
  }
}
