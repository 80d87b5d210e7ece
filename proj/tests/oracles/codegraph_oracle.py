"""AST-subtree and dataflow-edge counts computed from CPython's own parser.

The CPython tree is translated into the node vocabulary of the pinned
grammar, then subtrees and def-use edges are enumerated by brute force.
"""
import ast
from collections import Counter

from common import write_golden

OPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/", ast.FloorDiv: "//",
       ast.Mod: "%", ast.Pow: "**", ast.LShift: "<<", ast.RShift: ">>", ast.BitOr: "|",
       ast.BitAnd: "&", ast.BitXor: "^", ast.MatMult: "@"}
CMP = {ast.Lt: "<", ast.Gt: ">", ast.Eq: "==", ast.GtE: ">=", ast.LtE: "<=", ast.NotEq: "!=",
       ast.In: "in", ast.NotIn: "not in", ast.Is: "is", ast.IsNot: "is not"}
UNARY = {ast.USub: "-", ast.UAdd: "+", ast.Invert: "~"}


class N:
    def __init__(self, kind, children=(), text=None, var=False):
        self.kind = kind
        self.children = list(children)
        self.text = text
        self.var = var  # identifier in a variable position


def ident(name, var=True):
    return N("identifier", text=name, var=var)


def op(text):
    return N(text)


def block(stmts):
    out = []
    for s in stmts:
        out.append(stmt(s))
    return N("block", out)


def stmt(s):
    if isinstance(s, ast.FunctionDef):
        params = []
        a = s.args
        plain = a.args
        defaults = [None] * (len(plain) - len(a.defaults)) + list(a.defaults)
        for arg, d in zip(plain, defaults):
            params.append(ident(arg.arg) if d is None
                          else N("default_parameter", [ident(arg.arg), expr(d)]))
        if a.vararg:
            params.append(N("list_splat_pattern", [ident(a.vararg.arg)]))
        if a.kwarg:
            params.append(N("dictionary_splat_pattern", [ident(a.kwarg.arg)]))
        return N("function_definition", [ident(s.name), N("parameters", params), block(s.body)])
    if isinstance(s, ast.Assign):
        value = expr(s.value)
        for t in reversed(s.targets):
            value = N("assignment", [expr(t), value])
        return N("expression_statement", [value])
    if isinstance(s, ast.AugAssign):
        return N("expression_statement", [N("augmented_assignment",
                 [expr(s.target), op(OPS[type(s.op)] + "="), expr(s.value)])])
    if isinstance(s, ast.Expr):
        return N("expression_statement", [expr(s.value)])
    if isinstance(s, ast.Return):
        return N("return_statement", [expr(s.value)] if s.value is not None else [])
    if isinstance(s, ast.Pass):
        return N("pass_statement")
    if isinstance(s, ast.Break):
        return N("break_statement")
    if isinstance(s, ast.Continue):
        return N("continue_statement")
    if isinstance(s, ast.If):
        kids = [expr(s.test), block(s.body)]
        cur = s
        while (len(cur.orelse) == 1 and isinstance(cur.orelse[0], ast.If)
               and cur.orelse[0].col_offset == s.col_offset):
            cur = cur.orelse[0]
            kids.append(N("elif_clause", [expr(cur.test), block(cur.body)]))
        if cur.orelse:
            kids.append(N("else_clause", [block(cur.orelse)]))
        return N("if_statement", kids)
    if isinstance(s, ast.For):
        kids = [expr(s.target), expr(s.iter), block(s.body)]
        if s.orelse:
            kids.append(N("else_clause", [block(s.orelse)]))
        return N("for_statement", kids)
    if isinstance(s, ast.While):
        kids = [expr(s.test), block(s.body)]
        if s.orelse:
            kids.append(N("else_clause", [block(s.orelse)]))
        return N("while_statement", kids)
    if isinstance(s, ast.Import):
        items = []
        for alias in s.names:
            parts = alias.name.split(".")
            dotted = N("dotted_name", [ident(p, var=(i == 0 and alias.asname is None))
                                       for i, p in enumerate(parts)])
            items.append(dotted if alias.asname is None
                         else N("aliased_import", [dotted, ident(alias.asname)]))
        return N("import_statement", items)
    raise ValueError("unsupported statement " + type(s).__name__)


def expr(e):
    if isinstance(e, ast.Name):
        return ident(e.id)
    if isinstance(e, ast.Constant):
        v = e.value
        if v is True:
            return N("true")
        if v is False:
            return N("false")
        if v is None:
            return N("none")
        if isinstance(v, str):
            return N("string")
        if isinstance(v, float):
            return N("float")
        return N("integer")
    if isinstance(e, ast.BinOp):
        return N("binary_operator", [expr(e.left), op(OPS[type(e.op)]), expr(e.right)])
    if isinstance(e, ast.BoolOp):
        word = "and" if isinstance(e.op, ast.And) else "or"
        left = expr(e.values[0])
        for v in e.values[1:]:
            left = N("boolean_operator", [left, op(word), expr(v)])
        return left
    if isinstance(e, ast.Compare):
        kids = [expr(e.left)]
        for o, c in zip(e.ops, e.comparators):
            kids += [op(CMP[type(o)]), expr(c)]
        return N("comparison_operator", kids)
    if isinstance(e, ast.UnaryOp):
        if isinstance(e.op, ast.Not):
            return N("not_operator", [expr(e.operand)])
        return N("unary_operator", [op(UNARY[type(e.op)]), expr(e.operand)])
    if isinstance(e, ast.Call):
        args = [expr(a) for a in e.args]
        args += [N("keyword_argument", [ident(k.arg, var=False), expr(k.value)])
                 for k in e.keywords]
        return N("call", [expr(e.func), N("argument_list", args)])
    if isinstance(e, ast.Attribute):
        return N("attribute", [expr(e.value), ident(e.attr, var=False)])
    if isinstance(e, ast.Subscript):
        return N("subscript", [expr(e.value), expr(e.slice)])
    if isinstance(e, ast.Tuple):
        return N("expression_list", [expr(x) for x in e.elts])
    if isinstance(e, ast.List):
        return N("list", [expr(x) for x in e.elts])
    if isinstance(e, ast.Dict):
        return N("dictionary", [N("pair", [expr(k), expr(v)]) for k, v in zip(e.keys, e.values)])
    if isinstance(e, ast.IfExp):
        return N("conditional_expression", [expr(e.body), expr(e.test), expr(e.orelse)])
    raise ValueError("unsupported expression " + type(e).__name__)


def translate(code):
    return N("module", [stmt(s) for s in ast.parse(code).body])


# ---- subtrees ----

def walk(n):
    yield n
    for c in n.children:
        yield from walk(c)


def height(n):
    return 1 + max((height(c) for c in n.children), default=0)


def canon(n):
    if not n.children:
        return n.kind
    return "(" + n.kind + "".join(" " + canon(c) for c in n.children) + ")"


def subtrees(tree):
    return Counter(canon(n) for n in walk(tree) if height(n) >= 2)


# ---- dataflow ----

def dataflow(tree):
    names = {}
    for n in walk(tree):
        if n.kind == "identifier" and n.var and n.text not in names:
            names[n.text] = "var_%d" % len(names)
    edges = []

    def use(n, env, sink=None):
        if n.kind == "identifier":
            if not n.var:
                return
            defs = env.get(n.text)
            if not defs:
                edges.append(("comesFrom", names[n.text], "external"))
            else:
                edges.extend(("comesFrom", names[n.text], names[n.text]) for _ in defs)
            if sink is not None:
                sink.append(n)
            return
        for c in n.children:
            use(c, env, sink)

    def bind(t, sources, env):
        if t.kind == "identifier":
            edges.extend(("computedFrom", names[t.text], names[s.text]) for s in sources)
            env[t.text] = {id(t)}
        elif t.kind in ("expression_list", "tuple", "list", "parenthesized_expression",
                        "list_splat"):
            for c in t.children:
                bind(c, sources, env)
        else:
            use(t, env)

    def merge(dst, src):
        for k, v in src.items():
            dst[k] = dst.get(k, set()) | v

    def copy(env):
        return {k: set(v) for k, v in env.items()}

    def run(stmts, env):
        for s in stmts:
            one(s, env)

    def one(s, env):
        k, c = s.kind, s.children
        if k == "expression_statement":
            x = c[0]
            if x.kind == "assignment":
                targets = []
                while x.kind == "assignment":
                    targets.append(x.children[0])
                    x = x.children[1]
                src = []
                use(x, env, src)
                for t in targets:
                    bind(t, src, env)
            elif x.kind == "augmented_assignment":
                src = []
                use(x.children[2], env, src)
                use(x.children[0], env)
                if x.children[0].kind == "identifier":
                    bind(x.children[0], src, env)
            else:
                use(x, env)
        elif k == "return_statement":
            if c:
                use(c[0], env)
        elif k == "import_statement":
            for item in c:
                bound = item.children[1] if item.kind == "aliased_import" else item.children[0]
                env[bound.text] = {id(bound)}
        elif k == "function_definition":
            env[c[0].text] = {id(c[0])}
            inner = copy(env)
            for p in c[1].children:
                if p.kind == "identifier":
                    inner[p.text] = {id(p)}
                else:
                    if p.kind == "default_parameter":
                        use(p.children[1], env)
                    inner[p.children[0].text] = {id(p.children[0])}
            run(c[2].children, inner)
        elif k == "if_statement":
            use(c[0], env)
            merged = {}
            b = copy(env)
            run(c[1].children, b)
            merge(merged, b)
            has_else = False
            for clause in c[2:]:
                b = copy(env)
                if clause.kind == "elif_clause":
                    use(clause.children[0], env)
                    run(clause.children[1].children, b)
                else:
                    has_else = True
                    run(clause.children[0].children, b)
                merge(merged, b)
            if not has_else:
                merge(merged, env)
            env.clear()
            env.update(merged)
        elif k == "for_statement":
            src = []
            use(c[1], env, src)
            body = copy(env)
            bind(c[0], src, body)
            run(c[2].children, body)
            merge(env, body)
            if len(c) > 3:
                run(c[3].children[0].children, env)
        elif k == "while_statement":
            use(c[0], env)
            body = copy(env)
            run(c[1].children, body)
            merge(env, body)
            if len(c) > 2:
                run(c[2].children[0].children, env)

    run(tree.children, {})
    return Counter(" ".join(e) for e in edges)


def overlap(h, r):
    return sum(min(n, h[k]) for k, n in r.items())


PAIRS = [
    ("x = 1\ny = 2\n", "x = 1\n"),
    ("def f(a):\n    return a + 1\n", "def f(a):\n    return a + 1\n"),
    ("y = x\nx = 1\n", "x = 1\ny = x\n"),
    ("def add(a, b):\n    s = a - b\n    return s\n", "def add(a, b):\n    s = a + b\n    return s\n"),
    ("total = 0\nfor i in range(n):\n    total += i\nprint(total)\n",
     "total = 0\nfor v in items:\n    total = total + v\nprint(total)\n"),
    ("if a > b:\n    m = a\nelse:\n    m = b\nreturn_value = m\n",
     "if a > b:\n    m = a\nelif a == b:\n    m = 0\nelse:\n    m = b\nresult = m\n"),
    ("import os\npath = os.path.join(root, name)\nf = open(path)\n",
     "import os.path\np = os.path.join(base, name)\nhandle = open(p, mode='r')\n"),
    ("i = 0\nwhile i < 10:\n    i = i + 2\n", "i = 0\nwhile i < n:\n    i += 1\n    total = i * 2\n"),
    ("a, b = b, a\nc = [a, b]\n", "a, b = b, a + b\nd = {'k': a}\n"),
    ("def g(x, scale=2):\n    if not x:\n        return None\n    return x[0] * scale\n",
     "def g(x, scale=k):\n    if x is None or len(x) == 0:\n        return None\n    y = x[0]\n    return y * scale\n"),
]


def main():
    cases = []
    for hyp, ref in PAIRS:
        ht, rt = translate(hyp), translate(ref)
        hs, rs = subtrees(ht), subtrees(rt)
        hd, rd = dataflow(ht), dataflow(rt)
        case = {
            "hyp": hyp, "ref": ref,
            "ast_matched": overlap(hs, rs), "ast_total": sum(rs.values()),
            "dfg_matched": overlap(hd, rd), "dfg_total": sum(rd.values()),
            "ref_edges": sorted(rd.elements()),
        }
        print(case["ast_matched"], case["ast_total"], case["dfg_matched"], case["dfg_total"])
        cases.append(case)
    write_golden("codegraph.json", {"pairs": cases})


if __name__ == "__main__":
    main()
