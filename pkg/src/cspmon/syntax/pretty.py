"""Canonical text rendering of syntax trees.

``parse_spec(pretty_print(m))`` yields a module structurally equal to ``m``;
the round trip is enforced by property tests.  Includes are expanded at
parse time, so a re-printed module is always a single flat file.
"""

from __future__ import annotations

from . import ast

# process-operator binding strength; higher binds tighter
_INT, _EXT, _PAR, _ILV, _SEQ, _HIDE, _PREFIX, _ATOM = range(8)


def _proc(p: ast.ProcessExpr, want: int) -> str:
    text, level = _proc_level(p)
    if level < want:
        return f"({text})"
    return text


def _proc_level(p: ast.ProcessExpr) -> tuple[str, int]:
    if isinstance(p, ast.PStop):
        return "STOP", _ATOM
    if isinstance(p, ast.PSkip):
        return "SKIP", _ATOM
    if isinstance(p, ast.PCall):
        if p.args:
            return f"{p.name}({', '.join(_value(a, 0) for a in p.args)})", _ATOM
        return p.name, _ATOM
    if isinstance(p, ast.PPrefix):
        return f"{_event_pattern(p.event)} -> {_proc(p.cont, _PREFIX)}", _PREFIX
    if isinstance(p, ast.PHide):
        return f"{_proc(p.body, _HIDE)} \\ {_set(p.hidden)}", _HIDE
    if isinstance(p, ast.PSeq):
        return f"{_proc(p.left, _SEQ)} ; {_proc(p.right, _SEQ + 1)}", _SEQ
    if isinstance(p, ast.PInterleave):
        return f"{_proc(p.left, _ILV)} ||| {_proc(p.right, _ILV + 1)}", _ILV
    if isinstance(p, ast.PGenPar):
        return (
            f"{_proc(p.left, _PAR)} [| {_set(p.sync)} |] {_proc(p.right, _PAR + 1)}",
            _PAR,
        )
    if isinstance(p, ast.PAlphaPar):
        return (
            f"{_proc(p.left, _PAR)} [ {_set(p.alpha_left)} || {_set(p.alpha_right)} ] "
            f"{_proc(p.right, _PAR + 1)}",
            _PAR,
        )
    if isinstance(p, ast.PExtChoice):
        return f"{_proc(p.left, _EXT)} [] {_proc(p.right, _EXT + 1)}", _EXT
    if isinstance(p, ast.PIntChoice):
        return f"{_proc(p.left, _INT)} |~| {_proc(p.right, _INT + 1)}", _INT
    if isinstance(p, ast.PIf):
        # extends right without limit, so parenthesized in any operand slot
        return (
            f"if {_value(p.cond, 0)} then {_proc(p.then, 0)} else {_proc(p.orelse, 0)}",
            _INT,
        )
    if isinstance(p, ast.PRepExtChoice):
        return f"[] {p.var}:{_set(p.over)} @ {_proc(p.body, 0)}", _INT
    raise TypeError(f"not a process expression: {p!r}")


def _event_pattern(e: ast.EventPattern) -> str:
    parts = [e.channel]
    for f in e.fields:
        if isinstance(f, ast.FieldOutput):
            parts.append(f.sigil + _value_primary(f.expr))
        else:
            assert isinstance(f, ast.FieldInput)
            if f.restriction is None:
                parts.append(f"?{f.var}")
            else:
                parts.append(f"?{f.var}:{_set(f.restriction)}")
    return "".join(parts)


# value-operator binding strength
_V_OR, _V_AND, _V_NOT, _V_CMP, _V_ADD, _V_MUL, _V_UNARY, _V_PRIM = range(8)
_V_LEVELS = {
    "or": _V_OR,
    "and": _V_AND,
    "==": _V_CMP,
    "!=": _V_CMP,
    "<": _V_CMP,
    "<=": _V_CMP,
    ">": _V_CMP,
    ">=": _V_CMP,
    "+": _V_ADD,
    "-": _V_ADD,
    "*": _V_MUL,
    "/": _V_MUL,
    "%": _V_MUL,
}


def _value(v: ast.ValueExpr, want: int) -> str:
    text, level = _value_level(v)
    if level < want:
        return f"({text})"
    return text


def _value_level(v: ast.ValueExpr) -> tuple[str, int]:
    if isinstance(v, ast.IntLit):
        return str(v.value), _V_PRIM
    if isinstance(v, ast.BoolLit):
        return ("True" if v.value else "False"), _V_PRIM
    if isinstance(v, ast.Name):
        return v.ident, _V_PRIM
    if isinstance(v, ast.Unary):
        if v.op == "not":
            return f"not {_value(v.operand, _V_NOT)}", _V_NOT
        return f"-{_value(v.operand, _V_UNARY)}", _V_UNARY
    if isinstance(v, ast.Binary):
        lvl = _V_LEVELS[v.op]
        sep = f" {v.op} "
        if lvl == _V_CMP:  # non-associative
            return f"{_value(v.left, lvl + 1)}{sep}{_value(v.right, lvl + 1)}", lvl
        return f"{_value(v.left, lvl)}{sep}{_value(v.right, lvl + 1)}", lvl
    raise TypeError(f"not a value expression: {v!r}")


def _value_primary(v: ast.ValueExpr) -> str:
    text, level = _value_level(v)
    if level >= _V_UNARY:
        return text
    return f"({text})"


def _set_item(item: ast.Node) -> str:
    if isinstance(item, ast.Dotted):
        return "".join([item.head] + ["." + _value_primary(a) for a in item.args])
    assert isinstance(item, ast.ValueExpr)
    return _value(item, 0)


def _set(s: ast.SetExpr) -> str:
    if isinstance(s, ast.SetRange):
        return f"{{{_value(s.lo, 0)}..{_value(s.hi, 0)}}}"
    if isinstance(s, ast.SetEnum):
        return "{" + ", ".join(_set_item(i) for i in s.items) + "}"
    if isinstance(s, ast.SetChannels):
        return "{| " + ", ".join(s.channels) + " |}"
    if isinstance(s, ast.SetUniverse):
        return "Events"
    if isinstance(s, ast.SetName):
        return s.ident
    if isinstance(s, ast.SetOp):
        return f"{s.op}({_set(s.left)}, {_set(s.right)})"
    raise TypeError(f"not a set expression: {s!r}")


def _type(t: ast.TypeExpr) -> str:
    if isinstance(t, ast.TBool):
        return "Bool"
    if isinstance(t, ast.TRange):
        return f"{{{_value(t.lo, 0)}..{_value(t.hi, 0)}}}"
    assert isinstance(t, ast.TName)
    return t.ident


def _event_lit(e: ast.EventLit) -> str:
    return "".join([e.channel] + ["." + _value_primary(a) for a in e.args])


def _decl(d: ast.Decl) -> str:
    if isinstance(d, ast.ChannelDecl):
        head = "channel " + ", ".join(d.names)
        if d.payload:
            return head + " : " + ".".join(_type(t) for t in d.payload)
        return head
    if isinstance(d, ast.DatatypeDecl):
        return f"datatype {d.name} = " + " | ".join(d.constructors)
    if isinstance(d, ast.ValueDef):
        body = d.body
        if isinstance(body, ast.ValueExpr):
            return f"{d.name} = {_value(body, 0)}"
        return f"{d.name} = {_set(body)}"
    if isinstance(d, ast.ProcessDef):
        head = d.name
        if d.params:
            head += "(" + ", ".join(d.params) + ")"
        return f"{head} = {_proc(d.body, 0)}"
    if isinstance(d, ast.Assertion):
        if d.kind == "refines":
            return f"assert {_proc(d.left, _ATOM)} [T= {_proc(d.right, _ATOM)}"
        if d.kind == "has_trace":
            trace = ", ".join(_event_lit(e) for e in d.trace)
            return f"assert {_proc(d.left, _ATOM)} :[has trace]: <{trace}>"
        word = {
            "deadlock_free": "deadlock free",
            "divergence_free": "divergence free",
            "deterministic": "deterministic",
        }[d.kind]
        return f"assert {_proc(d.left, _ATOM)} :[{word}]"
    raise TypeError(f"not a declaration: {d!r}")


def pretty_print(node) -> str:
    """Render any syntax node back to parseable source text."""
    if isinstance(node, ast.SpecModule):
        return "\n".join(_decl(d) for d in node.decls) + "\n"
    if isinstance(node, ast.Decl):
        return _decl(node)
    if isinstance(node, ast.ProcessExpr):
        return _proc(node, 0)
    if isinstance(node, ast.ValueExpr):
        return _value(node, 0)
    if isinstance(node, ast.SetExpr):
        return _set(node)
    if isinstance(node, ast.EventPattern):
        return _event_pattern(node)
    if isinstance(node, ast.TypeExpr):
        return _type(node)
    raise TypeError(f"cannot pretty-print {node!r}")
