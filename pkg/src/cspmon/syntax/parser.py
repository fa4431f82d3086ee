"""Recursive-descent parser for the CSP subset.

Operator precedence, tightest first:

    event -> P        prefix
    P \\ A             hiding
    P ; Q             sequential composition
    P ||| Q           interleaving
    P [| A |] Q       generalized parallel
    P [ A || B ] Q    alphabetized parallel
    P [] Q            external choice
    P |~| Q           internal choice

``if b then P else Q`` and ``[] x:S @ P`` extend as far right as possible;
parenthesize when they appear as an operand.  Payload fields after ``.`` or
``!`` take a primary value expression, so compound payloads need parens
(``c!(x+1)``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import DuplicateDefinition, SpecParseError
from . import ast
from .tokens import T, Token, tokenize

DECL_STARTERS = {T.CHANNEL, T.DATATYPE, T.ASSERT, T.INCLUDE, T.EOF}


@dataclass(frozen=True)
class SpecSource:
    """Raw specification text plus a label for diagnostics."""

    text: str
    origin: str = "<inline>"


class _Parser:
    def __init__(self, toks: list[Token], origin: str):
        self.toks = toks
        self.pos = 0
        self.origin = origin

    # -- token plumbing ----------------------------------------------------

    def peek(self, off: int = 0) -> Token:
        i = min(self.pos + off, len(self.toks) - 1)
        return self.toks[i]

    def at(self, kind: T, off: int = 0) -> bool:
        return self.peek(off).kind is kind

    def advance(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind is not T.EOF:
            self.pos += 1
        return tok

    def accept(self, kind: T) -> Optional[Token]:
        if self.at(kind):
            return self.advance()
        return None

    def expect(self, kind: T, what: str = "") -> Token:
        if self.at(kind):
            return self.advance()
        raise self.error(f"expected {what or kind.name}, found {self.peek().text!r}")

    def error(self, msg: str) -> SpecParseError:
        tok = self.peek()
        found = tok.text or "end of input"
        if not msg:
            msg = f"unexpected {found!r}"
        return SpecParseError(f"{self.origin}: {msg}", tok.line, tok.col)

    # -- value expressions -------------------------------------------------

    def value_expr(self) -> ast.ValueExpr:
        return self._or_expr()

    def _or_expr(self) -> ast.ValueExpr:
        left = self._and_expr()
        while self.accept(T.OR):
            left = ast.Binary("or", left, self._and_expr())
        return left

    def _and_expr(self) -> ast.ValueExpr:
        left = self._not_expr()
        while self.accept(T.AND):
            left = ast.Binary("and", left, self._not_expr())
        return left

    def _not_expr(self) -> ast.ValueExpr:
        if self.accept(T.NOT):
            return ast.Unary("not", self._not_expr())
        return self._cmp_expr()

    _CMP = {T.EQEQ: "==", T.NEQ: "!=", T.LT: "<", T.LE: "<=", T.GT: ">", T.GE: ">="}

    def _cmp_expr(self) -> ast.ValueExpr:
        left = self._add_expr()
        op = self._CMP.get(self.peek().kind)
        if op is not None:
            self.advance()
            return ast.Binary(op, left, self._add_expr())
        return left

    def _add_expr(self) -> ast.ValueExpr:
        left = self._mul_expr()
        while self.peek().kind in (T.PLUS, T.MINUS):
            op = self.advance().text
            left = ast.Binary(op, left, self._mul_expr())
        return left

    def _mul_expr(self) -> ast.ValueExpr:
        left = self._unary_expr()
        while self.peek().kind in (T.STAR, T.SLASH, T.PERCENT):
            op = self.advance().text
            left = ast.Binary(op, left, self._unary_expr())
        return left

    def _unary_expr(self) -> ast.ValueExpr:
        if self.accept(T.MINUS):
            return ast.Unary("-", self._unary_expr())
        return self.value_primary()

    def value_primary(self) -> ast.ValueExpr:
        tok = self.peek()
        if tok.kind is T.NUMBER:
            self.advance()
            return ast.IntLit(tok.value)
        if tok.kind is T.TRUE:
            self.advance()
            return ast.BoolLit(True)
        if tok.kind is T.FALSE:
            self.advance()
            return ast.BoolLit(False)
        if tok.kind is T.IDENT:
            self.advance()
            return ast.Name(tok.text)
        if tok.kind is T.MINUS:
            self.advance()
            return ast.Unary("-", self.value_primary())
        if self.accept(T.LPAREN):
            inner = self.value_expr()
            self.expect(T.RPAREN, "')'")
            return inner
        raise self.error("expected a value expression")

    # -- set expressions ---------------------------------------------------

    def set_expr(self) -> ast.SetExpr:
        tok = self.peek()
        if tok.kind is T.LBRACE:
            return self._brace_set()
        if tok.kind is T.LCHANSET:
            self.advance()
            names = [self.expect(T.IDENT, "channel name").text]
            while self.accept(T.COMMA):
                names.append(self.expect(T.IDENT, "channel name").text)
            self.expect(T.RCHANSET, "'|}'")
            return ast.SetChannels(tuple(names))
        if tok.kind is T.EVENTS:
            self.advance()
            return ast.SetUniverse()
        if tok.kind in (T.UNION, T.DIFF, T.INTER):
            self.advance()
            self.expect(T.LPAREN, "'('")
            left = self.set_expr()
            self.expect(T.COMMA, "','")
            right = self.set_expr()
            self.expect(T.RPAREN, "')'")
            return ast.SetOp(tok.text, left, right)
        if tok.kind is T.IDENT:
            self.advance()
            return ast.SetName(tok.text)
        if tok.kind is T.LPAREN:
            self.advance()
            inner = self.set_expr()
            self.expect(T.RPAREN, "')'")
            return inner
        raise self.error("expected a set expression")

    def _brace_set(self) -> ast.SetExpr:
        self.expect(T.LBRACE, "'{'")
        if self.accept(T.RBRACE):
            return ast.SetEnum(())
        first = self._set_item()
        if self.accept(T.DOTDOT):
            lo = self._item_to_value(first)
            hi = self.value_expr()
            self.expect(T.RBRACE, "'}'")
            return ast.SetRange(lo, hi)
        items = [first]
        while self.accept(T.COMMA):
            items.append(self._set_item())
        self.expect(T.RBRACE, "'}'")
        return ast.SetEnum(tuple(items))

    def _set_item(self) -> ast.Node:
        # A dotted item (bare name or name.v1.v2) or a value expression.
        if self.at(T.IDENT):
            nxt = self.peek(1).kind
            if nxt is T.DOT:
                head = self.advance().text
                args = []
                while self.accept(T.DOT):
                    args.append(self.value_primary())
                return ast.Dotted(head, tuple(args))
            if nxt in (T.COMMA, T.RBRACE):
                return ast.Dotted(self.advance().text)
        return self.value_expr()

    def _item_to_value(self, item: ast.Node) -> ast.ValueExpr:
        if isinstance(item, ast.Dotted):
            if item.args:
                raise self.error("dotted event cannot be a range bound")
            return ast.Name(item.head)
        assert isinstance(item, ast.ValueExpr)
        return item

    # -- type expressions --------------------------------------------------

    def type_expr(self) -> ast.TypeExpr:
        if self.accept(T.BOOL):
            return ast.TBool()
        if self.at(T.LBRACE):
            self.advance()
            lo = self.value_expr()
            self.expect(T.DOTDOT, "'..'")
            hi = self.value_expr()
            self.expect(T.RBRACE, "'}'")
            return ast.TRange(lo, hi)
        tok = self.expect(T.IDENT, "type name")
        return ast.TName(tok.text)

    # -- events in prefix position ------------------------------------------

    def event_pattern(self) -> ast.EventPattern:
        channel = self.expect(T.IDENT, "channel name").text
        fields: list[ast.Node] = []
        while True:
            if self.at(T.DOT) or self.at(T.PLING):
                sigil = self.advance().text
                fields.append(ast.FieldOutput(self.value_primary(), sigil))
            elif self.at(T.QUERY):
                self.advance()
                var = self.expect(T.IDENT, "input variable").text
                restriction = None
                if self.accept(T.COLON):
                    restriction = self.set_expr()
                fields.append(ast.FieldInput(var, restriction))
            else:
                break
        return ast.EventPattern(channel, tuple(fields))

    # -- process expressions -------------------------------------------------

    def process_expr(self) -> ast.ProcessExpr:
        left = self._ext_choice()
        while self.accept(T.INTCHOICE):
            left = ast.PIntChoice(left, self._ext_choice())
        return left

    def _ext_choice(self) -> ast.ProcessExpr:
        left = self._parallel()
        while self.accept(T.EXTCHOICE):
            left = ast.PExtChoice(left, self._parallel())
        return left

    def _parallel(self) -> ast.ProcessExpr:
        left = self._interleave()
        while True:
            if self.accept(T.LSYNC):
                sync = self.set_expr()
                self.expect(T.RSYNC, "'|]'")
                left = ast.PGenPar(left, sync, self._interleave())
            elif self.at(T.LBRACKET):
                self.advance()
                alpha_l = self.set_expr()
                self.expect(T.PARBAR, "'||'")
                alpha_r = self.set_expr()
                self.expect(T.RBRACKET, "']'")
                left = ast.PAlphaPar(left, alpha_l, alpha_r, self._interleave())
            else:
                return left

    def _interleave(self) -> ast.ProcessExpr:
        left = self._seq()
        while self.accept(T.INTERLEAVE):
            left = ast.PInterleave(left, self._seq())
        return left

    def _seq(self) -> ast.ProcessExpr:
        left = self._hide()
        while self.accept(T.SEMI):
            left = ast.PSeq(left, self._hide())
        return left

    def _hide(self) -> ast.ProcessExpr:
        left = self._prefix()
        while self.accept(T.BACKSLASH):
            left = ast.PHide(left, self.set_expr())
        return left

    def _prefix(self) -> ast.ProcessExpr:
        if self.at(T.IDENT):
            mark = self.pos
            try:
                pat = self.event_pattern()
            except SpecParseError:
                self.pos = mark
            else:
                if self.accept(T.ARROW):
                    return ast.PPrefix(pat, self._prefix())
                self.pos = mark
        return self._atom()

    def _atom(self) -> ast.ProcessExpr:
        tok = self.peek()
        if tok.kind is T.STOP:
            self.advance()
            return ast.PStop()
        if tok.kind is T.SKIP:
            self.advance()
            return ast.PSkip()
        if tok.kind is T.LPAREN:
            self.advance()
            inner = self.process_expr()
            self.expect(T.RPAREN, "')'")
            return inner
        if tok.kind is T.IF:
            self.advance()
            cond = self.value_expr()
            self.expect(T.THEN, "'then'")
            then = self.process_expr()
            self.expect(T.ELSE, "'else'")
            orelse = self.process_expr()
            return ast.PIf(cond, then, orelse)
        if tok.kind is T.EXTCHOICE:
            # replicated external choice: [] x:S @ P
            self.advance()
            var = self.expect(T.IDENT, "binder variable").text
            self.expect(T.COLON, "':'")
            over = self.set_expr()
            self.expect(T.AT, "'@'")
            body = self.process_expr()
            return ast.PRepExtChoice(var, over, body)
        if tok.kind is T.IDENT:
            self.advance()
            args: tuple[ast.ValueExpr, ...] = ()
            if self.accept(T.LPAREN):
                lst = [self.value_expr()]
                while self.accept(T.COMMA):
                    lst.append(self.value_expr())
                self.expect(T.RPAREN, "')'")
                args = tuple(lst)
            return ast.PCall(tok.text, args)
        raise self.error("expected a process expression")

    # -- declarations --------------------------------------------------------

    def _find_def_boundary(self) -> int:
        """Index of the first token that starts the next declaration."""
        i = self.pos
        toks = self.toks
        while True:
            tok = toks[i]
            if tok.kind in DECL_STARTERS:
                return i
            if tok.kind is T.IDENT:
                if toks[i + 1].kind is T.EQ:
                    return i
                if toks[i + 1].kind is T.LPAREN:
                    j = i + 2
                    depth = 1
                    while depth and toks[j].kind is not T.EOF:
                        if toks[j].kind is T.LPAREN:
                            depth += 1
                        elif toks[j].kind is T.RPAREN:
                            depth -= 1
                        j += 1
                    if toks[j].kind is T.EQ:
                        return i
            i += 1

    def _parse_definition(self) -> ast.Decl:
        name_tok = self.expect(T.IDENT, "definition name")
        params: tuple[str, ...] = ()
        if self.accept(T.LPAREN):
            lst = [self.expect(T.IDENT, "parameter name").text]
            while self.accept(T.COMMA):
                lst.append(self.expect(T.IDENT, "parameter name").text)
            self.expect(T.RPAREN, "')'")
            params = tuple(lst)
        self.expect(T.EQ, "'='")
        body_start = self.pos
        boundary = self._find_def_boundary()

        attempts: list[tuple[Callable[[], ast.Node], str]] = [
            (self.process_expr, "process"),
            (self.value_expr, "value"),
            (self.set_expr, "set"),
        ]
        best_err: Optional[SpecParseError] = None
        best_reach = -1
        for parse, _label in attempts:
            self.pos = body_start
            try:
                body = parse()
            except SpecParseError as e:
                if self.pos > best_reach:
                    best_reach, best_err = self.pos, e
                continue
            if self.pos == boundary:
                if isinstance(body, ast.ProcessExpr):
                    return ast.ProcessDef(name_tok.text, params, body, line=name_tok.line)
                if params:
                    raise self.error("value definitions cannot take parameters")
                return ast.ValueDef(name_tok.text, body, line=name_tok.line)
            if self.pos > best_reach:
                best_reach = self.pos
                best_err = SpecParseError(
                    f"{self.origin}: unexpected {self.toks[self.pos].text!r} "
                    f"in definition of {name_tok.text}",
                    self.toks[self.pos].line,
                    self.toks[self.pos].col,
                )
        assert best_err is not None
        raise best_err

    def _parse_channel(self) -> ast.ChannelDecl:
        kw = self.expect(T.CHANNEL)
        names = [self.expect(T.IDENT, "channel name").text]
        while self.accept(T.COMMA):
            names.append(self.expect(T.IDENT, "channel name").text)
        payload: list[ast.TypeExpr] = []
        if self.accept(T.COLON):
            payload.append(self.type_expr())
            while self.accept(T.DOT):
                payload.append(self.type_expr())
        return ast.ChannelDecl(tuple(names), tuple(payload), line=kw.line)

    def _parse_datatype(self) -> ast.DatatypeDecl:
        kw = self.expect(T.DATATYPE)
        name = self.expect(T.IDENT, "datatype name").text
        self.expect(T.EQ, "'='")
        ctors = [self.expect(T.IDENT, "constructor name").text]
        while self.accept(T.BAR):
            ctors.append(self.expect(T.IDENT, "constructor name").text)
        return ast.DatatypeDecl(name, tuple(ctors), line=kw.line)

    def _parse_event_lit(self) -> ast.EventLit:
        channel = self.expect(T.IDENT, "event name").text
        args = []
        while self.accept(T.DOT):
            args.append(self.value_primary())
        return ast.EventLit(channel, tuple(args))

    def parse_trace_lit(self) -> tuple[ast.EventLit, ...]:
        self.expect(T.LT, "'<'")
        if self.accept(T.GT):
            return ()
        events = [self._parse_event_lit()]
        while self.accept(T.COMMA):
            events.append(self._parse_event_lit())
        self.expect(T.GT, "'>'")
        return tuple(events)

    def _parse_assert(self) -> ast.Assertion:
        kw = self.expect(T.ASSERT)
        left = self.process_expr()
        if self.accept(T.REFINES):
            right = self.process_expr()
            return ast.Assertion("refines", left, right, line=kw.line)
        self.expect(T.COLON, "':['")
        self.expect(T.LBRACKET, "':['")
        word = self.expect(T.IDENT, "assertion kind").text
        if word == "deadlock":
            if self.expect(T.IDENT, "'free'").text != "free":
                raise self.error("expected 'free'")
            self.expect(T.RBRACKET, "']'")
            return ast.Assertion("deadlock_free", left, line=kw.line)
        if word == "divergence":
            if self.expect(T.IDENT, "'free'").text != "free":
                raise self.error("expected 'free'")
            self.expect(T.RBRACKET, "']'")
            return ast.Assertion("divergence_free", left, line=kw.line)
        if word == "deterministic":
            self.expect(T.RBRACKET, "']'")
            return ast.Assertion("deterministic", left, line=kw.line)
        if word == "has":
            if self.expect(T.IDENT, "'trace'").text != "trace":
                raise self.error("expected 'trace'")
            self.expect(T.RBRACKET, "']'")
            self.expect(T.COLON, "':'")
            trace = self.parse_trace_lit()
            return ast.Assertion("has_trace", left, trace=trace, line=kw.line)
        raise self.error(f"unknown assertion kind {word!r}")

    def parse_decls(self, include_loader=None, _seen=None) -> list[ast.Decl]:
        decls: list[ast.Decl] = []
        while not self.at(T.EOF):
            tok = self.peek()
            if tok.kind is T.CHANNEL:
                decls.append(self._parse_channel())
            elif tok.kind is T.DATATYPE:
                decls.append(self._parse_datatype())
            elif tok.kind is T.ASSERT:
                decls.append(self._parse_assert())
            elif tok.kind is T.INCLUDE:
                self.advance()
                path = self.expect(T.STRING, "file path").text
                if include_loader is None:
                    raise self.error("include is not available in this context")
                decls.extend(include_loader(path, _seen))
            elif tok.kind is T.IDENT:
                decls.append(self._parse_definition())
            else:
                raise self.error("expected a declaration")
        return decls


def _check_duplicates(decls: list[ast.Decl], origin: str) -> None:
    seen: dict[str, int] = {}

    def claim(name: str, line: int):
        if name in seen:
            raise DuplicateDefinition(
                f"{origin}: duplicate definition of {name!r} "
                f"(first defined on line {seen[name]})",
                line,
                1,
            )
        seen[name] = line

    for d in decls:
        if isinstance(d, ast.ChannelDecl):
            for n in d.names:
                claim(n, d.line)
        elif isinstance(d, ast.DatatypeDecl):
            claim(d.name, d.line)
            for c in d.constructors:
                claim(c, d.line)
        elif isinstance(d, (ast.ValueDef, ast.ProcessDef)):
            claim(d.name, d.line)


def parse_spec(source, origin: str = "<inline>", include_loader=None) -> ast.SpecModule:
    """Parse a full specification into an unresolved AST module.

    ``source`` may be a string or a :class:`SpecSource`.  Either a complete
    AST is returned or a :class:`SpecParseError` pinpointing the failure is
    raised; there is no partial acceptance.
    """
    if isinstance(source, SpecSource):
        text, origin = source.text, source.origin
    else:
        text = source
    if not text.strip():
        raise SpecParseError(f"{origin}: specification is empty")
    parser = _Parser(tokenize(text, origin), origin)
    decls = parser.parse_decls(include_loader=include_loader, _seen={origin})
    _check_duplicates(decls, origin)
    return ast.SpecModule(tuple(decls), origin=origin)


def load_spec_file(path: str) -> ast.SpecModule:
    """Parse a ``.csp`` file from disk, honouring ``include`` directives."""

    def loader(rel: str, seen: set) -> list[ast.Decl]:
        target = os.path.normpath(os.path.join(os.path.dirname(abspath), rel))
        if target in seen:
            raise SpecParseError(f"{path}: circular include of {rel!r}")
        seen.add(target)
        with open(target, encoding="utf-8") as fh:
            text = fh.read()
        sub = _Parser(tokenize(text, target), target)
        return sub.parse_decls(include_loader=loader, _seen=seen)

    abspath = os.path.abspath(path)
    with open(abspath, encoding="utf-8") as fh:
        text = fh.read()
    if not text.strip():
        raise SpecParseError(f"{path}: specification is empty")
    parser = _Parser(tokenize(text, path), path)
    decls = parser.parse_decls(include_loader=loader, _seen={abspath})
    _check_duplicates(decls, path)
    return ast.SpecModule(tuple(decls), origin=path)


def parse_assertions(text: str, origin: str = "<assertions>") -> tuple[ast.Assertion, ...]:
    """Parse a standalone assertion script (``assert ...`` lines only)."""
    parser = _Parser(tokenize(text, origin), origin)
    decls = parser.parse_decls()
    bad = [d for d in decls if not isinstance(d, ast.Assertion)]
    if bad:
        raise SpecParseError(f"{origin}: assertion scripts may only contain assert lines")
    return tuple(d for d in decls if isinstance(d, ast.Assertion))


def parse_trace_literal(text: str, spec) -> list:
    """Parse ``<e1, e2, ...>`` into ground events checked against ``spec``.

    ``spec`` is a resolved specification; unknown channels raise
    ``UnknownChannel`` and ill-typed payloads raise ``BadPayload``.
    """
    parser = _Parser(tokenize(text, "<trace>"), "<trace>")
    lits = parser.parse_trace_lit()
    if not parser.at(T.EOF):
        raise parser.error("unexpected trailing input after trace literal")
    return [spec.ground_event_lit(lit) for lit in lits]
