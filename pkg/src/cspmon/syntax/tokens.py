"""Tokenizer for the machine-readable CSP subset.

Line comments run from ``--`` to end of line; block comments are ``{- -}``
and nest.  Note ``{-`` always opens a comment, so a set starting with a
negative literal needs a space: ``{ -3..0}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from ..errors import SpecParseError


class T(Enum):
    IDENT = auto()
    NUMBER = auto()
    STRING = auto()

    # keywords
    CHANNEL = auto()
    DATATYPE = auto()
    ASSERT = auto()
    INCLUDE = auto()
    IF = auto()
    THEN = auto()
    ELSE = auto()
    STOP = auto()
    SKIP = auto()
    TRUE = auto()
    FALSE = auto()
    EVENTS = auto()
    BOOL = auto()
    UNION = auto()
    DIFF = auto()
    INTER = auto()
    NOT = auto()
    AND = auto()
    OR = auto()

    # punctuation / operators
    EQ = auto()  # =
    ARROW = auto()  # ->
    EXTCHOICE = auto()  # []
    INTCHOICE = auto()  # |~|
    INTERLEAVE = auto()  # |||
    PARBAR = auto()  # ||
    BAR = auto()  # |
    LSYNC = auto()  # [|
    RSYNC = auto()  # |]
    LBRACKET = auto()  # [
    RBRACKET = auto()  # ]
    REFINES = auto()  # [T=
    LBRACE = auto()  # {
    RBRACE = auto()  # }
    LCHANSET = auto()  # {|
    RCHANSET = auto()  # |}
    LPAREN = auto()  # (
    RPAREN = auto()  # )
    COMMA = auto()  # ,
    DOT = auto()  # .
    DOTDOT = auto()  # ..
    QUERY = auto()  # ?
    PLING = auto()  # !
    COLON = auto()  # :
    AT = auto()  # @
    SEMI = auto()  # ;
    BACKSLASH = auto()  # \
    PLUS = auto()
    MINUS = auto()
    STAR = auto()
    SLASH = auto()
    PERCENT = auto()
    EQEQ = auto()  # ==
    NEQ = auto()  # !=
    LT = auto()
    LE = auto()
    GT = auto()
    GE = auto()

    EOF = auto()


KEYWORDS = {
    "channel": T.CHANNEL,
    "datatype": T.DATATYPE,
    "assert": T.ASSERT,
    "include": T.INCLUDE,
    "if": T.IF,
    "then": T.THEN,
    "else": T.ELSE,
    "STOP": T.STOP,
    "SKIP": T.SKIP,
    "True": T.TRUE,
    "False": T.FALSE,
    "Events": T.EVENTS,
    "Bool": T.BOOL,
    "union": T.UNION,
    "diff": T.DIFF,
    "inter": T.INTER,
    "not": T.NOT,
    "and": T.AND,
    "or": T.OR,
}


@dataclass(frozen=True)
class Token:
    kind: T
    text: str
    line: int
    col: int
    value: int = 0  # numeric payload for NUMBER tokens

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.text!r}, {self.line}:{self.col})"


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def tokenize(text: str, origin: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str) -> SpecParseError:
        return SpecParseError(f"{origin}: {msg}", line, col)

    def emit(kind: T, lexeme: str, value: int = 0):
        toks.append(Token(kind, lexeme, line, col, value))

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        # comments
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("{-", i):
            depth = 1
            i += 2
            col += 2
            while i < n and depth:
                if text.startswith("{-", i):
                    depth += 1
                    i += 2
                    col += 2
                elif text.startswith("-}", i):
                    depth -= 1
                    i += 2
                    col += 2
                elif text[i] == "\n":
                    i += 1
                    line += 1
                    col = 1
                else:
                    i += 1
                    col += 1
            if depth:
                raise err("unterminated block comment")
            continue

        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            emit(KEYWORDS.get(word, T.IDENT), word)
            col += j - i
            i = j
            continue

        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            emit(T.NUMBER, text[i:j], int(text[i:j]))
            col += j - i
            i = j
            continue

        if c == '"':
            j = i + 1
            while j < n and text[j] not in '"\n':
                j += 1
            if j >= n or text[j] != '"':
                raise err("unterminated string literal")
            emit(T.STRING, text[i + 1 : j])
            col += j + 1 - i
            i = j + 1
            continue

        def two(a: str) -> bool:
            return text.startswith(a, i)

        if two("->"):
            emit(T.ARROW, "->")
            i += 2
            col += 2
        elif two("[|"):
            emit(T.LSYNC, "[|")
            i += 2
            col += 2
        elif two("[]"):
            emit(T.EXTCHOICE, "[]")
            i += 2
            col += 2
        elif two("[T="):
            emit(T.REFINES, "[T=")
            i += 3
            col += 3
        elif c == "[":
            emit(T.LBRACKET, "[")
            i += 1
            col += 1
        elif two("|~|"):
            emit(T.INTCHOICE, "|~|")
            i += 3
            col += 3
        elif two("|||"):
            emit(T.INTERLEAVE, "|||")
            i += 3
            col += 3
        elif two("||"):
            emit(T.PARBAR, "||")
            i += 2
            col += 2
        elif two("|]"):
            emit(T.RSYNC, "|]")
            i += 2
            col += 2
        elif two("|}"):
            emit(T.RCHANSET, "|}")
            i += 2
            col += 2
        elif c == "|":
            emit(T.BAR, "|")
            i += 1
            col += 1
        elif two("{|"):
            emit(T.LCHANSET, "{|")
            i += 2
            col += 2
        elif c == "{":
            emit(T.LBRACE, "{")
            i += 1
            col += 1
        elif c == "}":
            emit(T.RBRACE, "}")
            i += 1
            col += 1
        elif two(".."):
            emit(T.DOTDOT, "..")
            i += 2
            col += 2
        elif c == ".":
            emit(T.DOT, ".")
            i += 1
            col += 1
        elif two("=="):
            emit(T.EQEQ, "==")
            i += 2
            col += 2
        elif c == "=":
            emit(T.EQ, "=")
            i += 1
            col += 1
        elif two("!="):
            emit(T.NEQ, "!=")
            i += 2
            col += 2
        elif c == "!":
            emit(T.PLING, "!")
            i += 1
            col += 1
        elif two("<="):
            emit(T.LE, "<=")
            i += 2
            col += 2
        elif c == "<":
            emit(T.LT, "<")
            i += 1
            col += 1
        elif two(">="):
            emit(T.GE, ">=")
            i += 2
            col += 2
        elif c == ">":
            emit(T.GT, ">")
            i += 1
            col += 1
        else:
            singles = {
                "]": T.RBRACKET,
                "(": T.LPAREN,
                ")": T.RPAREN,
                ",": T.COMMA,
                "?": T.QUERY,
                ":": T.COLON,
                "@": T.AT,
                ";": T.SEMI,
                "\\": T.BACKSLASH,
                "+": T.PLUS,
                "-": T.MINUS,
                "*": T.STAR,
                "/": T.SLASH,
                "%": T.PERCENT,
            }
            kind = singles.get(c)
            if kind is None:
                raise err(f"unexpected character {c!r}")
            emit(kind, c)
            i += 1
            col += 1

    toks.append(Token(T.EOF, "", line, col))
    return toks
