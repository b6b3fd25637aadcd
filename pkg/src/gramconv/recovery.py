"""Notation-parametric grammar recovery and unparsing.

`recover` parses grammar text written in the EBNF dialect described by a
notation spec; `unparse` renders a grammar back into such a dialect so that
recovery yields the same grammar again.

Tokenization is longest-match over the spec lexemes (with a word-boundary
guard for lexemes that look like names), then quoted terminals, then maximal
name runs over letters, digits, `_` and `-`.  The right-hand side grammar is
alternation over concatenation over separator-list infixes over postfix
operators; group brackets override.  The reserved names `str` and `int`
denote the built-in values.

A recovered grammar carries no explicit root declaration, so recovery adopts
the defined-but-never-used nonterminals as roots.  Recovery never aborts on
unknown words (they are plain nonterminals, reported as a warning when
undefined); only structural problems (unbalanced brackets, a defining symbol
without a left-hand side) are errors.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import (
    EPSILON,
    Anything,
    Choice,
    Empty,
    Epsilon,
    Expr,
    Grammar,
    Nonterminal,
    Optional,
    Plus,
    Production,
    Selectable,
    SepListPlus,
    SepListStar,
    Sequence,
    Star,
    Terminal,
    ValueInt,
    ValueStr,
    VALUE_NAMES,
    choice,
    opt,
    plus,
    sepplus,
    sepstar,
    seq,
    star,
    subterms,
    tops,
    vocabulary,
)
from .notation import NotationSpec

_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-")


class RecoveryError(ValueError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnparseError(ValueError):
    def __init__(self, missing: list[str]) -> None:
        super().__init__("missing notation roles: " + ", ".join(sorted(missing)))
        self.missing = tuple(sorted(missing))


@dataclass(frozen=True)
class HeuristicEvent:
    line: int
    name: str
    detail: str


@dataclass
class RecoveryReport:
    grammar: Grammar
    warnings: list[tuple[int, str]]
    heuristics: list[HeuristicEvent]


@dataclass(frozen=True)
class _Token:
    line: int
    kind: str  # "lex" | "name" | "terminal"
    text: str
    role: str | None = None


def _tokenize(text: str, notation: NotationSpec) -> list[_Token]:
    roles = notation.as_dict()
    comment = roles.get("line-comment-start")
    quote_open = roles.get("terminal-start-quote")
    quote_close = roles.get("terminal-end-quote")
    lexemes = sorted(
        ((lexeme, role) for role, lexeme in roles.items()
         if role not in ("line-comment-start", "terminal-end-quote")),
        key=lambda item: -len(item[0]))
    tokens: list[_Token] = []
    pos = 0
    line = 1
    length = len(text)
    while pos < length:
        ch = text[pos]
        if ch == "\n":
            line += 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        if comment and text.startswith(comment, pos):
            end = text.find("\n", pos)
            pos = length if end == -1 else end
            continue
        matched = None
        for lexeme, role in lexemes:
            if not text.startswith(lexeme, pos):
                continue
            # a lexeme made of name characters only counts at a word boundary
            if (set(lexeme) <= _NAME_CHARS
                    and pos + len(lexeme) < length
                    and text[pos + len(lexeme)] in _NAME_CHARS):
                continue
            matched = (lexeme, role)
            break
        if matched is not None:
            lexeme, role = matched
            if role == "terminal-start-quote":
                end = text.find(quote_close, pos + len(lexeme))
                if end == -1:
                    raise RecoveryError(line, "unterminated terminal quote")
                body = text[pos + len(lexeme):end]
                if "\n" in body:
                    raise RecoveryError(line, "terminal quote spans lines")
                tokens.append(_Token(line, "terminal", body))
                pos = end + len(quote_close)
                continue
            tokens.append(_Token(line, "lex", lexeme, role))
            pos += len(lexeme)
            continue
        if ch in _NAME_CHARS:
            end = pos
            while end < length and text[end] in _NAME_CHARS:
                end += 1
            tokens.append(_Token(line, "name", text[pos:end]))
            pos = end
            continue
        raise RecoveryError(line, f"unexpected character {ch!r}")
    return tokens


class _RhsParser:
    def __init__(self, tokens: list[_Token], end_line: int) -> None:
        self.tokens = tokens
        self.at = 0
        self.end_line = end_line

    def _line(self) -> int:
        if self.at < len(self.tokens):
            return self.tokens[self.at].line
        return self.end_line

    def peek(self) -> _Token | None:
        return self.tokens[self.at] if self.at < len(self.tokens) else None

    def take(self) -> _Token:
        token = self.tokens[self.at]
        self.at += 1
        return token

    def parse(self) -> Expr:
        expr = self.alternation(closing=None)
        if self.at != len(self.tokens):
            token = self.tokens[self.at]
            raise RecoveryError(token.line, f"unbalanced {token.text!r}")
        return expr

    def alternation(self, closing: str | None) -> Expr:
        alternatives = [self.concatenation(closing)]
        while True:
            token = self.peek()
            if token is not None and token.kind == "lex" \
                    and token.role == "definition-separator":
                self.take()
                alternatives.append(self.concatenation(closing))
            else:
                break
        return choice(*alternatives) if len(alternatives) > 1 else alternatives[0]

    def concatenation(self, closing: str | None) -> Expr:
        parts: list[Expr] = []
        while True:
            token = self.peek()
            if token is None:
                break
            if token.kind == "lex" and token.role in ("definition-separator",):
                break
            if token.kind == "lex" and closing is not None and token.role == closing:
                break
            if token.kind == "lex" and token.role in ("group-end", "option-end",
                                                      "nonterminal-end"):
                break
            if token.kind == "lex" and token.role == "concatenation":
                self.take()
                continue
            parts.append(self.seplist_term(closing))
        if not parts:
            return EPSILON
        return seq(*parts)

    def seplist_term(self, closing: str | None) -> Expr:
        expr = self.postfixed(closing)
        while True:
            token = self.peek()
            if token is not None and token.kind == "lex" \
                    and token.role in ("seplist-star", "seplist-plus"):
                self.take()
                separator = self.postfixed(closing)
                ctor = sepstar if token.role == "seplist-star" else sepplus
                expr = ctor(expr, separator)
            else:
                break
        return expr

    def postfixed(self, closing: str | None) -> Expr:
        expr = self.primary(closing)
        while True:
            token = self.peek()
            if token is not None and token.kind == "lex" and token.role in (
                    "star-postfix", "plus-postfix", "option-postfix"):
                self.take()
                if token.role == "star-postfix":
                    expr = star(expr)
                elif token.role == "plus-postfix":
                    expr = plus(expr)
                else:
                    expr = opt(expr)
            else:
                break
        return expr

    def primary(self, closing: str | None) -> Expr:
        token = self.peek()
        if token is None:
            raise RecoveryError(self._line(), "expected an expression")
        if token.kind == "terminal":
            self.take()
            if not token.text:
                raise RecoveryError(token.line, "empty terminal")
            return Terminal(token.text)
        if token.kind == "name":
            self.take()
            return self._name_expr(token.text)
        if token.kind == "lex" and token.role == "group-start":
            self.take()
            inner = self.alternation("group-end")
            closer = self.peek()
            if closer is None or closer.kind != "lex" or closer.role != "group-end":
                raise RecoveryError(token.line, "unbalanced group brackets")
            self.take()
            return inner
        if token.kind == "lex" and token.role == "option-start":
            self.take()
            inner = self.alternation("option-end")
            closer = self.peek()
            if closer is None or closer.kind != "lex" or closer.role != "option-end":
                raise RecoveryError(token.line, "unbalanced option brackets")
            self.take()
            return opt(inner)
        if token.kind == "lex" and token.role == "nonterminal-start":
            self.take()
            inner = self.peek()
            if inner is None or inner.kind != "name":
                raise RecoveryError(token.line, "expected a name after nonterminal bracket")
            self.take()
            closer = self.peek()
            if closer is None or closer.kind != "lex" or closer.role != "nonterminal-end":
                raise RecoveryError(token.line, "unbalanced nonterminal brackets")
            self.take()
            return self._name_expr(inner.text)
        raise RecoveryError(token.line, f"unexpected {token.text!r}")

    @staticmethod
    def _name_expr(name: str) -> Expr:
        return VALUE_NAMES.get(name, Nonterminal(name))


def _split_rules(tokens: list[_Token], notation: NotationSpec, last_line: int,
                 warnings: list[tuple[int, str]],
                 heuristics: list[HeuristicEvent]) -> list[list[_Token]]:
    if notation.has("terminator"):
        chunks: list[list[_Token]] = []
        current: list[_Token] = []
        for token in tokens:
            if token.kind == "lex" and token.role == "terminator":
                if current:
                    chunks.append(current)
                    current = []
                else:
                    warnings.append((token.line, "stray terminator skipped"))
                    heuristics.append(HeuristicEvent(
                        token.line, "stray-terminator", "skipped an empty rule"))
            else:
                current.append(token)
        if current:
            warnings.append((last_line, "missing terminator before end of input"))
            chunks.append(current)
        return chunks
    # without a terminator, a rule ends where the next line opens one
    chunks = []
    current = []
    for i, token in enumerate(tokens):
        if current and token.line > current[-1].line and _opens_rule(tokens, i):
            chunks.append(current)
            current = []
        current.append(token)
    if current:
        chunks.append(current)
    return chunks


def _opens_rule(tokens: list[_Token], at: int) -> bool:
    token = tokens[at]
    rest = tokens[at:]
    if token.kind == "name":
        return (len(rest) > 1 and rest[1].kind == "lex" and rest[1].role == "defining")
    if token.kind == "lex" and token.role == "nonterminal-start":
        return (len(rest) > 3 and rest[1].kind == "name"
                and rest[2].kind == "lex" and rest[2].role == "nonterminal-end"
                and rest[3].kind == "lex" and rest[3].role == "defining")
    return False


def _take_lhs(chunk: list[_Token]) -> tuple[str, list[_Token]]:
    first = chunk[0]
    if first.kind == "lex" and first.role == "defining":
        raise RecoveryError(first.line, "defining symbol with no left-hand side")
    if first.kind == "lex" and first.role == "nonterminal-start":
        if not (len(chunk) > 3 and chunk[1].kind == "name"
                and chunk[2].kind == "lex" and chunk[2].role == "nonterminal-end"
                and chunk[3].kind == "lex" and chunk[3].role == "defining"):
            raise RecoveryError(first.line, "expected '<name> defining-symbol'")
        return chunk[1].text, chunk[4:]
    if first.kind != "name":
        raise RecoveryError(first.line, f"expected a rule, found {first.text!r}")
    if len(chunk) < 2 or chunk[1].kind != "lex" or chunk[1].role != "defining":
        raise RecoveryError(first.line, f"expected defining symbol after {first.text!r}")
    return first.text, chunk[2:]


def recover(text: str, notation: NotationSpec) -> RecoveryReport:
    """Parse grammar text in the given dialect.  Roots are the recovered top
    (defined-but-unused) nonterminals."""
    warnings: list[tuple[int, str]] = []
    heuristics: list[HeuristicEvent] = []
    tokens = _tokenize(text, notation)
    last_line = text.count("\n") + 1
    if not tokens:
        warnings.append((1, "empty input; recovered the empty grammar"))
        return RecoveryReport(Grammar((), ()), warnings, heuristics)
    productions: list[Production] = []
    defined: set[str] = set()
    first_use: dict[str, int] = {}
    for chunk in _split_rules(tokens, notation, last_line, warnings, heuristics):
        lhs, rhs_tokens = _take_lhs(chunk)
        line = chunk[0].line
        rhs = _RhsParser(rhs_tokens, chunk[-1].line).parse()
        if lhs in defined:
            heuristics.append(HeuristicEvent(
                line, "vertical-redefinition",
                f"{lhs} was already defined; appended another alternative"))
        defined.add(lhs)
        for token in rhs_tokens:
            if token.kind == "name" and token.text not in VALUE_NAMES:
                first_use.setdefault(token.text, token.line)
        productions.append(Production(lhs, rhs))
    g = Grammar((), tuple(productions))
    for name in sorted(vocabulary(g).used - frozenset(defined)):
        line = first_use.get(name, 1)
        warnings.append((line, f"nonterminal {name!r} is used but never defined"))
        heuristics.append(HeuristicEvent(
            line, "undefined-nonterminal", f"kept {name!r} as a plain nonterminal"))
    g = Grammar(tuple(sorted(tops(g))), g.productions)
    return RecoveryReport(g, warnings, heuristics)


# --------------------------------------------------------------------------
# unparsing

# precedence levels of the rendered forms
_ALT, _SEQ, _SEP, _ATOM = 0, 1, 2, 3


def _level(expr: Expr) -> int:
    if isinstance(expr, Choice):
        return _ALT
    if isinstance(expr, Sequence):
        return _SEQ
    if isinstance(expr, (SepListStar, SepListPlus)):
        return _SEP
    return _ATOM


def _census(g: Grammar) -> tuple[set[str], list[str]]:
    """Roles a notation must provide to express g, and the constructs that no
    notation role can express at all."""
    needed: set[str] = {"defining"}
    impossible: list[str] = []
    group_needed = False

    def need_group(expr: Expr) -> bool:
        return not isinstance(expr, Epsilon) and _level(expr) < _ATOM

    for prod in g.productions:
        if prod.label is not None:
            impossible.append(f"production label {prod.label!r}")
        for sub in subterms(prod.rhs):
            if isinstance(sub, Terminal):
                needed.add("terminal-start-quote")
                needed.add("terminal-end-quote")
            elif isinstance(sub, Star):
                needed.add("star-postfix")
                group_needed = group_needed or need_group(sub.body) \
                    or isinstance(sub.body, Epsilon)
            elif isinstance(sub, Plus):
                needed.add("plus-postfix")
                group_needed = group_needed or need_group(sub.body) \
                    or isinstance(sub.body, Epsilon)
            elif isinstance(sub, Optional):
                needed.add("option")
                group_needed = group_needed or need_group(sub.body) \
                    or isinstance(sub.body, Epsilon)
            elif isinstance(sub, SepListStar):
                needed.add("seplist-star")
                group_needed = group_needed or any(
                    need_group(part) or isinstance(part, Epsilon)
                    for part in (sub.item, sub.separator))
            elif isinstance(sub, SepListPlus):
                needed.add("seplist-plus")
                group_needed = group_needed or any(
                    need_group(part) or isinstance(part, Epsilon)
                    for part in (sub.item, sub.separator))
            elif isinstance(sub, Sequence):
                group_needed = group_needed or any(
                    isinstance(part, Choice) for part in sub.parts)
            elif isinstance(sub, Choice):
                needed.add("definition-separator")
            elif isinstance(sub, Selectable):
                impossible.append(f"selector {sub.selector!r}")
            elif isinstance(sub, Empty):
                impossible.append("the empty language")
            elif isinstance(sub, Anything):
                impossible.append("the wildcard")
    if group_needed:
        needed.add("group-start")
        needed.add("group-end")
    return needed, impossible


def unparse(g: Grammar, notation: NotationSpec) -> str:
    """Render g in the given dialect; recovery of the output yields g again.
    Grouping is inserted wherever precedence would otherwise reassociate."""
    roles = notation.as_dict()
    needed, impossible = _census(g)
    if impossible:
        raise UnparseError(sorted(set(impossible)))
    missing = set()
    for role in needed:
        if role == "option":
            if "option-postfix" not in roles and "option-start" not in roles:
                missing.add("option-postfix")
        elif role not in roles:
            missing.add(role)
    if missing:
        raise UnparseError(sorted(missing))

    quote_open = roles.get("terminal-start-quote", "")
    quote_close = roles.get("terminal-end-quote", "")
    joiner = f" {roles['concatenation']} " if "concatenation" in roles else " "
    postfix_option = "option-postfix" in roles

    def grouped(text: str) -> str:
        return f"{roles['group-start']} {text} {roles['group-end']}".replace("  ", " ")

    def render(expr: Expr, need: int) -> str:
        if isinstance(expr, Epsilon):
            return grouped("") if need > _SEQ else ""
        if isinstance(expr, Terminal):
            if quote_close and quote_close in expr.text:
                raise UnparseError(["terminal-end-quote"])
            return f"{quote_open}{expr.text}{quote_close}"
        if isinstance(expr, ValueStr):
            return _name("str")
        if isinstance(expr, ValueInt):
            return _name("int")
        if isinstance(expr, Nonterminal):
            return _name(expr.name)
        if isinstance(expr, Choice):
            body = f" {roles['definition-separator']} ".join(
                render(alt, _SEQ) for alt in expr.alternatives)
            return grouped(body) if need > _ALT else body
        if isinstance(expr, Sequence):
            body = joiner.join(render(part, _SEP) for part in expr.parts)
            return grouped(body) if need > _SEQ else body
        if isinstance(expr, (SepListStar, SepListPlus)):
            lexeme = roles["seplist-star" if isinstance(expr, SepListStar)
                           else "seplist-plus"]
            body = f"{render(expr.item, _ATOM)} {lexeme} {render(expr.separator, _ATOM)}"
            return grouped(body) if need > _SEP else body
        if isinstance(expr, Star):
            return render(expr.body, _ATOM) + roles["star-postfix"]
        if isinstance(expr, Plus):
            return render(expr.body, _ATOM) + roles["plus-postfix"]
        if isinstance(expr, Optional):
            if postfix_option:
                return render(expr.body, _ATOM) + roles["option-postfix"]
            return (f"{roles['option-start']} {render(expr.body, _ALT)} "
                    f"{roles['option-end']}")
        raise UnparseError([type(expr).__name__.lower()])

    def _name(name: str) -> str:
        if "nonterminal-start" in roles:
            return f"{roles['nonterminal-start']}{name}{roles['nonterminal-end']}"
        return name

    lines = []
    terminator = roles.get("terminator")
    for prod in g.productions:
        rhs_text = render(prod.rhs, _ALT)
        line = f"{_name(prod.lhs)} {roles['defining']} {rhs_text}".rstrip()
        if terminator:
            line = f"{line} {terminator}"
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")
