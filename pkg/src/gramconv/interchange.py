"""JSON interchange format for grammars.

A document is one top-level object:

    {"roots": [names...],
     "productions": [{"label": string-or-null, "lhs": string, "rhs": expr}]}

and every expression is a tagged node: {"tag": "epsilon" | "empty" | "any" |
"valstr" | "valint" | "t" | "n" | "sel" | "seq" | "choice" | "opt" | "star" |
"plus" | "sepstar" | "sepplus", ...tag-specific fields}.  Serialization is
deterministic (UTF-8, two-space indent, fields in schema order), so committed
grammar files round-trip byte-identically.
"""

from __future__ import annotations

import json

from .grammar import (
    ANYTHING,
    EMPTY,
    EPSILON,
    VALUE_INT,
    VALUE_STR,
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
    choice,
    opt,
    plus,
    seq,
    sel,
    sepplus,
    sepstar,
    star,
)


class InterchangeError(ValueError):
    """Malformed interchange document; carries the offending document path."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


def expr_to_json(expr: Expr) -> dict:
    if isinstance(expr, Epsilon):
        return {"tag": "epsilon"}
    if isinstance(expr, Empty):
        return {"tag": "empty"}
    if isinstance(expr, Anything):
        return {"tag": "any"}
    if isinstance(expr, ValueStr):
        return {"tag": "valstr"}
    if isinstance(expr, ValueInt):
        return {"tag": "valint"}
    if isinstance(expr, Terminal):
        return {"tag": "t", "text": expr.text}
    if isinstance(expr, Nonterminal):
        return {"tag": "n", "name": expr.name}
    if isinstance(expr, Selectable):
        return {"tag": "sel", "selector": expr.selector, "body": expr_to_json(expr.body)}
    if isinstance(expr, Sequence):
        return {"tag": "seq", "parts": [expr_to_json(part) for part in expr.parts]}
    if isinstance(expr, Choice):
        return {"tag": "choice",
                "alternatives": [expr_to_json(alt) for alt in expr.alternatives]}
    if isinstance(expr, Optional):
        return {"tag": "opt", "body": expr_to_json(expr.body)}
    if isinstance(expr, Star):
        return {"tag": "star", "body": expr_to_json(expr.body)}
    if isinstance(expr, Plus):
        return {"tag": "plus", "body": expr_to_json(expr.body)}
    if isinstance(expr, SepListStar):
        return {"tag": "sepstar", "item": expr_to_json(expr.item),
                "separator": expr_to_json(expr.separator)}
    if isinstance(expr, SepListPlus):
        return {"tag": "sepplus", "item": expr_to_json(expr.item),
                "separator": expr_to_json(expr.separator)}
    raise TypeError(f"not an expression: {expr!r}")


def grammar_to_json(g: Grammar) -> dict:
    return {
        "roots": list(g.roots),
        "productions": [
            {"label": prod.label, "lhs": prod.lhs, "rhs": expr_to_json(prod.rhs)}
            for prod in g.productions
        ],
    }


def serialize(g: Grammar) -> str:
    return json.dumps(grammar_to_json(g), indent=2, ensure_ascii=False) + "\n"


def _want(doc: dict, key: str, kind, path: str):
    if not isinstance(doc, dict):
        raise InterchangeError(path, f"expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise InterchangeError(path, f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise InterchangeError(f"{path}.{key}",
                               f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def expr_from_json(doc, path: str = "rhs") -> Expr:
    tag = _want(doc, "tag", str, path)
    if tag == "epsilon":
        return EPSILON
    if tag == "empty":
        return EMPTY
    if tag == "any":
        return ANYTHING
    if tag == "valstr":
        return VALUE_STR
    if tag == "valint":
        return VALUE_INT
    if tag == "t":
        return Terminal(_want(doc, "text", str, path))
    if tag == "n":
        return Nonterminal(_want(doc, "name", str, path))
    if tag == "sel":
        return sel(_want(doc, "selector", str, path),
                   expr_from_json(_want(doc, "body", dict, path), f"{path}.body"))
    if tag == "seq":
        parts = _want(doc, "parts", list, path)
        return seq(*(expr_from_json(part, f"{path}.parts[{i}]")
                     for i, part in enumerate(parts)))
    if tag == "choice":
        alts = _want(doc, "alternatives", list, path)
        return choice(*(expr_from_json(alt, f"{path}.alternatives[{i}]")
                        for i, alt in enumerate(alts)))
    if tag == "opt":
        return opt(expr_from_json(_want(doc, "body", dict, path), f"{path}.body"))
    if tag == "star":
        return star(expr_from_json(_want(doc, "body", dict, path), f"{path}.body"))
    if tag == "plus":
        return plus(expr_from_json(_want(doc, "body", dict, path), f"{path}.body"))
    if tag == "sepstar":
        return sepstar(expr_from_json(_want(doc, "item", dict, path), f"{path}.item"),
                       expr_from_json(_want(doc, "separator", dict, path),
                                      f"{path}.separator"))
    if tag == "sepplus":
        return sepplus(expr_from_json(_want(doc, "item", dict, path), f"{path}.item"),
                       expr_from_json(_want(doc, "separator", dict, path),
                                      f"{path}.separator"))
    raise InterchangeError(path, f"unknown expression tag {tag!r}")


def grammar_from_json(doc) -> Grammar:
    if not isinstance(doc, dict):
        raise InterchangeError("$", f"expected an object, got {type(doc).__name__}")
    roots = _want(doc, "roots", list, "$")
    for i, root in enumerate(roots):
        if not isinstance(root, str):
            raise InterchangeError(f"$.roots[{i}]", "root names must be strings")
    raw_prods = _want(doc, "productions", list, "$")
    productions = []
    for i, raw in enumerate(raw_prods):
        path = f"$.productions[{i}]"
        if not isinstance(raw, dict):
            raise InterchangeError(path, "expected an object")
        label = raw.get("label")
        if label is not None and not isinstance(label, str):
            raise InterchangeError(f"{path}.label", "label must be a string or null")
        lhs = _want(raw, "lhs", str, path)
        rhs = expr_from_json(_want(raw, "rhs", dict, path), f"{path}.rhs")
        productions.append(Production(lhs, rhs, label))
    return Grammar(tuple(roots), tuple(productions))


def deserialize(text: str) -> Grammar:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InterchangeError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from exc
    return grammar_from_json(doc)
