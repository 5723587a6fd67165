"""Right-linear (type-3) grammars and their conversion to NFAs.

Text format, one nonterminal per line::

    B0 -> a B0 | b B0 | b B1
    B1 -> a B2 | b B2
    B2 -> eps

The left-hand side of the first line is the start symbol. ``#`` starts a
comment. Every alternative must be ``eps``, a single terminal, or a
terminal followed by a nonterminal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import ClassicalAutomaton, Kind

EPSILON = "eps"


@dataclass(frozen=True)
class Production:
    head: str
    terminal: str | None = None
    target: str | None = None

    def __str__(self) -> str:
        body = " ".join(x for x in (self.terminal, self.target) if x) or EPSILON
        return f"{self.head} -> {body}"


@dataclass(frozen=True)
class RegularGrammar:
    terminals: frozenset[str]
    nonterminals: frozenset[str]
    start: str
    productions: tuple[Production, ...]

    def __post_init__(self):
        if self.terminals & self.nonterminals:
            raise ValueError(f"symbols used as both terminal and nonterminal: {sorted(self.terminals & self.nonterminals)}")
        if self.start not in self.nonterminals:
            raise ValueError(f"start symbol {self.start!r} is not a nonterminal")
        for rule in self.productions:
            if rule.head not in self.nonterminals:
                raise ValueError(f"malformed rule {rule}: head is not a nonterminal")
            if rule.terminal is None and rule.target is not None:
                raise ValueError(f"malformed rule {rule}: unit productions are not type-3")
            if rule.terminal is not None and rule.terminal not in self.terminals:
                raise ValueError(f"malformed rule {rule}: {rule.terminal!r} is not a terminal")
            if rule.target is not None and rule.target not in self.nonterminals:
                raise ValueError(f"malformed rule {rule}: {rule.target!r} is not a nonterminal")


def parse_grammar(text: str) -> RegularGrammar:
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise ValueError(f"malformed rule {line!r}: missing '->'")
        head, body = (part.strip() for part in line.split("->", 1))
        if not head or len(head.split()) != 1:
            raise ValueError(f"malformed rule {line!r}: left side must be one nonterminal")
        lines.append((head, body, line))
    if not lines:
        raise ValueError("grammar has no rules")

    nonterminals = {head for head, _, _ in lines}
    terminals: set[str] = set()
    rules = []
    for head, body, line in lines:
        for alt in body.split("|"):
            tokens = alt.split()
            if tokens == [EPSILON] or not tokens:
                rules.append(Production(head))
            elif len(tokens) == 1 and tokens[0] not in nonterminals:
                terminals.add(tokens[0])
                rules.append(Production(head, tokens[0]))
            elif len(tokens) == 2 and tokens[0] not in nonterminals and tokens[1] in nonterminals:
                terminals.add(tokens[0])
                rules.append(Production(head, tokens[0], tokens[1]))
            else:
                raise ValueError(f"malformed rule {head} -> {alt.strip()!r} in line {line!r}")
    return RegularGrammar(frozenset(terminals), frozenset(nonterminals), lines[0][0], tuple(rules))


def ek_grammar(k: int) -> RegularGrammar:
    """Grammar generating the words whose k-th symbol from the right is ``b``."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    rules = ["B0 -> a B0 | b B0 | b B1"]
    rules += [f"B{i} -> a B{i + 1} | b B{i + 1}" for i in range(1, k)]
    rules.append(f"B{k} -> eps")
    return parse_grammar("\n".join(rules))


def grammar_to_nfa(g: RegularGrammar, alphabet=None) -> ClassicalAutomaton:
    """Standard right-linear construction: one state per nonterminal plus a final sink.

    ``A -> s B`` becomes an edge ``A -s-> B``, ``A -> s`` an edge to the sink,
    and ``A -> eps`` makes ``A`` accepting.
    """
    symbols = tuple(alphabet) if alphabet is not None else tuple(sorted(g.terminals)) or ("a",)
    missing = g.terminals - set(symbols)
    if missing:
        raise ValueError(f"alphabet lacks terminals {sorted(missing)}")
    names = [g.start] + sorted(g.nonterminals - {g.start}, key=_natural_key)
    index = {name: i for i, name in enumerate(names)}
    sink = len(names)
    n = sink + 1
    trans = {s: np.zeros((n, n), dtype=np.int64) for s in symbols}
    eta = np.zeros(n, dtype=np.int64)
    eta[sink] = 1
    for rule in g.productions:
        i = index[rule.head]
        if rule.terminal is None:
            eta[i] = 1
        elif rule.target is None:
            trans[rule.terminal][i, sink] = 1
        else:
            trans[rule.terminal][i, index[rule.target]] = 1
    zeta = np.zeros(n, dtype=np.int64)
    zeta[0] = 1
    return ClassicalAutomaton(Kind.NFA, symbols, zeta, trans, eta, tuple(names) + ("<final>",))


def _natural_key(name: str):
    digits = "".join(ch for ch in name if ch.isdigit())
    return (name.rstrip("0123456789"), int(digits) if digits else -1, name)
