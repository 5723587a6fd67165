"""JSON round-tripping of classical and quantum automata.

Classical::

    {"kind": "dfa"|"nfa"|"pfa", "n": 5, "alphabet": ["a"],
     "initial": [...], "transition": {"a": [[...], ...]}, "accepting": [...]}

Quantum uses ``"kind": "qfa"``; every complex entry is a ``[re, im]`` pair
and ``"accepting"`` holds the projector matrix. An optional ``"cut_point"``
records the cut point the automaton was designed for.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .classical import ClassicalAutomaton, Kind
from .linalg import complex_from_json, complex_to_json
from .quantum import MeasureOnceQfa


def _plain(arr: np.ndarray) -> list:
    if arr.dtype.kind in "iub":
        return arr.astype(int).tolist()
    return arr.astype(float).tolist()


def to_dict(a, cut_point: float | None = None) -> dict:
    if isinstance(a, MeasureOnceQfa):
        data = {
            "kind": "qfa",
            "n": a.n,
            "alphabet": list(a.alphabet),
            "initial": complex_to_json(a.initial),
            "transition": {s: complex_to_json(a.unitaries[s]) for s in a.alphabet},
            "accepting": complex_to_json(a.accepting_projector),
        }
        cut_point = a.cut_point if cut_point is None else cut_point
    elif isinstance(a, ClassicalAutomaton):
        data = {
            "kind": a.kind.value,
            "n": a.n,
            "alphabet": list(a.alphabet),
            "initial": _plain(a.initial),
            "transition": {s: _plain(a.transitions[s]) for s in a.alphabet},
            "accepting": _plain(a.accepting),
        }
        if a.state_names is not None:
            data["states"] = list(a.state_names)
    else:
        raise TypeError(f"cannot serialise {type(a).__name__}")
    if cut_point is not None:
        data["cut_point"] = cut_point
    return data


def from_dict(data: dict):
    try:
        kind = data["kind"]
        alphabet = data["alphabet"]
        transition = data["transition"]
        if kind == "qfa":
            a = MeasureOnceQfa(
                alphabet,
                complex_from_json(data["initial"]),
                {s: complex_from_json(transition[s]) for s in alphabet},
                complex_from_json(data["accepting"]),
                cut_point=data.get("cut_point"),
            )
        else:
            a = ClassicalAutomaton(Kind(kind), alphabet, data["initial"],
                                   {s: transition[s] for s in alphabet}, data["accepting"],
                                   tuple(data["states"]) if "states" in data else None)
    except KeyError as exc:
        raise ValueError(f"automaton JSON lacks field {exc}") from None
    if "n" in data and data["n"] != a.n:
        raise ValueError(f"declared n={data['n']} but vectors have {a.n} entries")
    return a


def dumps(a, cut_point: float | None = None) -> str:
    return json.dumps(to_dict(a, cut_point), indent=2) + "\n"


def loads(text: str):
    return from_dict(json.loads(text))


def save(a, path, cut_point: float | None = None) -> None:
    Path(path).write_text(dumps(a, cut_point))


def load(path):
    return loads(Path(path).read_text())
