"""Classical and measure-once quantum finite automata for unary periodic languages,
with a photon-counting simulator of the two-state quantum automaton."""

__version__ = "0.1.0"
