"""Groups generated by Mealy and time-varying automata over finite alphabets."""

__version__ = "0.1.0"
