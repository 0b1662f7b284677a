"""
Free Gibbs Transport - Words and Coefficients

Monomials are tuples of 1-based letter indices; the empty tuple is the
identity monomial. Coefficients are exact Fractions unless a float or
complex value is supplied explicitly.
"""

from fractions import Fraction
from numbers import Number
from typing import Iterable, Tuple, Union

Word = Tuple[int, ...]
Coeff = Union[Fraction, float, complex]

EMPTY: Word = ()

# Per-call degree bound applied to products and generators
DEFAULT_MAX_DEGREE = 16


def as_coeff(value) -> Coeff:
    """Normalize a scalar: ints and decimal strings become Fractions."""
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, complex):
        if value.imag == 0:
            return float(value.real)
        return value
    if isinstance(value, Number):
        return value
    raise TypeError(f"unsupported coefficient {value!r}")


def conj(value: Coeff) -> Coeff:
    if isinstance(value, complex):
        return value.conjugate()
    return value


def is_zero(value: Coeff) -> bool:
    return value == 0


def check_word(word: Iterable[int], n: int) -> Word:
    word = tuple(int(letter) for letter in word)
    for letter in word:
        if letter < 1 or letter > n:
            raise ValueError(f"letter {letter} outside 1..{n}")
    return word


def least_rotation(word: Word) -> Word:
    """Lexicographically least cyclic rotation (canonical trace argument)."""
    if len(word) < 2:
        return word
    return min(word[k:] + word[:k] for k in range(len(word)))


def normalize_traces(traces: Iterable[Word]) -> Tuple[Word, ...]:
    """Canonical multiset of trace factors; τ(1) = 1 is dropped."""
    return tuple(sorted(least_rotation(tuple(t)) for t in traces if len(t) > 0))


def reversed_word(word: Word) -> Word:
    return tuple(reversed(word))


def occurrences(word: Word, letter: int):
    """Yield (prefix, suffix) for each position of letter in word."""
    for pos, current in enumerate(word):
        if current == letter:
            yield word[:pos], word[pos + 1:]


def remove_one(traces: Tuple[Word, ...], index: int) -> Tuple[Word, ...]:
    return traces[:index] + traces[index + 1:]


def format_word(word: Word, names=None) -> str:
    if not word:
        return "1"
    if names is None:
        return "".join(f"X{letter}" for letter in word)
    return "".join(names[letter - 1] for letter in word)


def format_coeff(value: Coeff) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return f"({value.real:g}{value.imag:+g}j)"
    return f"{value:g}"
