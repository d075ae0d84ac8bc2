"""
Exact arithmetic in the finite field F_q, q = p^n.

Elements are integer codes in ``[0, q)``: the base-p digits of a code are the
coefficients (low order first) of a polynomial over F_p reduced modulo the
field's monic irreducible modulus.  All arithmetic goes through dense lookup
tables built once per field with numpy, so a ``FieldCtx`` is immutable and
safe to share between threads.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ffradon.errors import (
    FieldDivisionByZeroError,
    NotPrimeError,
    ReducibleModulusError,
    SizeCapExceededError,
)
from ffradon.logging_config import get_logger

logger = get_logger(__name__)

Elem = int
"""A field element: its integer code in ``[0, q)``."""

DEFAULT_MAX_ORDER = 1024


# ---------------------------------------------------------------------------
# Primes and polynomials over F_p
# ---------------------------------------------------------------------------

def is_prime(value: int) -> bool:
    """Trial division primality test."""
    if value < 2:
        return False
    if value % 2 == 0:
        return value == 2
    return all(value % f for f in range(3, math.isqrt(value) + 1, 2))


def prime_power(q: int) -> Tuple[int, int]:
    """Split ``q = p^n``; raises ``NotPrimeError`` when q is not a prime power."""
    if q < 2:
        raise NotPrimeError(q)
    p = next(f for f in range(2, q + 1) if q % f == 0)
    n, rest = 0, q
    while rest % p == 0:
        rest //= p
        n += 1
    if rest != 1 or not is_prime(p):
        raise NotPrimeError(q)
    return p, n


def _poly_trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def poly_mod(a: Sequence[int], b: Sequence[int], p: int) -> List[int]:
    """Remainder of ``a`` modulo ``b`` over F_p; coefficients low order first."""
    rem = _poly_trim([c % p for c in a])
    div = _poly_trim([c % p for c in b])
    if not div:
        raise FieldDivisionByZeroError("polynomial division by zero")
    lead_inv = pow(div[-1], -1, p)
    while len(rem) >= len(div):
        factor = rem[-1] * lead_inv % p
        shift = len(rem) - len(div)
        for i, c in enumerate(div):
            rem[shift + i] = (rem[shift + i] - factor * c) % p
        _poly_trim(rem)
    return rem


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """
    Exhaustive irreducibility test: no monic polynomial of degree
    ``1..deg/2`` divides *modulus*.
    """
    n = len(modulus) - 1
    if n < 1:
        return False
    for degree in range(1, n // 2 + 1):
        for low in itertools.product(range(p), repeat=degree):
            if not poly_mod(modulus, list(low) + [1], p):
                return False
    return True


def default_modulus(p: int, n: int) -> Tuple[int, ...]:
    """
    Lexicographically first monic irreducible polynomial of degree *n*.

    Candidates ``t^n + c_{n-1} t^{n-1} + ... + c_0`` are visited in increasing
    order of the code ``sum c_i p^i``.
    """
    for code in range(p**n):
        low = [(code // p**i) % p for i in range(n)]
        candidate = tuple(low + [1])
        if is_irreducible(candidate, p):
            return candidate
    raise ReducibleModulusError(f"no irreducible polynomial of degree {n} over F_{p}")


# ---------------------------------------------------------------------------
# Field context
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldCtx:
    """
    A concrete finite field F_q with lookup tables.

    Attributes:
        p: Prime characteristic.
        n: Extension degree.
        modulus: Monic irreducible modulus, low-order coefficient first
                 (``(1, 0, 1)`` is t^2 + 1); ``(0, 1)`` for prime fields.
        add_table, mul_table: ``q x q`` tables of element codes.
        neg_table, inv_table: length-q tables (``inv_table[0]`` is unused).
        trace_table: absolute trace of every element, as an integer in [0, p).
        char_table: canonical additive character exp(2πi Tr(a)/p).
    """

    p: int
    n: int
    modulus: Tuple[int, ...]
    add_table: np.ndarray
    mul_table: np.ndarray
    neg_table: np.ndarray
    inv_table: np.ndarray
    trace_table: np.ndarray
    char_table: np.ndarray

    @property
    def q(self) -> int:
        return self.p**self.n

    @property
    def key(self) -> Tuple[int, int, Tuple[int, ...]]:
        return (self.p, self.n, self.modulus)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FieldCtx) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        if self.n == 1:
            return f"FieldCtx(F_{self.p})"
        return f"FieldCtx(F_{self.q}, modulus={self.modulus})"

    # -- codec ---------------------------------------------------------------

    def element(self, code: int) -> Elem:
        """Validate an element code."""
        code = int(code)
        if not 0 <= code < self.q:
            raise ValueError(f"element code {code} outside [0, {self.q})")
        return code

    def encode(self, coeffs: Sequence[int]) -> Elem:
        """Polynomial coefficients (low order first) → element code."""
        if len(coeffs) > self.n:
            raise ValueError(f"expected at most {self.n} coefficients, got {len(coeffs)}")
        return sum((int(c) % self.p) * self.p**i for i, c in enumerate(coeffs))

    def decode(self, code: Elem) -> Tuple[int, ...]:
        """Element code → its n polynomial coefficients (low order first)."""
        code = self.element(code)
        return tuple((code // self.p**i) % self.p for i in range(self.n))

    def elements(self) -> range:
        return range(self.q)

    # -- arithmetic ----------------------------------------------------------

    def add(self, a: Elem, b: Elem) -> Elem:
        return int(self.add_table[a, b])

    def sub(self, a: Elem, b: Elem) -> Elem:
        return int(self.add_table[a, self.neg_table[b]])

    def mul(self, a: Elem, b: Elem) -> Elem:
        return int(self.mul_table[a, b])

    def neg(self, a: Elem) -> Elem:
        return int(self.neg_table[a])

    def inv(self, a: Elem) -> Elem:
        if a == 0:
            raise FieldDivisionByZeroError(f"zero has no inverse in F_{self.q}")
        return int(self.inv_table[a])

    def div(self, a: Elem, b: Elem) -> Elem:
        return self.mul(a, self.inv(b))

    def pow(self, a: Elem, e: int) -> Elem:
        """Square-and-multiply; negative exponents invert first."""
        if e < 0:
            a, e = self.inv(a), -e
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    @functools.cached_property
    def nonzero_char_sums(self) -> np.ndarray:
        """``S[a] = sum_{s != 0} chi(s a)``: q - 1 at a = 0, -1 elsewhere."""
        return self.char_table[self.mul_table[1:, :]].sum(axis=0)


# ---------------------------------------------------------------------------
# Table construction
# ---------------------------------------------------------------------------

def _digits(p: int, n: int) -> np.ndarray:
    codes = np.arange(p**n, dtype=np.int64)
    return np.stack([(codes // p**i) % p for i in range(n)], axis=1)


def _encode_digits(digits: np.ndarray, p: int) -> np.ndarray:
    weights = p ** np.arange(digits.shape[-1], dtype=np.int64)
    return (digits % p) @ weights


def _build_tables(p: int, n: int, modulus: Tuple[int, ...]) -> Dict[str, np.ndarray]:
    q = p**n
    digits = _digits(p, n)
    weights = p ** np.arange(n, dtype=np.int64)

    add_table = np.zeros((q, q), dtype=np.int64)
    for i in range(n):
        add_table += ((digits[:, i, None] + digits[None, :, i]) % p) * weights[i]

    # shifted[i][a] holds the digits of a * t^i; reduction uses t^n = -sum m_j t^j
    shifted = [digits]
    low = np.array(modulus[:n], dtype=np.int64)
    for _ in range(1, n):
        prev = shifted[-1]
        top = prev[:, n - 1]
        nxt = np.zeros_like(prev)
        nxt[:, 1:] = prev[:, :-1]
        nxt = (nxt - top[:, None] * low[None, :]) % p
        shifted.append(nxt)
    # stacked[a, i, j] = digit j of a * t^i
    stacked = np.stack(shifted, axis=1)
    mul_table = np.zeros((q, q), dtype=np.int64)
    for j in range(n):
        mul_table += ((stacked[:, :, j] @ digits.T) % p) * weights[j]

    neg_table = _encode_digits(-digits, p)

    ones = mul_table == 1
    inv_table = np.where(ones.any(axis=1), ones.argmax(axis=1), 0).astype(np.int64)

    # Frobenius a -> a^p, then Tr(a) = a + a^p + ... + a^(p^(n-1))
    codes = np.arange(q, dtype=np.int64)
    frob = np.ones(q, dtype=np.int64)
    for _ in range(p):
        frob = mul_table[frob, codes]
    trace = codes.copy()
    conj = codes.copy()
    for _ in range(1, n):
        conj = frob[conj]
        trace = add_table[trace, conj]
    if np.any(trace >= p):
        raise ReducibleModulusError(f"trace left the prime field for modulus {modulus}")
    char_table = np.exp(2j * np.pi * trace / p)

    return {
        "add_table": add_table,
        "mul_table": mul_table,
        "neg_table": neg_table,
        "inv_table": inv_table,
        "trace_table": trace,
        "char_table": char_table,
    }


@functools.lru_cache(maxsize=64)
def _cached_field(p: int, n: int, modulus: Tuple[int, ...]) -> FieldCtx:
    logger.debug("Building tables for F_%d (p=%d, n=%d, modulus=%s)", p**n, p, n, modulus)
    tables = _build_tables(p, n, modulus)
    for table in tables.values():
        table.setflags(write=False)
    return FieldCtx(p=p, n=n, modulus=modulus, **tables)


def make_field(
    p: int,
    n: int = 1,
    modulus: Optional[Sequence[int]] = None,
    max_order: int = DEFAULT_MAX_ORDER,
) -> FieldCtx:
    """
    Build F_{p^n}.

    Args:
        p: Prime characteristic (checked by trial division).
        n: Extension degree, at least 1.
        modulus: Monic degree-n coefficient list, low order first. Ignored for
                 n = 1; when omitted for n > 1 the lexicographically first
                 irreducible polynomial is used.
        max_order: Size cap on q.

    Raises:
        NotPrimeError: p is not prime.
        ReducibleModulusError: modulus is not monic, of degree n, and irreducible.
        SizeCapExceededError: p^n exceeds *max_order*.
    """
    if n < 1:
        raise ValueError(f"extension degree must be at least 1, got {n}")
    if not is_prime(p):
        raise NotPrimeError(p)
    q = p**n
    if q > max_order:
        raise SizeCapExceededError("field order", q, max_order)

    if n == 1:
        mod: Tuple[int, ...] = (0, 1)
    elif modulus is None:
        mod = default_modulus(p, n)
    else:
        mod = tuple(int(c) % p for c in modulus)
        if len(mod) != n + 1 or mod[-1] != 1:
            raise ReducibleModulusError(
                f"modulus must be monic of degree {n} (got coefficients {tuple(modulus)})"
            )
        if not is_irreducible(mod, p):
            raise ReducibleModulusError(f"modulus {tuple(modulus)} is reducible over F_{p}")
    return _cached_field(p, n, mod)


def field_for_order(q: int, max_order: int = DEFAULT_MAX_ORDER) -> FieldCtx:
    """The default field of order q (q must be a prime power)."""
    if q > max_order:
        raise SizeCapExceededError("field order", q, max_order)
    p, n = prime_power(q)
    return make_field(p, n, max_order=max_order)


# ---------------------------------------------------------------------------
# Operation-level API
# ---------------------------------------------------------------------------

_UNARY: Dict[str, Callable[[FieldCtx, Elem], Elem]] = {
    "inv": FieldCtx.inv,
    "neg": FieldCtx.neg,
}

_BINARY: Dict[str, Callable[[FieldCtx, Elem, int], Elem]] = {
    "add": FieldCtx.add,
    "sub": FieldCtx.sub,
    "mul": FieldCtx.mul,
    "div": FieldCtx.div,
    "pow": FieldCtx.pow,
}


def arith(ctx: FieldCtx, op: str, a: Elem, b: Optional[int] = None) -> Elem:
    """
    Dispatch a named field operation.

    ``op`` is one of add, sub, mul, div, inv, neg, pow; ``pow`` takes an
    integer exponent as *b*.
    """
    a = ctx.element(a)
    if op in _UNARY:
        return _UNARY[op](ctx, a)
    handler = _BINARY.get(op)
    if handler is None:
        raise ValueError(
            f"Unknown field operation '{op}'. Supported: {', '.join([*_BINARY, *_UNARY])}"
        )
    if b is None:
        raise ValueError(f"operation '{op}' needs a second operand")
    if op != "pow":
        b = ctx.element(b)
    return handler(ctx, a, b)


def absolute_trace(ctx: FieldCtx, a: Elem) -> int:
    """Tr(a) = a + a^p + ... + a^(p^(n-1)), returned as an integer in [0, p)."""
    return int(ctx.trace_table[ctx.element(a)])


def additive_character(ctx: FieldCtx, a: Elem) -> complex:
    """The canonical additive character chi(a) = exp(2πi Tr(a) / p)."""
    return complex(ctx.char_table[ctx.element(a)])


def character_sum(ctx: FieldCtx, a: Elem) -> complex:
    """sum_{s in F_q} chi(a s); q when a = 0 and 0 otherwise."""
    a = ctx.element(a)
    return complex(ctx.char_table[ctx.mul_table[a, :]].sum())
