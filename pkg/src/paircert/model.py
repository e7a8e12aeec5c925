"""Finitely supported weight functions, multiplicative functions under the
divisor-sum constraint (1*f)(n) <= n, pair systems, and their exact measures.

All values are exact rationals; a weight's support is exactly its key set
(zero-valued entries are dropped on construction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .arith import Rational, factorize
from .errors import IncompleteDefinition, InvalidParameter

_ZERO = Fraction(0)
_ONE = Fraction(1)


class WeightFunction:
    """Finite map from positive integers to strictly positive rationals."""

    __slots__ = ("_table", "_support")

    def __init__(self, table: Optional[Mapping[int, Rational]] = None):
        tbl: dict[int, Fraction] = {}
        for k, val in (table or {}).items():
            k = int(k)
            if k < 1:
                raise InvalidParameter(f"weight support element {k} < 1")
            v = Fraction(val)
            if v < 0:
                raise InvalidParameter(f"negative weight at {k}: {v}")
            if v == 0:
                continue  # zero means "not in support"
            tbl[k] = v
        object.__setattr__(self, "_table", tbl)
        object.__setattr__(self, "_support", tuple(sorted(tbl)))

    def __setattr__(self, *args):
        raise AttributeError("WeightFunction is immutable")

    def value(self, v: int) -> Fraction:
        return self._table.get(v, _ZERO)

    def support(self) -> tuple[int, ...]:
        return self._support

    def items(self):
        for k in self._support:
            yield k, self._table[k]

    def __contains__(self, v: int) -> bool:
        return v in self._table

    def __len__(self) -> int:
        return len(self._table)

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightFunction) and self._table == other._table

    def __hash__(self):
        return hash(tuple(self.items()))

    def __repr__(self):
        entries = ", ".join(f"{k}: {v}" for k, v in list(self.items())[:6])
        more = "" if len(self) <= 6 else f", ... ({len(self)} entries)"
        return f"WeightFunction({{{entries}{more}}})"

    def to_json(self) -> dict[str, str]:
        return {str(k): str(v) for k, v in self.items()}

    @classmethod
    def from_json(cls, doc: Mapping[str, str]) -> "WeightFunction":
        return cls({int(k): Fraction(v) for k, v in doc.items()})


class MultiplicativeFunction:
    """A multiplicative f given by its values on prime powers (f(1) = 1).

    Evaluation at n multiplies the table entries along factorize(n); a
    consulted prime power missing from the table raises
    IncompleteDefinition.  The Euler totient is available as a closed-form
    preset.
    """

    __slots__ = ("_table", "_name")

    def __init__(
        self,
        prime_power_table: Optional[Mapping[tuple[int, int], Rational]] = None,
        name: Optional[str] = None,
    ):
        table = None
        if prime_power_table is not None:
            table = {}
            for (p, a), val in prime_power_table.items():
                p, a = int(p), int(a)
                if a < 1:
                    raise InvalidParameter(f"prime-power exponent {a} < 1")
                v = Fraction(val)
                if v < 0:
                    raise InvalidParameter(f"negative value at {p}^{a}: {v}")
                table[(p, a)] = v
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_name", name)

    def __setattr__(self, *args):
        raise AttributeError("MultiplicativeFunction is immutable")

    @classmethod
    def totient(cls) -> "MultiplicativeFunction":
        return cls(None, name="totient")

    @property
    def name(self) -> Optional[str]:
        return self._name

    def is_totient(self) -> bool:
        return self._name == "totient"

    def prime_power(self, p: int, a: int) -> Fraction:
        if a == 0:
            return _ONE
        if self.is_totient():
            return Fraction(p**a - p ** (a - 1))
        try:
            return self._table[(p, a)]
        except (KeyError, TypeError) as exc:
            raise IncompleteDefinition(
                f"{self!r} is undefined at {p}^{a}"
            ) from exc

    def __call__(self, n: int) -> Fraction:
        out = _ONE
        for p, e in factorize(n):
            out *= self.prime_power(p, e)
        return out

    def one_star_prime_power(self, p: int, a: int) -> Fraction:
        """(1*f)(p^a) = sum_{b<=a} f(p^b)."""
        total = _ONE
        for b in range(1, a + 1):
            total += self.prime_power(p, b)
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiplicativeFunction):
            return NotImplemented
        return self._name == other._name and self._table == other._table

    def __hash__(self):
        tbl = None if self._table is None else tuple(sorted(self._table.items()))
        return hash((self._name, tbl))

    def __repr__(self):
        if self.is_totient():
            return "MultiplicativeFunction.totient()"
        n = len(self._table or {})
        return f"MultiplicativeFunction(<{n} prime powers>)"

    def to_json(self):
        if self.is_totient():
            return "totient"
        return {f"{p}^{a}": str(v) for (p, a), v in sorted((self._table or {}).items())}

    @classmethod
    def from_json(cls, doc) -> "MultiplicativeFunction":
        if doc == "totient":
            return cls.totient()
        table = {}
        for key, v in doc.items():
            p_str, a_str = key.split("^")
            table[(int(p_str), int(a_str))] = Fraction(v)
        return cls(table)


@dataclass(frozen=True)
class MultiplicativeValidation:
    accepted: bool
    failures: tuple[tuple[int, int, Fraction], ...]  # (p, a, (1*f)(p^a))


def validate_multiplicative(
    f: MultiplicativeFunction, prime_powers: Iterable[tuple[int, int]]
) -> MultiplicativeValidation:
    """Accept iff (1*f)(p^a) <= p^a for each listed prime power.

    By multiplicativity of 1*f this certifies (1*f)(n) <= n for every n
    composed of the listed prime powers.
    """
    failures = []
    for p, a in prime_powers:
        val = f.one_star_prime_power(p, a)
        if val > p**a:
            failures.append((p, a, val))
    return MultiplicativeValidation(not failures, tuple(failures))


@dataclass(frozen=True)
class PairSystem:
    """(psi, theta, f, g) with an edge set inside supp(psi) x supp(theta)."""

    psi: WeightFunction
    theta: WeightFunction
    f: MultiplicativeFunction
    g: MultiplicativeFunction
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        norm = frozenset((int(v), int(w)) for v, w in self.edges)
        object.__setattr__(self, "edges", norm)
        for v, w in norm:
            if v not in self.psi or w not in self.theta:
                raise InvalidParameter(f"edge ({v},{w}) leaves the supports")

    def canonical_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> "PairSystem":
        return PairSystem(self.psi, self.theta, self.f, self.g, frozenset(edges))


def mu_point(f: MultiplicativeFunction, psi: WeightFunction, v: int) -> Fraction:
    """mu_psi^f(v) = f(v) psi(v) / v (zero off the support)."""
    w = psi.value(v)
    if w == 0:
        return _ZERO
    return f(v) * w / v


def mu_set(f: MultiplicativeFunction, psi: WeightFunction, S: Iterable[int]) -> Fraction:
    total = _ZERO
    for v in S:
        total += mu_point(f, psi, v)
    return total


def mu_pairs(system: PairSystem, edges: Optional[Iterable[tuple[int, int]]] = None) -> Fraction:
    """mu_{psi,theta}^{f,g}(E) = sum over E of mu(v) mu(w), exactly."""
    E = system.edges if edges is None else edges
    by_v: dict[int, list[int]] = {}
    for v, w in E:
        by_v.setdefault(v, []).append(w)
    total = _ZERO
    for v, ws in by_v.items():
        mv = mu_point(system.f, system.psi, v)
        if mv == 0:
            continue
        inner = _ZERO
        for w in ws:
            inner += mu_point(system.g, system.theta, w)
        total += mv * inner
    return total


TOTIENT = MultiplicativeFunction.totient()
