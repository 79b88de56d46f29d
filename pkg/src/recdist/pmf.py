"""Finite discrete probability laws with exact atoms and honest mass bookkeeping.

Atom values are exact numbers (ints or :class:`fractions.Fraction`, floats in
floating mode); probabilities are carried either as fractions (exact mode) or
as floats. Mass removed by truncation is accumulated in ``lost_mass`` and is
never silently renormalized away, so ``sum(probs) + lost_mass == 1`` always
holds within ``MASS_TOL``.

All operations are pure functions on immutable values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, PreconditionError

MASS_TOL = 1e-12
#: floating-mode atoms merge when |x - y| <= VALUE_MERGE_REL * max(1, |x|)
VALUE_MERGE_REL = 1e-12


def _is_exact_number(x) -> bool:
    return isinstance(x, Rational)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x)  # exact binary expansion of a float


def _canonical_value(x):
    """Normalize Fraction-with-denominator-1 to int; leave floats alone."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


def _values_equal(a, b) -> bool:
    if _is_exact_number(a) and _is_exact_number(b):
        return a == b
    fa, fb = float(a), float(b)
    return abs(fa - fb) <= VALUE_MERGE_REL * max(1.0, abs(fa))


@dataclass(frozen=True)
class Pmf:
    """A finite discrete law: strictly increasing atoms plus tracked lost mass."""

    values: tuple
    probs: tuple
    lost_mass: object = 0.0

    def __post_init__(self):
        if len(self.values) != len(self.probs):
            raise PreconditionError("values and probs length mismatch")
        if not self.values:
            raise PreconditionError("pmf needs at least one atom")
        prev = None
        for v in self.values:
            if prev is not None and not float(v) > float(prev):
                raise PreconditionError(f"atom values not strictly increasing near {v}")
            prev = v
        for p in self.probs:
            if not p > 0:
                raise PreconditionError(f"atom probability {p} is not positive")
        lost = self.lost_mass
        if lost < 0:
            raise PreconditionError("lost_mass must be nonnegative")
        total = math.fsum(float(p) for p in self.probs) + float(lost)
        if abs(total - 1.0) > MASS_TOL * 8:
            raise PreconditionError(f"mass {total} deviates from 1 beyond tolerance")

    # ---- constructors ----

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple], lost_mass=0.0) -> "Pmf":
        """Build from (value, prob) pairs; sorts, merges equal atoms, drops zeros."""
        pairs = [(v, p) for v, p in atoms if p != 0]
        if not pairs:
            raise PreconditionError("no atoms with positive mass")
        pairs.sort(key=lambda vp: float(vp[0]))
        merged_v: list = []
        merged_p: list = []
        for v, p in pairs:
            if merged_v and _values_equal(merged_v[-1], v):
                merged_p[-1] = merged_p[-1] + p
            else:
                merged_v.append(_canonical_value(v))
                merged_p.append(p)
        return cls(tuple(merged_v), tuple(merged_p), lost_mass)

    @classmethod
    def delta(cls, value) -> "Pmf":
        """Point mass at ``value``."""
        exact = _is_exact_number(value)
        return cls((_canonical_value(value),), (Fraction(1) if exact else 1.0,))

    @classmethod
    def mix(cls, components: Sequence[tuple]) -> "Pmf":
        """Weighted superposition of laws; equal atoms merge.

        ``components`` is a sequence of (weight, Pmf). Weights must be
        nonnegative and sum to 1 within ``MASS_TOL``.
        """
        wsum = math.fsum(float(w) for w, _ in components)
        for w, _ in components:
            if w < 0:
                raise PreconditionError(f"negative mixture weight {w}")
        if abs(wsum - 1.0) > MASS_TOL:
            raise PreconditionError(f"mixture weights sum to {wsum}, not 1")
        atoms: list = []
        lost = 0
        for w, p in components:
            if w == 0:
                continue
            lost = lost + w * p.lost_mass
            for v, q in zip(p.values, p.probs):
                atoms.append((v, w * q))
        return cls.from_atoms(atoms, lost)

    # ---- cached float views ----

    @cached_property
    def values_f(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=float)

    @cached_property
    def probs_f(self) -> np.ndarray:
        return np.array([float(p) for p in self.probs], dtype=float)

    @property
    def exact(self) -> bool:
        """True when both atoms and probabilities are exact rationals."""
        return all(_is_exact_number(v) for v in self.values) and all(
            _is_exact_number(p) for p in self.probs
        )

    # ---- algebra ----

    def convolve(self, other: "Pmf") -> "Pmf":
        """Law of the independent sum; lost mass accumulates."""
        atoms: dict = {}
        for v, p in zip(self.values, self.probs):
            for w, q in zip(other.values, other.probs):
                s = v + w
                if isinstance(s, float) and not math.isfinite(s):
                    raise CapacityError("atom value overflow in convolution")
                atoms[s] = atoms.get(s, 0) + p * q
        lost = 1 - (1 - self.lost_mass) * (1 - other.lost_mass)
        return Pmf.from_atoms(atoms.items(), lost)

    def affine(self, scale, shift=0) -> "Pmf":
        """Map atoms x -> scale*x + shift; probabilities are unchanged."""
        if scale == 0:
            raise PreconditionError("affine scale must be nonzero")
        mapped = [scale * v + shift for v in self.values]
        if any(isinstance(v, float) and not math.isfinite(v) for v in mapped):
            raise CapacityError("atom value overflow in affine map")
        if scale > 0:
            return Pmf(tuple(_canonical_value(v) for v in mapped), self.probs, self.lost_mass)
        return Pmf(
            tuple(_canonical_value(v) for v in reversed(mapped)),
            tuple(reversed(self.probs)),
            self.lost_mass,
        )

    def moment(self, k: int, central: bool = False):
        """k-th raw or central moment; exact when atoms and probs are rational."""
        if k < 1:
            raise PreconditionError("moment order must be >= 1")
        if self.exact:
            if central:
                mu = self.moment(1)
                return sum(p * (v - mu) ** k for v, p in zip(self.values, self.probs))
            return sum(p * v**k for v, p in zip(self.values, self.probs))
        v = self.values_f
        if central:
            v = v - float(np.dot(v, self.probs_f))
        return float(np.dot(v**k, self.probs_f))

    def abs_central_moment(self, k: int):
        """E|X - EX|^k over the retained atoms."""
        if self.exact:
            mu = self.moment(1)
            return sum(p * abs(v - mu) ** k for v, p in zip(self.values, self.probs))
        v = self.values_f - float(np.dot(self.values_f, self.probs_f))
        return float(np.dot(np.abs(v) ** k, self.probs_f))

    @property
    def mean(self):
        return self.moment(1)

    @property
    def variance(self):
        return self.moment(2, central=True)

    def cdf_at(self, t) -> float:
        """P(X <= t), right-continuous; tops out at 1 - lost_mass."""
        return math.fsum(float(p) for v, p in zip(self.values, self.probs) if v <= t)

    def cdf(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized right-continuous CDF over retained mass."""
        cums = np.concatenate([[0.0], np.cumsum(self.probs_f)])
        idx = np.searchsorted(self.values_f, np.asarray(ts, dtype=float), side="right")
        return cums[idx]

    def truncate_tail(self, eps) -> "Pmf":
        """Remove lowest-probability outer atoms with total removed mass <= eps.

        Removed mass is added to ``lost_mass``; remaining atoms are NOT
        renormalized, keeping the mass bookkeeping exact.
        """
        if eps < 0:
            raise PreconditionError("truncation budget must be nonnegative")
        if eps == 0 or len(self.values) == 1:
            return self
        lo, hi = 0, len(self.values) - 1
        removed = 0
        while lo < hi:
            side_lo = self.probs[lo] <= self.probs[hi]
            cand = self.probs[lo] if side_lo else self.probs[hi]
            if removed + cand > eps:
                break
            removed = removed + cand
            if side_lo:
                lo += 1
            else:
                hi -= 1
        if removed == 0:
            return self
        return Pmf(
            self.values[lo : hi + 1],
            self.probs[lo : hi + 1],
            self.lost_mass + removed,
        )

    def support_diameter(self) -> float:
        return float(self.values_f[-1] - self.values_f[0])

    # ---- comparisons and serialization ----

    def allclose(self, other: "Pmf", atol: float = 1e-10) -> bool:
        """Same atoms (up to merge tolerance) with probabilities within atol."""
        if len(self.values) != len(other.values):
            return False
        for v, w in zip(self.values, other.values):
            if not _values_equal(v, w):
                return False
        return all(
            abs(float(p) - float(q)) <= atol for p, q in zip(self.probs, other.probs)
        )

    def to_json_dict(self) -> dict:
        atoms = []
        for v, p in zip(self.values, self.probs):
            fv = _as_fraction(v)
            atoms.append([int(fv.numerator), int(fv.denominator), float(p)])
        return {"atoms": atoms, "lost_mass": float(self.lost_mass)}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Pmf":
        atoms = [
            (_canonical_value(Fraction(int(num), int(den))), float(p))
            for num, den, p in doc["atoms"]
        ]
        return cls.from_atoms(atoms, float(doc.get("lost_mass", 0.0)))

    def to_csv(self) -> str:
        lines = ["value,prob"]
        for v, p in zip(self.values, self.probs):
            lines.append(f"{float(v)!r},{float(p)!r}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:  # compact, atoms elided when long
        inner = ", ".join(
            f"{v}: {p}" for v, p in list(zip(self.values, self.probs))[:6]
        )
        more = "" if len(self.values) <= 6 else f", ... ({len(self.values)} atoms)"
        lost = f", lost={float(self.lost_mass):.2e}" if self.lost_mass else ""
        return f"Pmf({{{inner}{more}}}{lost})"
