"""Dynamic-programming and simulation engine for divide-and-conquer recurrences.

A recurrence is described by its branching factor ``k``, base laws for small
indices, and for every larger index a finite joint law over subproblem index
tuples and the toll. The law at ``n`` is then the joint-law mixture of
convolutions of child laws shifted by the toll, solved bottom-up with
memoization.

Atoms whose index tuple refers back to ``n`` itself are removed algebraically:
when the self term is unshifted the mixture of strictly smaller terms is
divided by one minus the self weight; when it is shifted upward (its other
factors being point masses) the resulting shift series is summed until the
geometric remainder drops below the truncation budget.

Two solve paths exist. Integer-lattice recurrences in floating mode run on
dense numpy arrays with grouped weight vectors (a matrix-vector product per
group); everything else, including exact rational mode, goes through a generic
dictionary accumulator built on :class:`~recdist.pmf.Pmf`.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Hashable, Sequence

import numpy as np

from .errors import CapacityError, PreconditionError, UnsupportedExactError
from .pmf import Pmf

#: mass below which a geometric self-reference series is cut off (the
#: remainder is added to lost_mass)
_GEO_EPS_FLOOR = 1e-30


@dataclass(frozen=True)
class VectorGroup:
    """Joint-law atoms sharing toll and non-leading indices, as a weight row.

    ``weights[j]`` is the conditional weight of leading index
    ``first_start + j``; the group's total mass is ``scale * sum(weights)``.
    ``cache_key`` marks weight rows reused across levels so the engine can
    memoize their inner mixtures (key must identify the row uniquely).
    ``mass``, when supplied for every group of a level, lets the solver drop
    negligible trailing groups against the truncation budget.
    """

    first_start: int
    weights: np.ndarray
    scale: float = 1.0
    others: tuple = ()
    toll: int = 0
    cache_key: Hashable | None = None
    mass: float | None = None


@dataclass(frozen=True)
class SolveOptions:
    """Arithmetic mode and truncation budget for exact solves."""

    mode: str = "float"  # "float" | "exact"
    tail_eps: float = 1e-12
    max_support: int = 1_000_000

    def __post_init__(self):
        if self.mode not in ("float", "exact"):
            raise PreconditionError(f"unknown arithmetic mode {self.mode!r}")
        if self.tail_eps < 0:
            raise PreconditionError("tail_eps must be nonnegative")
        if self.max_support < 2:
            raise PreconditionError("max_support must be at least 2")


@dataclass(frozen=True)
class RecurrenceSpec:
    """Full description of a divide-and-conquer distributional recurrence.

    ``joint_law(n)`` tabulates atoms ``(indices, toll, weight)`` with exact
    rational weights; ``vector_law(n)`` optionally provides the same law as
    grouped float weight rows for the dense solver. ``sampler(rng, n, size)``
    draws joint atoms in bulk and is required when the joint law cannot be
    tabulated (then only Monte Carlo is available).
    """

    name: str
    k: int
    n0: int
    base_laws: tuple
    joint_law: Callable[[int], Sequence[tuple]] | None = None
    vector_law: Callable[[int], tuple] | None = None
    sampler: Callable[[np.random.Generator, int, int], tuple] | None = None
    index_law: Callable[[int], Sequence[tuple]] | None = None
    integer_lattice: bool = True
    exact_cap: int | None = None

    def __post_init__(self):
        if self.k < 1:
            raise PreconditionError("need at least one subproblem copy")
        if self.n0 < 1:
            raise PreconditionError("recursion must start at n0 >= 1")
        if len(self.base_laws) != self.n0:
            raise PreconditionError("need one base law per index below n0")
        if self.joint_law is None and self.sampler is None:
            raise PreconditionError("spec needs a joint law or a sampler")

    def supports_exact(self) -> bool:
        return self.joint_law is not None

    def joint_atoms(self, n: int) -> list:
        if self.joint_law is None:
            raise UnsupportedExactError(
                f"{self.name}: joint law is sampler-only; exact computation unavailable"
            )
        atoms = list(self.joint_law(n))
        for idx, _, _ in atoms:
            if len(idx) != self.k:
                raise PreconditionError("joint atom arity differs from k")
            if any(i < 0 or i > n for i in idx):
                raise PreconditionError("joint index outside {0,...,n}")
        return atoms

    def index_atoms(self, n: int) -> list:
        """Joint law of the index tuple alone (weights collapsed over tolls)."""
        if self.index_law is not None:
            return list(self.index_law(n))
        acc: dict = {}
        for idx, _, w in self.joint_atoms(n):
            acc[idx] = acc.get(idx, 0) + w
        return list(acc.items())


@dataclass(frozen=True)
class MomentRow:
    n: int
    mean: object
    variance: object
    third_abs_central: object


def _check_self_weight(spec: RecurrenceSpec, n: int, self_mass: float) -> None:
    if self_mass >= 1:
        raise PreconditionError(
            f"{spec.name}: joint law at n={n} recurses on n with probability 1"
        )


class Solver:
    """Bottom-up memoizing solver for one recurrence under fixed options.

    The memo admits concurrent readers; solving new indices is serialized by
    an internal lock. Identical (spec, options) always reproduce identical
    laws because the bottom-up order is deterministic.
    """

    def __init__(self, spec: RecurrenceSpec, opts: SolveOptions | None = None):
        self.spec = spec
        self.opts = opts or SolveOptions()
        self._lock = threading.RLock()
        self._pmfs: list = []
        self._means: list = []
        self._vars: list = []
        self._m3s: list = []
        if self.opts.mode == "exact":
            # float probabilities (e.g. from JSON) promote losslessly
            self._base = tuple(_promote_exact(b) for b in spec.base_laws)
        else:
            self._base = spec.base_laws
        lattice_ok = (
            self.opts.mode == "float"
            and spec.integer_lattice
            and all(
                all(isinstance(v, (int, np.integer)) or (isinstance(v, Rational) and v.denominator == 1) for v in b.values)
                for b in spec.base_laws
            )
        )
        self._lattice = lattice_ok
        # dense state (lattice path)
        self._rows: list = []
        self._mat: np.ndarray | None = None
        self._col_lo = 0
        self._inner_cache: dict = {}

    # ---- public surface ----

    def law(self, n: int) -> Pmf:
        """Exact law of the recurrence at index n."""
        self._ensure(n)
        return self._pmfs[n]

    def mean(self, n: int):
        self._ensure(n)
        return self._means[n]

    def variance(self, n: int):
        self._ensure(n)
        return self._vars[n]

    def sd(self, n: int) -> float:
        return math.sqrt(float(self.variance(n)))

    def third_abs_central(self, n: int):
        self._ensure(n)
        return self._m3s[n]

    def moment_rows(self, ns: Sequence[int]) -> list:
        return [
            MomentRow(n, self.mean(n), self.variance(n), self.third_abs_central(n))
            for n in ns
        ]

    def means_upto(self, n: int) -> np.ndarray:
        self._ensure(n)
        return np.array([float(m) for m in self._means[: n + 1]])

    def sds_upto(self, n: int) -> np.ndarray:
        self._ensure(n)
        return np.sqrt(np.array([float(v) for v in self._vars[: n + 1]]))

    # ---- solve loop ----

    def _ensure(self, n: int) -> None:
        if n < len(self._pmfs):
            return
        cap = self.spec.exact_cap
        if cap is not None and n > cap:
            raise CapacityError(
                f"{self.spec.name}: exact solve capped at n={cap} (requested {n})"
            )
        with self._lock:
            for m in range(len(self._pmfs), n + 1):
                if self._lattice:
                    self._solve_lattice(m)
                else:
                    self._solve_generic(m)

    # ---- generic dictionary path (exact mode and non-lattice laws) ----

    def _weight(self, w):
        if self.opts.mode == "exact":
            if isinstance(w, float):
                raise PreconditionError("exact mode requires rational joint weights")
            return w
        return float(w)

    def _solve_generic(self, m: int) -> None:
        spec = self.spec
        if m < spec.n0:
            self._store_pmf(m, self._base[m])
            return
        atoms = spec.joint_atoms(m)
        exact = self.opts.mode == "exact"
        zero = Fraction(0) if exact else 0.0
        acc: dict = {}
        self_terms: list = []

        # group K>=2 atoms by their trailing indices so each child law is
        # convolved once per group rather than once per atom
        if spec.k == 1:
            grouped: dict = {(): [(idx[0], toll, self._weight(w)) for idx, toll, w in atoms]}
        else:
            grouped = {}
            for idx, toll, w in atoms:
                grouped.setdefault(tuple(idx[1:]), []).append((idx[0], toll, self._weight(w)))

        for others, rows in grouped.items():
            if any(i == m for i in others):
                # self-reference through a trailing factor: the leading factor
                # must collapse to a point mass for the shift algebra to apply
                for first, toll, w in rows:
                    self_terms.append(self._self_term(m, (first, *others), toll, w))
                continue
            inner: dict = {}
            for first, toll, w in rows:
                if first == m:
                    self_terms.append(self._self_term(m, (first, *others), toll, w))
                    continue
                child = self._pmfs[first]
                for v, p in zip(child.values, child.probs):
                    key = v + toll
                    inner[key] = inner.get(key, zero) + w * p
            items = list(inner.items())
            for i in others:
                items = _dict_convolve(items, self._pmfs[i], zero)
            for v, p in items:
                acc[v] = acc.get(v, zero) + p

        acc = self._resolve_self(acc, self_terms, zero)
        self._finish_generic(m, acc)

    def _self_term(self, m: int, idx: tuple, toll, w):
        """Reduce a self-referential atom to (coefficient, lattice shift)."""
        occurrences = sum(1 for i in idx if i == m)
        if occurrences > 1:
            raise UnsupportedExactError(
                f"{self.spec.name}: joint law at n={m} multiplies the unknown law "
                "with itself; exact solve unsupported"
            )
        shift = toll
        for i in idx:
            if i == m:
                continue
            child = self._pmfs[i]
            if len(child.values) != 1:
                raise UnsupportedExactError(
                    f"{self.spec.name}: self-referential atom at n={m} pairs the "
                    "unknown law with a non-degenerate factor"
                )
            shift = shift + child.values[0]
        return (self._weight(w), shift)

    def _resolve_self(self, acc: dict, self_terms: list, zero) -> dict:
        if not self_terms:
            return acc
        c0 = sum((c for c, s in self_terms if s == 0), zero)
        shifted = [(c, s) for c, s in self_terms if s != 0]
        if any(s < 0 for _, s in shifted):
            raise UnsupportedExactError("self-referential shifts must be nonnegative")
        total_self = c0 + sum((c for c, _ in shifted), zero)
        if total_self >= 1:
            raise PreconditionError("self weight at or above 1; law is not determined")
        denom = 1 - c0
        out = {v: p / denom for v, p in acc.items()}
        if not shifted:
            return out
        ratio = sum((c for c, _ in shifted), zero) / denom
        eps = max(self.opts.tail_eps / 4.0, _GEO_EPS_FLOOR)
        term = dict(out)
        guard = 0
        while True:
            term_mass = float(sum(term.values(), zero))
            # remaining geometric mass if the series stops here; it simply
            # stays missing and lands in lost_mass downstream
            if term_mass * float(ratio) / max(1.0 - float(ratio), 1e-15) <= eps:
                break
            new_term: dict = {}
            for c, s in shifted:
                cf = c / denom
                for v, p in term.items():
                    key = v + s
                    new_term[key] = new_term.get(key, zero) + cf * p
            for v, p in new_term.items():
                out[v] = out.get(v, zero) + p
            term = new_term
            guard += 1
            if guard > 10_000:
                raise CapacityError("self-reference series failed to converge")
        return out

    def _finish_generic(self, m: int, acc: dict) -> None:
        acc = {v: p for v, p in acc.items() if p > 0}
        if not acc:
            raise PreconditionError(f"law at n={m} has no mass")
        total = sum(acc.values()) if self.opts.mode == "exact" else math.fsum(acc.values())
        lost = max(1 - total, 0 * total)
        pmf = Pmf.from_atoms(acc.items(), lost)
        pmf = pmf.truncate_tail(
            Fraction(self.opts.tail_eps) if self.opts.mode == "exact" else self.opts.tail_eps
        )
        if len(pmf.values) > self.opts.max_support:
            raise CapacityError(
                f"{self.spec.name}: support {len(pmf.values)} exceeds cap at n={m}"
            )
        self._store_pmf(m, pmf)

    def _store_pmf(self, m: int, pmf: Pmf) -> None:
        assert m == len(self._pmfs)
        self._pmfs.append(pmf)
        self._means.append(pmf.moment(1))
        self._vars.append(pmf.moment(2, central=True))
        self._m3s.append(pmf.abs_central_moment(3))
        if self._lattice:
            off = int(pmf.values[0])
            arr = np.zeros(int(pmf.values[-1]) - off + 1)
            arr[(pmf.values_f - off).astype(int)] = pmf.probs_f
            self._append_row(m, off, arr)

    # ---- dense lattice path ----

    def _append_row(self, m: int, off: int, arr: np.ndarray) -> None:
        assert m == len(self._rows)
        self._rows.append((off, arr))
        self._mat_write(m, off, arr)

    def _mat_write(self, m: int, off: int, arr: np.ndarray) -> None:
        lo, hi = off, off + len(arr) - 1
        if self._mat is None:
            width = max(64, hi - lo + 1 + 32)
            self._col_lo = lo - 16
            self._mat = np.zeros((256, width))
        if lo < self._col_lo or hi >= self._col_lo + self._mat.shape[1]:
            new_lo = min(self._col_lo, lo - 16)
            new_hi = max(self._col_lo + self._mat.shape[1] - 1, hi + 16)
            grown = np.zeros((self._mat.shape[0], new_hi - new_lo + 1))
            grown[:, self._col_lo - new_lo : self._col_lo - new_lo + self._mat.shape[1]] = self._mat
            self._mat = grown
            self._col_lo = new_lo
            self._inner_cache.clear()  # cached vectors are window-aligned
        if m >= self._mat.shape[0]:
            grown = np.zeros((max(2 * self._mat.shape[0], m + 1), self._mat.shape[1]))
            grown[: self._mat.shape[0]] = self._mat
            self._mat = grown
        self._mat[m, lo - self._col_lo : hi + 1 - self._col_lo] = arr

    def _vector_groups(self, m: int) -> tuple:
        spec = self.spec
        if spec.vector_law is not None:
            return spec.vector_law(m)
        groups: list = []
        lone: list = []
        if spec.k == 1:
            by_toll: dict = {}
            for idx, toll, w in spec.joint_atoms(m):
                by_toll.setdefault(int(toll), []).append((idx[0], float(w)))
            for toll, rows in by_toll.items():
                start = min(i for i, _ in rows)
                vec = np.zeros(max(i for i, _ in rows) - start + 1)
                for i, w in rows:
                    vec[i - start] += w
                groups.append(VectorGroup(start, vec, 1.0, (), toll))
        else:
            for idx, toll, w in spec.joint_atoms(m):
                lone.append((tuple(int(i) for i in idx), int(toll), float(w)))
        return groups, lone

    def _solve_lattice(self, m: int) -> None:
        spec = self.spec
        if m < spec.n0:
            self._store_lattice_base(m)
            return
        groups, lone = self._vector_groups(m)
        if len(groups) > 4 and self.opts.tail_eps > 0 and all(g.mass is not None for g in groups):
            # drop negligible trailing groups; the shortfall lands in lost_mass
            order = sorted(range(len(groups)), key=lambda i: (-groups[i].mass, i))
            total_mass = sum(g.mass for g in groups)
            budget = self.opts.tail_eps / 4.0
            kept, cum = [], 0.0
            for i in order:
                kept.append(groups[i])
                cum += groups[i].mass
                if total_mass - cum <= budget:
                    break
            groups = kept
        self_terms: list = []
        pieces: list = []  # (offset, array) contributions

        for g in groups:
            weights = g.weights
            hi_idx = g.first_start + len(weights) - 1
            uses_self = hi_idx >= m or any(i == m for i in g.others)
            if any(i == m for i in g.others):
                raise UnsupportedExactError(
                    f"{spec.name}: self-reference through a trailing group index"
                )
            if uses_self:
                coef = float(weights[m - g.first_start]) * g.scale
                if coef:
                    shift = g.toll
                    for i in g.others:
                        off_i, arr_i = self._rows[i]
                        if len(arr_i) != 1:
                            raise UnsupportedExactError(
                                f"{spec.name}: self atom paired with non-degenerate factor"
                            )
                        shift += off_i
                    self_terms.append((coef, int(shift)))
                weights = weights.copy()
                weights[m - g.first_start :] = 0.0
                hi_idx = m - 1
            inner = self._inner_mix(g, weights, min(hi_idx, m - 1))
            if inner is None:
                continue
            off, vec = inner
            for i in g.others:
                off_i, arr_i = self._rows[i]
                vec = np.convolve(vec, arr_i)
                off += off_i
            pieces.append((off + int(g.toll), vec * g.scale))

        # lone atoms grouped by trailing indices: tolls fold into the leading
        # mixture so each child law is convolved once per group
        lone_groups: dict = {}
        for idx, toll, w in lone:
            if any(i == m for i in idx):
                self_terms.append(self._lattice_self_term(m, idx, toll, float(w)))
                continue
            lone_groups.setdefault(tuple(idx[1:]), []).append((idx[0], int(toll), float(w)))
        for others, rows in lone_groups.items():
            lo_i = min(self._rows[f][0] + t for f, t, _ in rows)
            hi_i = max(self._rows[f][0] + len(self._rows[f][1]) - 1 + t for f, t, _ in rows)
            inner = np.zeros(hi_i - lo_i + 1)
            for f, t, w in rows:
                off_f, arr_f = self._rows[f]
                start = off_f + t - lo_i
                inner[start : start + len(arr_f)] += w * arr_f
            off = lo_i
            for i in others:
                off_i, arr_i = self._rows[i]
                inner = np.convolve(inner, arr_i)
                off += off_i
            pieces.append((off, inner))

        if not pieces:
            raise PreconditionError(f"law at n={m} has no mass")
        lo = min(off for off, _ in pieces)
        hi = max(off + len(vec) - 1 for off, vec in pieces)
        acc = np.zeros(hi - lo + 1)
        for off, vec in pieces:
            acc[off - lo : off - lo + len(vec)] += vec
        lo, acc = self._resolve_self_lattice(lo, acc, self_terms)
        self._finish_lattice(m, lo, acc)

    def _lattice_self_term(self, m: int, idx: tuple, toll: int, w: float) -> tuple:
        if sum(1 for i in idx if i == m) > 1:
            raise UnsupportedExactError(
                f"{self.spec.name}: joint law at n={m} multiplies the unknown law with itself"
            )
        shift = int(toll)
        for i in idx:
            if i == m:
                continue
            off_i, arr_i = self._rows[i]
            if len(arr_i) != 1:
                raise UnsupportedExactError(
                    f"{self.spec.name}: self atom paired with non-degenerate factor"
                )
            shift += off_i
        return (w, shift)

    def _inner_mix(self, g: VectorGroup, weights: np.ndarray, hi_idx: int):
        """Mixture over the leading index of a group, as (offset, dense array)."""
        if hi_idx < g.first_start:
            return None
        usable = weights[: hi_idx - g.first_start + 1]
        if not usable.any():
            return None
        cacheable = g.cache_key is not None and hi_idx == g.first_start + len(g.weights) - 1
        if cacheable and g.cache_key in self._inner_cache:
            return self._inner_cache[g.cache_key]
        sub = self._mat[g.first_start : hi_idx + 1]
        vec = usable @ sub
        nz = np.nonzero(vec)[0]
        if nz.size == 0:
            return None
        out = (self._col_lo + int(nz[0]), vec[nz[0] : nz[-1] + 1])
        if cacheable:
            self._inner_cache[g.cache_key] = out
        return out

    def _resolve_self_lattice(self, lo: int, acc: np.ndarray, self_terms: list) -> tuple:
        if not self_terms:
            return lo, acc
        c0 = sum(c for c, s in self_terms if s == 0)
        shifted = [(c, s) for c, s in self_terms if s != 0]
        if any(s < 0 for _, s in shifted):
            raise UnsupportedExactError("self-referential shifts must be nonnegative")
        _check_self_weight(self.spec, len(self._rows), c0 + sum(c for c, _ in shifted))
        denom = 1.0 - c0
        acc = acc / denom
        if not shifted:
            return lo, acc
        ratio = sum(c for c, _ in shifted) / denom
        eps = max(self.opts.tail_eps / 4.0, _GEO_EPS_FLOOR)
        smax = max(s for _, s in shifted)
        out = acc
        term = acc
        guard = 0
        while term.sum() * ratio / max(1.0 - ratio, 1e-15) > eps:
            new_len = len(term) + smax
            new_term = np.zeros(new_len)
            for c, s in shifted:
                new_term[s : s + len(term)] += (c / denom) * term
            out = np.concatenate([out, np.zeros(new_len - len(out))]) if new_len > len(out) else out
            out[: len(new_term)] += new_term
            term = new_term
            guard += 1
            if guard > 10_000:
                raise CapacityError("self-reference series failed to converge")
        return lo, out

    def _store_lattice_base(self, m: int) -> None:
        self._store_pmf(m, self._base[m])

    def _finish_lattice(self, m: int, lo: int, acc: np.ndarray) -> None:
        nz = np.nonzero(acc)[0]
        if nz.size == 0:
            raise PreconditionError(f"law at n={m} has no mass")
        lo += int(nz[0])
        acc = acc[nz[0] : nz[-1] + 1]
        # outer truncation within the per-step budget, smaller end first
        budget = self.opts.tail_eps
        removed = 0.0
        i, j = 0, len(acc) - 1
        while i < j:
            low_side = acc[i] <= acc[j]
            cand = acc[i] if low_side else acc[j]
            if removed + cand > budget:
                break
            removed += float(cand)
            if low_side:
                i += 1
            else:
                j -= 1
        acc = acc[i : j + 1]
        lo += i
        if len(acc) > self.opts.max_support:
            raise CapacityError(
                f"{self.spec.name}: support {len(acc)} exceeds cap at n={m}"
            )
        total = float(np.sum(acc))
        lost = max(0.0, 1.0 - total)
        mask = acc > 0
        values = (lo + np.nonzero(mask)[0]).tolist()
        pmf = Pmf(tuple(int(v) for v in values), tuple(acc[mask].tolist()), lost)
        assert m == len(self._pmfs)
        self._pmfs.append(pmf)
        v = np.asarray(values, dtype=float)
        p = acc[mask]
        mu = float(v @ p)
        self._means.append(mu)
        self._vars.append(max(float(((v - mu) ** 2) @ p), 0.0))
        self._m3s.append(float((np.abs(v - mu) ** 3) @ p))
        self._append_row(m, lo, acc)


def _dict_convolve(items: list, other: Pmf, zero) -> list:
    out: dict = {}
    for v, p in items:
        for w, q in zip(other.values, other.probs):
            key = v + w
            out[key] = out.get(key, zero) + p * q
    return list(out.items())


def _promote_exact(pmf: Pmf) -> Pmf:
    if pmf.exact:
        return pmf
    return Pmf(
        tuple(v if isinstance(v, Rational) else Fraction(v) for v in pmf.values),
        tuple(p if isinstance(p, Rational) else Fraction(p) for p in pmf.probs),
        pmf.lost_mass if isinstance(pmf.lost_mass, Rational) else Fraction(pmf.lost_mass),
    )


# ---------------------------------------------------------------------------
# module-level operation surface
# ---------------------------------------------------------------------------


def exact_distribution(spec: RecurrenceSpec, n: int, opts: SolveOptions | None = None) -> Pmf:
    """Solve the recurrence exactly at index ``n`` (memoized bottom-up)."""
    return Solver(spec, opts).law(n)


def moment_table(solver_or_spec, ns: Sequence[int], opts: SolveOptions | None = None) -> list:
    """Mean, variance and third absolute central moment per requested index."""
    solver = solver_or_spec if isinstance(solver_or_spec, Solver) else Solver(solver_or_spec, opts)
    return solver.moment_rows(ns)


class _TableSampler:
    """Inverse-CDF sampler over a tabulated joint law, cached per index."""

    def __init__(self, spec: RecurrenceSpec):
        self.spec = spec
        self._tables: dict = {}

    def __call__(self, rng: np.random.Generator, n: int, size: int) -> tuple:
        tab = self._tables.get(n)
        if tab is None:
            atoms = self.spec.joint_atoms(n)
            idx = np.array([a[0] for a in atoms], dtype=np.int64)
            tolls = np.array([float(a[1]) for a in atoms])
            w = np.array([float(a[2]) for a in atoms])
            cum = np.cumsum(w)
            cum /= cum[-1]
            tab = (idx, tolls, cum)
            self._tables[n] = tab
        idx, tolls, cum = tab
        picks = np.searchsorted(cum, rng.random(size), side="right")
        picks = np.minimum(picks, len(cum) - 1)
        chosen = idx[picks]
        return [chosen[:, r] for r in range(self.spec.k)], tolls[picks]


def _joint_sampler(spec: RecurrenceSpec):
    if spec.sampler is not None:
        return spec.sampler
    return _TableSampler(spec)


def sample_many(
    spec: RecurrenceSpec, n: int, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Independent draws of the recurrence value at ``n``, fully vectorized.

    Pending subproblems are processed in rounds grouped by index, so each
    round costs a handful of numpy operations per distinct index value.
    """
    draw = _joint_sampler(spec)
    totals = np.zeros(size)
    pend_pid = np.arange(size, dtype=np.int64)
    pend_n = np.full(size, n, dtype=np.int64)
    base_vals = [b.values_f for b in spec.base_laws]
    base_cums = [np.cumsum(b.probs_f) / float(np.sum(b.probs_f)) for b in spec.base_laws]
    rounds = 0
    while pend_pid.size:
        rounds += 1
        if rounds > 10_000:
            raise CapacityError("sampling recursion failed to terminate")
        small = pend_n < spec.n0
        if small.any():
            for b in np.unique(pend_n[small]):
                sel = pend_n == b
                vals = base_vals[b]
                if len(vals) == 1:
                    np.add.at(totals, pend_pid[sel], vals[0])
                else:
                    picks = np.searchsorted(base_cums[b], rng.random(int(sel.sum())))
                    np.add.at(totals, pend_pid[sel], vals[np.minimum(picks, len(vals) - 1)])
            pend_pid, pend_n = pend_pid[~small], pend_n[~small]
        if not pend_pid.size:
            break
        new_pid: list = []
        new_n: list = []
        for u in np.unique(pend_n):
            sel = pend_n == u
            pids = pend_pid[sel]
            children, tolls = draw(rng, int(u), pids.size)
            np.add.at(totals, pids, tolls)
            for child in children:
                new_pid.append(pids)
                new_n.append(np.asarray(child, dtype=np.int64))
        pend_pid = np.concatenate(new_pid)
        pend_n = np.concatenate(new_n)
    return totals


def sample(spec: RecurrenceSpec, n: int, rng: np.random.Generator):
    """One draw of the recurrence value at ``n`` with independent subcalls."""
    val = float(sample_many(spec, n, 1, rng)[0])
    return int(val) if spec.integer_lattice and val == int(val) else val


# ---------------------------------------------------------------------------
# custom recurrences from JSON
# ---------------------------------------------------------------------------


def _parse_number(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return x


def spec_from_json(doc: dict | str) -> RecurrenceSpec:
    """Build a recurrence from a JSON document tabulating joint-law rows.

    Expected shape::

        {"name": ..., "k": 1 | 2, "n0": ...,
         "base": [<pmf json>, ...],
         "rows": [[n, i1, i2_or_null, toll, prob], ...]}

    Tolls and probabilities may be numbers or fraction strings like "1/3".
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    k = int(doc["k"])
    if k not in (1, 2):
        raise PreconditionError("custom recurrences support k in {1, 2}")
    base = tuple(Pmf.from_json_dict(b) for b in doc["base"])
    table: dict = {}
    lattice = True
    for row in doc["rows"]:
        n, i1, i2, toll, prob = row
        idx = (int(i1),) if k == 1 else (int(i1), int(i2))
        toll = _parse_number(toll)
        prob = _parse_number(prob)
        if not isinstance(toll, int):
            lattice = False
        table.setdefault(int(n), []).append((idx, toll, prob))
    lattice = lattice and all(
        all(isinstance(v, int) or (isinstance(v, Rational) and v.denominator == 1) for v in b.values)
        for b in base
    )

    def joint_law(n: int) -> list:
        if n not in table:
            raise PreconditionError(f"custom recurrence has no joint law at n={n}")
        return table[n]

    return RecurrenceSpec(
        name=str(doc.get("name", "custom")),
        k=k,
        n0=int(doc["n0"]),
        base_laws=base,
        joint_law=joint_law,
        integer_lattice=lattice,
    )
