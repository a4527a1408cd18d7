"""Per-step q statistics, degree drift, and the three reference tables."""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bitpoly import Coercible, DomainError, as_bitpoly, degree, format_poly, power
from .core import (
    LOG2_3,
    TrajectoryRecord,
    family_G,
    family_mersenne,
    g_relations_check,
    step_int,
    trajectory,
    u_of,
)


class ResidueClass(str, enum.Enum):
    """Odd residues mod 8, i.e. the low bit patterns 001, 011, 101, 111."""

    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"


_BY_LOW_BITS = {1: ResidueClass.C1, 3: ResidueClass.C2, 5: ResidueClass.C3, 7: ResidueClass.C4}
CLASSES = tuple(ResidueClass)


def residue_class(n: Coercible) -> ResidueClass:
    n = as_bitpoly(n)
    if not n.is_odd():
        raise DomainError(f"residue classes are defined for odd values, got {n}")
    return _BY_LOW_BITS[n.limbs[0] & 7]


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassStats:
    count: int
    q_total: int
    q_min: Optional[int]
    q_max: Optional[int]

    @property
    def mean_q(self) -> Optional[Fraction]:
        return Fraction(self.q_total, self.count) if self.count else None

    def merged(self, other: "ClassStats") -> "ClassStats":
        mins = [v for v in (self.q_min, other.q_min) if v is not None]
        maxs = [v for v in (self.q_max, other.q_max) if v is not None]
        return ClassStats(
            self.count + other.count,
            self.q_total + other.q_total,
            min(mins) if mins else None,
            max(maxs) if maxs else None,
        )


_EMPTY = ClassStats(0, 0, None, None)


@dataclass(frozen=True)
class CensusReport:
    lo: int
    hi: int
    classes: dict  # ResidueClass -> ClassStats

    @property
    def total(self) -> int:
        return sum(s.count for s in self.classes.values())

    @property
    def mean_q(self) -> Fraction:
        return Fraction(sum(s.q_total for s in self.classes.values()), self.total)

    def fraction(self, cls: ResidueClass) -> Fraction:
        return Fraction(self.classes[cls].count, self.total)

    def to_dict(self) -> dict:
        per_class = {}
        for cls in CLASSES:
            s = self.classes[cls]
            mean = s.mean_q
            per_class[cls.value] = {
                "count": s.count,
                "q_total": s.q_total,
                "q_min": s.q_min,
                "q_max": s.q_max,
                "mean_q": None if mean is None else float(mean),
                "fraction": float(self.fraction(cls)),
            }
        return {
            "lo": str(self.lo),
            "hi": str(self.hi),
            "total": self.total,
            "mean_q": float(self.mean_q),
            "classes": per_class,
        }


def _census_chunk(bounds: tuple) -> dict:
    a, b = bounds
    out = {}
    start = a | 1
    # n and n + 8 share a class; walk each residue separately
    for low in (1, 3, 5, 7):
        first = start + ((low - start) % 8)
        count = total = 0
        qmin = qmax = None
        for n in range(first, b, 8):
            _, q = step_int(n)
            count += 1
            total += q
            if qmin is None or q < qmin:
                qmin = q
            if qmax is None or q > qmax:
                qmax = q
        out[_BY_LOW_BITS[low]] = ClassStats(count, total, qmin, qmax)
    return out


def split_range(lo: int, hi: int, parts: int) -> list:
    """Contiguous [a, b) pieces covering [lo, hi), in order."""
    parts = max(1, min(parts, hi - lo))
    size, extra = divmod(hi - lo, parts)
    out = []
    a = lo
    for i in range(parts):
        b = a + size + (1 if i < extra else 0)
        out.append((a, b))
        a = b
    return out


def census(lo: Coercible, hi: Coercible, workers: int = 1) -> CensusReport:
    """One collatz step on every odd n in [lo, hi), aggregated per residue class."""
    lo, hi = int(as_bitpoly(lo)), int(as_bitpoly(hi))
    if workers < 1:
        raise DomainError("workers must be >= 1")
    if lo < 0 or hi // 2 - lo // 2 <= 0:
        raise DomainError(f"census range [{lo}, {hi}) holds no odd values")
    chunks = split_range(lo, hi, workers * 4 if workers > 1 else 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_census_chunk, chunks))
    else:
        parts = [_census_chunk(c) for c in chunks]
    classes = {cls: _EMPTY for cls in CLASSES}
    for part in parts:
        for cls in CLASSES:
            classes[cls] = classes[cls].merged(part[cls])
    return CensusReport(lo, hi, classes)


# ---------------------------------------------------------------------------
# degree drift
# ---------------------------------------------------------------------------

AVERAGE_DRIFT = LOG2_3 - 1.75  # about -0.165037
MERSENNE_DRIFT = LOG2_3 - 1.0  # about 0.58496


def degree_bound(p: int, l: int, mersenne_related: bool) -> float:
    """Average upper envelope for the degree after l steps from degree p."""
    if not mersenne_related:
        return p + 0.5 + AVERAGE_DRIFT * l
    if l <= p:
        return p + 0.5 + MERSENNE_DRIFT * l
    return 0.5 + AVERAGE_DRIFT * l + 1.75 * p


def lsq_slope(ys: list) -> Optional[float]:
    """Least-squares slope of ys against 0, 1, 2, ..."""
    n = len(ys)
    if n < 2:
        return None
    mx = (n - 1) / 2
    my = sum(ys) / n
    num = sum((i - mx) * (y - my) for i, y in enumerate(ys))
    den = sum((i - mx) ** 2 for i in range(n))
    return num / den


@dataclass(frozen=True)
class DriftReport:
    start: int
    k: int
    mersenne_related: bool
    degrees: tuple  # prefix lengths 0..k
    bounds: tuple
    slope: Optional[float]
    net_drift: Optional[float]
    violations: int

    def to_dict(self) -> dict:
        return {
            "start": str(self.start),
            "k": self.k,
            "mersenne_related": self.mersenne_related,
            "degrees": list(self.degrees),
            "bounds": list(self.bounds),
            "slope": self.slope,
            "net_drift": self.net_drift,
            "violations": self.violations,
        }


def drift_report(t: TrajectoryRecord, is_mersenne_related: bool = False) -> DriftReport:
    """Observed degree per prefix against the average envelope.

    ``slope`` is the least-squares fit over all prefixes; ``net_drift`` is
    (final degree - start degree) / k.

    Steps above the envelope are counted, not treated as failures: the
    envelope is an average-case statement.
    """
    degrees = tuple(t.degrees())
    p = degrees[0]
    bounds = tuple(degree_bound(p, l, is_mersenne_related) for l in range(len(degrees)))
    violations = sum(1 for d, b in zip(degrees[1:], bounds[1:]) if d > b)
    return DriftReport(
        start=int(t.start),
        k=t.k,
        mersenne_related=is_mersenne_related,
        degrees=degrees,
        bounds=bounds,
        slope=lsq_slope(list(degrees)),
        net_drift=(degrees[-1] - p) / t.k if t.k else None,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

# published three-decimal values of sum(q)/k, kept only for the agreement column
REFERENCE_RATIOS = {
    2: "3", 4: "2.172", 6: "2.778", 8: "2.357", 10: "1.957", 12: "2.045",
    14: "3.033", 16: "1.968", 18: "2.333", 20: "2.072", 22: "1.822",
    24: "1.985", 26: "1.955", 28: "2.040", 30: "2.048", 32: "1.924",
}


def table1(max_q: int = 10) -> list:
    if max_q < 0:
        raise DomainError("max_q must be >= 0")
    rows = []
    for q in range(max_q + 1):
        v = power(3, q)
        rows.append({"q": q, "degree": degree(v), "poly": format_poly(v)})
    return rows


def _ratio(t: TrajectoryRecord) -> Fraction:
    return Fraction(t.q_sum, t.k)


def _fmt_ratio(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"


def table2(max_p: int = 32) -> list:
    """G(p) for even p with sum(q)/k measured from G down to 1.

    ``ratio_from_F`` is the same quantity measured from x^(p+1) - 1, i.e.
    including the p leading C_1 steps.  ``agrees`` compares the from-G
    ratio with the published value at three decimals.
    """
    if max_p < 2 or max_p % 2:
        raise DomainError("max_p must be even and >= 2")
    rows = []
    for p in range(2, max_p + 1, 2):
        g = family_G(p)
        from_g = trajectory(g)
        from_f = trajectory(family_mersenne(p))
        ratio = _ratio(from_g)
        ref = REFERENCE_RATIOS.get(p)
        rows.append({
            "p": p,
            "degree": degree(g),
            "u_plus_1": u_of(p) + 1,
            "poly": format_poly(g),
            "k": from_g.k,
            "q_sum": from_g.q_sum,
            "mean_ratio": _fmt_ratio(ratio),
            "mean_ratio_decimal": f"{float(ratio):.4f}",
            "ratio_from_F": _fmt_ratio(_ratio(from_f)),
            "ratio_from_F_decimal": f"{float(_ratio(from_f)):.4f}",
            "reference": ref,
            "agrees": None if ref is None else f"{float(ratio):.3f}" == f"{float(ref):.3f}",
        })
    return rows


def table3(max_p: int = 32) -> list:
    if max_p < 0 or max_p % 2:
        raise DomainError("max_p must be even and >= 0")
    rows = []
    for p in range(0, max_p + 1, 2):
        rel = g_relations_check(p)
        if not rel.ok:
            raise DomainError(f"G relations fail at p={p}: {rel}")
        rows.append({"p": p, "p_poly": format_poly(p), "r": rel.r})
    return rows
