"""The accelerated Collatz operation on odd values and its closed-form families.

C_q[n] = (3n + 1) / 2**q with q the exact 2-adic valuation of 3n + 1.  In
polynomial language this is x**-q ((x + 1) F(x) + 1).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .bitpoly import (
    _shift_right,
    ONE,
    BitPoly,
    Coercible,
    DomainError,
    as_bitpoly,
    degree,
    exponents,
    from_decimal_string,
    from_exponents,
    mul_small_add,
    power,
    shl,
    shr_exact,
    sub,
    to_decimal_string,
    two_adic_valuation,
)

LOG2_3 = math.log2(3)
DEFAULT_MAX_STEPS = 10**6


def _odd(n: Coercible, what: str = "n") -> BitPoly:
    n = as_bitpoly(n)
    if not n.is_odd():
        raise DomainError(f"{what} must be an odd value >= 1, got {n}")
    return n


def collatz_step(n: Coercible) -> tuple:
    """Return (C_q[n], q) for odd n >= 1."""
    n = _odd(n)
    if len(n.limbs) == 1:
        # one-word kernel: 3n+1 needs at most two bits of carry
        w = 3 * n.limbs[0] + 1
        q = (w & -w).bit_length() - 1
        return BitPoly(w >> q), q
    m = mul_small_add(n, 3, 1)
    q = two_adic_valuation(m)
    return _shift_right(m.limbs, q), q


def step_int(n: int) -> tuple:
    """Word-level twin of :func:`collatz_step` on plain ints (hot loops)."""
    m = 3 * n + 1
    q = (m & -m).bit_length() - 1
    return m >> q, q


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

class Termination(str, enum.Enum):
    ONE = "one"
    STEP_LIMIT = "step_limit"
    DEGREE_LIMIT = "degree_limit"


@dataclass(frozen=True)
class StepRecord:
    q: int
    value: BitPoly
    degree: int

    def to_dict(self) -> dict:
        return {"q": self.q, "value": to_decimal_string(self.value), "degree": self.degree}


@dataclass(frozen=True)
class TrajectoryRecord:
    start: BitPoly
    steps: tuple
    k: int
    q_sum: int
    max_degree: int
    terminated: Termination

    @property
    def last(self) -> BitPoly:
        return self.steps[-1].value if self.steps else self.start

    def q_sequence(self) -> list:
        return [s.q for s in self.steps]

    def degrees(self) -> list:
        """Degrees of the start and of every step result, prefix length 0..k."""
        return [degree(self.start)] + [s.degree for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "start": to_decimal_string(self.start),
            "steps": [s.to_dict() for s in self.steps],
            "k": self.k,
            "q_sum": self.q_sum,
            "max_degree": self.max_degree,
            "terminated": self.terminated.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "TrajectoryRecord":
        steps = tuple(
            StepRecord(int(s["q"]), from_decimal_string(s["value"]), int(s["degree"]))
            for s in d["steps"]
        )
        return cls(
            start=from_decimal_string(d["start"]),
            steps=steps,
            k=int(d["k"]),
            q_sum=int(d["q_sum"]),
            max_degree=int(d["max_degree"]),
            terminated=Termination(d["terminated"]),
        )


def trajectory(
    n: Coercible,
    max_steps: int = DEFAULT_MAX_STEPS,
    max_degree: Optional[int] = None,
) -> TrajectoryRecord:
    """Iterate collatz_step from n until 1 or a limit.

    The fixed point 1 is not iterated, so trajectory(1) has no steps.  A
    step whose result exceeds ``max_degree`` is kept and ends the run.
    """
    start = _odd(n)
    if max_steps < 1 or (max_degree is not None and max_degree < 1):
        raise DomainError("limits must be positive")
    steps = []
    q_sum = 0
    top = degree(start)
    value = start
    status = Termination.ONE
    while value != ONE:
        if len(steps) >= max_steps:
            status = Termination.STEP_LIMIT
            break
        value, q = collatz_step(value)
        d = degree(value)
        steps.append(StepRecord(q, value, d))
        q_sum += q
        top = max(top, d)
        if max_degree is not None and d > max_degree and value != ONE:
            status = Termination.DEGREE_LIMIT
            break
    return TrajectoryRecord(start, tuple(steps), len(steps), q_sum, top, status)


def collatz_compose(n: Coercible, l: int) -> tuple:
    """Apply collatz_step l times; returns (value, [q_1, ..., q_l])."""
    if l < 0:
        raise DomainError("l must be >= 0")
    value = _odd(n)
    qs = []
    for _ in range(l):
        value, q = collatz_step(value)
        qs.append(q)
    return value, qs


# ---------------------------------------------------------------------------
# degree counting
# ---------------------------------------------------------------------------

def u_of(l: int) -> int:
    """Nearest integer to l*log2(3) - 1/2, i.e. the degree of (x+1)**l."""
    if l < 0:
        raise DomainError("l must be >= 0")
    if l == 0:
        return 0
    x = l * LOG2_3
    j = round(x)
    if abs(x - j) > 1e-9:
        return math.floor(x)
    # float cannot separate l*log2(3) from the integer j: decide 3**l >= 2**j exactly
    return j if 3**l >= 1 << j else j - 1


def degree_estimate(p: int, l: int, q_sum: int) -> int:
    """Leading-term power count p + u(l) + 1 - sum(q) for the degree after l steps."""
    if p < 0 or l < 0 or q_sum < 0:
        raise DomainError("arguments must be non-negative")
    return p + u_of(l) + 1 - q_sum


# ---------------------------------------------------------------------------
# closed-form families
# ---------------------------------------------------------------------------

def family_F(p: int, inner_exps: Iterable[int] = ()) -> BitPoly:
    """x^p + sum x^k_i + 1 with every k_i strictly between 0 and p."""
    inner = set(inner_exps)
    if p < 1:
        raise DomainError("family F needs p >= 1")
    bad = [k for k in inner if not 1 <= k <= p - 1]
    if bad:
        raise DomainError(f"inner exponents {sorted(bad)} outside [1, {p - 1}]")
    return from_exponents({p, 0} | inner)


def family_U(k: int) -> BitPoly:
    """sum_{t=0..k} x^(2t)."""
    if k < 0:
        raise DomainError("family U needs k >= 0")
    return from_exponents(range(0, 2 * k + 1, 2))


def family_G(p: int) -> BitPoly:
    """x (x+1)^p - 1, the image of x^(p+1) - 1 after p steps of C_1."""
    if p < 0:
        raise DomainError("family G needs p >= 0")
    return sub(shl(power(3, p), 1), ONE)


def family_H(idx: int) -> BitPoly:
    """H_4 = 1+x+x^3+x^4, H_{4+6(t+1)} = H_{4+6t} + (1+x+x^2) x^(6t+8)."""
    if idx < 4 or (idx - 4) % 6:
        raise DomainError("family H is defined for indices 4, 10, 16, ...")
    h = from_exponents({0, 1, 3, 4})
    for t in range((idx - 4) // 6):
        h = h + shl(7, 6 * t + 8)
    return h


def family_mersenne(p: int) -> BitPoly:
    """x^(p+1) - 1, i.e. all p+1 low bits set."""
    if p < 1:
        raise DomainError("Mersenne family needs p >= 1")
    return from_exponents(range(p + 1))


FAMILY_KINDS = ("F", "U", "G", "H", "Mersenne")


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    param: int
    inner_exps: frozenset = field(default_factory=frozenset)

    def build(self) -> BitPoly:
        if self.kind == "F":
            return family_F(self.param, self.inner_exps)
        if self.kind == "U":
            return family_U(self.param)
        if self.kind == "G":
            return family_G(self.param)
        if self.kind == "H":
            return family_H(self.param)
        if self.kind == "Mersenne":
            return family_mersenne(self.param)
        raise DomainError(f"unknown family {self.kind!r}; expected one of {FAMILY_KINDS}")


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------

def lift(f: Coercible, j: int) -> BitPoly:
    """1 + x^2 + ... + x^(2j-2) + x^(2j) f."""
    return from_exponents(range(0, 2 * j, 2)) + shl(f, 2 * j)


def check_corollary1(f: Coercible, j: int) -> bool:
    """Lifting f by j powers of x^2 keeps the step result and adds 2j to q."""
    if j < 1:
        raise DomainError("j must be >= 1")
    value, q = collatz_step(f)
    lifted_value, lifted_q = collatz_step(lift(f, j))
    return lifted_value == value and lifted_q == q + 2 * j


def mersenne_prefix_check(p: int) -> bool:
    if p < 1:
        raise DomainError("p must be >= 1")
    value, qs = collatz_compose(family_mersenne(p), p)
    return all(q == 1 for q in qs) and value == family_G(p) and degree(value) == u_of(p) + 1


@dataclass(frozen=True)
class GRelations:
    p: int
    r: int
    first_q: int
    recurrence_ok: bool
    closed_form_ok: bool
    lift_ok: bool
    merge_ok: bool

    @property
    def ok(self) -> bool:
        return self.recurrence_ok and self.closed_form_ok and self.lift_ok and self.merge_ok


def g_relations_check(p: int) -> GRelations:
    """Check the even-p relations between G(p), G(p+1) and G(p+2).

    * G(p+1) = (x+1) G(p) + x
    * C_r[C_2[G(p)]] = ((x+1)^(p+2) - 1) / x^(r+1)
    * C_{r+2}[G(p+1)] equals the same value
    * G(p+2) = x^(r+2) C_r[C_2[G(p)]] + 1
    """
    if p < 0 or p % 2:
        raise DomainError("p must be even and >= 0")
    g = family_G(p)
    first, q1 = collatz_step(g)
    if q1 != 2:
        raise DomainError(f"first step of G({p}) has q={q1}, expected 2")
    second, r = collatz_step(first)
    g_next = family_G(p + 1)
    recurrence_ok = g_next == mul_small_add(g, 3, 2)
    top = sub(power(3, p + 2), ONE)
    closed_form_ok = two_adic_valuation(top) == r + 1 and shr_exact(top, r + 1) == second
    lift_ok = family_G(p + 2) == shl(second, r + 2) + ONE
    merged, q_next = collatz_step(g_next)
    merge_ok = merged == second and q_next == r + 2
    return GRelations(p, r, q1, recurrence_ok, closed_form_ok, lift_ok, merge_ok)


def h_chain_check(k: int) -> bool:
    """H_{2k} -> sum_{mu=1..k+1} x^(2mu-1) - 1 -> x^(2k+1) - 1 via C_1 then C_2."""
    if k < 2 or (2 * k) % 6 != 4:
        raise DomainError("h-chain needs k >= 2 with 2k = 4 mod 6")
    odd_sum = sub(from_exponents(range(1, 2 * k + 2, 2)), ONE)
    first, q1 = collatz_step(family_H(2 * k))
    if q1 != 1 or first != odd_sum:
        return False
    second, q2 = collatz_step(first)
    return q2 == 2 and second == family_mersenne(2 * k)


def fixed_point_check(n: Coercible) -> bool:
    """True iff C_q[n] differs from n."""
    value, _ = collatz_step(n)
    return value != n


# ---------------------------------------------------------------------------
# explicit low-term-count cases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CasePrediction:
    case: str
    predicted: BitPoly
    ops: tuple


def _terms(*exps: int) -> BitPoly:
    # exponents may repeat (e.g. x^2 + x^2): sum them with carries
    total = BitPoly(0)
    for e in exps:
        total = total + shl(ONE, e)
    return total


def predict_case(n: Coercible) -> Optional[CasePrediction]:
    """Closed-form result for F^(m)_p with m <= 2 or small k_1, when one applies.

    Cases are matched on the exponent structure x^p + x^k_m + ... + x^k_1 + 1.
    Predicted values are carry-normalised integers.  Each case carries the
    parameter guard under which its closed form is exact; outside every
    guard the function returns None.
    """
    n = _odd(n)
    exps = exponents(n)
    if len(exps) < 2:
        return None
    p = exps[-1]
    ks = exps[1:-1]
    m = len(ks)

    if m == 0:
        if p == 1:
            return CasePrediction("m0_p1", ONE, (1, 4))
        if p >= 3:
            return CasePrediction("m0", _terms(p - 1, p - 2, 0), (2,))
        return None

    if m == 1:
        k = ks[0]
        if k == 1 and p >= 6:
            return CasePrediction("m1_k1", _terms(p - 2, p - 5, 0), (1, 4))
        if 3 <= k <= p - 2:
            return CasePrediction("m1_mid", _terms(p - 1, p - 2, k - 1, k - 2, 0), (2,))
        if k == p - 1 and p >= 6:
            return CasePrediction("m1_top", _terms(p - 1, p - 2, p - 4, p - 5, 0), (2, 2))
        return None

    if m == 2:
        k1, k2 = ks
        if k1 == 1 and k2 == 2:
            return CasePrediction("m2_k12", _terms(p + 1, p - 2, 4, 0), (1, 1))
        if k1 == 1 and k2 == 3:
            return CasePrediction("m2_k13", _terms(p, p - 1, 4, 0), (1,))
        if k1 == 1 and k2 == 4:
            return CasePrediction("m2_k14", _terms(p - 1, p - 4, 3, 1, 0), (1, 3))
        if k1 == 1 and k2 >= 6:
            return CasePrediction("m2_k1_far", _terms(p - 2, p - 5, k2 - 2, k2 - 5, 0), (1, 4))
        if k1 == 2 and k2 == 3:
            return CasePrediction("m2_k23", _terms(p - 2, p - 3, 2, 0), (3,))
        if k1 == 2 and k2 >= 5:
            return CasePrediction("m2_k2_far", _terms(p - 3, p - 4, k2 - 3, k2 - 4, 0), (4,))
        if k1 >= 3:
            return CasePrediction(
                "m2_k3", _terms(p - 1, p - 2, k2 - 1, k2 - 2, k1 - 1, k1 - 2, 0), (2,)
            )
        return None

    if ks[0] >= 3 and ks[-1] < p - 1:
        shifted = [k - 1 for k in ks] + [k - 2 for k in ks]
        return CasePrediction("m_general", _terms(p - 1, p - 2, *shifted, 0), (2,))
    return None
