"""Desk-scale convergence sweep over odd integers, with resumable checkpoints.

Each odd n in [lo, hi) is iterated until it reaches 1 or, with early exit,
until it lands on a value already covered: anything below ``floor`` (taken
as verified beforehand) or anything in [lo, n) (verified by the same sweep,
by induction on n).  Values stay plain ints while 3v+1 fits in a machine
word and go through BitPoly arithmetic above that.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .bitpoly import BitPoly, Coercible, DomainError, as_bitpoly
from .core import collatz_step

CHECKPOINT_VERSION = 1
RECORD_KINDS = ("max_odd_peak", "max_k", "max_q")


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class VerifyPolicy:
    workers: int = 1
    step_limit: int = 10**6
    floor: int = 1
    early_exit: bool = True
    word_bits: int = 64
    batch: int = 1 << 16


@dataclass(frozen=True)
class Record:
    value: int
    origin: int

    def beats(self, other: Optional["Record"]) -> bool:
        # larger value wins; ties go to the smaller origin so merges commute
        if other is None:
            return True
        return (self.value, -self.origin) > (other.value, -other.origin)

    def to_dict(self) -> dict:
        return {"value": str(self.value), "origin": str(self.origin)}


def merge_records(a: dict, b: dict) -> dict:
    out = dict(a)
    for kind, rec in b.items():
        if rec is not None and rec.beats(out.get(kind)):
            out[kind] = rec
    return out


@dataclass(frozen=True)
class RangeReport:
    lo: int
    hi: int
    floor: int
    checkpoint: int  # every odd n below this cursor has been swept
    counterexamples: tuple
    records: dict = field(default_factory=dict)
    early_exit: bool = True
    elapsed: float = 0.0

    @property
    def complete(self) -> bool:
        return self.checkpoint >= self.hi

    @property
    def verified(self) -> bool:
        return self.complete and not self.counterexamples

    def to_dict(self, include_elapsed: bool = False) -> dict:
        d = {
            "lo": str(self.lo),
            "hi": str(self.hi),
            "floor": str(self.floor),
            "early_exit": self.early_exit,
            "verified": self.verified,
            "complete": self.complete,
            "checkpoint": str(self.checkpoint),
            "counterexamples": [str(c) for c in self.counterexamples],
            "records": {k: self.records[k].to_dict() for k in RECORD_KINDS if k in self.records},
        }
        if include_elapsed:
            d["elapsed"] = self.elapsed
        return d

    def to_json(self, include_elapsed: bool = False) -> str:
        return json.dumps(self.to_dict(include_elapsed), sort_keys=True)


def _sweep(task: tuple) -> tuple:
    cover_lo, a, b, floor, step_limit, early_exit, word_bits = task
    word_limit = ((1 << word_bits) - 2) // 3  # largest v with 3v+1 inside the word
    peak = kmax = qmax = None
    bad = []
    for n in range(a | 1, b, 2):
        v = n
        k = 0
        top = n
        qtop = 0
        while v != 1:
            if early_exit and v < n and (v < floor or v >= cover_lo):
                break
            if k >= step_limit:
                bad.append(n)
                break
            if v <= word_limit:
                m = 3 * v + 1
                q = (m & -m).bit_length() - 1
                v = m >> q
            else:
                w, q = collatz_step(BitPoly(v))
                v = int(w)
            k += 1
            if v > top:
                top = v
            if q > qtop:
                qtop = q
        if peak is None or top > peak[0]:
            peak = (top, n)
        if kmax is None or k > kmax[0]:
            kmax = (k, n)
        if qtop and (qmax is None or qtop > qmax[0]):
            qmax = (qtop, n)
    records = {}
    for kind, rec in zip(RECORD_KINDS, (peak, kmax, qmax)):
        if rec is not None:
            records[kind] = Record(*rec)
    return records, bad


def _check_bounds(lo: int, hi: int, policy: VerifyPolicy) -> None:
    if lo < 1 or lo >= hi:
        raise DomainError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    if policy.workers < 1:
        raise DomainError("workers must be >= 1")
    if policy.step_limit < 1:
        raise DomainError("step_limit must be >= 1")
    if not 1 <= policy.floor <= lo:
        raise DomainError(f"floor must satisfy 1 <= floor <= lo, got {policy.floor}")
    if policy.word_bits < 4:
        raise DomainError("word_bits must be >= 4")


def _header(lo: int, hi: int, floor: int) -> dict:
    return {"version": CHECKPOINT_VERSION, "lo": str(lo), "hi": str(hi), "floor": str(floor)}


def _state_line(report: RangeReport) -> dict:
    return {
        "done_upto": str(report.checkpoint),
        "records": {k: report.records[k].to_dict() for k in RECORD_KINDS if k in report.records},
        "counterexamples": [str(c) for c in report.counterexamples],
    }


def _run(
    cover_lo: int,
    start: int,
    hi: int,
    policy: VerifyPolicy,
    base: RangeReport,
    upto: Optional[int],
    checkpoint_path: Optional[Path],
) -> RangeReport:
    t0 = time.perf_counter()
    end = hi if upto is None else max(start, min(upto, hi))
    bounds = [(a, min(a + policy.batch, end)) for a in range(start, end, policy.batch)]
    tasks = [
        (cover_lo, a, b, policy.floor, policy.step_limit, policy.early_exit, policy.word_bits)
        for a, b in bounds
    ]
    records = dict(base.records)
    bad = list(base.counterexamples)
    report = replace(base, checkpoint=start)

    def consume(results):
        nonlocal records, report
        for (a, b), (recs, found) in zip(bounds, results):
            records = merge_records(records, recs)
            bad.extend(found)
            report = replace(report, checkpoint=b, records=records, counterexamples=tuple(sorted(bad)))
            if checkpoint_path is not None:
                with open(checkpoint_path, "a") as fh:
                    fh.write(json.dumps(_state_line(report)) + "\n")

    if policy.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=policy.workers) as pool:
            consume(pool.map(_sweep, tasks))
    else:
        consume(map(_sweep, tasks))
    if upto is None or upto >= hi:
        report = replace(report, checkpoint=hi)
    return replace(report, elapsed=base.elapsed + time.perf_counter() - t0)


def verify_range(
    lo: Coercible,
    hi: Coercible,
    policy: Optional[VerifyPolicy] = None,
    upto: Optional[int] = None,
    checkpoint_path=None,
) -> RangeReport:
    """Sweep every odd n in [lo, hi).

    ``upto`` stops the sweep early at that cursor, leaving a partial report.
    With ``checkpoint_path`` a fresh checkpoint file is written and one
    state line is appended per finished batch.
    """
    policy = policy or VerifyPolicy()
    lo, hi = int(as_bitpoly(lo)), int(as_bitpoly(hi))
    _check_bounds(lo, hi, policy)
    path = None
    if checkpoint_path is not None:
        path = Path(checkpoint_path)
        path.write_text(json.dumps(_header(lo, hi, policy.floor)) + "\n")
    base = RangeReport(lo, hi, policy.floor, lo, (), {}, policy.early_exit)
    return _run(lo, lo, hi, policy, base, upto, path)


def checkpoint_save(report: RangeReport, path) -> None:
    lines = [_header(report.lo, report.hi, report.floor), _state_line(report)]
    Path(path).write_text("".join(json.dumps(x) + "\n" for x in lines))


def _load(path) -> RangeReport:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise CheckpointError(f"checkpoint {path} has no header and state line")
    try:
        header = json.loads(lines[0])
        state = json.loads(lines[-1])
        if header.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {header.get('version')!r}")
        lo, hi, floor = int(header["lo"]), int(header["hi"]), int(header["floor"])
        records = {
            kind: Record(int(rec["value"]), int(rec["origin"]))
            for kind, rec in state["records"].items()
        }
        bad = tuple(sorted(int(c) for c in state.get("counterexamples", [])))
        cursor = int(state["done_upto"])
    except CheckpointError:
        raise
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    if not lo <= cursor <= hi:
        raise CheckpointError(f"checkpoint cursor {cursor} outside [{lo}, {hi}]")
    return RangeReport(lo, hi, floor, cursor, bad, records)


def checkpoint_resume(path, policy: Optional[VerifyPolicy] = None, append: bool = False) -> RangeReport:
    """Continue a saved sweep; the floor comes from the file, not the policy."""
    saved = _load(path)
    policy = replace(policy or VerifyPolicy(), floor=saved.floor)
    saved = replace(saved, early_exit=policy.early_exit)
    _check_bounds(saved.lo, saved.hi, policy)
    if saved.complete:
        return saved
    return _run(saved.lo, saved.checkpoint, saved.hi, policy, saved, None, Path(path) if append else None)
