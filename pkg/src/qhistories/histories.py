"""History families, chain kets, consistency, and conditional inference.

A history is a sequence of (time, projector) events; times without an event
carry the identity implicitly.  A family bundles histories with a pure
initial state.  Probabilities exist only for consistent families: the chain
kets of distinct histories must be mutually orthogonal.  Inconsistent
families are not an error of construction, only of *use*: asking them for
probabilities raises, with the offending overlaps attached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .dynamics import Dynamics, transport
from .statespace import DEFAULT_TOL, Ket, Projector, TimeSlice, inner


@dataclass(frozen=True, eq=False)
class History:
    """Events at strictly increasing time indices; omitted times mean I."""

    events: tuple[tuple[int, Projector], ...]

    def __post_init__(self):
        events = tuple((int(t), p) for t, p in self.events)
        times = [t for t, _ in events]
        if any(t < 0 for t in times):
            raise ValueError("event times must be >= 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"event times must strictly increase, got {times}")
        for t, p in events:
            if p.slice.time_index != t:
                raise ValueError(
                    f"event at time {t} carries a projector on slice {p.slice}"
                )
        object.__setattr__(self, "events", events)

    def event_at(self, t: int) -> Projector | None:
        for et, p in self.events:
            if et == t:
                return p
        return None

    @property
    def times(self) -> tuple[int, ...]:
        return tuple(t for t, _ in self.events)

    def label(self) -> str:
        return ",".join(p.name or f"E@t{t}" for t, p in self.events)

    def replacing(self, t: int, part: Projector) -> History:
        """Copy of this history with `part` as the event at time t."""
        events = [(et, p) for et, p in self.events if et != t]
        events.append((t, part))
        events.sort(key=lambda ev: ev[0])
        return History(tuple(events))


@dataclass(frozen=True, eq=False)
class Family:
    """A pure initial state plus a set of candidate histories.

    `complete` families must cover the identity: over the union of event
    times, the histories' event structures (identity filled in) sum to the
    history-space identity.  Subfamilies (`complete=False`) skip both that
    check and the total-probability normalization.
    """

    initial: Ket
    histories: tuple[History, ...]
    complete: bool = False

    def __post_init__(self):
        object.__setattr__(self, "histories", tuple(self.histories))
        if not self.histories:
            raise ValueError("a family needs at least one history")
        t0 = self.initial.slice.time_index
        for h in self.histories:
            if h.events and h.times[0] <= t0:
                raise ValueError(
                    f"history events must start after the initial time t{t0}"
                )
        if self.complete:
            res = _coverage_residual(self.histories)
            if res > DEFAULT_TOL:
                raise ValueError(
                    "complete family does not cover the identity "
                    f"(residual {res:.3g})"
                )

    def event_times(self) -> tuple[int, ...]:
        return tuple(sorted({t for h in self.histories for t in h.times}))


def _slices_by_time(histories: Sequence[History]) -> dict[int, TimeSlice]:
    slices: dict[int, TimeSlice] = {}
    for h in histories:
        for t, p in h.events:
            if t in slices and slices[t] != p.slice:
                raise ValueError(f"conflicting slices at time {t}")
            slices[t] = p.slice
    return slices


def _coverage_residual(histories: Sequence[History]) -> float:
    slices = _slices_by_time(histories)
    times = sorted(slices)
    total = None
    for h in histories:
        mats = []
        for t in times:
            p = h.event_at(t)
            mats.append(np.eye(slices[t].dim) if p is None else p.matrix)
        op = reduce(np.kron, mats)
        total = op if total is None else total + op
    dim = int(np.prod([slices[t].dim for t in times]))
    return float(np.max(np.abs(total - np.eye(dim))))


def chain_ket(dyn: Dynamics, initial: Ket, h: History) -> Ket:
    """Alternate unitary transport and event projection along a history.

    The result lives on the slice of the last event (or on the initial slice
    for an event-free history) and is in general sub-normalized; its squared
    norm is the history's extended Born weight.
    """
    if initial.slice != dyn.slice_at(initial.slice.time_index):
        raise ValueError("initial ket does not live on this dynamics")
    k = initial
    for t, p in h.events:
        k = transport(dyn, k, t)
        if p.slice != k.slice:
            raise ValueError(
                f"event projector at time {t} lives on {p.slice}, not {k.slice}"
            )
        k = p.apply(k)
    return k


@dataclass(frozen=True)
class ConsistencyReport:
    """Pairwise chain-ket overlaps of a family.

    `max_overlap` is the largest |<c_i|c_j>| normalized by
    max(1, |c_i| |c_j|); `offending_pairs` holds the raw inner products of
    the pairs exceeding tolerance.
    """

    consistent: bool
    max_overlap: float
    offending_pairs: tuple[tuple[int, int, complex], ...] = ()


class InconsistentFamilyError(ValueError):
    """Probabilities were requested from an inconsistent family."""

    def __init__(self, report: ConsistencyReport):
        super().__init__(
            "family is inconsistent (max chain-ket overlap "
            f"{report.max_overlap:.6g}); probabilities are meaningless"
        )
        self.report = report


class InexpressibleEventError(ValueError):
    """An event is not a union of the family's own sample-space cells."""


def _chain_kets_at_common_time(dyn: Dynamics, fam: Family) -> list[Ket]:
    chains = [chain_ket(dyn, fam.initial, h) for h in fam.histories]
    t_max = max(
        (h.times[-1] for h in fam.histories if h.events),
        default=fam.initial.slice.time_index,
    )
    return [transport(dyn, c, t_max) for c in chains]


def consistency_check(
    dyn: Dynamics, fam: Family, tol: float = DEFAULT_TOL
) -> ConsistencyReport:
    """Pairwise-orthogonality test of the family's chain kets.

    Overlaps are normalized scale-free: |<c_i|c_j>| / max(1, |c_i| |c_j|),
    so near-zero chain kets cannot produce spurious verdicts.  An overlap
    exactly at tolerance counts as consistent.
    """
    chains = _chain_kets_at_common_time(dyn, fam)
    max_overlap = 0.0
    offending: list[tuple[int, int, complex]] = []
    for i in range(len(chains)):
        for j in range(i + 1, len(chains)):
            ip = inner(chains[i], chains[j])
            scale = max(1.0, chains[i].norm() * chains[j].norm())
            val = abs(ip) / scale
            max_overlap = max(max_overlap, val)
            if val > tol:
                offending.append((i, j, ip))
    return ConsistencyReport(max_overlap <= tol, max_overlap, tuple(offending))


def born_probabilities(
    dyn: Dynamics, fam: Family, tol: float = DEFAULT_TOL
) -> dict[History, float]:
    """Extended Born rule: history -> squared chain-ket norm, conditioned on
    the initial state.  Rejects inconsistent families.
    """
    report = consistency_check(dyn, fam, tol)
    if not report.consistent:
        raise InconsistentFamilyError(report)
    return {
        h: chain_ket(dyn, fam.initial, h).norm() ** 2 for h in fam.histories
    }


def _match(h: History, events: Iterable[tuple[int, Projector]], tol: float) -> bool:
    """True if the history's event at each given time equals the given
    projector; False if orthogonal to it; anything else violates the single
    framework rule.
    """
    for t, p in events:
        e = h.event_at(t)
        e_mat = np.eye(p.slice.dim) if e is None else e.matrix
        if float(np.max(np.abs(e_mat - p.matrix))) <= tol:
            continue
        if float(np.max(np.abs(e_mat @ p.matrix))) <= tol:
            return False
        raise InexpressibleEventError(
            f"event {p.name or 'projector'} at time {t} is not expressible "
            "in this family (single framework rule)"
        )
    return True


def conditional_probability(
    dyn: Dynamics,
    fam: Family,
    condition: Iterable[tuple[int, Projector]],
    query: Iterable[tuple[int, Projector]],
    tol: float = DEFAULT_TOL,
) -> float:
    """Ratio of summed Born weights Pr(query | condition, initial state).

    Both arguments are sets of (time, projector) events.  The condition must
    pick out a union of the family's histories; the query must do so within
    the conditioned subfamily.
    """
    weights = born_probabilities(dyn, fam, tol)
    condition = tuple(condition)
    query = tuple(query)
    selected = [h for h in fam.histories if _match(h, condition, tol)]
    cond_mass = sum(weights[h] for h in selected)
    if cond_mass <= tol:
        raise ValueError(
            f"condition has vanishing probability ({cond_mass:.3g})"
        )
    joint_mass = sum(weights[h] for h in selected if _match(h, query, tol))
    return joint_mass / cond_mass


def refine(
    fam: Family,
    time_index: int,
    parts: Sequence[Projector],
    tol: float = DEFAULT_TOL,
) -> Family:
    """Split histories at `time_index` by a finer decomposition.

    Every history whose event at that time equals the sum of `parts`
    (identity if absent) is replaced by one history per part; all other
    histories pass through unchanged.  The result is returned *unvalidated*:
    consistency of a refinement is a separate question, and once lost it
    cannot be restored by refining further.
    """
    parts = tuple(parts)
    if not parts:
        raise ValueError("refinement needs at least one part")
    slc = parts[0].slice
    if slc.time_index != time_index:
        raise ValueError(
            f"parts live at time {slc.time_index}, not {time_index}"
        )
    if any(p.slice != slc for p in parts):
        raise ValueError("refinement parts live on mixed slices")
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if float(np.max(np.abs(parts[i].matrix @ parts[j].matrix))) > tol:
                raise ValueError(f"refinement parts {i} and {j} overlap")
    total = sum(p.matrix for p in parts)

    new_histories: list[History] = []
    split_any = False
    for h in fam.histories:
        e = h.event_at(time_index)
        e_mat = np.eye(slc.dim) if e is None else e.matrix
        if float(np.max(np.abs(e_mat - total))) <= tol:
            split_any = True
            new_histories.extend(h.replacing(time_index, p) for p in parts)
        else:
            new_histories.append(h)
    if not split_any:
        raise ValueError(
            f"no history event at time {time_index} equals the sum of the "
            "replacement parts"
        )
    return Family(fam.initial, tuple(new_histories), fam.complete)


@dataclass(frozen=True)
class Defined:
    """The queried probability exists in the coarsest framework."""

    probability: float


@dataclass(frozen=True)
class Incommensurate:
    """The coarsest framework holding the query is inconsistent, so the
    probability is meaningless; the report carries the overlaps."""

    report: ConsistencyReport


InferenceVerdict = Defined | Incommensurate


def infer(
    dyn: Dynamics,
    initial: Ket,
    final_event: Projector,
    query: Projector,
    tol: float = DEFAULT_TOL,
) -> InferenceVerdict:
    """Decide Pr(query | initial, final event) in the coarsest framework.

    Builds the two-history family {initial * P * final, initial * ~P * final}
    and either returns the conditional probability of P or reports why none
    exists.  Deliberately does not search finer framings.
    """
    t_final = dyn.final_index
    if final_event.slice != dyn.slices[t_final]:
        raise ValueError(
            f"final event lives on {final_event.slice}, not the final slice"
        )
    evolved = transport(dyn, initial, t_final)
    p_final = final_event.apply(evolved).norm() ** 2
    if p_final <= tol:
        raise ValueError(
            f"final event has vanishing forward probability ({p_final:.3g})"
        )
    t = query.slice.time_index
    fam = Family(
        initial,
        (
            History(((t, query), (t_final, final_event))),
            History(((t, query.complement()), (t_final, final_event))),
        ),
    )
    report = consistency_check(dyn, fam, tol)
    if not report.consistent:
        return Incommensurate(report)
    weights = [chain_ket(dyn, initial, h).norm() ** 2 for h in fam.histories]
    return Defined(weights[0] / (weights[0] + weights[1]))
