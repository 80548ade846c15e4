"""The built-in nested interferometer model and its named history families.

Five three-channel slices joined by four beam-splitter steps.  The inner
loop (channels B and C between the second and third splitters) is tuned so
that anything entering it through D leaves through H, for every splitting
ratio.  A variant without the last two splitters routes beams straight
through instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import Dynamics, StepUnitary, step_validate, transport
from .histories import Family, History, refine
from .statespace import (
    Ket,
    TimeSlice,
    basis_ket,
    projector_from_labels,
    projector_from_ket,
)

#: Balanced-splitter amplitude for the inner loop.
R = 1.0 / math.sqrt(2.0)

SLICE_BASES: tuple[tuple[str, ...], ...] = (
    ("S", "R", "Q"),
    ("A", "D", "Q"),
    ("A", "B", "C"),
    ("A", "E", "H"),
    ("F", "G", "H"),
)


@dataclass(frozen=True)
class BeamSplitterParams:
    """Splitting ratio of the outer splitters: amplitude alpha = sqrt(alpha2)
    for transmission into A, beta = sqrt(1 - alpha2) for the other arm.
    Degenerate ratios are rejected; both amplitudes must be strictly inside
    (0, 1).
    """

    alpha2: float

    def __post_init__(self):
        if not 0.0 < self.alpha2 < 1.0:
            raise ValueError(
                f"alpha2 must satisfy 0 < alpha2 < 1, got {self.alpha2!r} "
                "(both splitter amplitudes must be strictly positive)"
            )

    @property
    def alpha(self) -> float:
        return math.sqrt(self.alpha2)

    @property
    def beta2(self) -> float:
        return 1.0 - self.alpha2

    @property
    def beta(self) -> float:
        return math.sqrt(self.beta2)


def time_slices() -> tuple[TimeSlice, ...]:
    return tuple(TimeSlice(j, basis) for j, basis in enumerate(SLICE_BASES))


def _step(
    frm: TimeSlice, to: TimeSlice, columns: dict[str, dict[str, float]]
) -> StepUnitary:
    m = np.zeros((to.dim, frm.dim), dtype=complex)
    for src, images in columns.items():
        for dst, amp in images.items():
            m[to.axis(dst), frm.axis(src)] = amp
    return StepUnitary(frm, to, m)


def build_nested_mzi(p: BeamSplitterParams) -> Dynamics:
    """The full model: four splitter steps over the five slices."""
    a, b = p.alpha, p.beta
    t0, t1, t2, t3, t4 = time_slices()
    steps = (
        _step(t0, t1, {"S": {"A": a, "D": b}, "R": {"A": -b, "D": a}, "Q": {"Q": 1}}),
        _step(t1, t2, {"A": {"A": 1}, "D": {"B": R, "C": R}, "Q": {"B": R, "C": -R}}),
        _step(t2, t3, {"A": {"A": 1}, "B": {"E": -R, "H": R}, "C": {"E": R, "H": R}}),
        _step(t3, t4, {"A": {"F": a, "G": b}, "E": {"F": b, "G": -a}, "H": {"H": 1}}),
    )
    dyn = Dynamics((t0, t1, t2, t3, t4), steps)
    report = step_validate(dyn)
    if not report.ok:
        raise AssertionError(f"construction produced a non-unitary step: {report}")
    return dyn


def build_no_bs34(p: BeamSplitterParams) -> Dynamics:
    """Variant with the last two splitters removed: beams continue straight
    through their crossing points (B->H, C->E, then A->G, E->F), following
    the layout geometry.  The first two steps are unchanged.
    """
    a, b = p.alpha, p.beta
    t0, t1, t2, t3, t4 = time_slices()
    steps = (
        _step(t0, t1, {"S": {"A": a, "D": b}, "R": {"A": -b, "D": a}, "Q": {"Q": 1}}),
        _step(t1, t2, {"A": {"A": 1}, "D": {"B": R, "C": R}, "Q": {"B": R, "C": -R}}),
        _step(t2, t3, {"A": {"A": 1}, "B": {"H": 1}, "C": {"E": 1}}),
        _step(t3, t4, {"A": {"G": 1}, "E": {"F": 1}, "H": {"H": 1}}),
    )
    dyn = Dynamics((t0, t1, t2, t3, t4), steps)
    report = step_validate(dyn)
    if not report.ok:
        raise AssertionError(f"construction produced a non-unitary step: {report}")
    return dyn


def source_ket(dyn: Dynamics) -> Ket:
    """The standard input: unit amplitude in channel S at time 0."""
    return basis_ket(dyn.slices[0], "S")


class NamedFamilyId(Enum):
    """The built-in history families over the nested model."""

    EQ8_FULL = "EQ8_FULL"
    EQ12_DETECTORS = "EQ12_DETECTORS"
    F_A = "F_A"
    F_A_PRIME = "F_A_PRIME"
    F_B = "F_B"
    F_ABC = "F_ABC"
    F_C = "F_C"
    EQ25_BACKWARD = "EQ25_BACKWARD"
    EQ26_NO_BS34 = "EQ26_NO_BS34"


def named_family(fid: NamedFamilyId, p: BeamSplitterParams) -> tuple[Dynamics, Family]:
    """Construct one of the built-in families together with its dynamics.

    EQ8_FULL, EQ12_DETECTORS and EQ26_NO_BS34 are complete; the rest are
    subfamilies conditioned on arrival in F.
    """
    dyn = build_no_bs34(p) if fid is NamedFamilyId.EQ26_NO_BS34 else build_nested_mzi(p)
    s0 = source_ket(dyn)
    proj = lambda t, labels: projector_from_labels(dyn.slices[t], labels)
    f4 = proj(4, {"F"})

    if fid is NamedFamilyId.EQ8_FULL:
        histories = (
            History(((2, proj(2, {"A"})), (4, f4))),
            History(((2, proj(2, {"B", "C"})), (4, f4))),
            History(((4, f4.complement()),)),
        )
        return dyn, Family(s0, histories, complete=True)

    if fid is NamedFamilyId.EQ12_DETECTORS:
        histories = tuple(History(((4, proj(4, {lab})),)) for lab in ("F", "G", "H"))
        return dyn, Family(s0, histories, complete=True)

    if fid is NamedFamilyId.F_A:
        histories = (
            History(((2, proj(2, {"A"})), (4, f4))),
            History(((2, proj(2, {"B", "C"})), (4, f4))),
        )
        return dyn, Family(s0, histories)

    if fid is NamedFamilyId.F_A_PRIME:
        _, fam = named_family(NamedFamilyId.F_A, p)
        fam = refine(fam, 1, tuple(proj(1, {lab}) for lab in ("A", "D", "Q")))
        fam = refine(fam, 3, tuple(proj(3, {lab}) for lab in ("A", "E", "H")))
        return dyn, fam

    if fid is NamedFamilyId.F_B:
        histories = (
            History(((2, proj(2, {"B"})), (4, f4))),
            History(((2, proj(2, {"A", "C"})), (4, f4))),
        )
        return dyn, Family(s0, histories)

    if fid is NamedFamilyId.F_ABC:
        histories = tuple(
            History(((2, proj(2, {lab})), (4, f4))) for lab in ("A", "B", "C")
        )
        return dyn, Family(s0, histories)

    if fid is NamedFamilyId.F_C:
        histories = (
            History(((2, proj(2, {"C"})), (4, f4))),
            History(((2, proj(2, {"A", "B"})), (4, f4))),
        )
        return dyn, Family(s0, histories)

    if fid is NamedFamilyId.EQ25_BACKWARD:
        back = transport(dyn, basis_ket(dyn.slices[4], "F"), 2)
        back = Ket(back.slice, back.amplitudes, name="F4@t2")
        p_back = projector_from_ket(back)
        histories = (
            History(((2, p_back), (4, f4))),
            History(((2, p_back.complement()), (4, f4))),
        )
        return dyn, Family(s0, histories)

    if fid is NamedFamilyId.EQ26_NO_BS34:
        histories = tuple(
            History(((2, proj(2, {mid})), (4, proj(4, {out}))))
            for mid in ("A", "B", "C")
            for out in ("F", "G", "H")
        )
        return dyn, Family(s0, histories, complete=True)

    raise ValueError(f"unknown family id {fid!r}")
