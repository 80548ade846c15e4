"""Qubit probes weakly coupled to channels, and the statistics they leave.

Each probe is a two-level ancilla starting in |0>.  When the particle
crosses a coupled channel, the probe rotates by a small angle: |0> picks up
amplitude sqrt(eps) on |1>.  The joint particle+probes state stays pure and
tiny (3 channels x 2^n probe patterns), so everything is dense.

Probe patterns ("kappa") are written as the excited probe ids concatenated
in configuration order, with "o" for none, e.g. "o", "a", "db", "dce".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dynamics import Dynamics
from .statespace import DEFAULT_TOL, Ket, PDI, TimeSlice


@dataclass(frozen=True)
class ProbeSpec:
    """A probe id plus the (time index, channel label) pairs at which it
    fires.  A multi-channel coupling set (like a probe watching two arms at
    the same time) rotates once per occupied channel.
    """

    probe_id: str
    couplings: frozenset[tuple[int, str]]

    def __post_init__(self):
        if not self.probe_id:
            raise ValueError("probe id must be non-empty")
        object.__setattr__(self, "couplings", frozenset(self.couplings))
        if not self.couplings:
            raise ValueError(f"probe {self.probe_id!r} has no couplings")


#: The built-in probes: one per inner channel, firing when the particle
#: first reaches that channel, plus `w` watching both arms of the inner loop
#: without distinguishing them.
BUILTIN_PROBES: dict[str, ProbeSpec] = {
    "a": ProbeSpec("a", frozenset({(1, "A")})),
    "d": ProbeSpec("d", frozenset({(1, "D")})),
    "b": ProbeSpec("b", frozenset({(2, "B")})),
    "c": ProbeSpec("c", frozenset({(2, "C")})),
    "e": ProbeSpec("e", frozenset({(3, "E")})),
    "w": ProbeSpec("w", frozenset({(2, "B"), (2, "C")})),
}

#: Canonical ordering of the built-in probe ids.
BUILTIN_ORDER = ("a", "d", "b", "c", "e", "w")


def standard_probes(ids: Iterable[str]) -> tuple[ProbeSpec, ...]:
    """Built-in probes selected by id, in canonical order."""
    wanted = set(ids)
    unknown = wanted - set(BUILTIN_ORDER)
    if unknown:
        raise ValueError(f"unknown probe ids {sorted(unknown)}")
    return tuple(BUILTIN_PROBES[i] for i in BUILTIN_ORDER if i in wanted)


@dataclass(frozen=True)
class ProbeStrength:
    """Coupling strength eps in [0, 1); excitation amplitude eta = sqrt(eps),
    survival amplitude zeta = sqrt(1 - eps)."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon!r}")

    @property
    def eta(self) -> float:
        return math.sqrt(self.epsilon)

    @property
    def zeta(self) -> float:
        return math.sqrt(1.0 - self.epsilon)


def _kappa_label(mask: int, probes: Sequence[ProbeSpec]) -> str:
    if mask == 0:
        return "o"
    return "".join(p.probe_id for i, p in enumerate(probes) if mask >> i & 1)


def _kappa_order(n_probes: int) -> list[int]:
    """Masks sorted by excitation count, then by probe position."""
    return sorted(range(1 << n_probes), key=lambda m: (bin(m).count("1"), m))


@dataclass(frozen=True, eq=False)
class JointState:
    """Particle-plus-probes amplitudes at one slice.

    `amplitudes[i, m]` is the amplitude for the particle in channel i of the
    slice with probe pattern mask m (bit k of m = probe k excited).
    """

    slice: TimeSlice
    probes: tuple[ProbeSpec, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probes", tuple(self.probes))
        arr = np.array(self.amplitudes, dtype=complex)
        expected = (self.slice.dim, 1 << len(self.probes))
        if arr.shape != expected:
            raise ValueError(
                f"amplitude array shape {arr.shape}, expected {expected}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    def total_norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def kappa_label(self, mask: int) -> str:
        return _kappa_label(mask, self.probes)


@dataclass(frozen=True, eq=False)
class BranchComponent:
    """One probe pattern's particle component in the decomposition
    state = sum over kappa of phi^kappa (x) |kappa>."""

    kappa: str
    phi: Ket


def _couplings_by_time(probes: Sequence[ProbeSpec]) -> dict[int, list[tuple[int, str]]]:
    """time -> [(probe position, channel label)], ordered by probe id then
    channel so that same-time applications are deterministic.  The maps
    commute (disjoint control channels or distinct probe factors), so the
    order is immaterial to the result.
    """
    by_time: dict[int, list[tuple[int, str]]] = {}
    for pos, spec in enumerate(probes):
        for t, label in spec.couplings:
            by_time.setdefault(t, []).append((pos, label))
    for t in by_time:
        by_time[t].sort(key=lambda pc: (probes[pc[0]].probe_id, pc[1]))
    return by_time


def _apply_coupling(
    amps: np.ndarray,
    channel_axis: int,
    bit: int,
    strength: ProbeStrength,
    completion_phase: float,
) -> None:
    """In place: rotate probe `bit` on the rows where the particle occupies
    `channel_axis`.  The |0> column is (zeta, eta); the |1> column is the
    rotation completion times exp(i * completion_phase).  Probes start in
    |0> and are hit at most once per branch, so the completion never enters
    any outcome.
    """
    z, e = strength.zeta, strength.eta
    phase = np.exp(1j * completion_phase)
    row = amps[channel_axis]
    idx = np.arange(row.shape[0])
    m0 = idx[(idx >> bit) & 1 == 0]
    m1 = m0 + (1 << bit)
    a0 = row[m0].copy()
    a1 = row[m1].copy()
    row[m0] = z * a0 - e * phase * a1
    row[m1] = e * a0 + z * phase * a1


def evolve_with_probes(
    dyn: Dynamics,
    probes: Sequence[ProbeSpec],
    strength: ProbeStrength,
    initial: Ket,
    *,
    upto: int | None = None,
    completion_phase: float = 0.0,
) -> JointState:
    """Evolve `initial` (x) |0...0> to the final slice (or to `upto`),
    alternating step unitaries (identity on the probes) with the probe
    couplings registered at each arrival time.
    """
    probes = tuple(probes)
    if len(set(p.probe_id for p in probes)) != len(probes):
        raise ValueError("probe ids must be distinct")
    by_time = _couplings_by_time(probes)
    for t, pcs in by_time.items():
        slc = dyn.slice_at(t)
        for _, label in pcs:
            slc.axis(label)
    if initial.slice != dyn.slices[initial.slice.time_index]:
        raise ValueError("initial ket does not live on this dynamics")
    if initial.slice.time_index != 0:
        raise ValueError("probe evolution starts at time 0")
    stop = dyn.final_index if upto is None else upto
    dyn.slice_at(stop)

    n = len(probes)
    amps = np.zeros((initial.slice.dim, 1 << n), dtype=complex)
    amps[:, 0] = initial.amplitudes
    for pos, label in by_time.get(0, []):
        _apply_coupling(amps, dyn.slices[0].axis(label), pos, strength, completion_phase)
    for j in range(stop):
        amps = dyn.steps[j].matrix @ amps
        for pos, label in by_time.get(j + 1, []):
            _apply_coupling(
                amps, dyn.slices[j + 1].axis(label), pos, strength, completion_phase
            )
    return JointState(dyn.slices[stop], probes, amps)


def branch_components(
    js: JointState, tol: float = DEFAULT_TOL
) -> tuple[BranchComponent, ...]:
    """Decompose by probe pattern, dropping branches of negligible norm.
    Ordered by excitation count, then probe position."""
    out = []
    for mask in _kappa_order(len(js.probes)):
        phi = js.amplitudes[:, mask]
        if float(np.linalg.norm(phi)) <= tol:
            continue
        out.append(BranchComponent(js.kappa_label(mask), Ket(js.slice, phi)))
    return tuple(out)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint probabilities over (detector label, probe pattern).

    Covers every pair, including zero-probability ones; helpers marginalize
    or condition on a detector.
    """

    probs: Mapping[tuple[str, str], float]

    def __post_init__(self):
        object.__setattr__(self, "probs", dict(self.probs))

    def p(self, detector: str, kappa: str) -> float:
        return self.probs[(detector, kappa)]

    def detector_marginal(self, detector: str) -> float:
        return sum(v for (d, _), v in self.probs.items() if d == detector)

    def given_detector(self, detector: str) -> dict[str, float]:
        mass = self.detector_marginal(detector)
        if mass <= 0.0:
            raise ValueError(f"detector {detector!r} has zero probability")
        return {
            k: v / mass for (d, k), v in self.probs.items() if d == detector
        }

    def total(self) -> float:
        return sum(self.probs.values())

    def detectors(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for d, _ in self.probs:
            seen.setdefault(d)
        return tuple(seen)


def outcome_distribution(js: JointState, detector_pdi: PDI) -> OutcomeDistribution:
    """Pr(detector, kappa) = squared norm of the detector projector applied
    to that branch component.  Totals 1 for a normalized joint state."""
    if detector_pdi.slice != js.slice:
        raise ValueError(
            f"detector decomposition lives on {detector_pdi.slice}, "
            f"joint state on {js.slice}"
        )
    probs: dict[tuple[str, str], float] = {}
    order = _kappa_order(len(js.probes))
    for i, part in enumerate(detector_pdi.parts):
        det = part.name or f"part{i}"
        for mask in order:
            v = part.matrix @ js.amplitudes[:, mask]
            probs[(det, js.kappa_label(mask))] = float(np.sum(np.abs(v) ** 2))
    return OutcomeDistribution(probs)


def coincidence_support(
    dist: OutcomeDistribution, tol: float = DEFAULT_TOL
) -> dict[str, set[str]]:
    """Per detector, the set of probe patterns with probability above tol."""
    support: dict[str, set[str]] = {d: set() for d in dist.detectors()}
    for (d, k), v in dist.probs.items():
        if v > tol:
            support[d].add(k)
    return support


def sample(
    dist: OutcomeDistribution, n: int, seed: int
) -> dict[tuple[str, str], int]:
    """Aggregate counts of n independent draws; deterministic given seed.
    Zero-count cells are omitted."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    keys = list(dist.probs)
    p = np.array([dist.probs[k] for k in keys], dtype=float)
    total = p.sum()
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-6):
        raise ValueError(f"distribution mass {total} is not 1")
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, p / total)
    return {k: int(c) for k, c in zip(keys, counts) if c > 0}
