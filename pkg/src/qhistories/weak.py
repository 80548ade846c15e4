"""Two-state-vector quantities: backward states, weak values, and the
presence comparison between the weak-value reading and history inference.

A pre- and post-selected run is described by the forward-evolved ket and the
backward-evolved post-selection ket at a common intermediate time.  Weak
values are reported as bare complex numbers; no interpretation is attached.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .dynamics import Dynamics, transport
from .histories import History, chain_ket
from .statespace import DEFAULT_TOL, Ket, Projector, inner, projector_from_ket


@dataclass(frozen=True, eq=False)
class TwoStateVector:
    """Forward ket and backward ket on the same slice.  The backward ket is
    the vector whose conjugate acts as the bra; with real dynamics the
    distinction is invisible.
    """

    forward: Ket
    backward: Ket

    def __post_init__(self):
        if self.forward.slice != self.backward.slice:
            raise ValueError(
                f"forward ket at {self.forward.slice} and backward ket at "
                f"{self.backward.slice} must share a slice"
            )

    def overlap(self) -> complex:
        return inner(self.backward, self.forward)

    def weak_value(self, q: Projector, tol: float = DEFAULT_TOL) -> complex:
        """<backward|Q|forward> / <backward|forward>."""
        if q.slice != self.forward.slice:
            raise ValueError(f"projector lives on {q.slice}, not this slice")
        denom = self.overlap()
        if abs(denom) <= tol:
            raise ValueError(
                "post-selection is incompatible with pre-selection: "
                f"|<backward|forward>| = {abs(denom):.3g}"
            )
        return inner(self.backward, q.apply(self.forward)) / denom


def backward_state(dyn: Dynamics, final: Ket, t: int) -> Ket:
    """Adjoint-transport the post-selected ket back to time t."""
    if final.slice != dyn.slices[dyn.final_index]:
        raise ValueError(f"final ket lives on {final.slice}, not the final slice")
    k = transport(dyn, final, t)
    name = f"{final.name}@t{t}" if final.name else ""
    return Ket(k.slice, k.amplitudes, name=name)


def two_state_vector(dyn: Dynamics, initial: Ket, final: Ket, t: int) -> TwoStateVector:
    return TwoStateVector(transport(dyn, initial, t), backward_state(dyn, final, t))


def weak_value(
    dyn: Dynamics,
    initial: Ket,
    final: Ket,
    q: Projector,
    tol: float = DEFAULT_TOL,
) -> complex:
    """Weak value of a projector at its own time, for the run pre-selected
    on `initial` and post-selected on `final`."""
    tsv = two_state_vector(dyn, initial, final, q.slice.time_index)
    return tsv.weak_value(q, tol)


def chain_weak_identity_residual(
    dyn: Dynamics,
    initial: Ket,
    final: Ket,
    p: Projector,
    tol: float = DEFAULT_TOL,
) -> float:
    """Residual of the identity tying the single-event chain ket to the weak
    value: <final | chain(initial, P, final)> = <backward|forward> <P>_w.
    Algebraically zero; returned for numerical verification.
    """
    t = p.slice.time_index
    tsv = two_state_vector(dyn, initial, final, t)
    wv = tsv.weak_value(p, tol)
    h = History(((t, p), (dyn.final_index, projector_from_ket(final))))
    chain = chain_ket(dyn, initial, h)
    lhs = inner(final, chain)
    return abs(lhs - tsv.overlap() * wv)


class PresenceVerdict(Enum):
    PRESENT = "present"
    ABSENT = "absent"
    MEANINGLESS = "meaningless"


@dataclass(frozen=True)
class ChannelPresence:
    """One row of the method comparison for a channel projector."""

    name: str
    weak_value: complex
    tsvf: PresenceVerdict
    ch: PresenceVerdict


def presence_table(
    dyn: Dynamics,
    initial: Ket,
    final: Ket,
    channels: Sequence[Projector],
    tol: float = DEFAULT_TOL,
) -> tuple[ChannelPresence, ...]:
    """Compare the two presence criteria per channel.

    The weak-trace reading calls the particle present wherever the weak
    value is nonzero.  The history reading calls it present at weak value 1,
    absent at 0, and refuses to discuss anything in between (the two-history
    framework is then inconsistent, which matches :func:`infer` by the
    chain-ket identity).
    """
    rows = []
    for q in channels:
        wv = weak_value(dyn, initial, final, q, tol)
        tsvf = PresenceVerdict.PRESENT if abs(wv) > tol else PresenceVerdict.ABSENT
        if abs(wv - 1.0) <= tol:
            ch = PresenceVerdict.PRESENT
        elif abs(wv) <= tol:
            ch = PresenceVerdict.ABSENT
        else:
            ch = PresenceVerdict.MEANINGLESS
        rows.append(ChannelPresence(q.name or str(q.slice), wv, tsvf, ch))
    return tuple(rows)
