"""Polarized photon modes, single-photon amplitude vectors and the Bell basis.

Modes are labelled ``"H@a'"`` style: polarization, then the spatial mode
name.  Ordering is canonical (spatial name, then H before V) so that amplitude
vectors always serialize in the same order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

TOL = 1e-12
SQRT1_2 = 1.0 / math.sqrt(2.0)


class Polarization(enum.Enum):
    H = "H"
    V = "V"

    def flipped(self) -> "Polarization":
        return Polarization.V if self is Polarization.H else Polarization.H

    def __lt__(self, other: "Polarization") -> bool:
        return self is Polarization.H and other is Polarization.V


H = Polarization.H
V = Polarization.V


@dataclass(frozen=True, order=True)
class SpatialMode:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class PhotonMode:
    spatial: SpatialMode
    pol: Polarization

    @classmethod
    def parse(cls, label: str) -> "PhotonMode":
        """Inverse of ``str``: ``"V@b'"`` -> PhotonMode(b', V)."""
        pol, sep, name = label.partition("@")
        if not sep or pol not in ("H", "V") or not name:
            raise ValueError(f"bad photon mode label {label!r}")
        return cls(SpatialMode(name), Polarization(pol))

    def sort_key(self) -> tuple[str, int]:
        return (self.spatial.name, 0 if self.pol is H else 1)

    def __lt__(self, other: "PhotonMode") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return f"{self.pol.value}@{self.spatial.name}"

    def __repr__(self) -> str:
        return f"PhotonMode({self})"


def mode(label: str) -> PhotonMode:
    return PhotonMode.parse(label)


class SinglePhotonState:
    """Normalized superposition of one photon over :class:`PhotonMode` labels.

    Entries whose magnitude is at most ``TOL`` are dropped on construction.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[PhotonMode, complex], normalized: bool = True):
        cleaned = {m: complex(a) for m, a in entries.items() if abs(a) > TOL}
        for a in cleaned.values():
            if not (math.isfinite(a.real) and math.isfinite(a.imag)):
                raise ValueError("amplitudes must be finite")
        if normalized:
            norm = sum(abs(a) ** 2 for a in cleaned.values())
            if abs(norm - 1.0) > TOL:
                raise ValueError(f"state is not normalized (sum |a|^2 = {norm!r})")
        self._entries = dict(sorted(cleaned.items(), key=lambda kv: kv[0].sort_key()))

    @classmethod
    def basis(cls, m: PhotonMode) -> "SinglePhotonState":
        return cls({m: 1.0})

    @property
    def entries(self) -> dict[PhotonMode, complex]:
        return dict(self._entries)

    def __getitem__(self, m: PhotonMode) -> complex:
        return self._entries.get(m, 0j)

    def __iter__(self):
        return iter(self._entries.items())

    def __len__(self) -> int:
        return len(self._entries)

    def modes(self) -> list[PhotonMode]:
        return list(self._entries)

    def norm2(self) -> float:
        return sum(abs(a) ** 2 for a in self._entries.values())

    def isclose(self, other: "SinglePhotonState", tol: float = TOL) -> bool:
        keys = set(self._entries) | set(other._entries)
        return all(abs(self[k] - other[k]) <= tol for k in keys)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SinglePhotonState):
            return NotImplemented
        return self.isclose(other)

    def __hash__(self):
        raise TypeError("SinglePhotonState is unhashable")

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.6g})|{m}>" for m, a in self._entries.items())
        return f"SinglePhotonState({terms})"

    def to_records(self) -> list[dict]:
        return [{"mode": str(m), "re": a.real, "im": a.imag} for m, a in self._entries.items()]


class BellState(enum.Enum):
    PSI_MINUS = "psi_minus"
    PSI_PLUS = "psi_plus"
    PHI_MINUS = "phi_minus"
    PHI_PLUS = "phi_plus"

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]

    @classmethod
    def from_label(cls, label: str) -> "BellState":
        key = label.strip().lower()
        for state in cls:
            if key in (state.value, state.symbol, state.name.lower()):
                return state
        raise ValueError(f"unknown Bell state {label!r}")


_SYMBOLS = {
    BellState.PSI_MINUS: "psi-",
    BellState.PSI_PLUS: "psi+",
    BellState.PHI_MINUS: "phi-",
    BellState.PHI_PLUS: "phi+",
}

BELL_STATES: tuple[BellState, ...] = tuple(BellState)

ARM_A = SpatialMode("a'")
ARM_B = SpatialMode("b'")


@dataclass(frozen=True)
class BellTerm:
    first: PhotonMode
    second: PhotonMode
    coeff: complex


@dataclass(frozen=True)
class BellDecomposition:
    """Two product terms ``coeff * |first>|second>`` with first on a', second on b'."""

    terms: tuple[BellTerm, ...]

    def __post_init__(self):
        if len(self.terms) != 2:
            raise ValueError("a Bell decomposition has exactly two terms")
        total = sum(abs(t.coeff) ** 2 for t in self.terms)
        if abs(total - 1.0) > TOL:
            raise ValueError("Bell decomposition is not normalized")

    def vector(self) -> dict[tuple[Polarization, Polarization], complex]:
        out = {(p, q): 0j for p in Polarization for q in Polarization}
        for t in self.terms:
            out[(t.first.pol, t.second.pol)] += t.coeff
        return out

    def inner(self, other: "BellDecomposition") -> complex:
        u, w = self.vector(), other.vector()
        return sum(u[k].conjugate() * w[k] for k in u)

    def to_records(self) -> list[dict]:
        return [
            {"modes": [str(t.first), str(t.second)], "re": t.coeff.real, "im": t.coeff.imag}
            for t in self.terms
        ]


# (pol on a', pol on b', sign)
_BELL_TABLE = {
    BellState.PSI_MINUS: ((H, V, 1), (V, H, -1)),
    BellState.PSI_PLUS: ((H, V, 1), (V, H, 1)),
    BellState.PHI_MINUS: ((H, H, 1), (V, V, -1)),
    BellState.PHI_PLUS: ((H, H, 1), (V, V, 1)),
}


def decompose_bell(state: BellState, arm_a: SpatialMode = ARM_A,
                   arm_b: SpatialMode = ARM_B) -> BellDecomposition:
    terms = tuple(
        BellTerm(PhotonMode(arm_a, p), PhotonMode(arm_b, q), complex(sign * SQRT1_2))
        for p, q, sign in _BELL_TABLE[state]
    )
    return BellDecomposition(terms)


class LocalOp(enum.Enum):
    """One-arm polarization operations.

    ``BOTH`` is the exchange followed by the phase flip.
    """

    POLARIZATION_EXCHANGE = "exchange"
    POLARIZATION_PHASE_FLIP = "phase_flip"
    BOTH = "both"


def _apply_local(pol: Polarization, op: LocalOp) -> tuple[Polarization, int]:
    sign = 1
    if op in (LocalOp.POLARIZATION_EXCHANGE, LocalOp.BOTH):
        pol = pol.flipped()
    if op in (LocalOp.POLARIZATION_PHASE_FLIP, LocalOp.BOTH) and pol is V:
        sign = -1
    return pol, sign


def local_transform(state: BellState, arm: SpatialMode, op: LocalOp) -> tuple[BellState, complex]:
    """Apply ``op`` to the photon on ``arm`` and identify the resulting Bell state.

    Returns the new state and the global phase ``g`` such that the transformed
    decomposition equals ``g`` times the returned state's decomposition.
    """
    if arm not in (ARM_A, ARM_B):
        raise ValueError(f"arm must be {ARM_A} or {ARM_B}, got {arm}")
    terms = []
    for t in decompose_bell(state).terms:
        first, second, coeff = t.first, t.second, t.coeff
        if arm == ARM_A:
            pol, sign = _apply_local(first.pol, op)
            first = PhotonMode(first.spatial, pol)
        else:
            pol, sign = _apply_local(second.pol, op)
            second = PhotonMode(second.spatial, pol)
        terms.append(BellTerm(first, second, coeff * sign))
    transformed = BellDecomposition(tuple(terms))
    for candidate in BELL_STATES:
        overlap = decompose_bell(candidate).inner(transformed)
        if abs(abs(overlap) - 1.0) <= TOL:
            return candidate, overlap
    raise AssertionError("Bell basis not closed under local operation")  # pragma: no cover


def canonical_modes(modes: Iterable[PhotonMode]) -> list[PhotonMode]:
    return sorted(set(modes), key=PhotonMode.sort_key)
