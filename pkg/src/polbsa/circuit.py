"""Linear-optics elements and circuits.

Every element maps input spatial modes to freshly named output modes, so a
circuit is a DAG written down in topological order.  Beam splitters follow one
Hadamard convention with ordered ports::

    |X>_in1 -> (|X>_out1 + |X>_out2) / sqrt(2)
    |X>_in2 -> (|X>_out1 - |X>_out2) / sqrt(2)

Sign differences between physical beam splitters are expressed by choosing the
port order.  A PBS is the detection stage: the H component of its input is
transmitted to one detector and the V component reflected to another.  Its two
output ports are named after those detectors (``D1``, ``D2``, ...).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .states import SQRT1_2, H, V, PhotonMode, Polarization, SpatialMode

VACUUM = SpatialMode("vac")


class ElementKind(enum.Enum):
    BEAM_SPLITTER = "bs"
    HALF_WAVE_PLATE = "hwp"
    POLARIZATION_PHASE = "phase"
    POLARIZING_BEAM_SPLITTER = "pbs"


@dataclass(frozen=True)
class Element:
    kind: ElementKind
    inputs: tuple[Optional[SpatialMode], ...]
    outputs: tuple[SpatialMode, ...]
    phase: float = 0.0
    detectors: tuple[int, ...] = ()

    def __post_init__(self):
        n_in, n_out = len(self.inputs), len(self.outputs)
        kind = self.kind
        if kind is ElementKind.BEAM_SPLITTER:
            if (n_in, n_out) != (2, 2):
                raise ValueError(f"beam splitter needs 2 inputs and 2 outputs, got {n_in} and {n_out}")
            if self.inputs[0] is None and self.inputs[1] is None:
                raise ValueError("beam splitter with two vacuum inputs does nothing")
        elif kind in (ElementKind.HALF_WAVE_PLATE, ElementKind.POLARIZATION_PHASE):
            if (n_in, n_out) != (1, 1):
                raise ValueError(f"{kind.value} needs 1 input and 1 output, got {n_in} and {n_out}")
        elif kind is ElementKind.POLARIZING_BEAM_SPLITTER:
            if (n_in, n_out) != (1, 2):
                raise ValueError(f"pbs needs 1 input and 2 outputs, got {n_in} and {n_out}")
            if len(self.detectors) != 2 or any(d < 1 for d in self.detectors):
                raise ValueError("pbs needs two positive detector indices")
        if kind is not ElementKind.BEAM_SPLITTER and any(m is None for m in self.inputs):
            raise ValueError(f"{kind.value} has no vacuum port")
        if kind is not ElementKind.POLARIZATION_PHASE and self.phase != 0.0:
            raise ValueError("only phase elements carry a phase")
        if not math.isfinite(self.phase):
            raise ValueError("phase must be finite")

    @property
    def consumed(self) -> tuple[SpatialMode, ...]:
        return tuple(m for m in self.inputs if m is not None)


def beam_splitter(in1: Optional[SpatialMode | str], in2: Optional[SpatialMode | str],
                  out1: SpatialMode | str, out2: SpatialMode | str) -> Element:
    """50/50 beam splitter; pass ``None`` for a vacuum input port."""
    return Element(ElementKind.BEAM_SPLITTER, (_sm(in1), _sm(in2)), (_sm(out1), _sm(out2)))


def half_wave_plate(src: SpatialMode | str, dst: SpatialMode | str) -> Element:
    return Element(ElementKind.HALF_WAVE_PLATE, (_sm(src),), (_sm(dst),))


def polarization_phase(phase: float, src: SpatialMode | str, dst: SpatialMode | str) -> Element:
    return Element(ElementKind.POLARIZATION_PHASE, (_sm(src),), (_sm(dst),), phase=float(phase))


def polarizing_beam_splitter(src: SpatialMode | str, transmit: int, reflect: int) -> Element:
    return Element(
        ElementKind.POLARIZING_BEAM_SPLITTER,
        (_sm(src),),
        (detector_port(transmit), detector_port(reflect)),
        detectors=(int(transmit), int(reflect)),
    )


def detector_port(index: int) -> SpatialMode:
    return SpatialMode(f"D{index}")


def _sm(m):
    if m is None or isinstance(m, SpatialMode):
        return m
    return SpatialMode(m)


def element_matrix(e: Element) -> tuple[np.ndarray, list[PhotonMode], list[PhotonMode]]:
    """Transfer matrix of ``e`` as ``(M, rows, cols)`` with ``M[row, col]``.

    Columns are input photon modes, rows output photon modes.  A vacuum
    beam-splitter port appears as a column on the placeholder mode ``vac`` so
    the matrix stays square and unitary.
    """
    kind = e.kind
    if kind is ElementKind.BEAM_SPLITTER:
        ins = [m if m is not None else VACUUM for m in e.inputs]
        cols = [PhotonMode(s, p) for s in ins for p in (H, V)]
        rows = [PhotonMode(s, p) for s in e.outputs for p in (H, V)]
        hadamard = np.array([[1.0, 1.0], [1.0, -1.0]]) * SQRT1_2
        return np.kron(hadamard, np.eye(2)).astype(complex), rows, cols
    if kind is ElementKind.HALF_WAVE_PLATE:
        (src,), (dst,) = e.inputs, e.outputs
        cols = [PhotonMode(src, H), PhotonMode(src, V)]
        rows = [PhotonMode(dst, H), PhotonMode(dst, V)]
        return np.array([[0, 1], [1, 0]], dtype=complex), rows, cols
    if kind is ElementKind.POLARIZATION_PHASE:
        (src,), (dst,) = e.inputs, e.outputs
        cols = [PhotonMode(src, H), PhotonMode(src, V)]
        rows = [PhotonMode(dst, H), PhotonMode(dst, V)]
        return np.diag([1.0, np.exp(1j * e.phase)]).astype(complex), rows, cols
    (src,), (t, r) = e.inputs, e.outputs
    cols = [PhotonMode(src, H), PhotonMode(src, V)]
    rows = [PhotonMode(t, H), PhotonMode(r, V)]
    return np.eye(2, dtype=complex), rows, cols


@dataclass(frozen=True)
class Diagnostic:
    message: str
    element: Optional[int] = None
    mode: Optional[str] = None

    def __str__(self) -> str:
        where = f"element {self.element}: " if self.element is not None else ""
        return where + self.message


@dataclass(frozen=True)
class Circuit:
    """A named, topologically ordered element list.

    ``taps`` are ``(name, index)`` cuts taken after ``elements[index]``.
    """

    name: str
    elements: tuple[Element, ...]
    input_modes: tuple[SpatialMode, ...]
    taps: tuple[tuple[str, int], ...] = field(default=())

    @cached_property
    def detector_map(self) -> dict[PhotonMode, int]:
        """PBS input photon mode -> detector index."""
        out = {}
        for e in self.elements:
            if e.kind is ElementKind.POLARIZING_BEAM_SPLITTER:
                (src,) = e.inputs
                out[PhotonMode(src, H)] = e.detectors[0]
                out[PhotonMode(src, V)] = e.detectors[1]
        return out

    @property
    def detectors(self) -> list[int]:
        return sorted(set(self.detector_map.values()))

    @property
    def n_detectors(self) -> int:
        return len(self.detectors)

    def tap_index(self, name: str) -> int:
        for tap, idx in self.taps:
            if tap == name:
                return idx
        raise KeyError(f"circuit {self.name!r} has no tap {name!r}")


def validate(c: Circuit) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    producer: dict[SpatialMode, int] = {}
    consumer: dict[SpatialMode, int] = {}
    for m in c.input_modes:
        if m in producer:
            diags.append(Diagnostic(f"input mode {m} declared more than once", None, m.name))
        producer[m] = -1
    for idx, e in enumerate(c.elements):
        for m in e.consumed:
            if m in consumer:
                diags.append(Diagnostic(
                    f"mode {m} consumed more than once (elements {consumer[m]} and {idx})", idx, m.name))
                continue
            consumer[m] = idx
            if m not in producer:
                diags.append(Diagnostic(f"mode {m} is consumed before it is produced", idx, m.name))
            elif _is_detector_port(c, producer[m], m):
                diags.append(Diagnostic(f"detector port {m} cannot feed another element", idx, m.name))
        for m in e.outputs:
            if m in producer:
                # two PBS sharing a detector port: reported below as a duplicate index
                if not (e.kind is ElementKind.POLARIZING_BEAM_SPLITTER and _is_detector_port(c, producer[m], m)):
                    diags.append(Diagnostic(f"mode {m} produced more than once", idx, m.name))
                continue
            producer[m] = idx
    for m, idx in producer.items():
        if m in consumer or _is_detector_port(c, idx, m):
            continue
        diags.append(Diagnostic(f"terminal mode {m} is not bound to a detector", idx if idx >= 0 else None, m.name))

    seen: dict[int, int] = {}
    for idx, e in enumerate(c.elements):
        if e.kind is not ElementKind.POLARIZING_BEAM_SPLITTER:
            continue
        if e.detectors[0] == e.detectors[1]:
            diags.append(Diagnostic(f"detector D{e.detectors[0]} bound twice on one pbs", idx, f"D{e.detectors[0]}"))
            continue
        for d in e.detectors:
            if d in seen:
                diags.append(Diagnostic(f"duplicate detector index D{d} (elements {seen[d]} and {idx})", idx, f"D{d}"))
            seen[d] = idx
    if seen and sorted(seen) != list(range(1, len(seen) + 1)):
        diags.append(Diagnostic(f"detector indices {sorted(seen)} are not contiguous from 1"))

    names = set()
    for tap, idx in c.taps:
        if tap in names:
            diags.append(Diagnostic(f"duplicate tap {tap!r}"))
        names.add(tap)
        if not 0 <= idx < len(c.elements):
            diags.append(Diagnostic(f"tap {tap!r} cuts after missing element {idx}"))
    return diags


def _is_detector_port(c: Circuit, producer_idx: int, m: SpatialMode) -> bool:
    if producer_idx < 0:
        return False
    return c.elements[producer_idx].kind is ElementKind.POLARIZING_BEAM_SPLITTER


def infer_input_modes(elements: Sequence[Element]) -> tuple[SpatialMode, ...]:
    """Modes consumed but never produced, in order of first consumption."""
    produced = {m for e in elements for m in e.outputs}
    out: list[SpatialMode] = []
    for e in elements:
        for m in e.consumed:
            if m not in produced and m not in out:
                out.append(m)
    return tuple(out)


def _a_side() -> list[Element]:
    return [
        beam_splitter("a'", "b'", "a", "b"),
        beam_splitter("a", None, "c", "d"),
        half_wave_plate("c", "c_H"),
        beam_splitter("c_H", "d", "e", "f"),
    ]


_A_TAPS = (("after_bs1", 0), ("after_bs2", 1), ("after_hwp", 2))


def build_symmetry_broken() -> Circuit:
    """The scheme where only the ``a`` output passes the second interferometer."""
    elements = _a_side() + [
        polarizing_beam_splitter("e", 1, 2),
        polarizing_beam_splitter("f", 4, 3),
        polarizing_beam_splitter("b", 6, 5),
    ]
    return Circuit("symmetry_broken", tuple(elements), (SpatialMode("a'"), SpatialMode("b'")), _A_TAPS)


def build_symmetric() -> Circuit:
    """Both outputs of the first beam splitter pass identical-looking stages."""
    elements = _a_side() + [
        beam_splitter(None, "b", "c'", "d'"),
        half_wave_plate("c'", "c'_H"),
        beam_splitter("d'", "c'_H", "f'", "e'"),
        polarizing_beam_splitter("e", 1, 2),
        polarizing_beam_splitter("f", 4, 3),
        polarizing_beam_splitter("e'", 8, 7),
        polarizing_beam_splitter("f'", 5, 6),
    ]
    taps = _A_TAPS + (("after_hwp_b", 5),)
    return Circuit("symmetric", tuple(elements), (SpatialMode("a'"), SpatialMode("b'")), taps)


SCHEMES = {"broken": build_symmetry_broken, "symmetric": build_symmetric}


def circuit_to_dict(c: Circuit) -> dict:
    """JSON-ready structure mirroring the DSL."""
    elements = []
    for e in c.elements:
        item = {"kind": e.kind.value,
                "inputs": [m.name if m is not None else "vac" for m in e.inputs]}
        if e.kind is ElementKind.POLARIZING_BEAM_SPLITTER:
            item["detectors"] = list(e.detectors)
        else:
            item["outputs"] = [m.name for m in e.outputs]
        if e.kind is ElementKind.POLARIZATION_PHASE:
            item["phase"] = e.phase
        elements.append(item)
    return {
        "name": c.name,
        "inputs": [m.name for m in c.input_modes],
        "elements": elements,
        "taps": [{"name": t, "after": i} for t, i in c.taps],
        "detector_map": {str(m): d for m, d in sorted(c.detector_map.items(), key=lambda kv: kv[1])},
    }


__all__ = [
    "Circuit", "Diagnostic", "Element", "ElementKind", "Polarization", "SCHEMES", "VACUUM",
    "beam_splitter", "build_symmetric", "build_symmetry_broken", "circuit_to_dict",
    "detector_port", "element_matrix", "half_wave_plate", "infer_input_modes",
    "polarization_phase", "polarizing_beam_splitter", "validate",
]
