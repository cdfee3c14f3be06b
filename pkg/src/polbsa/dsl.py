"""Line-oriented text format (``.loc``) for linear-optics circuits.

::

    circuit symmetry_broken
      bs a' b' -> a b        # Hadamard convention: in2/out2 carry the minus sign
      tap after_bs1
      bs a vac -> c d
      hwp c -> c_H
      phase 3.14159 x -> y   # radians on |V>
      pbs e -> D1 D2         # H transmitted to D1, V reflected to D2

Input modes are the modes consumed but never produced, in order of first use.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .circuit import (
    Circuit,
    Element,
    ElementKind,
    SpatialMode,
    beam_splitter,
    half_wave_plate,
    infer_input_modes,
    polarization_phase,
    polarizing_beam_splitter,
    validate,
)

IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")
DETECTOR = re.compile(r"D([1-9][0-9]*)\Z")
KEYWORDS = ("bs", "hwp", "phase", "pbs", "tap")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str
    span: SourceSpan
    message: str

    def format(self, filename: str = "<input>") -> str:
        return f"{filename}:{self.span.line}:{self.span.column}: {self.severity}: {self.message}"


class DSLError(ValueError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(d.format() for d in diagnostics))


@dataclass(frozen=True)
class _Token:
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[tuple[int, list[_Token]]]:
    lines = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        body = raw.split("#", 1)[0]
        toks = [_Token(m.group(), SourceSpan(lineno, m.start() + 1, len(m.group())))
                for m in re.finditer(r"\S+", body)]
        if toks:
            lines.append((lineno, toks))
    return lines


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.diags: list[ParseDiagnostic] = []
        self.elements: list[Element] = []
        self.element_tokens: list[list[_Token]] = []
        self.taps: list[tuple[str, int]] = []
        self.name: Optional[str] = None
        self.header: Optional[_Token] = None

    def error(self, token_or_span, message: str) -> None:
        span = token_or_span.span if isinstance(token_or_span, _Token) else token_or_span
        self.diags.append(ParseDiagnostic("error", span, message))

    def warn(self, tok: _Token, message: str) -> None:
        self.diags.append(ParseDiagnostic("warning", tok.span, message))

    def ident(self, tok: _Token, what: str, allow_vac: bool = False) -> Optional[str]:
        if tok.text == "vac" and allow_vac:
            return "vac"
        if not IDENT.match(tok.text):
            self.error(tok, f"bad token {tok.text!r}: expected {what}")
            return None
        if tok.text == "vac" or tok.text in KEYWORDS or tok.text == "circuit":
            self.error(tok, f"{tok.text!r} is reserved and cannot name a {what}")
            return None
        return tok.text

    def run(self) -> None:
        lines = _tokenize(self.text)
        if not lines:
            self.error(SourceSpan(1, 1, 0), "no circuit declaration")
            return
        (_, first), rest = lines[0], lines[1:]
        if first[0].text != "circuit":
            self.error(first[0], f"no circuit declaration: expected 'circuit <name>', got {first[0].text!r}")
        else:
            self.header = first[0]
            if len(first) != 2:
                self.error(first[0], "circuit declaration takes exactly one name")
            else:
                self.name = self.ident(first[1], "circuit name")
        if first[0].text != "circuit":
            rest = lines
        for _, toks in rest:
            self.statement(toks)

    def statement(self, toks: list[_Token]) -> None:
        kw = toks[0]
        handler = getattr(self, f"_stmt_{kw.text}", None) if kw.text in KEYWORDS else None
        if kw.text == "circuit":
            self.error(kw, "duplicate circuit declaration")
            return
        if handler is None:
            self.error(kw, f"unknown directive {kw.text!r}")
            return
        handler(toks)

    def _arrow(self, toks: list[_Token], n_in: int, n_out: int, usage: str) -> bool:
        if len(toks) != 2 + n_in + n_out or toks[1 + n_in].text != "->":
            self.error(toks[0], f"wrong arity: expected '{usage}'")
            return False
        return True

    def _add(self, toks: list[_Token], build) -> None:
        try:
            element = build()
        except ValueError as exc:
            self.error(toks[0], str(exc))
            return
        self.elements.append(element)
        self.element_tokens.append(toks)

    def _stmt_bs(self, toks):
        if not self._arrow(toks, 2, 2, "bs <in1|vac> <in2|vac> -> <out1> <out2>"):
            return
        names = [self.ident(toks[1], "input port", True), self.ident(toks[2], "input port", True),
                 self.ident(toks[4], "output mode"), self.ident(toks[5], "output mode")]
        if None in names:
            return
        in1, in2, o1, o2 = (None if n == "vac" else n for n in names)
        self._add(toks, lambda: beam_splitter(in1, in2, o1, o2))

    def _stmt_hwp(self, toks):
        if not self._arrow(toks, 1, 1, "hwp <in> -> <out>"):
            return
        src, dst = self.ident(toks[1], "input mode"), self.ident(toks[3], "output mode")
        if src and dst:
            self._add(toks, lambda: half_wave_plate(src, dst))

    def _stmt_phase(self, toks):
        if len(toks) != 5 or toks[3].text != "->":
            self.error(toks[0], "wrong arity: expected 'phase <radians> <in> -> <out>'")
            return
        try:
            value = float(toks[1].text)
        except ValueError:
            value = math.nan
        if not math.isfinite(value):
            self.error(toks[1], f"bad token {toks[1].text!r}: expected a finite phase in radians")
            return
        src, dst = self.ident(toks[2], "input mode"), self.ident(toks[4], "output mode")
        if not (src and dst):
            return
        if math.isclose(math.remainder(value, 2 * math.pi), 0.0, abs_tol=1e-15):
            self.warn(toks[1], "phase element is the identity")
        self._add(toks, lambda: polarization_phase(value, src, dst))

    def _stmt_pbs(self, toks):
        if not self._arrow(toks, 1, 2, "pbs <in> -> D<transmit> D<reflect>"):
            return
        src = self.ident(toks[1], "input mode")
        dets = []
        for tok in toks[3:5]:
            m = DETECTOR.match(tok.text)
            if not m:
                self.error(tok, f"bad token {tok.text!r}: expected a detector like D1")
                return
            dets.append(int(m.group(1)))
        if src:
            self._add(toks, lambda: polarizing_beam_splitter(src, dets[0], dets[1]))

    def _stmt_tap(self, toks):
        if len(toks) != 2:
            self.error(toks[0], "wrong arity: expected 'tap <name>'")
            return
        name = self.ident(toks[1], "tap name")
        if name is None:
            return
        if not self.elements:
            self.error(toks[0], "tap before any element")
            return
        if any(t == name for t, _ in self.taps):
            self.error(toks[1], f"duplicate tap {name!r}")
            return
        self.taps.append((name, len(self.elements) - 1))

    def semantic(self, circuit: Circuit) -> None:
        for d in validate(circuit):
            self.error(self._locate(d.element, d.mode), d.message)

    def _locate(self, element: Optional[int], mode: Optional[str]) -> SourceSpan:
        if element is not None and 0 <= element < len(self.element_tokens):
            toks = self.element_tokens[element]
            for tok in toks[1:]:
                if tok.text == mode:
                    return tok.span
            return toks[0].span
        if mode is not None:
            for toks in self.element_tokens:
                for tok in toks[1:]:
                    if tok.text == mode:
                        return tok.span
        if self.header is not None:
            return self.header.span
        return SourceSpan(1, 1, 0)


def diagnose(text: str) -> tuple[Optional[Circuit], list[ParseDiagnostic]]:
    """Parse without raising: the circuit (or ``None``) and every diagnostic."""
    p = _Parser(text)
    p.run()
    circuit = None
    if not any(d.severity == "error" for d in p.diags) and p.name is not None:
        circuit = Circuit(p.name, tuple(p.elements), infer_input_modes(p.elements), tuple(p.taps))
        p.semantic(circuit)
        if any(d.severity == "error" for d in p.diags):
            circuit = None
    return circuit, p.diags


def parse(text: str) -> Circuit:
    circuit, diags = diagnose(text)
    if circuit is None:
        raise DSLError([d for d in diags if d.severity == "error"])
    return circuit


def _port(m: Optional[SpatialMode]) -> str:
    return "vac" if m is None else m.name


def serialize(c: Circuit) -> str:
    lines = [f"circuit {c.name}"]
    taps_after: dict[int, list[str]] = {}
    for name, idx in c.taps:
        taps_after.setdefault(idx, []).append(name)
    for idx, e in enumerate(c.elements):
        if e.kind is ElementKind.BEAM_SPLITTER:
            lines.append(f"  bs {_port(e.inputs[0])} {_port(e.inputs[1])} -> {e.outputs[0]} {e.outputs[1]}")
        elif e.kind is ElementKind.HALF_WAVE_PLATE:
            lines.append(f"  hwp {e.inputs[0]} -> {e.outputs[0]}")
        elif e.kind is ElementKind.POLARIZATION_PHASE:
            lines.append(f"  phase {e.phase!r} {e.inputs[0]} -> {e.outputs[0]}")
        else:
            lines.append(f"  pbs {e.inputs[0]} -> D{e.detectors[0]} D{e.detectors[1]}")
        lines.extend(f"  tap {t}" for t in taps_after.get(idx, ()))
    return "\n".join(lines) + "\n"


def load_scheme_file(name: str) -> str:
    """Text of a shipped ``.loc`` file, e.g. ``"symmetry_broken"``."""
    return resources.files("polbsa").joinpath("schemes").joinpath(f"{name}.loc").read_text()
