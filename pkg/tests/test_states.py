import itertools
import json
import math

import pytest

from polbsa import _fmt
from polbsa.states import (
    ARM_A,
    ARM_B,
    BELL_STATES,
    BellState,
    LocalOp,
    PhotonMode,
    SinglePhotonState,
    SpatialMode,
    decompose_bell,
    local_transform,
    mode,
)

R = 1 / math.sqrt(2)


def terms(state):
    return [(str(t.first), str(t.second), t.coeff) for t in decompose_bell(state).terms]


def test_psi_minus_decomposition():
    assert terms(BellState.PSI_MINUS) == [("H@a'", "V@b'", pytest.approx(R)), ("V@a'", "H@b'", pytest.approx(-R))]


def test_phi_plus_decomposition():
    assert terms(BellState.PHI_PLUS) == [("H@a'", "H@b'", pytest.approx(R)), ("V@a'", "V@b'", pytest.approx(R))]


@pytest.mark.parametrize("state", BELL_STATES)
def test_decomposition_normalized(state):
    assert sum(abs(t.coeff) ** 2 for t in decompose_bell(state).terms) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("x, y", list(itertools.product(BELL_STATES, repeat=2)))
def test_bell_basis_orthonormal(x, y):
    overlap = decompose_bell(x).inner(decompose_bell(y))
    assert abs(overlap - (1.0 if x is y else 0.0)) <= 1e-12


def test_exchange_turns_psi_plus_into_phi_plus():
    assert local_transform(BellState.PSI_PLUS, ARM_A, LocalOp.POLARIZATION_EXCHANGE) == (BellState.PHI_PLUS, pytest.approx(1.0))


@pytest.mark.parametrize("arm, expected_phase", [(ARM_A, 1.0), (ARM_B, -1.0)])
def test_phase_flip_turns_psi_plus_into_psi_minus(arm, expected_phase):
    # V -> -V on a' flips the V_a'H_b' term; on b' it flips H_a'V_b'
    state, phase = local_transform(BellState.PSI_PLUS, arm, LocalOp.POLARIZATION_PHASE_FLIP)
    assert state is BellState.PSI_MINUS
    assert phase == pytest.approx(expected_phase)


def test_both_turns_psi_plus_into_phi_minus():
    state, _ = local_transform(BellState.PSI_PLUS, ARM_A, LocalOp.BOTH)
    assert state is BellState.PHI_MINUS


def _compose(state, ops, arm=ARM_A):
    phase = 1.0
    for op in ops:
        state, g = local_transform(state, arm, op)
        phase *= g
    return state, phase


def test_each_operation_twice_is_identity():
    ops = [LocalOp.POLARIZATION_EXCHANGE, LocalOp.POLARIZATION_EXCHANGE,
           LocalOp.POLARIZATION_PHASE_FLIP, LocalOp.POLARIZATION_PHASE_FLIP]
    state, phase = _compose(BellState.PSI_MINUS, ops)
    assert state is BellState.PSI_MINUS
    assert phase == pytest.approx(1.0)


def test_combined_operation_squared_is_minus_identity():
    # flip after exchange does not commute: (ZX)^2 = -1
    state, phase = _compose(BellState.PSI_MINUS, [LocalOp.BOTH, LocalOp.BOTH])
    assert state is BellState.PSI_MINUS
    assert phase == pytest.approx(-1.0)


@pytest.mark.parametrize("op", list(LocalOp))
@pytest.mark.parametrize("arm", [ARM_A, ARM_B])
def test_local_transform_is_bijection(op, arm):
    images = {local_transform(s, arm, op)[0] for s in BELL_STATES}
    assert images == set(BELL_STATES)


def test_exchange_label_map_is_involution():
    op = LocalOp.POLARIZATION_EXCHANGE
    mapping = {s: local_transform(s, ARM_A, op)[0] for s in BELL_STATES}
    assert mapping[BellState.PSI_PLUS] is BellState.PHI_PLUS
    assert mapping[BellState.PSI_MINUS] is BellState.PHI_MINUS
    assert all(mapping[mapping[s]] is s for s in BELL_STATES)


def test_local_transform_rejects_other_arm():
    with pytest.raises(ValueError):
        local_transform(BellState.PSI_PLUS, SpatialMode("c"), LocalOp.BOTH)


def test_mode_ordering_is_canonical():
    modes = [mode("V@b"), mode("H@b"), mode("V@a'"), mode("H@a")]
    assert [str(m) for m in sorted(modes)] == ["H@a", "V@a'", "H@b", "V@b"]


def test_mode_label_round_trip():
    m = PhotonMode.parse("V@c'_H")
    assert str(m) == "V@c'_H"
    with pytest.raises(ValueError):
        PhotonMode.parse("X@a")


def test_single_photon_state_requires_normalization():
    with pytest.raises(ValueError):
        SinglePhotonState({mode("H@a"): 0.5})
    s = SinglePhotonState({mode("V@b"): R, mode("H@a"): -R})
    assert [str(m) for m in s.modes()] == ["H@a", "V@b"]
    assert s[mode("H@b")] == 0


def test_json_records_use_17_digits_in_canonical_order():
    s = SinglePhotonState({mode("V@b"): R, mode("H@a"): -R})
    text = _fmt.dumps(s.to_records())
    assert "-0.70710678118654746" in text or "-0.70710678118654757" in text
    data = json.loads(text)
    assert [r["mode"] for r in data] == ["H@a", "V@b"]
    bell = json.loads(_fmt.dumps(decompose_bell(BellState.PSI_MINUS).to_records()))
    assert bell[1]["modes"] == ["V@a'", "H@b'"]
    assert bell[1]["re"] == pytest.approx(-R, abs=0)


@pytest.mark.parametrize("label, state", [("psi-", BellState.PSI_MINUS), ("phi_plus", BellState.PHI_PLUS),
                                          ("PSI_PLUS", BellState.PSI_PLUS)])
def test_state_labels(label, state):
    assert BellState.from_label(label) is state
