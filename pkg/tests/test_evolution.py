import json
import math

import numpy as np
import pytest
from hypothesis import given, settings

from polbsa.evolution import (
    amplitude_maps,
    brute_force_two_photon,
    coefficient_table,
    evolve_single,
    evolve_to_tap,
    merged_norm,
    permanent,
)
from polbsa.states import BELL_STATES, BellState, SpatialMode, mode

from random_circuits import two_input_circuits
from reference_values import (
    BROKEN_COEFFS,
    BROKEN_MAPS,
    COEFF_UNIT,
    MAP_UNIT,
    PRINTED_BROKEN_C1,
    SYMMETRIC_COEFFS,
    SYMMETRIC_MAPS,
)

R = 1 / math.sqrt(2)
H4 = 1 / (4 * math.sqrt(2))


def _as_dict(state):
    return {str(m): a for m, a in state.entries.items()}


def test_evolve_single_h_a(broken):
    out = _as_dict(evolve_single(broken, mode("H@a'")))
    expected = {"H@e": 0.5 * R, "V@e": 0.5 * R, "V@f": 0.5 * R, "H@f": -0.5 * R, "H@b": R}
    assert out.keys() == expected.keys()
    for k, v in expected.items():
        assert abs(out[k] - v) <= 1e-12


def test_evolve_single_v_b(broken):
    out = _as_dict(evolve_single(broken, mode("V@b'")))
    expected = {"H@e": 0.5 * R, "V@e": 0.5 * R, "V@f": -0.5 * R, "H@f": 0.5 * R, "V@b": -R}
    assert out.keys() == expected.keys()
    for k, v in expected.items():
        assert abs(out[k] - v) <= 1e-12


def test_evolve_single_symmetric_h_a(symmetric):
    t = coefficient_table(symmetric)
    np.testing.assert_allclose(t.rows[0].real, np.array([1, 1, 1, -1, -1, 1, -1, -1]) * COEFF_UNIT, atol=1e-12)


def test_evolve_single_rejects_unknown_input(broken):
    with pytest.raises(ValueError):
        evolve_single(broken, mode("H@zz"))


@pytest.mark.parametrize("name,reference", [("broken", BROKEN_COEFFS), ("symmetric", SYMMETRIC_COEFFS)])
def test_coefficient_tables(name, reference, broken, symmetric):
    table = coefficient_table(broken if name == "broken" else symmetric)
    expected = np.array(reference, dtype=float) * COEFF_UNIT
    assert table.rows.shape == expected.shape
    assert np.max(np.abs(table.rows - expected)) <= 1e-12


def test_broken_c1_first_entry_regression(broken):
    # A widely reproduced printing of this table gives -1 for row 1 detector 1;
    # propagation and the detector-space expansion of the input both demand +1.
    table = coefficient_table(broken)
    assert table.coefficient(1, 1) == pytest.approx(COEFF_UNIT, abs=1e-12)
    assert PRINTED_BROKEN_C1[0] * COEFF_UNIT != pytest.approx(table.coefficient(1, 1).real)
    assert PRINTED_BROKEN_C1[1:] == BROKEN_COEFFS[0][1:]


def test_coefficient_rows_orthonormal(scheme):
    rows = coefficient_table(scheme).rows
    np.testing.assert_allclose(rows.conj() @ rows.T, np.eye(4), atol=1e-12)


@pytest.mark.parametrize("name,reference", [("broken", BROKEN_MAPS), ("symmetric", SYMMETRIC_MAPS)])
@pytest.mark.parametrize("state", BELL_STATES, ids=lambda s: s.value)
def test_amplitude_maps_match_reference(name, reference, state, broken, symmetric):
    got = amplitude_maps(broken if name == "broken" else symmetric)[state]
    expected = {k: v * MAP_UNIT for k, v in reference[state.value].items()}
    assert set(got.keys()) == set(expected)
    for k, v in expected.items():
        assert abs(got[k] - v) <= 1e-12


@pytest.mark.parametrize("state", BELL_STATES, ids=lambda s: s.value)
def test_oracle_matches_combiner(scheme, state):
    assert brute_force_two_photon(scheme, state).isclose(amplitude_maps(scheme)[state], tol=1e-12)


def test_merged_normalization(scheme):
    for m in amplitude_maps(scheme).values():
        assert merged_norm(m.entries) == pytest.approx(1.0, abs=1e-12)


def test_permanent_small():
    assert permanent(np.array([[1, 2], [3, 4]])) == 10
    assert permanent(np.zeros((0, 0))) == 1


def test_psi_minus_after_first_bs(broken):
    tap = evolve_to_tap(broken, BellState.PSI_MINUS, "after_bs1")
    assert tap["H@a", "V@b"] == pytest.approx(-R, abs=1e-12)
    assert tap["V@a", "H@b"] == pytest.approx(R, abs=1e-12)
    assert len(tap.entries) == 2


def test_phi_plus_after_second_bs(broken):
    tap = evolve_to_tap(broken, BellState.PHI_PLUS, "after_bs2")
    assert tap["H@c", "H@d"] == pytest.approx(2 * H4, abs=1e-12)
    assert tap["H@d", "H@c"] == tap["H@c", "H@d"]
    assert tap["H@b", "H@b"] == pytest.approx(-2 * H4, abs=1e-12)


def test_phi_minus_after_hwp(broken):
    tap = evolve_to_tap(broken, BellState.PHI_MINUS, "after_hwp")
    expected = {("H@b", "H@b"): -2, ("V@b", "V@b"): 2, ("H@c_H", "H@c_H"): -1, ("V@c_H", "V@c_H"): 1,
                ("H@d", "H@d"): 1, ("V@d", "V@d"): -1, ("H@c_H", "V@d"): -2, ("V@c_H", "H@d"): 2}
    assert len(tap.entries) == len(expected)
    for k, v in expected.items():
        assert tap[k] == pytest.approx(v * H4, abs=1e-12)


def test_bunching_after_first_bs(broken):
    for state in BELL_STATES:
        tap = evolve_to_tap(broken, state, "after_bs1")
        same_port = [x.spatial == y.spatial for x, y in tap.entries]
        if state is BellState.PSI_MINUS:
            assert not any(same_port)
        else:
            assert all(same_port)
        assert tap.norm() == pytest.approx(1.0, abs=1e-12)


def _swap_ports(tap, a, b):
    swap = {SpatialMode(a): SpatialMode(b), SpatialMode(b): SpatialMode(a)}
    out = {}
    for (x, y), amp in tap.entries.items():
        x2 = type(x)(swap.get(x.spatial, x.spatial), x.pol)
        y2 = type(y)(swap.get(y.spatial, y.spatial), y.pol)
        key = (x2, y2) if x2.sort_key() <= y2.sort_key() else (y2, x2)
        out[key] = amp
    return out


@pytest.mark.parametrize("state,sign", [(BellState.PHI_PLUS, 1), (BellState.PHI_MINUS, -1)])
def test_exchange_symmetry_after_hwp(broken, state, sign):
    tap = evolve_to_tap(broken, state, "after_hwp")
    inner = {"c_H", "d"}
    part = {k: a for k, a in tap.entries.items() if {k[0].spatial.name, k[1].spatial.name} <= inner}
    assert part
    swapped = _swap_ports(type(tap)(tap.tap, tap.state, part), "c_H", "d")
    assert swapped.keys() == part.keys()
    for k, a in part.items():
        assert swapped[k] == pytest.approx(sign * a, abs=1e-12)


def test_unknown_tap(broken):
    with pytest.raises(KeyError):
        evolve_to_tap(broken, BellState.PSI_PLUS, "nowhere")


@settings(max_examples=60, deadline=None)
@given(two_input_circuits)
def test_random_circuit_maps_normalized(c):
    for state in BELL_STATES:
        combined = amplitude_maps(c)[state]
        assert merged_norm(combined.entries) == pytest.approx(1.0, abs=1e-12)
        assert brute_force_two_photon(c, state).isclose(combined, tol=1e-12)


def test_json_export_round_trips(broken):
    doc = json.loads(json.dumps(amplitude_maps(broken)[BellState.PSI_PLUS].to_dict()))
    assert doc["state"] == "psi_plus"
    assert doc["entries"]["(5,6)"]["re"] == pytest.approx(-4 * MAP_UNIT)
    table = json.loads(json.dumps(coefficient_table(broken).to_dict()))
    assert table["inputs"] == ["H@a'", "H@b'", "V@a'", "V@b'"]
    assert len(table["rows"]) == 4 and len(table["rows"][0]) == 6
