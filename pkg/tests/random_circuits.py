"""Random valid circuits for round-trip and unitarity properties."""

import random

from hypothesis import strategies as st

from polbsa.circuit import (
    Circuit,
    beam_splitter,
    half_wave_plate,
    infer_input_modes,
    polarization_phase,
    polarizing_beam_splitter,
)

_STYLES = ("m{}", "x{}'", "p_{}", "Q{}''")


def random_circuit(rng: random.Random, max_elements: int = 7, n_inputs: int | None = None) -> Circuit:
    counter = iter(range(10_000))

    def fresh():
        return rng.choice(_STYLES).format(next(counter))

    live = [fresh() for _ in range(n_inputs or rng.randint(1, 3))]
    elements = []
    for _ in range(rng.randint(0, max_elements)):
        kind = rng.choice(["bs", "bs_vac", "hwp", "phase"])
        if kind == "bs" and len(live) >= 2:
            x, y = rng.sample(live, 2)
            for m in (x, y):
                live.remove(m)
            o1, o2 = fresh(), fresh()
            elements.append(beam_splitter(x, y, o1, o2))
            live += [o1, o2]
        elif kind in ("bs", "bs_vac"):
            x = rng.choice(live)
            live.remove(x)
            o1, o2 = fresh(), fresh()
            ports = (x, None) if rng.random() < 0.5 else (None, x)
            elements.append(beam_splitter(*ports, o1, o2))
            live += [o1, o2]
        else:
            x = rng.choice(live)
            live.remove(x)
            o = fresh()
            if kind == "hwp":
                elements.append(half_wave_plate(x, o))
            else:
                elements.append(polarization_phase(rng.uniform(-7.0, 7.0), x, o))
            live.append(o)
    rng.shuffle(live)
    detectors = list(range(1, 2 * len(live) + 1))
    rng.shuffle(detectors)
    for k, m in enumerate(live):
        elements.append(polarizing_beam_splitter(m, detectors[2 * k], detectors[2 * k + 1]))
    taps = []
    for idx in sorted(rng.sample(range(len(elements)), rng.randint(0, min(3, len(elements))))):
        taps.append((f"t{idx}", idx))
    name = rng.choice(["rand", "circuit_x", "c'"])
    return Circuit(name, tuple(elements), infer_input_modes(elements), tuple(taps))


circuits = st.builds(random_circuit, st.randoms(use_true_random=False))
two_input_circuits = st.builds(random_circuit, st.randoms(use_true_random=False), n_inputs=st.just(2))
