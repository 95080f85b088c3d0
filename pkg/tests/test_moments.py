import numpy as np
import pytest

from tomolens.decoherence import AMPLITUDE_DECAY, ChannelConfig, evolve
from tomolens.errors import MissingOrder, OrderTooHigh
from tomolens.fock import TwoModeDensityMatrix
from tomolens.moments import (
    SOURCE_FOCK_ORACLE,
    extract_moment,
    extract_moment_two_mode,
    extraction_constant,
    moment_table,
    oracle_moment,
    oracle_moment_two_mode,
    two_mode_moment_table,
)
from tomolens.states import (
    make_cat,
    make_coherent,
    make_fock,
    make_product,
    make_squeezed,
    make_two_mode,
)


def test_extraction_constant():
    assert extraction_constant(0, 0) == pytest.approx(1.0)
    assert extraction_constant(1, 1) == pytest.approx(1.0 / (6.0 * 2.0))
    assert extraction_constant(2, 0) == pytest.approx(2.0 / (6.0 * 2.0))


def test_vacuum_moments_vanish():
    vac = make_coherent(0.0)
    for k, l in ((1, 0), (0, 1), (1, 1), (2, 0), (2, 2)):
        assert abs(extract_moment(vac, k, l)) < 1e-9


def test_coherent_first_moments():
    coh = make_coherent(1.0)
    assert extract_moment(coh, 1, 1) == pytest.approx(1.0, abs=1e-9)
    assert extract_moment(coh, 0, 1) == pytest.approx(1.0, abs=1e-9)


def test_oracle_fock_number():
    assert oracle_moment(make_fock(3), 1, 1) == pytest.approx(3.0, abs=1e-12)


def test_oracle_cat_parity_forbids_mean_field():
    for alpha in (0.5, 1.0, 2.0):
        assert abs(oracle_moment(make_cat(alpha, "even"), 0, 1)) < 1e-12


def test_oracle_squeezed_pair_moment():
    xi = 0.5
    value = oracle_moment(make_squeezed(xi), 0, 2)
    assert value == pytest.approx(-np.sinh(xi) * np.cosh(xi), abs=1e-9)
    assert value == pytest.approx(-0.587, abs=1e-3)


CATALOG = [
    ("coherent", lambda: make_coherent(1.0)),
    ("coherent-complex", lambda: make_coherent(0.7 + 0.2j)),
    ("ecs", lambda: make_cat(1.0 / np.sqrt(2.0), "even")),
    ("ocs", lambda: make_cat(1.0, "odd")),
    ("yurke-stoler", lambda: make_cat(1.0 / np.sqrt(2.0), "yurke-stoler")),
    ("squeezed-vacuum", lambda: make_squeezed(0.5)),
    ("yuen", lambda: make_squeezed(0.5, "one")),
    ("fock-3", lambda: make_fock(3)),
]


@pytest.mark.parametrize("name,builder", CATALOG, ids=[c[0] for c in CATALOG])
def test_single_mode_oracle_equivalence(name, builder):
    state = builder()
    table = moment_table(state, 4)
    reference = moment_table(state, 4, source=SOURCE_FOCK_ORACLE)
    worst = max(abs(table.entries[key] - reference.entries[key]) for key in table.entries)
    assert worst < 1e-7


def test_two_mode_vacuum_moments_vanish():
    pair = make_product(make_coherent(0.0), make_coherent(0.0))
    assert abs(extract_moment_two_mode(pair, 1, 0, 0, 0)) < 1e-9
    assert abs(extract_moment_two_mode(pair, 1, 1, 1, 1)) < 1e-9


def test_two_mode_product_factorizes():
    pair = make_product(make_coherent(1.0), make_coherent(1.0))
    assert extract_moment_two_mode(pair, 1, 1, 1, 1) == pytest.approx(1.0, abs=1e-8)


def test_two_mode_reduces_to_single_mode():
    pair = make_product(make_cat(0.8, "even"), make_coherent(0.3))
    left = make_cat(0.8, "even")
    for k, l in ((1, 1), (0, 2)):
        two = extract_moment_two_mode(pair, k, l, 0, 0)
        one = extract_moment(left, k, l)
        assert two == pytest.approx(one, abs=1e-8)


def test_caves_schumaker_cross_moment():
    r = 1.0
    state = make_two_mode("caves-schumaker", r)
    value = extract_moment_two_mode(state, 0, 1, 0, 1)
    assert value == pytest.approx(-np.sinh(r) * np.cosh(r), abs=1e-7)
    assert value == pytest.approx(-1.8134, abs=1e-4)


def test_pair_coherent_is_pair_annihilation_eigenstate():
    r = 1.0
    state = make_two_mode("pair-coherent", r)
    assert oracle_moment_two_mode(state, 0, 1, 0, 1) == pytest.approx(r, abs=1e-10)


@pytest.mark.parametrize(
    "name,builder",
    [
        ("caves-schumaker", lambda: make_two_mode("caves-schumaker", 1.0)),
        ("pair-coherent", lambda: make_two_mode("pair-coherent", 1.0)),
        ("ecs-x-vacuum", lambda: make_product(make_cat(1.0, "even"), make_coherent(0.0))),
    ],
)
def test_two_mode_oracle_equivalence(name, builder):
    state = builder()
    table = two_mode_moment_table(state, 2)
    worst = max(
        abs(value - oracle_moment_two_mode(state, *key)) for key, value in table.entries.items()
    )
    assert worst < 1e-6


def test_mixed_decohered_state_table_invariants():
    pair = make_product(make_cat(1.0, "even"), make_coherent(0.0))
    rho = TwoModeDensityMatrix.from_pure(pair)
    mixed = evolve(rho, ChannelConfig(AMPLITUDE_DECAY), 0.4)
    table = two_mode_moment_table(mixed, 2).validate()
    assert table.entries[(0, 0, 0, 0)] == pytest.approx(1.0, abs=1e-9)
    assert table.hermiticity_defect() < 1e-8
    worst = max(
        abs(value - oracle_moment_two_mode(mixed, *key)) for key, value in table.entries.items()
    )
    assert worst < 1e-6


def test_phase_count_is_load_bearing():
    # With fewer than k+l+1 phases the roots-of-unity cancellation breaks;
    # a coherent state exposes it ((2,0) comes out 4/3 instead of 1).  The
    # vacuum is blind to the defect: every H_{k+l} integral vanishes by
    # orthogonality, so its (2,0) stays zero even with too few phases.
    coh = make_coherent(1.0)
    good = extract_moment(coh, 2, 0)
    bad = extract_moment(coh, 2, 0, _n_phases=2)
    assert good == pytest.approx(1.0, abs=1e-9)
    assert abs(bad - good) > 0.1
    vac = make_coherent(0.0)
    assert abs(extract_moment(vac, 2, 0, _n_phases=2)) < 1e-9


def test_moment_table_validation_and_errors():
    table = moment_table(make_coherent(0.6), 2).validate()
    assert table.hermiticity_defect() < 1e-8
    with pytest.raises(MissingOrder):
        table.get(3, 1)
    with pytest.raises(OrderTooHigh):
        extract_moment(make_coherent(0.6), 4, 3)
    with pytest.raises(OrderTooHigh):
        moment_table(make_coherent(0.6), 7)


def test_reduced_mode_extraction():
    state = make_two_mode("caves-schumaker", 1.0)
    expected = np.sinh(1.0) ** 2
    assert extract_moment(state, 1, 1, mode="a") == pytest.approx(expected, abs=1e-7)
    assert oracle_moment(state, 1, 1, mode="a") == pytest.approx(expected, abs=1e-9)
    assert oracle_moment(state, 1, 1, mode="b") == pytest.approx(expected, abs=1e-9)
    with pytest.raises(ValueError):
        extract_moment(state, 1, 1)
