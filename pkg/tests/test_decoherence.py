import numpy as np
import pytest

from tomolens.beamsplitter import BeamsplitterConfig, apply
from tomolens.decoherence import (
    AMPLITUDE_DECAY,
    PHASE_DAMPING,
    ChannelConfig,
    default_time_grid,
    evolve,
    evolve_amplitude,
    evolve_phase,
    master_equation_residual,
    mean_total_photon,
    purity,
)
from tomolens.fock import TwoModeDensityMatrix, TwoModeState, fidelity_with_pure
from tomolens.states import make_cat, make_coherent, make_pacs, make_product
from tomolens.tomography import default_grid, tomogram_mixed, tomogram_pure

AMP = ChannelConfig(AMPLITUDE_DECAY, 1.0, 1.0)
PHASE = ChannelConfig(PHASE_DAMPING, 1.0, 1.0)


def fock_pair_projector(n, m, dim=10):
    c = np.zeros((dim, dim), dtype=complex)
    c[n, m] = 1.0
    return TwoModeDensityMatrix.from_pure(TwoModeState(c))


def beamsplitter_output(kind="even", alpha=1.0, m=1):
    if kind == "pacs":
        left = make_pacs(alpha, m)
    else:
        left = make_cat(alpha, kind)
    out = apply(BeamsplitterConfig(0.0), make_product(left, make_coherent(0.0)))
    return TwoModeDensityMatrix.from_pure(out)


def test_channel_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig("thermal")
    with pytest.raises(ValueError):
        ChannelConfig(AMPLITUDE_DECAY, rate_c=0.0)
    with pytest.raises(ValueError):
        ChannelConfig(AMPLITUDE_DECAY, times=(2.0, 1.0))


def test_vacuum_is_fixed_point_of_both_channels():
    vac = fock_pair_projector(0, 0, dim=4)
    for cfg in (AMP, PHASE):
        evolved = evolve(vac, cfg, 2.5)
        assert np.max(np.abs(evolved.entries - vac.entries)) < 1e-14


def test_single_photon_population_transfer():
    rho = fock_pair_projector(1, 0)
    t = 0.7
    evolved = evolve_amplitude(rho, AMP, t)
    assert evolved.entries[1, 1, 0, 0].real == pytest.approx(np.exp(-2 * t), abs=1e-12)
    assert evolved.entries[0, 0, 0, 0].real == pytest.approx(1 - np.exp(-2 * t), abs=1e-12)
    assert evolved.trace() == pytest.approx(1.0, abs=1e-12)


def test_asymmetric_rates():
    rho = fock_pair_projector(1, 1)
    cfg = ChannelConfig(AMPLITUDE_DECAY, rate_c=2.0, rate_d=0.5)
    t = 0.3
    evolved = evolve_amplitude(rho, cfg, t)
    assert evolved.entries[1, 1, 1, 1].real == pytest.approx(
        np.exp(-2 * 2.0 * t) * np.exp(-2 * 0.5 * t), abs=1e-12
    )


def test_long_time_amplitude_decay_reaches_vacuum():
    rho = beamsplitter_output("even")
    final = evolve_amplitude(rho, AMP, 20.0)
    vacuum = make_product(make_coherent(0.0), make_coherent(0.0))
    assert fidelity_with_pure(final, vacuum) > 1.0 - 1e-8
    assert purity(final) > 1.0 - 1e-8


def test_trace_and_hermiticity_preserved_throughout():
    rho = beamsplitter_output("odd")
    for cfg in (AMP, PHASE):
        for t in (0.05, 0.4, 2.0, 10.0):
            evolved = evolve(rho, cfg, t)
            assert abs(evolved.trace() - 1.0) < 1e-9
            assert evolved.hermiticity_defect() < 1e-12
            assert 0.0 < purity(evolved) <= 1.0 + 1e-10


def test_purity_extremes():
    pure = fock_pair_projector(2, 1, dim=5)
    assert purity(pure) == pytest.approx(1.0, abs=1e-12)
    dim = 3
    mixed = np.zeros((dim, dim, dim, dim), dtype=complex)
    for n in range(dim):
        for m in range(dim):
            mixed[n, n, m, m] = 1.0 / dim**2
    assert purity(TwoModeDensityMatrix(mixed)) == pytest.approx(1.0 / dim**2, abs=1e-12)


def test_amplitude_purity_is_nonmonotone():
    rho = beamsplitter_output("even")
    times = default_time_grid(25, 1e-2, 20.0)
    purities = [purity(evolve_amplitude(rho, AMP, t)) for t in times]
    assert min(purities) < 0.95
    assert purities[-1] > 1.0 - 1e-6
    assert purities[0] > min(purities)


def test_purity_minimum_deepens_with_departure_from_coherence():
    times = default_time_grid(25, 1e-2, 5.0)

    def minimum(rho):
        return min(purity(evolve_amplitude(rho, AMP, t)) for t in times)

    assert minimum(beamsplitter_output("pacs", m=5)) < minimum(beamsplitter_output("pacs", m=1))
    assert minimum(beamsplitter_output("odd")) < minimum(beamsplitter_output("even"))


def test_mean_photon_number_decays_exponentially():
    for rho in (
        beamsplitter_output("even"),
        beamsplitter_output("odd"),
        beamsplitter_output("pacs", m=1),
    ):
        n0 = mean_total_photon(rho)
        for t in (0.2, 1.0, 3.0):
            n_t = mean_total_photon(evolve_amplitude(rho, AMP, t))
            assert n_t / (n0 * np.exp(-2.0 * t)) == pytest.approx(1.0, abs=1e-6)


def test_phase_damping_preserves_diagonals_exactly():
    rho = beamsplitter_output("even")
    evolved = evolve_phase(rho, PHASE, 1.7)
    diag0 = np.einsum("nnmm->nm", rho.entries)
    diag1 = np.einsum("nnmm->nm", evolved.entries)
    assert np.max(np.abs(diag0 - diag1)) == 0.0
    assert evolved.trace() == pytest.approx(rho.trace(), abs=1e-14)


def test_phase_damping_elementwise_rates():
    rho = beamsplitter_output("even")
    t = 0.5
    evolved = evolve_phase(rho, PHASE, t)
    mask = np.abs(np.diagonal(rho.entries[2, 0], axis1=0, axis2=1)) > 1e-10
    ratio = (
        np.diagonal(evolved.entries[2, 0], axis1=0, axis2=1)[mask]
        / np.diagonal(rho.entries[2, 0], axis1=0, axis2=1)[mask]
    )
    np.testing.assert_allclose(np.abs(ratio), np.exp(-4.0 * t), atol=1e-12)


def test_phase_damping_purity_saturates_at_diagonal_weight():
    rho = beamsplitter_output("even")
    late = evolve_phase(rho, PHASE, 50.0)
    diag = np.real(np.einsum("nnmm->nm", rho.entries))
    expected = float(np.sum(diag**2))
    assert purity(late) == pytest.approx(expected, abs=1e-12)
    assert expected < 1.0


def test_phase_damping_off_diagonals_decay_monotonically():
    rho = beamsplitter_output("even")
    previous = None
    for t in (0.1, 0.3, 1.0, 3.0):
        evolved = evolve_phase(rho, PHASE, t)
        off = np.abs(evolved.entries).sum() - np.abs(np.einsum("nnmm->nm", evolved.entries)).sum()
        if previous is not None:
            assert off < previous + 1e-12
        previous = off


def test_master_equation_residuals():
    vac = fock_pair_projector(0, 0, dim=4)
    assert master_equation_residual(vac, AMP) < 1e-12
    assert master_equation_residual(vac, PHASE) < 1e-12
    assert master_equation_residual(fock_pair_projector(1, 0), AMP) < 1e-4
    rho = beamsplitter_output("even")
    assert master_equation_residual(rho, AMP) < 1e-4
    assert master_equation_residual(rho, PHASE) < 1e-4
    assert master_equation_residual(fock_pair_projector(2, 1), PHASE) < 1e-4


def test_long_time_tomogram_is_vacuum():
    rho = beamsplitter_output("even")
    final = evolve_amplitude(rho, AMP, 20.0)
    grid = default_grid(final)
    joint = tomogram_mixed(final, 0.4, 1.1, grid, grid)
    vac = make_coherent(0.0).padded(final.n_cut)
    row1 = tomogram_pure(vac, [0.4], grid).values[0]
    row2 = tomogram_pure(vac, [1.1], grid).values[0]
    assert np.max(np.abs(joint.values - np.outer(row1, row2))) < 1e-6


def test_phase_channel_entropy_saturation_depends_on_input():
    from tomolens.metrics import entropy_two_mode

    entropies = {}
    for kind in ("even", "odd"):
        rho = beamsplitter_output(kind)
        late = evolve_phase(rho, PHASE, 10.0)
        grid = default_grid(late)
        entropies[kind] = entropy_two_mode(tomogram_mixed(late, 0.0, 0.0, grid, grid))
    assert abs(entropies["even"] - entropies["odd"]) > 1e-3


def test_decohered_state_keeps_pi_shift_symmetry():
    rho = evolve_phase(beamsplitter_output("even"), PHASE, 0.7)
    grid = default_grid(rho)
    base = tomogram_mixed(rho, 0.4, 1.1, grid, grid)
    shifted = tomogram_mixed(rho, 0.4 + np.pi, 1.1 + np.pi, grid, grid)
    assert np.max(np.abs(shifted.values - base.values[::-1, ::-1])) < 1e-9


def test_two_mode_report_on_mixed_state():
    from tomolens.metrics import two_mode_report

    rho = evolve_amplitude(fock_pair_projector(1, 1, dim=12), AMP, 0.3)
    report = two_mode_report(rho, 0.0, 0.0)
    assert report.eur_satisfied
    assert not report.variance_squeezed
    assert report.reduced_a.eur_satisfied
    assert report.reduced_a.variance == pytest.approx(report.reduced_b.variance, abs=1e-9)
