import numpy as np
import pytest

from carleman_lab.errors import ParamOutOfRangeError, UnknownFixtureError
from carleman_lab.fixtures import (
    BUILDERS,
    damped_oscillator,
    fixture,
    kinetic_energy,
    oscillator_network,
    potential_energy,
    scalar,
    subset_kinetic_energy,
    total_energy,
)
from carleman_lab.jsonio import system_from_json, system_to_json
from carleman_lab.system import integrate_reference


class TestBuilders:
    def test_damped_oscillator_layout(self):
        fx = damped_oscillator(r=1.0, n=0.5)
        assert np.allclose(fx.system.f1, [[0.0, 1.0], [-1.0, -1.0]])
        assert np.allclose(fx.system.f2, [[0, 0, 0, 0], [-0.5, 0, 0, 0]])

    def test_scalar_without_nonlinearity(self):
        fx = scalar(a=-1.0, b=0.0)
        assert np.count_nonzero(fx.system.f2) == 0

    def test_unknown_name(self):
        with pytest.raises(UnknownFixtureError):
            fixture("does_not_exist")

    def test_bad_parameter(self):
        with pytest.raises(ParamOutOfRangeError):
            fixture("damped_oscillator", r=-1.0)

    def test_unknown_parameter(self):
        with pytest.raises(ParamOutOfRangeError):
            fixture("scalar", nonsense=3)

    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_defaults_build(self, name):
        fx = fixture(name)
        assert fx.system.n == fx.x0.size
        assert fx.horizon > 0

    @pytest.mark.parametrize("name", sorted(BUILDERS))
    def test_json_round_trip(self, name):
        fx = fixture(name)
        back = system_from_json(system_to_json(fx.system))
        assert np.array_equal(back.f0, fx.system.f0)
        assert np.array_equal(back.f1, fx.system.f1)
        assert np.array_equal(back.f2, fx.system.f2)


class TestOscillatorNetwork:
    def test_incidence_factorization_exact(self):
        fx = oscillator_network(n=4, topology="chain")
        bg, lg = fx.extras["b_g"], fx.extras["l_g"]
        assert np.max(np.abs(bg @ bg.T - lg)) <= 1e-14
        # chain Laplacian has the expected diagonal
        assert np.allclose(np.diag(lg), [1.0, 2.0, 2.0, 1.0])

    def test_linear_energy_conserved(self):
        fx = oscillator_network(n=4, w=0.0)
        traj = integrate_reference(
            fx.system, fx.x0, np.linspace(0, 10, 21), 1e-12, 1e-12
        )
        energies = [total_energy(s, 4) for s in traj.states]
        assert max(abs(e - energies[0]) for e in energies) <= 1e-9

    def test_energy_splits(self):
        fx = oscillator_network(n=3)
        z = fx.x0
        assert kinetic_energy(z, 3) + potential_energy(z, 3) == pytest.approx(
            total_energy(z, 3)
        )
        assert subset_kinetic_energy(z, range(3)) == pytest.approx(kinetic_energy(z, 3))

    def test_ring_topology(self):
        fx = oscillator_network(n=4, topology="ring")
        assert np.allclose(np.diag(fx.extras["l_g"]), 2.0)

    def test_modulation_frequency_covers_spectrum(self):
        fx = oscillator_network(n=4, w=1e-3)
        lams = np.linalg.eigvals(fx.system.f1)
        assert np.max(np.abs(lams.imag)) <= fx.extras["omega"] / 4 + 1e-12
