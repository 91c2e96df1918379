"""PID controller updates and the analytic closed-loop stability oracle."""

import numpy as np
import pytest

from balancebench import numerics as nm
from balancebench import pid, plant, sim
from balancebench.errors import InputError
from balancebench.pid import PidConfig, PidGains, PidState, pid_stability_poly, pid_step
from balancebench.plant import PlantParams

D_NATIVE = 0.01094 * (0.0754 + 0.2) + 0.0754 * 0.2 ** 2
A21 = 0.2 * 9.8 * 0.157 * (0.0754 + 0.2) / D_NATIVE
B2 = 0.2 * 0.157 / D_NATIVE

# The benchmark's four reference gain sets.
GAIN_SETS = [(25.0, 0.8, 0.1), (50.0, 0.8, 0.05), (100.0, 0.8, 0.1), (1000.0, 0.8, 0.05)]


class TestPidStep:
    def test_zero_error_from_reset(self):
        u, st = pid_step(PidGains(50.0, 0.8, 0.05), PidState(), 0.0, 0.01)
        assert u == 0.0
        assert st.prev_error == 0.0 and st.error_sum == 0.0 and st.initialized

    def test_first_step_hand_value(self):
        # kp*e + ki*(e*dt) + kd*(e/dt) = 5 + 0.0008 + 0.5
        u, _ = pid_step(PidGains(50.0, 0.8, 0.05), PidState(), 0.1, 0.01)
        assert abs(u - 5.5008) < 1e-12

    def test_first_step_differences_against_zero(self):
        gains = PidGains(0.0, 0.0, 2.0)
        u, _ = pid_step(gains, PidState(), 0.3, 0.1)
        assert abs(u - 2.0 * 0.3 / 0.1) < 1e-12

    def test_unscaled_mode_hand_value(self):
        # kp*e + ki*e + kd*e with no dt factors on the first step
        u, st = pid_step(PidGains(50.0, 0.8, 0.05), PidState(), 0.1, 0.01, pid.UNSCALED)
        assert abs(u - (5.0 + 0.08 + 0.005)) < 1e-12
        assert st.error_sum == 0.1

    def test_accumulation_across_steps(self):
        gains = PidGains(0.0, 1.0, 0.0)
        st = PidState()
        u1, st = pid_step(gains, st, 0.2, 0.5)
        u2, st = pid_step(gains, st, 0.2, 0.5)
        assert abs(u1 - 0.1) < 1e-15
        assert abs(u2 - 0.2) < 1e-15

    @pytest.mark.parametrize("mode", pid.ACCUMULATION_MODES)
    def test_linearity(self, mode):
        gains = PidGains(3.0, 0.7, 0.2)
        rng = np.random.default_rng(17)
        errors = rng.uniform(-1.0, 1.0, 40)
        alpha = 3.7
        st_a, st_b = PidState(), PidState()
        for e in errors:
            u_a, st_a = pid_step(gains, st_a, float(e), 0.02, mode)
            u_b, st_b = pid_step(gains, st_b, float(alpha * e), 0.02, mode)
            assert abs(u_b - alpha * u_a) < 1e-12 * max(1.0, abs(u_a))

    def test_proportional_channel_ignores_dt(self):
        gains = PidGains(4.0, 0.0, 0.0)
        u_fast, _ = pid_step(gains, PidState(), 0.25, 0.001)
        u_slow, _ = pid_step(gains, PidState(), 0.25, 0.7)
        assert u_fast == u_slow == 1.0

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(InputError):
            pid_step(PidGains(1.0, 0.0, 0.0), PidState(), 0.1, 0.0)

    def test_rejects_unknown_mode(self):
        with pytest.raises(InputError):
            pid_step(PidGains(1.0, 0.0, 0.0), PidState(), 0.1, 0.01, "other")


class TestGainValidation:
    @pytest.mark.parametrize("kwargs", [(-1.0, 0.0, 0.0), (0.0, -0.1, 0.0),
                                        (0.0, 0.0, -2.0), (float("nan"), 0.0, 0.0)])
    def test_rejects_bad_gains(self, kwargs):
        with pytest.raises(InputError):
            PidGains(*kwargs)

    def test_config_validation(self):
        gains = PidGains(1.0, 0.0, 0.0)
        with pytest.raises(InputError):
            PidConfig(gains=gains, accumulation_mode="other")
        with pytest.raises(InputError):
            PidConfig(gains=gains, u_max=0.0)


class TestStabilityPoly:
    def test_reference_gain_coefficients(self):
        ss = plant.build_reduced(PlantParams())
        poly = pid_stability_poly(PidGains(50.0, 0.8, 0.05), ss)
        expected = np.array([1.0, B2 * 0.05, B2 * 50.0 - A21, B2 * 0.8])
        assert np.array_equal(poly, expected)
        # frozen values: s^3 + 0.26041*s^2 + 246.357*s + 4.16661
        assert np.allclose(poly, [1.0, 0.2604133838546356, 246.35668606404142,
                                  4.166614141674169], atol=1e-10)
        assert nm.routh_hurwitz(poly) is True

    def test_small_kp_not_hurwitz(self):
        # B2*kp below A21 leaves a negative s-coefficient
        ss = plant.build_reduced(PlantParams())
        poly = pid_stability_poly(PidGains(2.0, 0.8, 0.05), ss)
        assert poly[2] < 0.0
        assert nm.routh_hurwitz(poly) is False

    def test_zero_ki_is_marginal(self):
        ss = plant.build_reduced(PlantParams())
        poly = pid_stability_poly(PidGains(50.0, 0.0, 0.05), ss)
        assert poly[3] == 0.0
        assert nm.routh_hurwitz(poly) is False

    def test_requires_reduced_model(self):
        full = plant.build_full(PlantParams())
        with pytest.raises(InputError):
            pid_stability_poly(PidGains(1.0, 1.0, 1.0), full)

    def test_all_reference_sets_hurwitz(self):
        ss = plant.build_reduced(PlantParams())
        for kp, ki, kd in GAIN_SETS:
            assert nm.routh_hurwitz(pid_stability_poly(PidGains(kp, ki, kd), ss)) is True


class TestAnalyticVersusSimulated:
    """Continuous verdicts against the 1 kHz simulated loop.

    The three moderate gain sets decay in simulation, matching their
    Hurwitz verdicts. kp=1000 is Hurwitz in continuous time but its
    closed loop rings at ~72 rad/s with damping ratio ~0.002, which a
    1 kHz sampled loop cannot stabilize: the run diverges. That sampling
    limit is frozen here; analytic agreement over the whole reference
    grid therefore holds only in the dt -> 0 limit.
    """

    def _run(self, gains):
        sc = sim.SimConfig(initial=plant.PitchState(0.1, 0.0), plant_mode=sim.PLANT_LINEAR)
        return sim.run(PlantParams(), plant.MODE_NATIVE,
                       PidConfig(gains=PidGains(*gains)), sc), sc

    @pytest.mark.parametrize("gains", GAIN_SETS[:3])
    def test_moderate_gains_decay_like_the_oracle_says(self, gains):
        tr, _ = self._run(gains)
        assert not tr.diverged
        n = len(tr)
        first = np.max(np.abs(tr.pitch[:n // 10]))
        last = np.max(np.abs(tr.pitch[-n // 10:]))
        # slowest set (kp=50) decays at only ~0.12 1/s; envelope ratio ~0.6
        assert last < 0.8 * first

    def test_kp1000_diverges_at_millisecond_sampling(self):
        tr, sc = self._run(GAIN_SETS[3])
        assert tr.diverged
        assert abs(tr.pitch[-1]) > sc.divergence_threshold

    def test_non_hurwitz_gain_grows(self):
        # kp=2 gives a sign-indefinite polynomial; the simulated loop grows
        tr, _ = self._run((2.0, 0.8, 0.05))
        assert tr.diverged or np.max(np.abs(tr.pitch)) > 0.1
