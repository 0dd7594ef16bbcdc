"""Shared fixtures: small but statistically valid ensembles.

The heavy CI-profile runs live in test_acceptance.py; everything here uses
short protocols sized so that 3-sigma statistical checks are meaningful
yet the whole module suite stays fast.
"""

import numpy as np
import pytest

from ramantwa import (
    Dispersion,
    DispersionKind,
    ModeGrid,
    RampSchedule,
    RampShape,
    RunProtocol,
    SystemSpec,
    WrapPolicy,
    run_ensemble,
)


def make_spec(omega_c=0.5, omega_r=1.0, g=0.04, g4=0.01, kappa=0.02, gamma=0.02,
              temperature=0.0, half_width=5, wrap=WrapPolicy.WRAP,
              cavity_kind=DispersionKind.FLAT, raman_kind=DispersionKind.FLAT,
              cavity_bw=0.0, raman_bw=0.0):
    return SystemSpec(
        grid=ModeGrid(half_width=half_width, wrap_policy=wrap),
        cavity_disp=Dispersion(cavity_kind, omega_c, cavity_bw),
        raman_disp=Dispersion(raman_kind, omega_r, raman_bw),
        g=g, g4=g4, kappa=kappa, gamma=gamma, temperature=temperature,
    )


SHORT_RAMP = RampSchedule(shape=RampShape.SMOOTH_TANH, t_ramp=10.0, t_settle=10.0,
                          t_window=160.0, sample_stride=2.0)
COUPLED_RAMP = RampSchedule(shape=RampShape.SMOOTH_TANH, t_ramp=80.0, t_settle=40.0,
                            t_window=160.0, sample_stride=2.0)


@pytest.fixture(scope="session")
def vacuum_stats():
    """g=0, T=0 ensemble: stationary from the first step."""
    spec = make_spec(g=0.0, g4=0.0)
    proto = RunProtocol(n_trajectories=384, master_seed=101, ramp=SHORT_RAMP, dt=0.005)
    return run_ensemble(spec, proto)


@pytest.fixture(scope="session")
def thermal_stats():
    """g=0 ensemble at T=2 (Raman quantum = half the thermal energy)."""
    spec = make_spec(g=0.0, g4=0.0, temperature=2.0)
    proto = RunProtocol(n_trajectories=384, master_seed=102, ramp=SHORT_RAMP, dt=0.005)
    return run_ensemble(spec, proto)


@pytest.fixture(scope="session")
def resonant_pair():
    """Coupled flat/flat run at the parametric resonance plus its
    seed-paired g=0 reference."""
    spec = make_spec(omega_c=0.5)
    proto = RunProtocol(n_trajectories=384, master_seed=103, ramp=COUPLED_RAMP, dt=0.005)
    coupled = run_ensemble(spec, proto)
    baseline = run_ensemble(spec.uncoupled(), proto)
    return coupled, baseline


@pytest.fixture(scope="session")
def quadratic_thermal_stats():
    """g=0 ensemble with both bands dispersive at T=2, for per-mode
    coth-law checks across distinct frequencies."""
    spec = make_spec(g=0.0, g4=0.0, temperature=2.0,
                     cavity_kind=DispersionKind.QUADRATIC, cavity_bw=1.0,
                     raman_kind=DispersionKind.QUADRATIC, raman_bw=1.0)
    proto = RunProtocol(n_trajectories=384, master_seed=300, ramp=SHORT_RAMP, dt=0.005)
    return run_ensemble(spec, proto)


def pytest_collection_modifyitems(config, items):
    """Run the acceptance module last so fast feedback comes first."""
    items.sort(key=lambda item: "test_acceptance" in item.nodeid)
