"""Interfaces between topologically distinct bulks and walker localization.

An interface system joins a uniform left bulk (second coin angle
theta_left for x < 0) to a binary-disordered right bulk (x >= 0), with
the first coin field the identity everywhere.  A walker launched on the
boundary site of the left bulk stays pinned when the two bulks carry
different invariants, for every disorder configuration; with equal
invariants it spreads ballistically into the usual double-lobe profile.
Localization is quantified as the probability mass within [-3, 3].

The launch state matters: the bound mode's weight sits on the left side
of the interface bond, so a walker started at x=-1 overlaps it strongly
while one started at x=0 mostly escapes, and the V polarization (which
the boundary coin converts toward H before the amplitude crosses the
bond) maximizes the bound/ballistic contrast.  LAUNCH_SITE and
LAUNCH_COIN pin the convention.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .walk import CoinField, SplitStepProtocol, WalkerState, V, evolve
from .disorder import DEFAULT_P_GRID, DisorderSpec, sample_pattern

#: P_loc counts positions -LOC_WINDOW .. +LOC_WINDOW.
LOC_WINDOW = 3

#: The walker starts here, on the left bulk's boundary site.
LAUNCH_SITE = -1

#: Initial polarization of the launched walker.
LAUNCH_COIN = V

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class InterfaceSystem:
    """Left bulk angle plus the disorder law of the right bulk."""

    theta_left: float
    right: DisorderSpec

    @classmethod
    def for_steps(cls, theta_left: float, theta_a: float, theta_b: float,
                  p: float, t: int, seed: int, n_configs: int = 50) -> "InterfaceSystem":
        return cls(theta_left,
                   DisorderSpec.for_steps(theta_a, theta_b, p, t, seed, n_configs))

    def field2(self, config: int, extent: int) -> CoinField:
        """Second coin field covering [-extent, right sample end)."""
        left = np.full(extent, self.theta_left % _TWO_PI)
        pattern = sample_pattern(self.right, config)
        return CoinField(-extent, np.concatenate([left, pattern.thetas]))

    def protocol(self, config: int, extent: int) -> SplitStepProtocol:
        return SplitStepProtocol(CoinField.identity(), self.field2(config, extent))


@dataclass
class LocalizationRecord:
    """Per-step position distributions of one interface run."""

    distributions: np.ndarray  # (t+1, sites), row j is P_i after j steps
    x_min: int
    t: int
    config: int

    def positions(self) -> np.ndarray:
        return np.arange(self.x_min, self.x_min + self.distributions.shape[1])

    def p_loc_at(self, step: int) -> float:
        """Probability mass in [-LOC_WINDOW, LOC_WINDOW] after `step` steps."""
        row = self.distributions[step]
        x = self.positions()
        return float(row[(x >= -LOC_WINDOW) & (x <= LOC_WINDOW)].sum())

    @property
    def p_loc(self) -> float:
        return self.p_loc_at(self.t)


def run_interface(system: InterfaceSystem, t: int = 13, config: int = 0) -> LocalizationRecord:
    """Evolve the launch state and record every step's distribution."""
    if t < 0:
        raise ValueError("t must be non-negative")
    proto = system.protocol(config, extent=t + 2)
    traj = evolve(WalkerState.localized(LAUNCH_SITE, LAUNCH_COIN), proto, t)
    final = traj[-1]
    dists = np.zeros((t + 1, final.sites))
    for j, state in enumerate(traj):
        off = state.x_min - final.x_min
        dists[j, off:off + state.sites] = state.position_probabilities()
    return LocalizationRecord(dists, final.x_min, t, config)


def intensity_map_export(record: LocalizationRecord):
    """(positions, matrix) of P_i per step, ready for heat maps or CSV."""
    return record.positions(), record.distributions


@dataclass
class EdgePoint:
    """Ensemble localization statistics at one disorder strength."""

    p: float
    values: np.ndarray
    t: int

    @property
    def n_configs(self) -> int:
        return self.values.size

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        return float(np.std(self.values))


def _ploc_task(args) -> float:
    system, t, config = args
    return run_interface(system, t, config).p_loc


def localization_vs_disorder(theta_left: float, theta_a: float, theta_b: float,
                             seed: int, t: int = 13, p_grid=DEFAULT_P_GRID,
                             n_configs: int = 50, mapper=map) -> list[EdgePoint]:
    """Ensemble P_loc statistics per disorder strength.

    p = 0 and p = 1 are deterministic (every configuration identical),
    so they are run as single configurations with zero variance.
    """
    out = []
    for p in p_grid:
        n = 1 if p in (0.0, 1.0) else n_configs
        system = InterfaceSystem.for_steps(theta_left, theta_a, theta_b, p, t,
                                           seed, n)
        tasks = [(system, t, k) for k in range(n)]
        values = np.array(list(mapper(_ploc_task, tasks)), dtype=float)
        out.append(EdgePoint(float(p), values, t))
    return out


def reference_record(theta_left: float, theta_right: float, t: int = 13) -> LocalizationRecord:
    """Clean interface between two bulks (no disorder, single run).

    With both angles drawn from the same phase this is the study's
    no-edge-state reference.
    """
    spec = DisorderSpec.for_steps(theta_right, theta_right, 0.0, t, seed=0,
                                  n_configs=1)
    return run_interface(InterfaceSystem(theta_left, spec), t, 0)
