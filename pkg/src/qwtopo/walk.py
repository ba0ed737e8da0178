"""Exact state-vector dynamics of one-dimensional split-step quantum walks.

The walker lives on an integer position lattice with a two-level internal
(polarization) space spanned by H and V.  H components move to the right,
V components to the left.  One full step applies, in order: the first coin,
the polarization-selective right shift, the second coin, and the
polarization-selective left shift.

Amplitudes are stored on a finite window that always contains the light
cone of the evolved state, so the truncation is exact: a shift that would
push amplitude past the window edge grows the window first.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

H = 0
V = 1

_TWO_PI = 2.0 * np.pi
_GROW = 16  # slots added when a shift reaches an occupied window edge


def coin_matrix(theta: float) -> np.ndarray:
    """Return the coin rotation exp(-i sigma_x theta) in the (H, V) basis.

    The angle is reduced mod 2*pi.  The matrix is
    [[cos(theta), -i sin(theta)], [-i sin(theta), cos(theta)]].
    """
    th = float(theta) % _TWO_PI
    c = np.cos(th)
    s = np.sin(th)
    return np.array([[c, -1j * s], [-1j * s, c]])


@dataclass(frozen=True, eq=False)
class CoinField:
    """Position-dependent coin angles over one contiguous sample region.

    Positions outside the region resolve to theta = 0 (the identity coin),
    which is the lead convention.  Angles are reduced into [0, 2*pi) and
    the backing array is frozen after construction.
    """

    start: int
    thetas: np.ndarray

    def __post_init__(self):
        th = np.array(self.thetas, dtype=float) % _TWO_PI
        th.setflags(write=False)
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "thetas", th)

    @classmethod
    def identity(cls) -> "CoinField":
        """Field with an empty sample region: identity coin everywhere."""
        return cls(0, np.zeros(0))

    @classmethod
    def uniform(cls, theta: float, start: int, sites: int) -> "CoinField":
        return cls(start, np.full(sites, float(theta)))

    @property
    def stop(self) -> int:
        return self.start + len(self.thetas)

    def theta_at(self, x: int) -> float:
        if self.start <= x < self.stop:
            return float(self.thetas[x - self.start])
        return 0.0

    def window_angles(self, x_min: int, sites: int) -> np.ndarray:
        """Per-position angles for a window of given extent (zero outside)."""
        out = np.zeros(sites)
        lo = max(self.start, x_min)
        hi = min(self.stop, x_min + sites)
        if hi > lo:
            out[lo - x_min : hi - x_min] = self.thetas[lo - self.start : hi - self.start]
        return out

    def is_identity(self) -> bool:
        return self.thetas.size == 0 or not np.any(self.thetas)


@dataclass(frozen=True, eq=False)
class SplitStepProtocol:
    """A pair of coin fields plus the realization mode of one step."""

    field1: CoinField
    field2: CoinField
    mode: str = "split-step"  # or "double-step"

    def __post_init__(self):
        if self.mode not in ("split-step", "double-step"):
            raise ValueError(f"unknown protocol mode: {self.mode!r}")

    @classmethod
    def lead_only(cls) -> "SplitStepProtocol":
        return cls(CoinField.identity(), CoinField.identity())


@dataclass
class WalkerState:
    """Complex amplitudes over a position window times the (H, V) space.

    amps has shape (sites, 2); row i holds the H and V amplitudes at
    position x_min + i.  Evolution functions return new states and never
    mutate their input.
    """

    x_min: int
    amps: np.ndarray
    time: int = 0

    @classmethod
    def localized(cls, x: int = 0, coin: int = H, x_min: int | None = None,
                  x_max: int | None = None) -> "WalkerState":
        """Unit amplitude at (x, coin), window defaulting to [x-1, x+1]."""
        lo = x - 1 if x_min is None else int(x_min)
        hi = x + 1 if x_max is None else int(x_max)
        if not lo <= x <= hi:
            raise ValueError("window does not contain the initial position")
        amps = np.zeros((hi - lo + 1, 2), dtype=complex)
        amps[x - lo, coin] = 1.0
        return cls(lo, amps)

    @property
    def sites(self) -> int:
        return self.amps.shape[0]

    @property
    def x_max(self) -> int:
        return self.x_min + self.sites - 1

    def positions(self) -> np.ndarray:
        return np.arange(self.x_min, self.x_min + self.sites)

    def amplitude(self, x: int, coin: int) -> complex:
        if self.x_min <= x <= self.x_max:
            return complex(self.amps[x - self.x_min, coin])
        return 0.0 + 0.0j

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def position_probabilities(self) -> np.ndarray:
        """Probability per window position, summed over the coin space."""
        return np.sum(np.abs(self.amps) ** 2, axis=1)

    def copy(self) -> "WalkerState":
        return WalkerState(self.x_min, self.amps.copy(), self.time)


def _grown(state: WalkerState, left: int, right: int) -> WalkerState:
    amps = np.zeros((state.sites + left + right, 2), dtype=complex)
    amps[left : left + state.sites] = state.amps
    return WalkerState(state.x_min - left, amps, state.time)


def apply_shift_plus(state: WalkerState) -> WalkerState:
    """Move H components one site to the right; V components stay."""
    if state.amps[-1, H] != 0:
        state = _grown(state, 0, _GROW)
    amps = state.amps.copy()
    amps[1:, H] = state.amps[:-1, H]
    amps[0, H] = 0.0
    return WalkerState(state.x_min, amps, state.time)


def apply_shift_minus(state: WalkerState) -> WalkerState:
    """Move V components one site to the left; H components stay."""
    if state.amps[0, V] != 0:
        state = _grown(state, _GROW, 0)
    amps = state.amps.copy()
    amps[:-1, V] = state.amps[1:, V]
    amps[-1, V] = 0.0
    return WalkerState(state.x_min, amps, state.time)


def apply_shift_symmetric(state: WalkerState) -> WalkerState:
    """Move H right and V left in one pass (the full fibre-loop shift)."""
    if state.amps[-1, H] != 0:
        state = _grown(state, 0, _GROW)
    if state.amps[0, V] != 0:
        state = _grown(state, _GROW, 0)
    amps = np.zeros_like(state.amps)
    amps[1:, H] = state.amps[:-1, H]
    amps[:-1, V] = state.amps[1:, V]
    return WalkerState(state.x_min, amps, state.time)


def apply_coin_field(state: WalkerState, field: CoinField) -> WalkerState:
    """Apply the position-dependent coin rotation at every window site."""
    th = field.window_angles(state.x_min, state.sites)
    c = np.cos(th)
    s = np.sin(th)
    h = state.amps[:, H]
    v = state.amps[:, V]
    amps = np.empty_like(state.amps)
    amps[:, H] = c * h - 1j * (s * v)
    amps[:, V] = c * v - 1j * (s * h)
    return WalkerState(state.x_min, amps, state.time)


def split_step(state: WalkerState, protocol: SplitStepProtocol) -> WalkerState:
    """One step: coin 1, right shift of H, coin 2, left shift of V."""
    out = apply_coin_field(state, protocol.field1)
    out = apply_shift_plus(out)
    out = apply_coin_field(out, protocol.field2)
    out = apply_shift_minus(out)
    out.time = state.time + 1
    return out


def _interleave_field(field: CoinField, parity: int) -> CoinField:
    """Map a coin field onto the doubled lattice used by the double step.

    Coin-1 angles sit on even doubled positions (parity 0), coin-2 angles
    on odd ones (parity 1); the other parity carries the identity coin.
    """
    if field.thetas.size == 0:
        return CoinField.identity()
    th = np.zeros(2 * field.thetas.size - 1)
    th[::2] = field.thetas
    return CoinField(2 * field.start - parity, th)


def double_step_equivalent(state: WalkerState, protocol: SplitStepProtocol) -> WalkerState:
    """One step realized as two symmetric-shift roundtrips plus relabelling.

    The state is embedded on a doubled lattice (position x becomes 2x), the
    sequence coin-1 / shift / coin-2 / shift is applied with coin 1 placed
    on even and coin 2 on odd doubled positions, and the result is read off
    the even sublattice, relabelling 2x back to x.
    """
    doubled = np.zeros((2 * state.sites - 1, 2), dtype=complex)
    doubled[::2] = state.amps
    d = WalkerState(2 * state.x_min, doubled, state.time)

    f1 = _interleave_field(protocol.field1, 0)
    f2 = _interleave_field(protocol.field2, 1)

    d = apply_coin_field(d, f1)
    d = apply_shift_symmetric(d)
    d = apply_coin_field(d, f2)
    d = apply_shift_symmetric(d)

    # support returns to the even sublattice after the second roundtrip
    offset = d.x_min % 2
    odd = d.amps[1 - offset :: 2]
    if np.any(odd):
        raise AssertionError("double-step support leaked onto the odd sublattice")
    even = d.amps[offset::2].copy()
    out = WalkerState((d.x_min + offset) // 2, even, state.time + 1)
    return out


def step(state: WalkerState, protocol: SplitStepProtocol) -> WalkerState:
    """Advance one step using the protocol's realization mode."""
    if protocol.mode == "double-step":
        return double_step_equivalent(state, protocol)
    return split_step(state, protocol)


def evolve(state: WalkerState, protocol: SplitStepProtocol, steps: int) -> list[WalkerState]:
    """Evolve and return the trajectory [state, after 1 step, ..., after t]."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    out = [state.copy()]
    cur = state
    for _ in range(steps):
        cur = step(cur, protocol)
        out.append(cur)
    return out
