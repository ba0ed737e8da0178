"""Lead-sample scattering and reflection-based topological invariants.

A scattering system is a half-infinite lead (identity coins at x < 0)
attached to a sample occupying x >= 0.  The probe is a single walker
launched on the last lead site as |x=-1, H>; because lead coins are the
identity, the probe enters the sample with unit weight and everything
that comes back travels through the (x=-2, V) amplitude, which is read
non-destructively after every step.  Summing the step-resolved
reflection amplitudes with Fourier phases at quasienergies 0 and pi
gives the invariant pair (Q0, Qpi), each quantized to +-1/2 once the
series has converged.

Every ideal reflection amplitude carries a global factor i (H amplitudes
stay real and V amplitudes stay imaginary under these coins), so the
canonical gauge rotates the series by -i.  Under that rotation a clean
sample with first coin identity and second coin angle 1.68*pi comes out
at Q0 = +1/2 and the reference sample with second coin angle 0.52*pi
comes out at Q0 = -1/2.

Samples may be terminated two ways.  "open" embeds the sample in an
identity lead on the right as well, so weight that crosses the sample
escapes and never returns; the invariants still converge to +-1/2 but
the reflected weight saturates below one for transparent samples.
"mirror" appends one site whose coins rotate by pi/2, a perfect
reflector that confines the walker to the sample, so the reflected
weight itself converges to one.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .walk import CoinField, SplitStepProtocol

#: Unit phase removing the global factor i from ideal reflection series.
CANONICAL_ROTATION = -1j

#: |r(0)| below this is too degenerate for automatic gauge fixing.
DEGENERATE_TOL = 1e-6

#: Coin angle of the perfect-reflector site used by mirror termination.
MIRROR_ANGLE = np.pi / 2.0

_TWO_PI = 2.0 * np.pi

TERMINATIONS = ("open", "mirror")


class DegenerateGauge(ValueError):
    """r(0) is too close to zero to orient the gauge automatically."""


@dataclass(frozen=True, eq=False)
class ScatteringSystem:
    """Per-site coin angles of the sample region [0, sites).

    The lead convention (identity coins for x < 0) and the probe
    |-1, H> / read-out (-2, V) are fixed; only the sample and its
    right-hand termination vary.
    """

    theta1: np.ndarray
    theta2: np.ndarray
    termination: str = "open"

    def __post_init__(self):
        t1 = np.array(self.theta1, dtype=float) % _TWO_PI
        t2 = np.array(self.theta2, dtype=float) % _TWO_PI
        if t1.shape != t2.shape or t1.ndim != 1:
            raise ValueError("theta1 and theta2 must be 1-d arrays of equal length")
        if t1.size == 0:
            raise ValueError("sample region is empty")
        if self.termination not in TERMINATIONS:
            raise ValueError(f"termination must be one of {TERMINATIONS}")
        t1.setflags(write=False)
        t2.setflags(write=False)
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    @classmethod
    def clean(cls, theta1: float, theta2: float, sites: int,
              termination: str = "open") -> "ScatteringSystem":
        """Uniform sample with coin angles (theta1, theta2) on [0, sites)."""
        return cls(np.full(sites, float(theta1)), np.full(sites, float(theta2)),
                   termination)

    @classmethod
    def for_steps(cls, theta1: float, theta2: float, t: int,
                  termination: str = "open") -> "ScatteringSystem":
        """Clean sample sized to the light cone of a t-step run."""
        return cls.clean(theta1, theta2, t + 2, termination)

    @property
    def sites(self) -> int:
        return self.theta1.size

    @property
    def mirror_site(self) -> int | None:
        """Position of the reflector site, or None for open termination."""
        return self.sites if self.termination == "mirror" else None

    def field_angles(self) -> tuple[np.ndarray, np.ndarray]:
        """Coin angles of both fields including the reflector, if any."""
        if self.termination == "mirror":
            return (np.append(self.theta1, MIRROR_ANGLE),
                    np.append(self.theta2, MIRROR_ANGLE))
        return self.theta1, self.theta2

    def protocol(self) -> SplitStepProtocol:
        th1, th2 = self.field_angles()
        return SplitStepProtocol(CoinField(0, th1), CoinField(0, th2))


@dataclass
class ReflectionSeries:
    """Step-resolved reflection amplitudes r_1 .. r_t."""

    r: np.ndarray

    @property
    def t(self) -> int:
        return self.r.size

    def head(self, t: int) -> "ReflectionSeries":
        """The first t amplitudes; r_j does not depend on how long we record."""
        if not 0 <= t <= self.t:
            raise ValueError(f"cannot take {t} amplitudes from a series of {self.t}")
        return ReflectionSeries(self.r[:t])

    def reflected_weight(self) -> float:
        return float(np.sum(np.abs(self.r) ** 2))

    @property
    def residual(self) -> float:
        """1 - sum_j |r_j|^2: weight not yet returned through the lead."""
        return 1.0 - self.reflected_weight()

    def max_abs_real(self) -> float:
        """Largest |Re r_j|; exactly 0 for ideal systems."""
        return float(np.max(np.abs(self.r.real))) if self.r.size else 0.0


@dataclass(frozen=True)
class InvariantPair:
    """Gauge-fixed invariant pair with its convergence diagnostic."""

    q0: float
    qpi: float
    residual: float
    gauge: complex

    def signs(self) -> tuple[int, int]:
        return (1 if self.q0 > 0 else -1, 1 if self.qpi > 0 else -1)


def reflection_amplitudes(system: ScatteringSystem, t: int, *,
                          skip_identity_coin: bool = True) -> ReflectionSeries:
    """Evolve the probe for t steps and collect r_j = <-2,V| U^j |-1,H>.

    The position window is sized to the light cone, which makes the
    truncation exact at every finite t.  When the first coin field is
    the identity everywhere (as in the disorder studies) its application
    is skipped; the result is identical to the unskipped path.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    th1, th2 = system.field_angles()
    x_min = -(t + 3)
    if system.termination == "mirror":
        x_max = system.sites + 1
    else:
        x_max = max(t + 1, system.sites + 1)
    n = x_max - x_min + 1
    w1 = CoinField(0, th1).window_angles(x_min, n)
    w2 = CoinField(0, th2).window_angles(x_min, n)
    r = _reflection_kernel(w1, w2, x_min, t, skip_identity_coin)
    return ReflectionSeries(r)


def _reflection_kernel(th1, th2, x_min, t, skip_identity_coin=True):
    c1 = np.cos(th1)
    s1 = np.sin(th1)
    c2 = np.cos(th2)
    s2 = np.sin(th2)
    coin1_trivial = skip_identity_coin and not np.any(th1)

    n = th1.size
    h = np.zeros(n, dtype=complex)
    v = np.zeros(n, dtype=complex)
    h[-1 - x_min] = 1.0  # |x=-1, H>
    read = -2 - x_min

    r = np.empty(t, dtype=complex)
    for j in range(t):
        if not coin1_trivial:
            h, v = c1 * h - 1j * (s1 * v), c1 * v - 1j * (s1 * h)
        nh = np.zeros_like(h)
        nh[1:] = h[:-1]
        h = nh
        h, v = c2 * h - 1j * (s2 * v), c2 * v - 1j * (s2 * h)
        nv = np.zeros_like(v)
        nv[:-1] = v[1:]
        v = nv
        r[j] = v[read]
    return r


def reflection_matrix_element(series: ReflectionSeries | np.ndarray, eps: float) -> complex:
    """Fourier sum r(eps) = sum_j exp(i j eps) r_j over the recorded steps.

    eps = 0 and eps = pi use exact coefficient signs so that parities of
    the series survive to machine precision.
    """
    r = series.r if isinstance(series, ReflectionSeries) else np.asarray(series)
    if r.size == 0:
        return 0.0 + 0.0j
    if eps == 0.0:
        return complex(np.sum(r))
    if eps == np.pi:
        signs = np.where(np.arange(1, r.size + 1) % 2 == 0, 1.0, -1.0)
        return complex(np.sum(signs * r))
    j = np.arange(1, r.size + 1)
    return complex(np.sum(np.exp(1j * eps * j) * r))


def invariants(series: ReflectionSeries, gauge="auto") -> InvariantPair:
    """Gauge-fixed (Q0, Qpi) = (r(0), r(pi)) / 2 for a reflection series.

    gauge="auto" rotates r(0) onto the real axis with the unit phase
    nearest the canonical rotation -i, which preserves the physical sign;
    it raises DegenerateGauge when |r(0)| < 1e-6.  gauge="canonical"
    applies the fixed rotation -i with no per-series re-anchoring, which
    is what ensemble averages need so that individual members keep their
    signed values.  Any explicit unit phase may be passed instead.
    """
    r0 = reflection_matrix_element(series, 0.0)
    rpi = reflection_matrix_element(series, np.pi)
    if isinstance(gauge, str):
        if gauge == "canonical":
            g = CANONICAL_ROTATION
            q0 = (g * r0).real / 2.0
        elif gauge == "auto":
            v0 = CANONICAL_ROTATION * r0
            mag = abs(v0)
            if mag < DEGENERATE_TOL:
                raise DegenerateGauge(f"|r(0)| = {mag:.3e} is below {DEGENERATE_TOL:.0e}")
            u = v0 / mag
            sign = 1.0 if (u.real > 0 or (u.real == 0 and u.imag >= 0)) else -1.0
            g = sign * np.conj(u) * CANONICAL_ROTATION
            q0 = sign * mag / 2.0
        else:
            raise ValueError(f"unknown gauge mode: {gauge!r}")
    else:
        g = complex(gauge)
        if abs(abs(g) - 1.0) > 1e-9:
            raise ValueError("explicit gauge must be a unit phase")
        q0 = (g * r0).real / 2.0
    qpi = (g * rpi).real / 2.0
    return InvariantPair(q0, qpi, series.residual, complex(g))


@dataclass
class ScanPoint:
    theta1: float
    theta2: float
    pair: InvariantPair | None

    @property
    def degenerate(self) -> bool:
        return self.pair is None


@dataclass
class ScanResult:
    """Invariants along a one-parameter line in the coin-angle plane."""

    parametrization: str
    scanned: np.ndarray  # the swept angle per point
    points: list[ScanPoint]
    t: int

    @property
    def transitions(self) -> list[float]:
        """Swept-angle midpoints where sign(Q0 * Qpi) changes."""
        out = []
        prev_sign = None
        prev_angle = None
        for angle, pt in zip(self.scanned, self.points):
            if pt.pair is None:
                continue
            s = np.sign(pt.pair.q0 * pt.pair.qpi)
            if s == 0:
                continue
            if prev_sign is not None and s != prev_sign:
                out.append(0.5 * (prev_angle + angle))
            prev_sign = s
            prev_angle = angle
        return out

    def transition_width(self, center: float, floor: float = 0.25) -> float:
        """Swept-angle width of the unconverged region around a transition.

        A point counts as transitional when min(|Q0|, |Qpi|) < floor or
        its gauge is degenerate; the width is the extent of the
        contiguous transitional run nearest to center.  Returns 0.0 when
        no point near center is transitional.
        """
        flags = []
        for pt in self.points:
            if pt.pair is None:
                flags.append(True)
            else:
                flags.append(min(abs(pt.pair.q0), abs(pt.pair.qpi)) < floor)
        runs = []
        start = None
        for i, f in enumerate(flags):
            if f and start is None:
                start = i
            elif not f and start is not None:
                runs.append((start, i - 1))
                start = None
        if start is not None:
            runs.append((start, len(flags) - 1))
        best = None
        best_dist = None
        for a, b in runs:
            lo, hi = self.scanned[a], self.scanned[b]
            dist = 0.0 if lo <= center <= hi else min(abs(lo - center), abs(hi - center))
            if best_dist is None or dist < best_dist:
                best, best_dist = (a, b), dist
        if best is None or best_dist > 0.35:
            return 0.0
        a, b = best
        if a == b:
            # single-point run: charge one grid spacing
            if len(self.scanned) > 1:
                return float(np.min(np.diff(self.scanned)))
            return 0.0
        return float(self.scanned[b] - self.scanned[a])


LINE_GREEN = "theta1=2*theta2"
LINE_TURQUOISE = "theta2=2*theta1"
LINE_FREE = "free"


def _line_pairs(parametrization, grid):
    grid = np.asarray(grid, dtype=float)
    if parametrization == LINE_GREEN:
        return np.column_stack([2.0 * grid % _TWO_PI, grid])
    if parametrization == LINE_TURQUOISE:
        return np.column_stack([grid, 2.0 * grid % _TWO_PI])
    raise ValueError(f"unknown scan parametrization: {parametrization!r}")


def _scan_task(args):
    theta1, theta2, t, gauge = args
    series = reflection_amplitudes(ScatteringSystem.for_steps(theta1, theta2, t), t)
    try:
        return invariants(series, gauge)
    except DegenerateGauge:
        return None


def scan_line(parametrization: str, t: int, grid=None, pairs=None,
              gauge="auto", mapper=map) -> ScanResult:
    """Invariants along a coin-angle line for clean samples.

    parametrization is one of "theta1=2*theta2" (grid sweeps theta2),
    "theta2=2*theta1" (grid sweeps theta1) or "free" (explicit pairs of
    angles).  Points whose gauge is degenerate are kept but flagged.
    """
    if parametrization == LINE_FREE:
        if pairs is None:
            raise ValueError("free parametrization needs explicit pairs")
        arr = np.asarray(pairs, dtype=float)
        scanned = arr[:, 0]
    else:
        if grid is None:
            raise ValueError("line parametrization needs a grid of swept angles")
        arr = _line_pairs(parametrization, grid)
        scanned = np.asarray(grid, dtype=float)
    tasks = [(th1, th2, t, gauge) for th1, th2 in arr]
    results = list(mapper(_scan_task, tasks))
    points = [ScanPoint(th1, th2, pair) for (th1, th2), pair in zip(arr, results)]
    return ScanResult(parametrization, scanned, points, t)


PHASE_LABELS = ("--", "-+", "+-", "++")
BOUNDARY_LABEL = "boundary"


@dataclass
class PhaseDiagram:
    theta1: np.ndarray  # cell-center angles, axis 0
    theta2: np.ndarray  # cell-center angles, axis 1
    q0: np.ndarray
    qpi: np.ndarray
    residual: np.ndarray
    labels: np.ndarray  # strings from PHASE_LABELS or BOUNDARY_LABEL
    t: int
    tolerance: float


def classify(pair: InvariantPair | None, tolerance: float) -> str:
    """Phase label of one cell; 'boundary' when unconverged or degenerate."""
    if pair is None:
        return BOUNDARY_LABEL
    if min(abs(pair.q0), abs(pair.qpi)) < 0.5 - tolerance:
        return BOUNDARY_LABEL
    return ("+" if pair.q0 > 0 else "-") + ("+" if pair.qpi > 0 else "-")


def phase_diagram(resolution: int = 64, t: int = 30, tolerance: float = 0.05,
                  gauge="auto", mapper=map) -> PhaseDiagram:
    """Classify the (theta1, theta2) plane on a grid of cell centers.

    Each cell is labelled by the sign pair of (Q0, Qpi) when both
    magnitudes exceed 1/2 - tolerance; otherwise it is marked boundary.
    """
    if resolution < 8:
        raise ValueError("phase diagram resolution must be at least 8")
    centers = (np.arange(resolution) + 0.5) * _TWO_PI / resolution
    tasks = [(th1, th2, t, gauge) for th1 in centers for th2 in centers]
    results = list(mapper(_scan_task, tasks))

    q0 = np.full((resolution, resolution), np.nan)
    qpi = np.full((resolution, resolution), np.nan)
    res = np.full((resolution, resolution), np.nan)
    labels = np.empty((resolution, resolution), dtype="<U8")
    for idx, pair in enumerate(results):
        i, j = divmod(idx, resolution)
        labels[i, j] = classify(pair, tolerance)
        if pair is not None:
            q0[i, j] = pair.q0
            qpi[i, j] = pair.qpi
            res[i, j] = pair.residual
    return PhaseDiagram(centers, centers, q0, qpi, res, labels, t, tolerance)
