"""Closed loops in the four-parameter bond-dimension-2 MPS manifold.

The site tensor is

    A^up   = [[cos d cos b e^{i a/2},  cos d sin b e^{-i a/2}], [0, 0]]
    A^down = [[0, 0], [sin d sin b e^{i(c - a/2)},  sin d cos b e^{i(c + a/2)}]]

with physical index 0 = up, 1 = down. Parameter values are kept unwrapped
along a loop: shifting ``a`` by ``2 pi`` flips the sign of every entry, so
wrapping would make the tensor path discontinuous.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import NonUniformGrid, NotClosed, NotInjectiveOnLoop, ParseError
from .mps import UniformMPS, gauge_overlap, injectivity_rank, normalize

START_POINT = np.array([0.2607, 0.9, 4.888, 0.4308])
LOOP_PERIOD = 2.098
BUILTIN_COS_AMPLITUDES = np.array([0.30, -0.20, 0.40, 0.15])
BUILTIN_SIN_AMPLITUDES = np.array([0.20, 0.30, -0.10, 0.25])


@dataclass(frozen=True)
class ParamPoint:
    values: np.ndarray  # (a, b, c, d)
    rates: np.ndarray = field(default_factory=lambda: np.zeros(4))

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).reshape(4))
        object.__setattr__(self, "rates", np.asarray(self.rates, dtype=float).reshape(4))
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.rates))):
            raise ValueError("parameter point has non-finite entries")

    def wrapped(self) -> np.ndarray:
        """Values mapped into ``[-pi, pi)``."""
        return (self.values + np.pi) % (2 * np.pi) - np.pi


def mps_from_params(p) -> np.ndarray:
    a, b, c, d = p.values if isinstance(p, ParamPoint) else np.asarray(p, dtype=float)
    A = np.zeros((2, 2, 2), dtype=complex)
    A[0, 0, 0] = np.cos(d) * np.cos(b) * np.exp(0.5j * a)
    A[0, 0, 1] = np.cos(d) * np.sin(b) * np.exp(-0.5j * a)
    A[1, 1, 0] = np.sin(d) * np.sin(b) * np.exp(1j * (c - 0.5 * a))
    A[1, 1, 1] = np.sin(d) * np.cos(b) * np.exp(1j * (c + 0.5 * a))
    return A


def param_partials(p) -> np.ndarray:
    """Partial derivatives of the site tensor, shape ``(4, 2, 2, 2)``."""
    a, b, c, d = p.values if isinstance(p, ParamPoint) else np.asarray(p, dtype=float)
    A = mps_from_params((a, b, c, d))
    out = np.zeros((4,) + A.shape, dtype=complex)
    # a
    out[0, 0, 0, 0] = 0.5j * A[0, 0, 0]
    out[0, 0, 0, 1] = -0.5j * A[0, 0, 1]
    out[0, 1, 1, 0] = -0.5j * A[1, 1, 0]
    out[0, 1, 1, 1] = 0.5j * A[1, 1, 1]
    # b
    out[1, 0, 0, 0] = -np.cos(d) * np.sin(b) * np.exp(0.5j * a)
    out[1, 0, 0, 1] = np.cos(d) * np.cos(b) * np.exp(-0.5j * a)
    out[1, 1, 1, 0] = np.sin(d) * np.cos(b) * np.exp(1j * (c - 0.5 * a))
    out[1, 1, 1, 1] = -np.sin(d) * np.sin(b) * np.exp(1j * (c + 0.5 * a))
    # c
    out[2, 1] = 1j * A[1]
    # d
    out[3, 0, 0, 0] = -np.sin(d) * np.cos(b) * np.exp(0.5j * a)
    out[3, 0, 0, 1] = -np.sin(d) * np.sin(b) * np.exp(-0.5j * a)
    out[3, 1, 1, 0] = np.cos(d) * np.sin(b) * np.exp(1j * (c - 0.5 * a))
    out[3, 1, 1, 1] = np.cos(d) * np.cos(b) * np.exp(1j * (c + 0.5 * a))
    return out


def raw_tangent(p: ParamPoint) -> np.ndarray:
    """Chain-rule derivative of the unnormalized tensor along ``p.rates``."""
    return np.tensordot(p.rates, param_partials(p), axes=1)


def tangent_from_params(p: ParamPoint, psi: UniformMPS | None = None) -> np.ndarray:
    """Tangent tensor of the normalized MPS, with the overlap with ``A`` removed.

    The real part of the overlap is the derivative of the normalization factor;
    the imaginary part is a phase. Both are subtracted along ``A``.
    """
    if psi is None:
        psi = normalize(mps_from_params(p))
    A_raw = mps_from_params(p)
    scale = np.vdot(A_raw, psi.tensor) / np.vdot(A_raw, A_raw)  # 1/sqrt(lambda1_raw)
    dA = raw_tangent(p) * scale
    c = gauge_overlap(dA, psi)
    return dA - c * psi.tensor


def state_at(p: ParamPoint) -> tuple[UniformMPS, np.ndarray]:
    psi = normalize(mps_from_params(p))
    return psi, tangent_from_params(p, psi)


class Trajectory:
    """Periodic curve ``t -> (a, b, c, d)`` with analytic time derivatives."""

    period: float
    source: str = "builtin"

    def params(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def rates(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def point(self, t: float) -> ParamPoint:
        return ParamPoint(self.params(t), self.rates(t))

    def state(self, t: float) -> tuple[UniformMPS, np.ndarray]:
        return state_at(self.point(t))

    def source_hash(self) -> str:
        return hashlib.sha256(self.source.encode()).hexdigest()

    def certify(self, r: int = 2, n_points: int = 64) -> None:
        """Check full block-map rank at ``n_points`` uniformly spaced times."""
        for t in np.arange(n_points) * self.period / n_points:
            psi = normalize(mps_from_params(self.params(t)))
            if injectivity_rank(psi, r) != psi.chi**2:
                raise NotInjectiveOnLoop(f"block map rank deficient at t={t:.6f}, r={r}")


@dataclass
class Mode:
    harmonic: int
    A: np.ndarray
    B: np.ndarray


class FourierTrajectory(Trajectory):
    """``p(t) = sum_k A_k cos(k w t) + B_k sin(k w t)`` with ``w = 2 pi / period``."""

    def __init__(self, period: float, modes: list[Mode], source: str = "builtin"):
        if not period > 0:
            raise ValueError("period must be positive")
        self.period = float(period)
        self.modes = [
            Mode(int(m.harmonic), np.asarray(m.A, float).reshape(4), np.asarray(m.B, float).reshape(4))
            for m in modes
        ]
        self.source = source

    @property
    def omega(self) -> float:
        return 2 * np.pi / self.period

    def params(self, t: float) -> np.ndarray:
        w = self.omega
        return sum(
            (m.A * np.cos(m.harmonic * w * t) + m.B * np.sin(m.harmonic * w * t) for m in self.modes),
            np.zeros(4),
        )

    def rates(self, t: float) -> np.ndarray:
        w = self.omega
        return sum(
            (
                m.harmonic * w * (-m.A * np.sin(m.harmonic * w * t) + m.B * np.cos(m.harmonic * w * t))
                for m in self.modes
            ),
            np.zeros(4),
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "tau": self.period,
                "modes": [
                    {"harmonic": m.harmonic, "A": m.A.tolist(), "B": m.B.tolist()} for m in self.modes
                ],
            },
            indent=2,
        )


class SplineTrajectory(Trajectory):
    """Periodic cubic-spline interpolation of uniformly sampled parameters."""

    def __init__(self, t: np.ndarray, values: np.ndarray, source: str = "file"):
        t = np.asarray(t, float)
        values = np.array(values, float)
        self.t0 = t[0]
        self.period = float(t[-1] - t[0])
        values[-1] = values[0]
        self._spline = CubicSpline(t - t[0], values, bc_type="periodic", axis=0)
        self._deriv = self._spline.derivative()
        self.source = source

    def params(self, t: float) -> np.ndarray:
        return self._spline((t - self.t0) % self.period)

    def rates(self, t: float) -> np.ndarray:
        return self._deriv((t - self.t0) % self.period)


def builtin_loop(certify: bool = True) -> FourierTrajectory:
    """Deterministic closed loop through the published start point.

    ``p(t) = p(0) + A (1 - cos w t) + B sin w t`` with period 2.098.
    """
    modes = [
        Mode(0, START_POINT + BUILTIN_COS_AMPLITUDES, np.zeros(4)),
        Mode(1, -BUILTIN_COS_AMPLITUDES, BUILTIN_SIN_AMPLITUDES),
    ]
    traj = FourierTrajectory(LOOP_PERIOD, modes, source="builtin")
    if certify:
        traj.certify()
    return traj


def trajectory_to_csv(traj: Trajectory, n_samples: int) -> str:
    """Sample ``n_samples`` uniform points on ``[0, period]``, both ends included."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "a", "b", "c", "d"])
    for t in np.linspace(0.0, traj.period, n_samples):
        w.writerow([repr(float(t))] + [repr(float(x)) for x in traj.params(t)])
    return buf.getvalue()


def _parse_fourier(obj: dict, source: str) -> FourierTrajectory:
    try:
        modes = [Mode(m["harmonic"], m["A"], m["B"]) for m in obj["modes"]]
        return FourierTrajectory(float(obj["tau"]), modes, source=source)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad Fourier trajectory: {exc}") from exc


def _parse_csv(text: str, source: str, closure_tol: float) -> SplineTrajectory:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(x.strip() for x in r)]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        data = np.array([[float(x) for x in r] for r in rows])
    except ValueError as exc:
        raise ParseError(f"non-numeric CSV entry: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 5 or data.shape[0] < 4:
        raise ParseError(f"expected >= 4 rows of 't,a,b,c,d', got shape {data.shape}")
    t, vals = data[:, 0], data[:, 1:]
    dt = np.diff(t)
    if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-6, atol=1e-12):
        raise NonUniformGrid("sample times must be strictly increasing and uniformly spaced")
    gap = np.max(np.abs(vals[0] - vals[-1]))
    if gap > closure_tol:
        raise NotClosed(f"end point differs from start point by {gap:.3e}")
    return SplineTrajectory(t, vals, source=source)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_trajectory(path, closure_tol: float = 1e-6) -> Trajectory:
    """Load a Fourier JSON or a sampled ``t,a,b,c,d`` CSV trajectory.

    CSV files must cover one full period with both end points present.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc)) from exc
    source = f"file:{path.name}:" + hashlib.sha256(text.encode()).hexdigest()[:16]
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
        traj = _parse_fourier(obj, source)
        gap = np.max(np.abs(traj.params(0.0) - traj.params(traj.period)))
        if gap > closure_tol:
            raise NotClosed(f"end point differs from start point by {gap:.3e}")
        return traj
    return _parse_csv(text, source, closure_tol)


class RotationLoop:
    """Product state ``(cos w t, sin w t)`` on every site, chi = 1.

    Its tangent generator is a single-spin rotation, so every construction
    drives it exactly; used as an analytic reference.
    """

    source = "rotation"

    def __init__(self, period: float = 1.0):
        self.period = float(period)

    def state(self, t: float) -> tuple[UniformMPS, np.ndarray]:
        w = 2 * np.pi / self.period
        A = np.array([np.cos(w * t), np.sin(w * t)], dtype=complex).reshape(2, 1, 1)
        dA = w * np.array([-np.sin(w * t), np.cos(w * t)], dtype=complex).reshape(2, 1, 1)
        return normalize(A), dA

    def source_hash(self) -> str:
        return hashlib.sha256(self.source.encode()).hexdigest()
