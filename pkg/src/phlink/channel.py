"""1-D advection-diffusion transport from the junction to the sensor.

The mixed stream is reduced to one spatial dimension under the
well-mixed cross-section assumption: a conserved supply fraction
``f(x, t)`` is advected by the plug-flow velocity and spread by the
Taylor-Aris effective axial dispersion.  The solver is an explicit
finite-volume scheme (first-order upwind advection, central diffusion)
with automatic sub-stepping.

Boundary treatment.  Solute enters by advection through the inlet face
(``flux = u * f_in``); no diffusive flux crosses it, so the junction
cannot be contaminated from downstream.  The outflow end is
zero-gradient.  During full simulations the grid is extended past the
sensor position by a pad of several dispersion lengths, mirroring the
physical device where the channel continues to a waste outlet beyond
the sensing electrodes; this keeps the artificial outflow condition
from perturbing the sensor reading.  Only the nominal domain is ever
exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import _kernels
from .transmitter import InletSignal

__all__ = [
    "ChannelError",
    "StepSizeError",
    "ChannelGeometry",
    "TransportParams",
    "ConcentrationField",
    "TransportResult",
    "effective_dispersion",
    "stable_dt",
    "step",
    "simulate",
    "analytic_pulse_response",
]


class ChannelError(ValueError):
    """Base class for transport failures."""


class StepSizeError(ChannelError):
    """A requested time step violates the explicit stability limits."""


@dataclass(frozen=True)
class ChannelGeometry:
    """Physical layout of the propagation path.

    Parameters
    ----------
    w, h : float
        Channel width and height, m.
    l1 : float
        Mixer section length, m.
    l2 : float
        Propagation section length, m.
    s : float
        Mixer fold spacing, m (documentation only; not used by the 1-D
        model).
    x_s : float or None
        Sensor position measured from the junction, m.  Defaults to the
        far end of the domain (``l1 + l2``).
    """

    w: float = 100e-6
    h: float = 100e-6
    l1: float = 9.2e-3
    l2: float = 80.5e-3
    s: float = 400e-6
    x_s: float | None = None

    def __post_init__(self) -> None:
        for name in ("w", "h", "l1", "l2", "s"):
            if not getattr(self, name) > 0:
                raise ChannelError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.x_s is None:
            object.__setattr__(self, "x_s", self.l1 + self.l2)
        if not (0.0 < self.x_s <= self.l1 + self.l2):
            raise ChannelError(
                f"sensor position must lie in (0, {self.l1 + self.l2}], got {self.x_s}"
            )

    @property
    def length(self) -> float:
        """Total modeled channel length, m."""
        return self.l1 + self.l2

    @property
    def cross_section(self) -> float:
        """Cross-sectional area, m^2."""
        return self.w * self.h


@dataclass(frozen=True)
class TransportParams:
    """Numerical and dispersion parameters of the transport solver.

    Parameters
    ----------
    d : float
        Molecular diffusivity of the transported species, m^2/s.
    aris_factor : float
        Geometry factor of the shear-dispersion closure (2/105 for
        parallel plates).
    n : int
        Number of grid cells over the nominal domain, >= 16.
    cfl : float
        Advective Courant-number bound in (0, 1].
    """

    d: float = 1e-9
    aris_factor: float = 2.0 / 105.0
    n: int = 2048
    cfl: float = 0.8

    def __post_init__(self) -> None:
        if not self.d > 0:
            raise ChannelError(f"diffusivity must be > 0, got {self.d}")
        if self.aris_factor < 0:
            raise ChannelError(f"aris_factor must be >= 0, got {self.aris_factor}")
        if self.n < 16:
            raise ChannelError(f"grid must have >= 16 cells, got {self.n}")
        if not (0.0 < self.cfl <= 1.0):
            raise ChannelError(f"cfl must be in (0, 1], got {self.cfl}")


@dataclass(frozen=True)
class ConcentrationField:
    """Supply-fraction profile on a uniform cell-centered grid.

    Attributes
    ----------
    x : numpy.ndarray
        Cell-center coordinates over the nominal domain, m.
    f : numpy.ndarray
        Supply fraction per cell, each in [0, 1].
    t : float
        Time stamp, s.
    """

    x: np.ndarray
    f: np.ndarray
    t: float

    def __post_init__(self) -> None:
        if len(self.x) != len(self.f):
            raise ChannelError("coordinate and value arrays differ in length")
        dx = np.diff(self.x)
        if len(dx) and not np.allclose(dx, dx[0], rtol=1e-9, atol=0.0):
            raise ChannelError("grid must be uniform")
        if np.any(self.f < -1e-12) or np.any(self.f > 1.0 + 1e-12):
            raise ChannelError("supply fraction must lie in [0, 1]")

    @property
    def dx(self) -> float:
        """Cell width, m."""
        return float(self.x[1] - self.x[0]) if len(self.x) > 1 else float("nan")

    @staticmethod
    def zeros(geom: ChannelGeometry, params: TransportParams) -> "ConcentrationField":
        """Field of pure gating fluid (f = 0) at t = 0."""
        dx = geom.length / params.n
        x = (np.arange(params.n) + 0.5) * dx
        return ConcentrationField(x=x, f=np.zeros(params.n), t=0.0)


def effective_dispersion(
    u: float, geom: ChannelGeometry, params: TransportParams
) -> float:
    """Taylor-Aris effective axial dispersion coefficient, m^2/s.

    ``D_eff = d * (1 + aris_factor * Pe^2)`` with the Peclet number
    ``Pe = u * h / d`` built on the channel height.  Always >= d.
    """
    if u < 0:
        raise ChannelError(f"velocity must be >= 0, got {u}")
    pe = u * geom.h / params.d
    return params.d * (1.0 + params.aris_factor * pe * pe)


def stable_dt(u: float, d_eff: float, dx: float, cfl: float) -> float:
    """Largest substep keeping the explicit update a convex combination.

    Enforces both the advective Courant bound ``u*dt/dx <= cfl`` and the
    monotonicity bound ``dt*(u*dx + 2*D_eff) <= dx^2`` (which implies
    the diffusion-number bound ``D_eff*dt/dx^2 <= 1/2``).
    """
    dt = dx * dx / (u * dx + 2.0 * d_eff)
    if u > 0:
        dt = min(dt, cfl * dx / u)
    return dt


def step(
    field: ConcentrationField,
    f_in: float,
    u: float,
    dt: float,
    geom: ChannelGeometry,
    params: TransportParams,
) -> ConcentrationField:
    """Advance a field by one explicit step of length ``dt``.

    The caller must respect the stability preconditions; drivers that
    need a larger interval should sub-step (as :func:`simulate` does).

    Raises
    ------
    StepSizeError
        If ``u*dt/dx > cfl`` or ``D_eff*dt/dx^2 > 1/2``.
    """
    if not (0.0 <= f_in <= 1.0):
        raise ChannelError(f"inlet fraction must be in [0, 1], got {f_in}")
    if u < 0:
        raise ChannelError(f"velocity must be >= 0, got {u}")
    if dt <= 0:
        raise ChannelError(f"dt must be > 0, got {dt}")
    dx = field.dx
    d_eff = effective_dispersion(u, geom, params)
    courant = u * dt / dx
    diffusion_number = d_eff * dt / (dx * dx)
    if courant > params.cfl * (1 + 1e-12) or diffusion_number > 0.5 * (1 + 1e-12):
        raise StepSizeError(
            f"dt={dt:g} s unstable: Courant {courant:.3g} (limit {params.cfl}), "
            f"diffusion number {diffusion_number:.3g} (limit 0.5)"
        )
    f = field.f.copy()
    _kernels.advance(
        f, np.empty_like(f), np.empty_like(f),
        f_in, u, d_eff / dx, dt / dx, dt, 1,
    )
    return ConcentrationField(x=field.x, f=f, t=field.t + dt)


@dataclass(frozen=True)
class TransportResult:
    """Outcome of a full transport simulation.

    Attributes
    ----------
    t : numpy.ndarray
        Sample times of the sensor trace, s.
    f_sensor : numpy.ndarray
        Supply fraction at the sensor cell per sample.
    field : ConcentrationField
        Final state over the nominal domain.
    mass_in, mass_out : float
        Time-integrated advective in/outflux per unit cross-section, m.
    conservation_error : float
        Relative flux-accounting defect
        ``|mass_final - (mass_in - mass_out)| / max(mass_in, eps)``.
    history : numpy.ndarray or None
        Optional space-time dump ``(n_dumps, n_cells)`` over the nominal
        domain, plus matching ``history_t`` times.
    history_t: numpy.ndarray or None
    """

    t: np.ndarray
    f_sensor: np.ndarray
    field: ConcentrationField
    mass_in: float
    mass_out: float
    conservation_error: float
    history: np.ndarray | None = None
    history_t: np.ndarray | None = None


def _outlet_pad_cells(inlet: InletSignal, geom: ChannelGeometry,
                      params: TransportParams, dx: float) -> int:
    """Cells to append past the nominal outlet.

    Sized at four dispersion lengths ``D_eff/u`` of the fastest segment
    (at least 16 cells, at most one extra domain length), far enough
    that the zero-gradient outflow condition cannot reach back to the
    sensor.
    """
    u_max = float(np.max(inlet.u)) if inlet.n_samples else 0.0
    pad_len = 16 * dx
    if u_max > 0:
        pad_len = max(pad_len, 4.0 * effective_dispersion(u_max, geom, params) / u_max)
    pad_len = min(pad_len, geom.length)
    return int(math.ceil(pad_len / dx))


def simulate(
    inlet: InletSignal,
    geom: ChannelGeometry,
    params: TransportParams,
    dump_every: int = 0,
) -> TransportResult:
    """Propagate an inlet signal and record the sensor-cell trace.

    The sensor trace has one sample per inlet sample: ``f_sensor[k]`` is
    the state of the cell containing the sensor position at
    ``t = k * dt``, before the flows of interval ``k`` act.  Within each
    interval the solver sub-steps at the stability limit for that
    interval's velocity.  Fully deterministic for fixed inputs.

    Parameters
    ----------
    dump_every : int
        If > 0, also record the nominal-domain field every that many
        samples (plus the final state).
    """
    dx = geom.length / params.n
    pad = _outlet_pad_cells(inlet, geom, params, dx)
    n_tot = params.n + pad
    sensor_idx = min(int(geom.x_s / dx), params.n - 1)

    f = np.zeros(n_tot)
    scratch = np.empty_like(f)
    flux = np.empty_like(f)
    trace = np.zeros(inlet.n_samples)
    mass_in = 0.0
    mass_out = 0.0
    dumps: list[np.ndarray] = []
    dump_t: list[float] = []

    d_eff_cache: dict[float, float] = {}
    for k in range(inlet.n_samples):
        trace[k] = f[sensor_idx]
        if dump_every > 0 and k % dump_every == 0:
            dumps.append(f[: params.n].copy())
            dump_t.append(k * inlet.dt)
        u = float(inlet.u[k])
        d_eff = d_eff_cache.get(u)
        if d_eff is None:
            d_eff = effective_dispersion(u, geom, params)
            d_eff_cache[u] = d_eff
        n_sub = max(1, int(math.ceil(inlet.dt / stable_dt(u, d_eff, dx, params.cfl))))
        dt_sub = inlet.dt / n_sub
        mi, mo = _kernels.advance(
            f, scratch, flux,
            float(inlet.f_in[k]), u, d_eff / dx, dt_sub / dx, dt_sub, n_sub,
        )
        mass_in += mi
        mass_out += mo

    if dump_every > 0:
        dumps.append(f[: params.n].copy())
        dump_t.append(inlet.n_samples * inlet.dt)

    mass_final = float(f.sum()) * dx
    conservation_error = abs(mass_final - (mass_in - mass_out)) / max(mass_in, 1e-300)
    x = (np.arange(params.n) + 0.5) * dx
    field = ConcentrationField(
        x=x,
        f=np.clip(f[: params.n], 0.0, 1.0),
        t=inlet.n_samples * inlet.dt,
    )
    return TransportResult(
        t=inlet.t,
        f_sensor=trace,
        field=field,
        mass_in=mass_in,
        mass_out=mass_out,
        conservation_error=conservation_error,
        history=np.array(dumps) if dumps else None,
        history_t=np.array(dump_t) if dump_t else None,
    )


def analytic_pulse_response(
    t: np.ndarray | float,
    pulse_duration: float,
    u: float,
    d_eff: float,
    x: float,
) -> np.ndarray | float:
    """Closed-form response to a rectangular inlet pulse at constant flow.

    Superposition of two complementary-error-function step responses of
    the 1-D advection-diffusion equation,
    ``f(t) = A(t) - A(t - tau)`` with
    ``A(t) = 1/2 * erfc((x - u*t) / sqrt(4*D_eff*t))``,
    clamped to [0, 1].  Used as the accuracy oracle for the numeric
    solver.
    """
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)

    def _step(ts: np.ndarray) -> np.ndarray:
        out = np.zeros_like(ts)
        pos = ts > 0
        tp = ts[pos]
        out[pos] = 0.5 * erfc((x - u * tp) / np.sqrt(4.0 * d_eff * tp))
        return out

    resp = np.clip(_step(t_arr) - _step(t_arr - pulse_duration), 0.0, 1.0)
    return float(resp[0]) if scalar else resp
