"""Acid-base equilibrium chemistry for mixtures of two laboratory solutions.

Computes the equilibrium pH of ideal aqueous solutions containing strong
(fully dissociated) ions and polyprotic weak-acid systems by solving the
charge-neutrality equation with bisection.  A precomputed fraction-to-pH
lookup table accelerates the transport/sensing pipeline, which needs the
map evaluated at every trace sample.

Temperature is fixed at 25 degC and activities are taken equal to
concentrations (ideal solutions); the water ion product is ``KW = 1e-14``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KW",
    "ChemistryError",
    "InvalidSolutionError",
    "InfeasibleCompositionError",
    "StrongIon",
    "AcidSystem",
    "SolutionSpec",
    "PhLookup",
    "supply_solution",
    "gating_solution",
    "charge_balance",
    "ph_of_solution",
    "mix_solutions",
    "ph_of_fraction",
    "build_ph_lookup",
]

KW = 1e-14
"""Water autoionization product at 25 degC (mol^2/L^2)."""

_PH_LO = -1.0
_PH_HI = 14.0
_BISECTION_ITERATIONS = 100

#: Sodium concentration (mol/L) accompanying the phosphate buffer, tuned
#: once so the default gating buffer equilibrates at pH 7.400000.
PBS_SODIUM = 1.613164439107e-2

#: Acid dissociation exponents of phosphoric acid at 25 degC.
PHOSPHATE_PKAS = (2.15, 7.20, 12.33)


class ChemistryError(ValueError):
    """Base class for chemistry failures."""


class InvalidSolutionError(ChemistryError):
    """A solution specification violates its own constraints."""


class InfeasibleCompositionError(ChemistryError):
    """The charge balance has no root in the physical [H+] range."""


@dataclass(frozen=True)
class StrongIon:
    """A fully dissociated ion.

    Parameters
    ----------
    charge : int
        Signed ionic charge (e.g. +1 for Na+, -1 for Cl-).  Must be
        nonzero.
    concentration : float
        Total concentration in mol/L, >= 0.
    """

    charge: int
    concentration: float

    def __post_init__(self) -> None:
        if self.charge == 0:
            raise InvalidSolutionError("strong ion charge must be nonzero")
        if not math.isfinite(self.concentration) or self.concentration < 0:
            raise InvalidSolutionError(
                f"strong ion concentration must be >= 0, got {self.concentration}"
            )


@dataclass(frozen=True)
class AcidSystem:
    """A polyprotic weak acid described by its dissociation exponents.

    Parameters
    ----------
    total_concentration : float
        Total analytical concentration of all protonation states, mol/L.
    pka_list : tuple of float
        Successive dissociation exponents, strictly increasing.
    """

    total_concentration: float
    pka_list: tuple[float, ...]

    def __post_init__(self) -> None:
        if not math.isfinite(self.total_concentration) or self.total_concentration < 0:
            raise InvalidSolutionError(
                f"acid concentration must be >= 0, got {self.total_concentration}"
            )
        if len(self.pka_list) == 0:
            raise InvalidSolutionError("acid system needs at least one pKa")
        pkas = tuple(float(p) for p in self.pka_list)
        if any(b <= a for a, b in zip(pkas, pkas[1:])):
            raise InvalidSolutionError(
                f"pKa list must be strictly increasing, got {pkas}"
            )
        object.__setattr__(self, "pka_list", pkas)


@dataclass(frozen=True)
class SolutionSpec:
    """Ionic composition of one fluid.

    Parameters
    ----------
    name : str
        Human-readable label carried through mixing.
    strong_ions : tuple of StrongIon
        Fully dissociated species.
    acid_systems : tuple of AcidSystem
        Weak polyprotic acids.
    """

    name: str
    strong_ions: tuple[StrongIon, ...] = ()
    acid_systems: tuple[AcidSystem, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "strong_ions", tuple(self.strong_ions))
        object.__setattr__(self, "acid_systems", tuple(self.acid_systems))

    @property
    def strong_charge(self) -> float:
        """Net fixed charge from strong ions, mol/L."""
        return sum(ion.charge * ion.concentration for ion in self.strong_ions)


def supply_solution() -> SolutionSpec:
    """Default information-carrying fluid: 1.0 mM strong acid (HCl, pH 3.0)."""
    return SolutionSpec(
        name="supply (1 mM HCl)",
        strong_ions=(StrongIon(-1, 1.0e-3),),
    )


def gating_solution() -> SolutionSpec:
    """Default baseline buffer: 10 mM phosphate + 137 mM NaCl at pH 7.40.

    The sodium content beyond the NaCl spectator is the frozen constant
    :data:`PBS_SODIUM`, calibrated once so the equilibrium pH is exactly
    7.400000.
    """
    return SolutionSpec(
        name="gating (phosphate-buffered saline)",
        strong_ions=(
            StrongIon(+1, 0.137 + PBS_SODIUM),
            StrongIon(-1, 0.137),
        ),
        acid_systems=(AcidSystem(0.010, PHOSPHATE_PKAS),),
    )


def _anion_charge_factor(h: float, pka_list: tuple[float, ...]) -> float:
    """Average anionic charge per mole of a polyprotic acid at [H+] = ``h``.

    Returns ``sum_j j * alpha_j`` where ``alpha_j`` is the mole fraction
    of the species that has lost ``j`` protons.  Evaluated with max-term
    normalization in log space so it is stable for any ``h`` in the
    physical range.
    """
    log_h = math.log(h)
    log_terms = [0.0]
    acc = 0.0
    for pka in pka_list:
        acc += -pka * math.log(10.0)
        log_terms.append(acc)
    log_terms = [t - j * log_h for j, t in enumerate(log_terms)]
    top = max(log_terms)
    weights = [math.exp(t - top) for t in log_terms]
    total = sum(weights)
    return sum(j * w for j, w in enumerate(weights)) / total


def charge_balance(h: float, spec: SolutionSpec) -> float:
    """Net charge density (mol/L) of the solution at hydrogen level ``h``.

    The returned function is strictly increasing in ``h``; its unique
    zero is the equilibrium point.

    Parameters
    ----------
    h : float
        Trial hydrogen-ion concentration, mol/L, > 0.
    spec : SolutionSpec
        Composition to evaluate.
    """
    balance = spec.strong_charge + h - KW / h
    for acid in spec.acid_systems:
        balance -= acid.total_concentration * _anion_charge_factor(h, acid.pka_list)
    return balance


def ph_of_solution(spec: SolutionSpec) -> float:
    """Equilibrium pH of a solution by charge-balance bisection.

    Bisects on pH over [-1, 14] (i.e. [H+] in [1e-14, 10] mol/L), which
    converges unconditionally because the balance is monotone in [H+].
    The residual of the charge balance at the returned root is below
    1e-12 mol/L.

    Raises
    ------
    InfeasibleCompositionError
        If the charge balance does not change sign on the search range.
    """
    lo, hi = _PH_LO, _PH_HI
    bal_lo = charge_balance(10.0**-lo, spec)
    bal_hi = charge_balance(10.0**-hi, spec)
    if bal_lo == 0.0:
        return lo
    if bal_hi == 0.0:
        return hi
    # balance decreases with pH: positive at low pH, negative at high pH
    if not (bal_lo > 0.0 and bal_hi < 0.0):
        raise InfeasibleCompositionError(
            f"charge balance has no root for {spec.name!r}: "
            f"balance({lo})={bal_lo:.3e}, balance({hi})={bal_hi:.3e}"
        )
    for _ in range(_BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if charge_balance(10.0**-mid, spec) > 0.0:
            lo = mid
        else:
            hi = mid
    ph = 0.5 * (lo + hi)
    residual = charge_balance(10.0**-ph, spec)
    if abs(residual) >= 1e-12:
        raise InfeasibleCompositionError(
            f"root refinement stalled for {spec.name!r}: residual {residual:.3e}"
        )
    return ph


def mix_solutions(supply: SolutionSpec, gating: SolutionSpec, f: float) -> SolutionSpec:
    """Volumetric blend: every total concentration is ``f*supply + (1-f)*gating``.

    Strong ions are combined by charge and acid systems by pKa signature,
    which is lossless for pH purposes.  Species present in only one input
    appear scaled by that input's fraction.

    Parameters
    ----------
    supply, gating : SolutionSpec
        The two endpoint fluids.
    f : float
        Volume fraction of ``supply`` in the mixture, in [0, 1].
    """
    if not (0.0 <= f <= 1.0):
        raise ChemistryError(f"mixing fraction must be in [0, 1], got {f}")
    ions: dict[int, float] = {}
    for frac, spec in ((f, supply), (1.0 - f, gating)):
        for ion in spec.strong_ions:
            ions[ion.charge] = ions.get(ion.charge, 0.0) + frac * ion.concentration
    acids: dict[tuple[float, ...], float] = {}
    for frac, spec in ((f, supply), (1.0 - f, gating)):
        for acid in spec.acid_systems:
            acids[acid.pka_list] = (
                acids.get(acid.pka_list, 0.0) + frac * acid.total_concentration
            )
    return SolutionSpec(
        name=f"{supply.name} : {gating.name} @ f={f:g}",
        strong_ions=tuple(
            StrongIon(z, c) for z, c in sorted(ions.items())
        ),
        acid_systems=tuple(
            AcidSystem(c, pkas) for pkas, c in sorted(acids.items())
        ),
    )


def ph_of_fraction(f: float, supply: SolutionSpec, gating: SolutionSpec) -> float:
    """pH of the blend containing volume fraction ``f`` of the supply fluid."""
    return ph_of_solution(mix_solutions(supply, gating, f))


@dataclass(frozen=True)
class PhLookup:
    """Immutable fraction-to-pH interpolation table.

    Built over a uniform fraction grid on [0, 1]; queries interpolate
    linearly.  Safe to share across threads.
    """

    fractions: np.ndarray
    ph_values: np.ndarray
    endpoint_ph: tuple[float, float] = field(default=(float("nan"), float("nan")))

    def ph(self, f: float | np.ndarray) -> float | np.ndarray:
        """Interpolated pH at fraction ``f`` (scalar or array)."""
        return np.interp(f, self.fractions, self.ph_values)


def build_ph_lookup(
    supply: SolutionSpec, gating: SolutionSpec, n_points: int = 256
) -> PhLookup:
    """Tabulate ``ph_of_fraction`` on ``n_points`` uniform fractions.

    With ``n_points >= 256`` linear interpolation reproduces direct
    evaluation within 0.01 pH for the default solution pair.

    Parameters
    ----------
    n_points : int
        Number of grid points, >= 2.
    """
    if n_points < 2:
        raise ChemistryError(f"lookup needs at least 2 points, got {n_points}")
    fractions = np.linspace(0.0, 1.0, n_points)
    ph_values = np.array([ph_of_fraction(f, supply, gating) for f in fractions])
    return PhLookup(
        fractions=fractions,
        ph_values=ph_values,
        endpoint_ph=(float(ph_values[0]), float(ph_values[-1])),
    )
