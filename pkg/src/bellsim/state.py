"""Sparse photonic states over polarization, OAM and path modes.

A single photon lives in the product space

    {H, V}  x  {-lmax, ..., +lmax}  x  {declared paths}

and is stored as a sparse map from basis modes to complex amplitudes.
States are treated as immutable values: every operation returns a new
state and never mutates its inputs.

Conventions pinned here (and relied on everywhere else):

* circular basis  |L> = (|H> + i|V>)/sqrt(2),  |R> = (|H> - i|V>)/sqrt(2)
* amplitudes with magnitude <= DROP_EPS are dropped after linear maps
  (exact zeros created by interference), never amplitudes that matter
* OAM indices outside the truncation bound are an error, never wrapped
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union

from .errors import DimensionMismatch, OamOverflow, UnknownPath, ZeroNorm

__all__ = [
    "POL_H",
    "POL_V",
    "POLARIZATIONS",
    "DROP_EPS",
    "NORM_TOL",
    "DEFAULT_LMAX",
    "CIRCULAR_EXPANSION",
    "BasisMode",
    "ModeSpace",
    "PhotonState",
    "TwoPhotonState",
    "basis_state",
    "superpose",
    "tensor",
    "fidelity",
    "equal_up_to_global_phase",
    "max_amplitude_difference",
    "marginal_probabilities",
]

POL_H = "H"
POL_V = "V"
POLARIZATIONS = (POL_H, POL_V)

#: magnitude below which an amplitude is considered an interference zero
DROP_EPS = 1e-15
#: tolerance on unit norm after any normalized construction
NORM_TOL = 1e-12
DEFAULT_LMAX = 4

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

#: linear-basis amplitudes of the circular states: |L> and |R> as {pol: amp}
CIRCULAR_EXPANSION = {
    "L": {POL_H: complex(_INV_SQRT2), POL_V: 1j * _INV_SQRT2},
    "R": {POL_H: complex(_INV_SQRT2), POL_V: -1j * _INV_SQRT2},
}


class BasisMode(NamedTuple):
    """One basis mode of a single photon."""

    pol: str
    oam: int
    path: str

    def __str__(self) -> str:  # |H,+1,a1>
        return f"|{self.pol},{self.oam:+d},{self.path}>"


@dataclass(frozen=True)
class ModeSpace:
    """Truncated mode universe: OAM bound plus the declared path set.

    Args:
        lmax: inclusive bound on |l|.
        paths: declared path labels, order preserved (it fixes the dense
            basis ordering used by the matrix oracle).
    """

    lmax: int = DEFAULT_LMAX
    paths: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.lmax < 1:
            raise ValueError("lmax must be a positive integer")
        if len(set(self.paths)) != len(self.paths):
            raise ValueError(f"duplicate path labels in {self.paths}")

    # -- validation -----------------------------------------------------

    def check_oam(self, oam: int) -> int:
        if abs(oam) > self.lmax:
            raise OamOverflow(f"OAM index {oam:+d} exceeds bound lmax={self.lmax}")
        return oam

    def check_path(self, path: str) -> str:
        if path not in self.paths:
            raise UnknownPath(f"path {path!r} is not declared (have {list(self.paths)})")
        return path

    def check_mode(self, mode: BasisMode) -> BasisMode:
        if mode.pol not in POLARIZATIONS:
            raise ValueError(f"unknown polarization {mode.pol!r}")
        self.check_oam(mode.oam)
        self.check_path(mode.path)
        return mode

    # -- dense-basis bookkeeping ---------------------------------------

    @property
    def dimension(self) -> int:
        return 2 * (2 * self.lmax + 1) * len(self.paths)

    def modes(self) -> list[BasisMode]:
        """All basis modes in dense order: path-major, then OAM, then pol."""
        out = []
        for path in self.paths:
            for oam in range(-self.lmax, self.lmax + 1):
                for pol in POLARIZATIONS:
                    out.append(BasisMode(pol, oam, path))
        return out

    def index(self, mode: BasisMode) -> int:
        path_i = self.paths.index(mode.path)
        oam_i = mode.oam + self.lmax
        pol_i = POLARIZATIONS.index(mode.pol)
        return (path_i * (2 * self.lmax + 1) + oam_i) * 2 + pol_i

    def extended(self, extra_paths: Iterable[str]) -> "ModeSpace":
        """Same OAM bound with additional paths appended (scoped internals)."""
        new = tuple(p for p in extra_paths if p not in self.paths)
        return ModeSpace(self.lmax, self.paths + new)


def _clean(amps: dict, drop: float = DROP_EPS) -> dict:
    return {m: a for m, a in amps.items() if abs(a) > drop}


@dataclass(frozen=True)
class PhotonState:
    """Sparse single-photon state: map of BasisMode -> complex amplitude."""

    space: ModeSpace
    amplitudes: dict[BasisMode, complex]

    def __post_init__(self) -> None:
        for mode in self.amplitudes:
            self.space.check_mode(mode)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def amplitude(self, mode: BasisMode) -> complex:
        return self.amplitudes.get(mode, 0.0 + 0.0j)

    def items_sorted(self) -> list[tuple[BasisMode, complex]]:
        return sorted(self.amplitudes.items(), key=lambda kv: self.space.index(kv[0]))

    def __str__(self) -> str:
        parts = [f"({a.real:+.4f}{a.imag:+.4f}j){m}" for m, a in self.items_sorted()]
        return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class TwoPhotonState:
    """Sparse two-photon state over ordered (mode_A, mode_B) pairs.

    The photons are distinguishable (different spatial inputs), so no
    symmetrization is applied; both factors share one mode space.
    """

    space: ModeSpace
    amplitudes: dict[tuple[BasisMode, BasisMode], complex]

    def __post_init__(self) -> None:
        for ma, mb in self.amplitudes:
            self.space.check_mode(ma)
            self.space.check_mode(mb)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def amplitude(self, pair: tuple[BasisMode, BasisMode]) -> complex:
        return self.amplitudes.get(pair, 0.0 + 0.0j)

    def _pair_index(self, pair: tuple[BasisMode, BasisMode]) -> tuple[int, int]:
        return (self.space.index(pair[0]), self.space.index(pair[1]))

    def items_sorted(self) -> list[tuple[tuple[BasisMode, BasisMode], complex]]:
        return sorted(self.amplitudes.items(), key=lambda kv: self._pair_index(kv[0]))

    def with_space(self, space: ModeSpace) -> "TwoPhotonState":
        """Re-host the same amplitudes in a compatible (super)space."""
        return TwoPhotonState(space, dict(self.amplitudes))


State = Union[PhotonState, TwoPhotonState]


def basis_state(space: ModeSpace, pol: str, oam: int, path: str) -> PhotonState:
    """Unit-amplitude state on a single declared mode.

    Raises:
        OamOverflow: if |oam| exceeds the space bound.
        UnknownPath: if the path is not declared.
    """
    mode = space.check_mode(BasisMode(pol, oam, path))
    return PhotonState(space, {mode: 1.0 + 0.0j})


def superpose(terms: Iterable[tuple[complex, State]]) -> State:
    """Normalized linear combination of same-space states.

    Args:
        terms: (coefficient, state) pairs; all states must share one mode
            space and arity.

    Raises:
        ZeroNorm: if the combination has (almost) zero total norm.
        DimensionMismatch: if the states disagree on space or photon count.
    """
    terms = list(terms)
    if not terms:
        raise ZeroNorm("superpose called with no terms")
    first = terms[0][1]
    amps: dict = {}
    for coeff, st in terms:
        if st.space != first.space or type(st) is not type(first):
            raise DimensionMismatch("superpose terms live in different spaces")
        for mode, a in st.amplitudes.items():
            amps[mode] = amps.get(mode, 0.0 + 0.0j) + coeff * a
    amps = _clean(amps)
    nrm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    if nrm < NORM_TOL:
        raise ZeroNorm("superposition has zero norm")
    amps = {m: a / nrm for m, a in amps.items()}
    if isinstance(first, PhotonState):
        return PhotonState(first.space, amps)
    return TwoPhotonState(first.space, amps)


def tensor(state_a: PhotonState, state_b: PhotonState) -> TwoPhotonState:
    """Ordered product state (photon A factor first)."""
    if state_a.space != state_b.space:
        raise DimensionMismatch("tensor factors live in different mode spaces")
    amps: dict[tuple[BasisMode, BasisMode], complex] = {}
    for ma, aa in state_a.amplitudes.items():
        for mb, ab in state_b.amplitudes.items():
            amps[(ma, mb)] = aa * ab
    return TwoPhotonState(state_a.space, _clean(amps))


def _check_comparable(x: State, y: State) -> None:
    if type(x) is not type(y) or x.space != y.space:
        raise DimensionMismatch("states are not comparable (space or arity differs)")


def _overlap(x: State, y: State) -> complex:
    shared = x.amplitudes.keys() & y.amplitudes.keys()
    return sum((x.amplitudes[m].conjugate() * y.amplitudes[m] for m in shared), 0.0 + 0.0j)


def fidelity(x: State, y: State) -> float:
    """|<x|y>|^2 for unit-normalized same-space states."""
    _check_comparable(x, y)
    return abs(_overlap(x, y)) ** 2


def equal_up_to_global_phase(x: State, y: State, tol: float = 1e-10) -> bool:
    """True when the states differ by at most one overall unit phase."""
    return fidelity(x, y) >= 1.0 - tol


def max_amplitude_difference(x: State, y: State) -> float:
    """Exact-phase comparison: max |x_m - y_m| over the union of modes.

    Stricter than fidelity; used by truth-table and calibration tests where
    even a global phase must match.
    """
    _check_comparable(x, y)
    worst = 0.0
    for mode in x.amplitudes.keys() | y.amplitudes.keys():
        worst = max(worst, abs(x.amplitude(mode) - y.amplitude(mode)))
    return worst


def global_phase_between(x: State, y: State) -> complex:
    """Unit phase c with y ~ c*x (meaningful when fidelity(x, y) is ~1)."""
    _check_comparable(x, y)
    ov = _overlap(x, y)
    if abs(ov) < NORM_TOL:
        raise ZeroNorm("states are orthogonal; no relating phase")
    return ov / abs(ov)


def marginal_probabilities(state: TwoPhotonState, photon: str) -> dict[BasisMode, float]:
    """Born probabilities of one photon, the other traced out.

    Args:
        photon: "A" (first factor) or "B" (second factor).
    """
    if photon not in ("A", "B"):
        raise ValueError("photon must be 'A' or 'B'")
    sel = 0 if photon == "A" else 1
    probs: dict[BasisMode, float] = {}
    for pair, amp in state.amplitudes.items():
        mode = pair[sel]
        probs[mode] = probs.get(mode, 0.0) + abs(amp) ** 2
    return probs


def circular_state(space: ModeSpace, which: str, oam: int, path: str) -> PhotonState:
    """|L> or |R> at the given OAM and path, in the pinned phase convention."""
    if which not in CIRCULAR_EXPANSION:
        raise ValueError("which must be 'L' or 'R'")
    amps = {
        BasisMode(pol, space.check_oam(oam), space.check_path(path)): amp
        for pol, amp in CIRCULAR_EXPANSION[which].items()
    }
    return PhotonState(space, amps)


def phase_of(amp: complex) -> float:
    """Argument of a complex amplitude (radians); helper for reports."""
    return cmath.phase(amp)
