"""Linearized frequency-domain model of the piezo-optomechanical transducer.

All rates and frequencies are angular (rad/s) and live in the frame rotating
with the pump laser: the pump sits at zero, the transduced signal appears
near the mechanical resonance, and the ring detunings ``delta_1``/``delta_2``
locate the bare optical resonances relative to the pump.

The closed-form responses here are algebraically identical to solving the
signal-flow graph built by :func:`transducer_graph`; both routes are exposed
and cross-checked in the test suite.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from . import sfg
from .constants import HBAR, SPEED_OF_LIGHT
from .errors import ModelViolationError, ParameterError, SingularityError

_SINGULARITY_RTOL = 1e-14
_GAMMA_M_CHECK_RTOL = 0.02


@dataclass(frozen=True)
class TransducerParams:
    """Rate/detuning parameter set of the transducer (all angular, rad/s).

    ``gamma_ex`` may be supplied directly (it is normally a measured quantity);
    when omitted it is derived from the electromechanical coupling, see
    :func:`derived_rates`.  ``gamma_m_supplied`` is an optional consistency
    input: it must agree with the derived total mechanical linewidth within
    2 %.  ``lambda_l`` (pump vacuum wavelength, metres) is used only by the
    pump-power mapping.
    """

    omega_m: float
    gamma_0: float
    Gamma_0: float
    Gamma: float
    g_em: float
    J: float
    delta_1: float
    delta_2: float
    kappa_1: float
    kappa_02: float
    kappa_ex2: float
    g_om: float
    gamma_ex: float | None = None
    gamma_m_supplied: float | None = None
    lambda_l: float | None = None

    def __post_init__(self):
        nonneg = (
            ("gamma_0", self.gamma_0), ("Gamma_0", self.Gamma_0), ("Gamma", self.Gamma),
            ("g_em", self.g_em), ("J", self.J), ("kappa_1", self.kappa_1),
            ("kappa_02", self.kappa_02), ("kappa_ex2", self.kappa_ex2),
            ("g_om", self.g_om),
        )
        for name, value in nonneg:
            if value < 0:
                raise ParameterError(f"{name} must be >= 0, got {value}")
        if self.omega_m <= 0:
            raise ParameterError(f"omega_m must be > 0, got {self.omega_m}")
        if self.Gamma < self.Gamma_0:
            raise ParameterError("total microwave linewidth Gamma must be >= Gamma_0")
        if self.gamma_ex is not None and self.gamma_ex < 0:
            raise ParameterError("gamma_ex must be >= 0")
        if self.lambda_l is not None and self.lambda_l <= 0:
            raise ParameterError("lambda_l must be > 0")

        gamma_m = self.gamma_0 + self._piezo_broadening()
        if self.gamma_ex is not None and self.gamma_ex > gamma_m * (1 + 1e-12):
            raise ParameterError(
                f"supplied gamma_ex ({self.gamma_ex:.6g}) exceeds the total mechanical "
                f"linewidth gamma_m ({gamma_m:.6g})"
            )
        if self.gamma_m_supplied is not None:
            if gamma_m == 0 or abs(self.gamma_m_supplied - gamma_m) > _GAMMA_M_CHECK_RTOL * gamma_m:
                raise ParameterError(
                    f"supplied gamma_m ({self.gamma_m_supplied:.6g}) disagrees with the "
                    f"derived value gamma_0 + 4 g_em^2 / Gamma ({gamma_m:.6g}) by more than 2%"
                )

    def _piezo_broadening(self) -> float:
        if self.Gamma == 0:
            if self.g_em:
                raise ParameterError("Gamma must be > 0 when g_em is nonzero")
            return 0.0
        return 4 * self.g_em**2 / self.Gamma


@dataclass(frozen=True)
class DerivedRates:
    """Rates derived from a :class:`TransducerParams` record.

    ``gamma_ex`` is the effective value (the supplied one when present);
    ``gamma_ex_derived`` is always the value implied by the electromechanical
    coupling so callers can report the relative discrepancy.
    """

    gamma_m: float
    kappa_2: float
    gamma_ex: float
    gamma_ex_derived: float

    @property
    def gamma_ex_discrepancy(self) -> float:
        """Relative difference between effective and derived gamma_ex."""
        if self.gamma_ex_derived == 0:
            return 0.0 if self.gamma_ex == 0 else math.inf
        return abs(self.gamma_ex - self.gamma_ex_derived) / self.gamma_ex_derived


def derived_rates(p: TransducerParams) -> DerivedRates:
    """Total mechanical linewidth, second-ring linewidth and gamma_ex.

    gamma_m = gamma_0 + 4 g_em^2 / Gamma, kappa_2 = kappa_02 + kappa_ex2 and
    gamma_ex = 4 g_em^2 (Gamma - Gamma_0) / Gamma^2 unless a supplied value
    overrides it (the derived value is still reported alongside).
    """
    gamma_m = p.gamma_0 + p._piezo_broadening()
    kappa_2 = p.kappa_02 + p.kappa_ex2
    if p.Gamma > 0:
        gamma_ex_derived = 4 * p.g_em**2 * (p.Gamma - p.Gamma_0) / p.Gamma**2
    else:
        gamma_ex_derived = 0.0
    gamma_ex = p.gamma_ex if p.gamma_ex is not None else gamma_ex_derived
    return DerivedRates(gamma_m=gamma_m, kappa_2=kappa_2,
                        gamma_ex=gamma_ex, gamma_ex_derived=gamma_ex_derived)


def with_derived_gamma_ex(p: TransducerParams) -> TransducerParams:
    """Copy of ``p`` with any supplied gamma_ex dropped in favour of the derived relation."""
    return replace(p, gamma_ex=None)


@dataclass(frozen=True)
class Susceptibility:
    """Complex Lorentzian response 1 / (-i (omega - center) + halfwidth)."""

    center: float
    halfwidth: float

    def __post_init__(self):
        if self.halfwidth <= 0:
            raise ParameterError(f"susceptibility halfwidth must be > 0, got {self.halfwidth}")

    def __call__(self, omega):
        return 1.0 / (-1j * (np.asarray(omega) - self.center) + self.halfwidth)

    @property
    def peak_value(self) -> float:
        return 1.0 / self.halfwidth

    @property
    def fwhm(self) -> float:
        """Full width at half maximum of the squared magnitude."""
        return 2.0 * self.halfwidth


def chi_m(p: TransducerParams) -> Susceptibility:
    return Susceptibility(p.omega_m, derived_rates(p).gamma_m / 2)


def chi_01(p: TransducerParams) -> Susceptibility:
    return Susceptibility(p.delta_1, p.kappa_1 / 2)


def chi_02(p: TransducerParams) -> Susceptibility:
    return Susceptibility(p.delta_2, derived_rates(p).kappa_2 / 2)


def chi_mw(p: TransducerParams) -> float:
    """Flat-band approximation of the microwave cavity susceptibility, 2/Gamma."""
    if p.Gamma <= 0:
        raise ParameterError("Gamma must be > 0")
    return 2.0 / p.Gamma


@dataclass(frozen=True)
class OperatingPoint:
    """Parameter set plus the linearization point of the pump field.

    ``intra_ring_photons`` is |a1|^2, the mean photon number of the pump in
    the first ring; ``pump_phase`` is the phase of the mean field a1.
    """

    params: TransducerParams
    intra_ring_photons: float
    pump_phase: float = 0.0

    def __post_init__(self):
        if self.intra_ring_photons < 0:
            raise ParameterError("intra_ring_photons must be >= 0")

    @property
    def a1(self) -> complex:
        return math.sqrt(self.intra_ring_photons) * cmath.exp(1j * self.pump_phase)


def _denominator(op: OperatingPoint, omega):
    p = op.params
    r = derived_rates(p)
    c_m = chi_m(p)(omega)
    c01 = chi_01(p)(omega)
    c02 = chi_02(p)(omega)
    loop_om = p.g_om**2 * op.intra_ring_photons * c01 * c_m
    loop_12 = p.J**2 * c01 * c02
    return (1 + loop_om + loop_12, loop_om, loop_12, c_m, c01, c02, r)


def _check_denominator(delta, loop_om, loop_12, omega):
    scale = 1.0 + np.abs(loop_om) + np.abs(loop_12)
    bad = np.abs(delta) < _SINGULARITY_RTOL * scale
    if np.any(bad):
        w = np.asarray(omega)
        offending = w[bad] if w.shape else w
        raise SingularityError(offending, "transduction denominator vanished")


def transduction_amplitude(op: OperatingPoint, omega):
    """Microwave-in to optics-out conversion amplitude at signal frequency ``omega``.

    Closed form from the equations of motion: the single conversion path
    carries sqrt(kappa_ex2) sqrt(gamma_ex) chi_01 chi_02 chi_m (i g_om a1)(i J)
    over the graph determinant 1 + g_om^2 |a1|^2 chi_01 chi_m + J^2 chi_01 chi_02.
    Accepts scalar or array ``omega``.
    """
    p = op.params
    delta, loop_om, loop_12, c_m, c01, c02, r = _denominator(op, omega)
    _check_denominator(delta, loop_om, loop_12, omega)
    num = (
        math.sqrt(p.kappa_ex2) * math.sqrt(r.gamma_ex)
        * c01 * c02 * c_m * (1j * p.g_om * op.a1) * (1j * p.J)
    )
    out = num / delta
    if np.ndim(omega) == 0:
        return complex(out)
    return out


def transducer_graph(op: OperatingPoint) -> sfg.SignalFlowGraph:
    """Signal-flow graph of the linearized transducer.

    Sources are the microwave input ``c_in``, the optical bus input ``a_in``
    and the intrinsic noise ports ``f_m``, ``f_01``, ``f_02``; the sink is the
    bus output ``a_out``.  Edge gains are closures over angular frequency, so
    one graph serves all frequencies.
    """
    p = op.params
    r = derived_rates(p)
    xm = chi_m(p)
    x01 = chi_01(p)
    x02 = chi_02(p)
    a1 = op.a1

    def edge(src, dst, fn, label):
        return sfg.SfgEdge(src, dst, fn, label)

    edges = [
        edge("c_in", "b", lambda w: math.sqrt(r.gamma_ex) * xm(w), "sqrt(gamma_ex) chi_m"),
        edge("f_m", "b", lambda w: math.sqrt(p.gamma_0) * xm(w), "sqrt(gamma_0) chi_m"),
        edge("a1", "b", lambda w: 1j * p.g_om * np.conj(a1) * xm(w), "i g_om a1* chi_m"),
        edge("b", "a1", lambda w: 1j * p.g_om * a1 * x01(w), "i g_om a1 chi_01"),
        edge("a2", "a1", lambda w: 1j * p.J * x01(w), "i J chi_01"),
        edge("f_01", "a1", lambda w: math.sqrt(p.kappa_1) * x01(w), "sqrt(kappa_01) chi_01"),
        edge("a1", "a2", lambda w: 1j * p.J * x02(w), "i J chi_02"),
        edge("f_02", "a2", lambda w: math.sqrt(p.kappa_02) * x02(w), "sqrt(kappa_02) chi_02"),
        edge("a_in", "a2", lambda w: math.sqrt(p.kappa_ex2) * x02(w), "sqrt(kappa_ex2) chi_02"),
        edge("a2", "a_out", lambda w: math.sqrt(p.kappa_ex2), "sqrt(kappa_ex2)"),
        edge("a_in", "a_out", lambda w: -1.0, "-1"),
    ]
    nodes = [
        sfg.SfgNode("c_in", "source"), sfg.SfgNode("a_in", "source"),
        sfg.SfgNode("f_m", "source"), sfg.SfgNode("f_01", "source"),
        sfg.SfgNode("f_02", "source"),
        sfg.SfgNode("b"), sfg.SfgNode("a1"), sfg.SfgNode("a2"),
        sfg.SfgNode("a_out", "sink"),
    ]
    return sfg.SignalFlowGraph(nodes, edges)


def transduction_amplitude_via_graph(op: OperatingPoint, omega: float) -> complex:
    """Same quantity as :func:`transduction_amplitude`, evaluated through Mason's rule."""
    return sfg.mason_gain(transducer_graph(op), "c_in", "a_out", omega)


def efficiency(op: OperatingPoint, omega):
    """Transduction efficiency |amplitude|^2 in [0, 1].

    Values above 1 + 1e-9 signal an invalid (non-passive) parameter set and
    raise :class:`ModelViolationError`; nothing is clamped.
    """
    eta = np.abs(transduction_amplitude(op, omega)) ** 2
    if np.any(eta > 1 + 1e-9):
        raise ModelViolationError(
            f"efficiency exceeded unity (max {float(np.max(eta)):.12g}); parameter set is unphysical"
        )
    if np.ndim(omega) == 0:
        return float(eta)
    return eta


def intra_ring_gain(p: TransducerParams, omega):
    """Pump amplitude ratio a1/a_in of the coupled-ring pair at ``omega``.

    i J chi_01 chi_02 sqrt(kappa_ex2) / (1 + J^2 chi_01 chi_02); its squared
    magnitude (units of seconds) converts input photon flux to intra-ring
    photon number.
    """
    c01 = chi_01(p)(omega)
    c02 = chi_02(p)(omega)
    loop = p.J**2 * c01 * c02
    delta = 1 + loop
    scale = 1.0 + np.abs(loop)
    if np.any(np.abs(delta) < _SINGULARITY_RTOL * scale):
        raise SingularityError(omega, "ring-pair denominator vanished")
    out = 1j * p.J * c01 * c02 * math.sqrt(p.kappa_ex2) / delta
    if np.ndim(omega) == 0:
        return complex(out)
    return out


def enhancement_peak_value(p: TransducerParams) -> float:
    """On-resonance cavity enhancement factor (squared gain at the split peaks).

    64 J^2 kappa_ex2 / ((kappa_1+kappa_2)^2 |(kappa_1-kappa_2)^2 - 16 J^2|),
    in seconds.
    """
    k2 = derived_rates(p).kappa_2
    num = 64 * p.J**2 * p.kappa_ex2
    den = (p.kappa_1 + k2) ** 2 * abs((p.kappa_1 - k2) ** 2 - 16 * p.J**2)
    if den == 0:
        raise ParameterError("degenerate ring-pair parameters")
    return num / den


@dataclass(frozen=True)
class EnhancementResonances:
    """Stationary points of the cavity enhancement factor.

    When 8 J^2 <= kappa_1^2 + kappa_2^2 the splitting collapses; both values
    equal delta_1 and ``degenerate`` is set instead of raising.
    """

    lower: float
    upper: float
    degenerate: bool = False

    @property
    def pair(self) -> tuple[float, float]:
        return (self.lower, self.upper)


def enhancement_resonances(p: TransducerParams) -> EnhancementResonances:
    """Frequencies maximizing the pump enhancement: delta_1 +/- J sqrt(1 - (k1^2+k2^2)/(8J^2))."""
    k2 = derived_rates(p).kappa_2
    discr = 1.0 - (p.kappa_1**2 + k2**2) / (8 * p.J**2) if p.J else -1.0
    if discr <= 0:
        return EnhancementResonances(p.delta_1, p.delta_1, degenerate=True)
    off = p.J * math.sqrt(discr)
    return EnhancementResonances(p.delta_1 - off, p.delta_1 + off)


def photon_flux(p: TransducerParams, power: float) -> float:
    """Input photon flux |a_in|^2 = P lambda_L / (2 pi hbar c) in photons/s."""
    if p.lambda_l is None:
        raise ParameterError("lambda_l (pump wavelength) is required for power mapping")
    if power < 0:
        raise ParameterError("power must be >= 0")
    return power * p.lambda_l / (2 * math.pi * HBAR * SPEED_OF_LIGHT)


def pump_power_to_photons(p: TransducerParams, power: float,
                          pump_offset: float | None = None) -> float:
    """Intra-ring pump photon number |a1|^2 produced by ``power`` watts.

    The pump is placed at ``pump_offset`` (rad/s, rotating frame); by default
    it sits on the lower enhancement resonance of the ring pair.
    """
    if pump_offset is None:
        pump_offset = enhancement_resonances(p).lower
    gain = intra_ring_gain(p, pump_offset)
    return abs(gain) ** 2 * photon_flux(p, power)


# --- parameter file I/O ----------------------------------------------------

#: JSON key -> (field name, kind); frequencies are plain Hz in files and
#: converted to angular rad/s internally.
_PARAM_KEYS: Mapping[str, tuple[str, str]] = {
    "omega_m_hz": ("omega_m", "freq"),
    "gamma_0_hz": ("gamma_0", "freq"),
    "Gamma_0_hz": ("Gamma_0", "freq"),
    "Gamma_hz": ("Gamma", "freq"),
    "g_em_hz": ("g_em", "freq"),
    "gamma_ex_hz": ("gamma_ex", "freq"),
    "gamma_m_hz": ("gamma_m_supplied", "freq"),
    "J_hz": ("J", "freq"),
    "delta_1_hz": ("delta_1", "freq"),
    "delta_2_hz": ("delta_2", "freq"),
    "kappa_1_hz": ("kappa_1", "freq"),
    "kappa_02_hz": ("kappa_02", "freq"),
    "kappa_ex2_hz": ("kappa_ex2", "freq"),
    "g_om_hz": ("g_om", "freq"),
    "lambda_l_m": ("lambda_l", "length"),
}

_REQUIRED_KEYS = (
    "omega_m_hz", "gamma_0_hz", "Gamma_0_hz", "Gamma_hz", "g_em_hz", "J_hz",
    "delta_1_hz", "delta_2_hz", "kappa_1_hz", "kappa_02_hz", "kappa_ex2_hz",
    "g_om_hz",
)


def params_from_dict(data: Mapping) -> TransducerParams:
    """Build a parameter record from a flat mapping with ``*_hz`` keys (Hz)."""
    unknown = sorted(set(data) - set(_PARAM_KEYS))
    if unknown:
        raise ParameterError(f"unknown parameter keys: {unknown}")
    missing = sorted(k for k in _REQUIRED_KEYS if k not in data)
    if missing:
        raise ParameterError(f"missing parameter keys: {missing}")
    kwargs = {}
    for key, raw in data.items():
        field_name, kind = _PARAM_KEYS[key]
        try:
            value = float(raw)
        except (TypeError, ValueError) as exc:
            raise ParameterError(f"parameter {key} is not a number: {raw!r}") from exc
        kwargs[field_name] = 2 * math.pi * value if kind == "freq" else value
    return TransducerParams(**kwargs)


def params_to_dict(p: TransducerParams) -> dict:
    """Inverse of :func:`params_from_dict` (frequencies back to plain Hz)."""
    out = {}
    for key, (field_name, kind) in _PARAM_KEYS.items():
        value = getattr(p, field_name)
        if value is None:
            continue
        out[key] = value / (2 * math.pi) if kind == "freq" else value
    return out


def load_params(path) -> TransducerParams:
    """Read a parameter JSON file (flat object, unknown keys rejected)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError(f"parameter file {path} must contain a flat JSON object")
    return params_from_dict(data)
