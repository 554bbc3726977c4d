"""Momentum extrapolation wrappers for the scheme steps.

Two strategies share the FISTA-style momentum clock tau: the standard
extrapolation adds coeff * (y_t - y_prev) with a nonnegative projection,
and the bounded log variant multiplies y_t by a clamped power of the
update ratio, i.e. momentum applied to the entry logarithms. The log
variant keeps absorbing zeros absorbing and never moves an entry outside
[0.1 * y_t, 10 * y_t].
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .schemes import FactorState, SchemeKind

GOLDEN_TAU = (1.0 + math.sqrt(5.0)) / 2.0
LOG_WARMUP = 10  # raw updates before log extrapolation engages
RATIO_LO = 0.1
RATIO_HI = 10.0


class ExtrapolationKind(str, Enum):
    NONE = "none"
    STANDARD = "standard"
    LOG = "log"


@dataclass
class ExtrapolationState:
    """Momentum clock plus the previous raw iterate per factor."""

    kind: ExtrapolationKind
    tau: float = GOLDEN_TAU
    y_prev: dict | None = None
    warmup_remaining: int = 0

    @classmethod
    def create(cls, kind, warmup=None):
        kind = ExtrapolationKind(kind)
        if warmup is None:
            warmup = LOG_WARMUP if kind is ExtrapolationKind.LOG else 0
        return cls(kind=kind, warmup_remaining=warmup)


def tau_next(tau):
    """Momentum recurrence tau <- (1 + sqrt(1 + 4 tau^2)) / 2, increasing."""
    return (1.0 + math.sqrt(1.0 + 4.0 * tau * tau)) / 2.0


def momentum_coeff(tau):
    """(tau - 1)/(tau + 1), in (0, 1) for tau > 1 and increasing to 1."""
    return (tau - 1.0) / (tau + 1.0)


def extrapolate_standard(y_t, y_prev, tau, nonneg=True):
    """y_t + coeff * (y_t - y_prev), projected to >= 0 unless nonneg=False.

    The projection applies in the nonnegative schemes; dictionary learning
    carries signed entries and skips it.
    """
    out = y_t + momentum_coeff(tau) * (y_t - y_prev)
    if nonneg:
        out = np.maximum(out, 0.0)
    return out


def extrapolate_log(y_t, y_prev, tau):
    """y_t * clamp((y_t / y_prev)^coeff, 0.1, 10) entrywise.

    Ratio conventions: 0/0 -> 1 (no extrapolation, zeros stay absorbing),
    positive/0 -> the upper clamp, and a zero y_t stays zero.
    """
    coeff = momentum_coeff(tau)
    safe_prev = np.where(y_prev > 0.0, y_prev, 1.0)
    ratio = np.where(
        y_prev > 0.0, y_t / safe_prev, np.where(y_t > 0.0, np.inf, 1.0)
    )
    factor = np.clip(ratio**coeff, RATIO_LO, RATIO_HI)
    return y_t * factor


def _factors(state):
    return {"B": state.B, "C": state.C}


def wrap_step(scheme_step, ex_state, scheme_kind):
    """Decorate a state -> state scheme step with extrapolation.

    The raw step produces y_t; once the warmup budget is spent, each factor
    is extrapolated against the previous raw iterate and tau advances once
    per full sweep. y_t itself (not the extrapolated point) is stored for
    the next momentum difference. With kind NONE the raw step is returned
    unchanged.
    """
    scheme_kind = SchemeKind(scheme_kind)
    if ex_state.kind is ExtrapolationKind.NONE:
        return scheme_step
    if ex_state.kind is ExtrapolationKind.LOG and scheme_kind is SchemeKind.DL:
        raise ConfigError("log extrapolation is undefined for signed DL factors")

    def stepped(state):
        pre_factors = _factors(state) if ex_state.y_prev is None else None
        y = scheme_step(state)
        if ex_state.warmup_remaining > 0:
            ex_state.warmup_remaining -= 1
            ex_state.y_prev = _factors(y)
            return y
        y_prev = ex_state.y_prev if ex_state.y_prev is not None else pre_factors
        if ex_state.kind is ExtrapolationKind.STANDARD:
            nonneg = scheme_kind is not SchemeKind.DL
            B = extrapolate_standard(y.B, y_prev["B"], ex_state.tau, nonneg=nonneg)
            C = None
            if y.C is not None:
                C = extrapolate_standard(y.C, y_prev["C"], ex_state.tau, nonneg=nonneg)
        else:
            B = extrapolate_log(y.B, y_prev["B"], ex_state.tau)
            C = None
            if y.C is not None:
                C = extrapolate_log(y.C, y_prev["C"], ex_state.tau)
        ex_state.tau = tau_next(ex_state.tau)
        ex_state.y_prev = _factors(y)
        return FactorState(B, C, y.iteration)

    return stepped
