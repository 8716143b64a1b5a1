"""Model nonlinearities phi, g, d and sampled checks of their hypotheses.

The saturation equation diffuses through ``phi``, couples to the pressure
through ``g``, and the pressure equation diffuses through ``d``. The
analysis requires

* ``0 < c1 <= d(r)`` and ``c1 <= phi(r) <= c2`` (both read as lying in
  ``[c1, c2]``),
* ``|d'|, |phi'|, |phi''| <= c3``,
* ``|phi'''|`` bounded.

These are checked by sampling in :func:`verify_hypotheses`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import BPoly

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class CoefficientSet:
    """The three nonlinearities with the derivatives the linearization needs.

    ``c3`` bounds ``|d'|, |phi'|, |phi''|``; ``c_phi3`` bounds ``|phi'''|``.
    """

    phi: Func
    dphi: Func
    d2phi: Func
    d3phi: Func
    g: Func
    dg: Func
    d2g: Func
    d: Func
    dd: Func
    c1: float
    c2: float
    c3: float
    c_phi3: float = np.inf
    name: str = "custom"

    def derivative_pairs(self) -> list[tuple[str, Func, Func]]:
        return [
            ("phi'", self.phi, self.dphi),
            ("phi''", self.dphi, self.d2phi),
            ("phi'''", self.d2phi, self.d3phi),
            ("g'", self.g, self.dg),
            ("g''", self.dg, self.d2g),
            ("d'", self.d, self.dd),
        ]


def _logistic_set(c1: float, c2: float) -> CoefficientSet:
    k = c2 - c1

    def sig(r):
        return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(r, dtype=float)))

    def s1(r):
        s = sig(r)
        return s * (1 - s)

    def s2(r):
        s = sig(r)
        return s * (1 - s) * (1 - 2 * s)

    def s3(r):
        s = sig(r)
        return s * (1 - s) * (1 - 6 * s + 6 * s * s)

    def g(r):
        r = np.asarray(r, dtype=float)
        return k * np.tanh(r) * np.exp(-0.5 * r * r)

    def dg(r):
        r = np.asarray(r, dtype=float)
        t = np.tanh(r)
        return k * np.exp(-0.5 * r * r) * ((1 - t * t) - r * t)

    def d2g(r):
        r = np.asarray(r, dtype=float)
        t = np.tanh(r)
        sech2 = 1 - t * t
        # derivative of e^{-r^2/2} (sech^2 r - r tanh r)
        inner = -2 * t * sech2 - t - r * sech2
        return k * np.exp(-0.5 * r * r) * (inner - r * (sech2 - r * t))

    def phi(r):
        return c1 + k * sig(r)

    return CoefficientSet(
        phi=phi,
        dphi=lambda r: k * s1(r),
        d2phi=lambda r: k * s2(r),
        d3phi=lambda r: k * s3(r),
        g=g,
        dg=dg,
        d2g=d2g,
        d=phi,
        dd=lambda r: k * s1(r),
        c1=c1,
        c2=c2,
        # max sigma' = 1/4 dominates max |sigma''| = sqrt(3)/18
        c3=k / 4,
        c_phi3=k / 8,
        name="logistic",
    )


_FAMILIES = {"logistic": _logistic_set, "default": _logistic_set}


def builtin_set(name: str = "default", c1: float = 1.0, c2: float = 2.0) -> CoefficientSet:
    """Return a named smooth coefficient family.

    ``"default"`` (alias ``"logistic"``): ``phi = d = c1 + (c2 - c1) / (1 + e^{-r})``
    and ``g = (c2 - c1) tanh(r) e^{-r^2/2}``.
    """
    if name not in _FAMILIES:
        raise ValueError(f"unknown coefficient family {name!r}; known: {sorted(_FAMILIES)}")
    if not (c1 > 0):
        raise ValueError(f"need c1 > 0, got c1 = {c1}")
    if not (c2 > c1):
        raise ValueError(f"need c2 > c1, got c1 = {c1}, c2 = {c2}")
    return _FAMILIES[name](float(c1), float(c2))


TABLE_COLUMNS = ("r", "phi", "dphi", "d2phi", "d3phi", "g", "dg", "d2g", "d", "dd")


def tabulated_set(r, phi, dphi, d2phi, d3phi, g, dg, d2g, d, dd,
                  c1: float, c2: float, name: str = "tabulated") -> CoefficientSet:
    """Coefficients from uniform samples with derivative tables.

    Each function is a piecewise Hermite polynomial matching every supplied
    derivative at the knots (cubic for ``d``, quintic for ``g``, degree 7
    for ``phi``). Stored derivatives are exact derivatives of that
    interpolant, so they stay continuous across knots.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 2 or np.any(np.diff(r) <= 0):
        raise ValueError("table abscissae must be a strictly increasing 1-D array")
    steps = np.diff(r)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("table abscissae must be uniformly spaced")
    if not (0 < c1 < c2):
        raise ValueError(f"need 0 < c1 < c2, got c1 = {c1}, c2 = {c2}")

    def herm(*cols):
        y = np.column_stack([np.asarray(c, dtype=float) for c in cols])
        return BPoly.from_derivatives(r, y)

    P = herm(phi, dphi, d2phi, d3phi)
    G = herm(g, dg, d2g)
    D = herm(d, dd)
    P1, P2, P3 = P.derivative(1), P.derivative(2), P.derivative(3)
    G1, G2 = G.derivative(1), G.derivative(2)
    D1 = D.derivative(1)
    fine = np.linspace(r[0], r[-1], 8 * len(r))
    c3 = float(max(np.max(np.abs(D1(fine))), np.max(np.abs(P1(fine))),
                   np.max(np.abs(P2(fine)))))
    return CoefficientSet(P, P1, P2, P3, G, G1, G2, D, D1, float(c1), float(c2),
                          c3, float(np.max(np.abs(P3(fine)))), name)


def load_table(path, c1: float, c2: float) -> CoefficientSet:
    """Load a tabulated set from CSV with columns :data:`TABLE_COLUMNS`."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    missing = [c for c in TABLE_COLUMNS if c not in data.dtype.names]
    if missing:
        raise ValueError(f"{path}: missing table columns {missing}")
    return tabulated_set(*(data[c] for c in TABLE_COLUMNS), c1=c1, c2=c2,
                         name=f"table:{path}")


# ---------------------------------------------------------------------------
# Hypothesis verification
# ---------------------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    worst_r: float
    worst_value: float

    def __str__(self):
        flag = "pass" if self.passed else "FAIL"
        return f"[{flag}] {self.name}  (worst at r = {self.worst_r:.6g}: {self.worst_value:.6g})"


@dataclass
class HypothesisReport:
    r_min: float
    r_max: float
    samples: int
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self):
        head = f"hypotheses on [{self.r_min}, {self.r_max}] with {self.samples} samples"
        return "\n".join([head] + [str(c) for c in self.checks])


def _lower(name, r, vals, bound):
    k = int(np.argmin(vals))
    return Check(name, bool(np.all(vals >= bound)), float(r[k]), float(vals[k]))


def _upper(name, r, vals, bound):
    k = int(np.argmax(vals))
    return Check(name, bool(np.all(vals <= bound)), float(r[k]), float(vals[k]))


def verify_hypotheses(coef: CoefficientSet, r_min: float = -10.0, r_max: float = 10.0,
                      samples: int = 1000, fd_step: float = 1e-5,
                      fd_rtol: float = 1e-6) -> HypothesisReport:
    """Sample the hypotheses on ``[r_min, r_max]``; failures are report entries.

    Derivative consistency compares each stored derivative with a central
    difference of its parent, as a sup-norm relative error over the samples.
    """
    if not r_min < r_max:
        raise ValueError("need r_min < r_max")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    r = np.linspace(r_min, r_max, samples)
    rep = HypothesisReport(r_min, r_max, samples)
    c1, c2, c3 = coef.c1, coef.c2, coef.c3

    rep.checks.append(Check("0 < c1", c1 > 0, float("nan"), c1))
    d = coef.d(r)
    phi = coef.phi(r)
    rep.checks.append(_lower("0 < c1 <= d(r)", r, d, max(c1, np.nextafter(0, 1))))
    rep.checks.append(_upper("d(r) <= c2", r, d, c2))
    rep.checks.append(_lower("c1 <= phi(r)", r, phi, c1))
    rep.checks.append(_upper("phi(r) <= c2", r, phi, c2))
    for label, f in (("|d'(r)| <= c3", coef.dd), ("|phi'(r)| <= c3", coef.dphi),
                     ("|phi''(r)| <= c3", coef.d2phi)):
        rep.checks.append(_upper(label, r, np.abs(f(r)), c3))
    a3 = np.abs(coef.d3phi(r))
    k = int(np.argmax(a3))
    ok3 = bool(np.all(np.isfinite(a3)) and a3[k] <= coef.c_phi3)
    rep.checks.append(Check("|phi'''(r)| <= c", ok3, float(r[k]), float(a3[k])))

    for label, parent, deriv in coef.derivative_pairs():
        fd = (parent(r + fd_step) - parent(r - fd_step)) / (2 * fd_step)
        stored = deriv(r)
        err = np.abs(stored - fd)
        scale = max(float(np.max(np.abs(fd))), np.finfo(float).tiny)
        k = int(np.argmax(err))
        rep.checks.append(Check(f"{label} matches central difference",
                                bool(err[k] <= fd_rtol * scale), float(r[k]),
                                float(err[k] / scale)))
    return rep
