"""Look-back laws on the positive integers.

Two parametric heavy-tailed families are provided, both specified through
their tail ``T(n) = mu{n, n+1, ...}``:

* ``power``:  ``T(n) = n**-alpha``
* ``logpow``: ``T(n) = n**-alpha * log(n - 1 + e)**beta``

plus explicit finite-support laws (``finite``), used as exactly solvable
controls.  The pmf is always obtained by differencing the tail.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

__all__ = [
    "TailLaw",
    "FiniteLaw",
    "LawError",
    "make_tail_law",
    "finite_law",
    "parse_law",
    "tail",
    "pmf",
    "sample_k",
    "uniforms",
]

DENSE_SCAN = 10_000
DEFAULT_VALIDATION_CAP = 10_000_000


class LawError(ValueError):
    """Invalid law parameters."""


@dataclass(frozen=True)
class TailLaw:
    """A member of the regularly varying class with exponent ``alpha``.

    Use :func:`make_tail_law` to build one; it validates that the pmf is
    non-negative.
    """

    alpha: float
    svf: str = "constant"
    beta: float = 0.0
    validated_up_to: int = DEFAULT_VALIDATION_CAP

    @property
    def kind(self) -> int:
        return _kernels.LAW_POWER if self.svf == "constant" else _kernels.LAW_LOGPOW

    def slowly_varying(self, x):
        """L(x) with T(x) = x**-alpha * L(x)."""
        x = np.asarray(x, dtype=float)
        if self.svf == "constant":
            return np.ones_like(x)
        return np.log(x - 1.0 + math.e) ** self.beta

    def tail(self, n):
        n = np.asarray(n, dtype=float)
        return n ** (-self.alpha) * self.slowly_varying(n)

    def pmf(self, n):
        n = np.asarray(n, dtype=float)
        return self.tail(n) - self.tail(n + 1.0)

    def kernel_params(self):
        return self.kind, float(self.alpha), float(self.beta), np.zeros(1)

    @property
    def label(self) -> str:
        if self.svf == "constant":
            return f"power:alpha={self.alpha:g}"
        return f"logpow:alpha={self.alpha:g},beta={self.beta:g}"

    def to_dict(self) -> dict:
        return {"label": self.label, "family": self.svf, "alpha": self.alpha,
                "beta": self.beta, "validated_up_to": self.validated_up_to}


@dataclass(frozen=True)
class FiniteLaw:
    """Law with finite support {1, ..., len(weights)}."""

    weights: tuple
    _tail: np.ndarray = field(init=False, repr=False, compare=False)

    alpha = None
    svf = "finite"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not np.isclose(w.sum(), 1.0, atol=1e-12):
            raise LawError(f"finite law weights must be non-negative and sum to 1, got {self.weights}")
        # T(1..m+1); T(m+1) = 0
        t = np.concatenate([[1.0], 1.0 - np.cumsum(w)])
        t[-1] = 0.0
        t = np.clip(t, 0.0, 1.0)
        object.__setattr__(self, "_tail", t)

    @property
    def support_max(self) -> int:
        return len(self.weights)

    def slowly_varying(self, x):
        raise LawError("finite-support law has no regularly varying tail")

    def tail(self, n):
        n = np.asarray(n, dtype=np.int64)
        idx = np.clip(n - 1, 0, len(self._tail) - 1)
        return np.where(n > len(self.weights), 0.0, self._tail[idx])

    def pmf(self, n):
        n = np.asarray(n, dtype=np.int64)
        return self.tail(n) - self.tail(n + 1)

    def kernel_params(self):
        return _kernels.LAW_FINITE, 0.0, 0.0, self._tail

    @property
    def label(self) -> str:
        return "finite:" + ",".join(f"{w:g}" for w in self.weights)

    def to_dict(self) -> dict:
        return {"label": self.label, "family": "finite", "weights": list(self.weights)}


def make_tail_law(alpha: float, svf: str = "constant", beta: float = 0.0,
                  validate_to: int = DEFAULT_VALIDATION_CAP) -> TailLaw:
    """Build a regularly varying law and check its pmf is non-negative.

    Parameters
    ----------
    alpha : float
        Tail exponent, must be positive.
    svf : {"constant", "log_power"}
        Slowly varying factor: 1, or ``log(n - 1 + e)**beta``.
    beta : float
        Exponent of the logarithmic factor (ignored for ``constant``).
    validate_to : int
        Largest n at which the pmf is checked.  The scan is dense on
        [1, 10**4] and on a log-spaced grid beyond.

    Raises
    ------
    LawError
        If alpha <= 0, beta is not finite, or the pmf is negative somewhere
        in the validated range.
    """
    if svf in ("log", "logpow"):
        svf = "log_power"
    if svf not in ("constant", "log_power"):
        raise LawError(f"unknown slowly varying family {svf!r}")
    if not (alpha > 0 and math.isfinite(alpha)):
        raise LawError(f"alpha must be positive and finite, got {alpha}")
    if svf == "constant":
        beta = 0.0
    elif not math.isfinite(beta):
        raise LawError(f"beta must be finite, got {beta}")
    law = TailLaw(float(alpha), svf, float(beta), int(validate_to))
    if svf == "log_power":
        dense = np.arange(1, min(DENSE_SCAN, validate_to) + 2)
        grid = np.unique(np.concatenate([
            dense,
            np.floor(np.geomspace(DENSE_SCAN, max(validate_to, DENSE_SCAN) + 1, 4000)),
        ]))
        t = law.tail(grid)
        steps = np.diff(t)
        bad = np.nonzero(steps > 0)[0]
        if bad.size:
            n_bad = int(grid[bad[0]])
            raise LawError(
                f"tail not non-increasing for alpha={alpha}, beta={beta}: "
                f"pmf({n_bad}) < 0")
    return law


def finite_law(weights) -> FiniteLaw:
    return FiniteLaw(tuple(float(w) for w in weights))


_KV = re.compile(r"^\s*([a-zA-Z_]+)\s*=\s*([-+0-9.eE]+)\s*$")


def parse_law(text: str):
    """Parse a law string.

    ``power:alpha=0.25``, ``logpow:alpha=0.25,beta=-0.5``,
    ``finite:0.5,0.5`` (pmf on 1, 2, ...) and the alias ``delta1``.
    """
    text = text.strip()
    if text == "delta1":
        return finite_law([1.0])
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    if family == "finite":
        try:
            return finite_law([float(w) for w in rest.split(",")])
        except ValueError as exc:
            raise LawError(f"bad finite law {text!r}") from exc
    params = {}
    for part in filter(None, rest.split(",")):
        m = _KV.match(part)
        if not m:
            raise LawError(f"bad law parameter {part!r} in {text!r}")
        params[m.group(1).lower()] = float(m.group(2))
    if family == "power":
        if set(params) != {"alpha"}:
            raise LawError(f"power law takes exactly alpha, got {sorted(params)}")
        return make_tail_law(params["alpha"])
    if family == "logpow":
        if set(params) != {"alpha", "beta"}:
            raise LawError(f"logpow law takes alpha and beta, got {sorted(params)}")
        return make_tail_law(params["alpha"], "log_power", params["beta"])
    raise LawError(f"unknown law family {family!r}")


def tail(law, n):
    """mu{n, n+1, ...}."""
    return law.tail(n)


def pmf(law, n):
    return law.pmf(n)


def uniforms(key: int, vertices) -> np.ndarray:
    """Keyed uniforms on (0, 1) at the given absolute indices."""
    v = np.asarray(vertices, dtype=np.int64)
    return _kernels.uniforms_at(np.uint64(key), v.ravel()).reshape(v.shape)


def sample_k(law, u):
    """Inverse-transform look-back draw(s): K = max{n : T(n) > u}.

    ``u`` is a uniform in (0, 1) or an array of them.  Values beyond
    2**63 - 1 saturate.
    """
    kind, a, b, ft = law.kernel_params()
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any((arr <= 0) | (arr >= 1)):
        raise LawError("uniforms must lie in (0, 1)")
    out = _kernels.draw_k_array(kind, a, b, ft, arr.ravel()).reshape(arr.shape)
    return int(out[0]) if np.ndim(u) == 0 else out
