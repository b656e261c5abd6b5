"""Vectorized evaluation kernels for double-phase integrands.

Both the base function  t^p + a t^q log(e+t)^r  and its Sobolev target
t^p* + a^(q*/q) t^q* log(e + t/a^((q-1)/q))^(r q*/q)  are instances of

    G(x, t) = t^alpha + exp(amp) * t^beta * log(e + t exp(-shift))^rho

with per-cell parameter arrays.  The grid evaluator below computes
w-weighted sums of G over cells in log-space (stable under large and
tiny scalings) while reusing scratch buffers, because the Luxemburg
bisection calls it dozens of times per norm.

Conventions: G(x, 0) = 0 even for rho < 0; overflowing terms evaluate
to +inf rather than raising.
"""

from __future__ import annotations

import numpy as np

__all__ = ["DoublePhaseGrid", "double_phase_eval"]

_LOG_SWITCH = 30.0  # above this, log(e + exp(z)) == z to double precision


def _stable_log_e_plus_exp(z, out=None):
    """log(e + exp(z)) elementwise, safe for z in [-inf, +huge]."""
    z = np.asarray(z, dtype=float)
    if out is None:
        out = np.empty_like(z)
    np.minimum(z, _LOG_SWITCH, out=out)
    np.exp(out, out=out)
    out += np.e
    np.log(out, out=out)
    big = z > _LOG_SWITCH
    if big.any():
        out[big] = z[big]
    return out


def double_phase_eval(alpha, beta, rho, amp, shift, t):
    """Elementwise G(x, t); parameters broadcast against t.

    ``amp`` and ``shift`` are logarithmic: the second term is
    exp(amp + beta log t + rho log log(e + t exp(-shift))), taken as 0
    where amp = -inf (zero weight).
    """
    alpha, beta, rho, amp, shift, t = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (alpha, beta, rho, amp, shift, t))
    )
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lt = np.log(t)
        e1 = alpha * lt
        out = np.exp(e1)
        live = amp > -np.inf
        if live.any():
            z = lt[live] - shift[live]
            big_log = _stable_log_e_plus_exp(z)
            lL = np.log(big_log)
            e2 = beta[live] * lt[live] + rho[live] * lL + amp[live]
            # t = 0 forces the term to 0 regardless of rho's sign
            e2 = np.where(np.isneginf(lt[live]), -np.inf, e2)
            second = np.exp(e2)
            out = out.copy()
            out[live] += second
    if out.ndim == 0:
        return float(out)
    return out


class DoublePhaseGrid:
    """Per-cell parameters plus quadrature weights for fast modulars.

    ``weights`` already carry the cell volume, so ``modular(values)``
    is the midpoint-rule integral of G(x, |f|) over the grid.
    """

    def __init__(self, alpha, beta, rho, amp, shift, weights):
        self.alpha = np.ascontiguousarray(alpha, dtype=float)
        m = self.alpha.shape[0]
        self.beta = np.ascontiguousarray(np.broadcast_to(beta, m), dtype=float)
        self.rho = np.ascontiguousarray(np.broadcast_to(rho, m), dtype=float)
        self.amp = np.ascontiguousarray(np.broadcast_to(amp, m), dtype=float)
        self.shift = np.ascontiguousarray(np.broadcast_to(shift, m), dtype=float)
        self.weights = np.ascontiguousarray(weights, dtype=float)
        self.live = self.amp > -np.inf
        self.any_second = bool(self.live.any())
        self.all_second = bool(self.live.all())
        self.rho_zero = bool(np.all(self.rho[self.live] == 0.0)) if self.any_second else True
        self._b1 = np.empty(m)
        self._b2 = np.empty(m)
        self._b3 = np.empty(m)

    @property
    def size(self) -> int:
        return self.alpha.shape[0]

    def subset(self, idx) -> "DoublePhaseGrid":
        return DoublePhaseGrid(
            self.alpha[idx], self.beta[idx], self.rho[idx],
            self.amp[idx], self.shift[idx], self.weights[idx],
        )

    def concat(self, other: "DoublePhaseGrid") -> "DoublePhaseGrid":
        return DoublePhaseGrid(
            np.concatenate([self.alpha, other.alpha]),
            np.concatenate([self.beta, other.beta]),
            np.concatenate([self.rho, other.rho]),
            np.concatenate([self.amp, other.amp]),
            np.concatenate([self.shift, other.shift]),
            np.concatenate([self.weights, other.weights]),
        )

    def modular_scaled(self, log_values: np.ndarray, log_lam: float) -> float:
        """sum_i w_i G(x_i, v_i / lam) given log v_i (log 0 = -inf)."""
        b1, b2, b3 = self._b1, self._b2, self._b3
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            np.subtract(log_values, log_lam, out=b1)          # log s
            np.multiply(self.alpha, b1, out=b2)
            np.exp(b2, out=b2)                                # s^alpha
            if self.any_second:
                if self.rho_zero:
                    np.multiply(self.beta, b1, out=b3)
                    b3 += self.amp
                    np.exp(b3, out=b3)
                else:
                    L = _stable_log_e_plus_exp(b1 - self.shift, out=b3)
                    np.log(L, out=L)                          # log log(e + s/shift)
                    L *= self.rho
                    L += self.amp
                    b1 *= self.beta
                    L += b1
                    # s = 0 must yield 0 even when rho < 0
                    L[np.isneginf(log_values)] = -np.inf
                    np.exp(L, out=b3)
                if self.all_second:
                    b2 += b3
                else:
                    b2[self.live] += b3[self.live]
            np.multiply(b2, self.weights, out=b2)
        total = float(np.sum(b2))
        return total

    def modular(self, values: np.ndarray) -> float:
        values = np.abs(np.asarray(values, dtype=float))
        with np.errstate(divide="ignore"):
            lv = np.log(values)
        return self.modular_scaled(lv, 0.0)

    def pointwise(self, values: np.ndarray) -> np.ndarray:
        """G(x_i, |v_i|) per cell, without weights."""
        return double_phase_eval(
            self.alpha, self.beta, self.rho, self.amp, self.shift, np.abs(values)
        )
