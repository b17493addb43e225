"""Complete elliptic integral K(k) and the Jacobi sn function.

Both use the modulus ``k`` (not the parameter ``m = k**2``) and the
arithmetic-geometric mean. The functions broadcast over numpy arrays in both
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_LANDEN_STEPS = 32
CONVERGENCE = 1e-15


class EllipticDomainError(ValueError):
    pass


@dataclass(frozen=True)
class EllipticModulus:
    k: float

    def __post_init__(self):
        if not 0 <= self.k < 1:
            raise EllipticDomainError(f"elliptic modulus must satisfy 0 <= k < 1, got {self.k}")

    @property
    def parameter(self) -> float:
        return self.k * self.k


def _modulus(k) -> np.ndarray:
    if isinstance(k, EllipticModulus):
        k = k.k
    k = np.asarray(k, dtype=float)
    if np.any(~(k >= 0)) or np.any(k >= 1):
        bad = k[(~(k >= 0)) | (k >= 1)].ravel()[0]
        raise EllipticDomainError(f"elliptic modulus must satisfy 0 <= k < 1, got {bad}")
    return k


def _agm_ladder(k):
    """Return the AGM sequences (a_n, c_n) started from (1, sqrt(1-k^2), k)."""
    a = np.ones_like(k)
    b = np.sqrt((1.0 - k) * (1.0 + k))
    c = k.copy()
    a_seq, c_seq = [a], [c]
    for _ in range(MAX_LANDEN_STEPS):
        if np.all(np.abs(c) <= CONVERGENCE * a):
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        a_seq.append(a)
        c_seq.append(c)
    return a_seq, c_seq


def complete_K(k):
    """Complete elliptic integral of the first kind, ``K(k) = pi / (2 agm(1, k'))``.

    Parameters
    ----------
    k : float, array_like or EllipticModulus
        Modulus in [0, 1).

    Returns
    -------
    float or ndarray
    """
    kk = _modulus(k)
    a_seq, _ = _agm_ladder(np.atleast_1d(kk).astype(float))
    out = 0.5 * math.pi / a_seq[-1]
    return float(out[0]) if kk.ndim == 0 else out.reshape(kk.shape)


def jacobi_sn(u, k):
    """Jacobi elliptic function ``sn(u, k)``.

    The argument is first reduced modulo the real period ``4K(k)``, then sn is
    evaluated by the descending AGM (Landen) recursion::

        phi_N = 2**N a_N u
        phi_{n-1} = (phi_n + arcsin(c_n / a_n * sin(phi_n))) / 2
        sn = sin(phi_0)

    ``k = 0`` reduces exactly to ``sin(u)``. ``k >= 1`` is rejected; see
    :func:`sn_unit_modulus` for the ``k -> 1`` limit.
    """
    kk = _modulus(k)
    u = np.asarray(u, dtype=float)
    shape = np.broadcast_shapes(u.shape, kk.shape)
    uu = np.broadcast_to(u, shape).astype(float).ravel()
    kv = np.broadcast_to(kk, shape).astype(float).ravel()

    a_seq, c_seq = _agm_ladder(kv)
    period = 2.0 * math.pi / a_seq[-1]  # 4 K(k)
    uu = uu - period * np.round(uu / period)

    n_steps = len(a_seq) - 1
    phi = (2.0**n_steps) * a_seq[-1] * uu
    for n in range(n_steps, 0, -1):
        ratio = c_seq[n] / a_seq[n]
        phi = 0.5 * (phi + np.arcsin(np.clip(ratio * np.sin(phi), -1.0, 1.0)))
    out = np.sin(phi)
    return float(out[0]) if out.size == 1 and not shape else out.reshape(shape)


def sn_unit_modulus(u):
    """The ``k = 1`` limit of sn, ``tanh(u)`` (not periodic)."""
    return np.tanh(u)
