"""Correntropy-weighted recovery of a row-sparse signal matrix from an active set.

Multiple-measurement-vector form of correntropy matching pursuit: one weight
matrix is computed from a reference (knee) solution, then every snapshot is
solved as an independent weighted least-squares problem restricted to the
active grid points.
"""

import numpy as np

from ._validation import check_active_set, check_snapshots
from .array import shifted_manifold
from .correntropy import gaussian_kernel
from .exceptions import DomainError, OvercompleteSupportError

__all__ = ["weight_matrix", "wls_solve", "Decoder", "decode", "COND_LIMIT"]

#: Weighted Gram matrices above this condition number use a truncated pseudo-inverse.
COND_LIMIT = 1e12

_TINY = np.finfo(float).tiny


def weight_matrix(Y, A, S, sigma):
    """Elementwise kernel of the reference residual ``Y - A @ S``.

    Weights that would underflow are clamped to the smallest positive float
    so every entry stays in ``(0, 1]``.
    """
    W = gaussian_kernel(np.asarray(Y) - np.asarray(A) @ np.asarray(S), sigma)
    return np.maximum(np.atleast_2d(W), _TINY)


def _well_conditioned(G):
    lam = np.linalg.eigvalsh(G)
    return lam[..., 0] > lam[..., -1] / COND_LIMIT


def _solve_gram(G, b):
    """Solve stacked Hermitian systems ``G x = b``.

    ``G`` has shape ``(..., k, k)`` and ``b`` shape ``(..., k)``. Systems that
    are singular or worse conditioned than :data:`COND_LIMIT` fall back to an
    eigenvalue-truncated pseudo-inverse.
    """
    k = G.shape[-1]
    if k == 0:
        return np.zeros(b.shape, dtype=complex)
    x = np.empty(b.shape, dtype=complex)
    try:
        # x and the inverse from one factorisation; the 1-norm condition
        # number brackets the 2-norm one within a factor k
        rhs = np.concatenate([b[..., None], np.broadcast_to(np.eye(k), G.shape)], axis=-1)
        sol = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        sol = None
    if sol is None:
        ok = _well_conditioned(G)
    else:
        norm1 = np.abs(G).sum(axis=-2).max(axis=-1)
        inv1 = np.abs(sol[..., 1:]).sum(axis=-2).max(axis=-1)
        cond1 = norm1 * inv1
        ok = cond1 < COND_LIMIT / k
        unsure = ~ok & (cond1 <= COND_LIMIT * k) & np.isfinite(cond1)
        if unsure.any():
            ok[unsure] = _well_conditioned(G[unsure])
        if ok.all():
            return sol[..., 0]
        x[ok] = sol[ok][..., 0]
    if ok.any() and sol is None:
        x[ok] = np.linalg.solve(G[ok], b[ok][..., None])[..., 0]
    bad = ~ok
    vals, vecs = np.linalg.eigh(G[bad])
    cutoff = vals[..., -1:] / COND_LIMIT
    inv = np.where((vals > cutoff) & (vals > 0), 1.0 / np.where(vals > 0, vals, 1.0), 0.0)
    coef = np.einsum("...ji,...j->...i", vecs.conj(), b[bad]) * inv
    x[bad] = np.einsum("...ij,...j->...i", vecs, coef)
    return x


def wls_solve(A_active, w, y):
    """Weighted least squares ``argmin_s ||sqrt(diag(w)) (y - A_active s)||^2``.

    Parameters
    ----------
    A_active : ndarray, shape (M, k)
    w : ndarray, shape (M,)
        Positive real weights.
    y : ndarray, shape (M,)

    Returns
    -------
    ndarray, shape (k,)
    """
    A_active = np.asarray(A_active, dtype=complex)
    if A_active.ndim == 1:
        A_active = A_active[:, None]
    M, k = A_active.shape
    if k > M:
        raise OvercompleteSupportError(f"{k} atoms exceed {M} measurements")
    w = np.asarray(w, dtype=float)
    y = np.asarray(y, dtype=complex)
    if w.shape != (M,) or y.shape != (M,):
        raise DomainError("weights and measurements must have one entry per row of A_active")
    if np.any(w <= 0):
        raise DomainError("weights must be positive")
    AH = A_active.conj().T
    G = AH @ (w[:, None] * A_active)
    b = AH @ (w * y)
    return _solve_gram(G, b)


class Decoder:
    """Decodes active sets against fixed measurements, manifold and weights.

    The weight matrix is shared by every active set decoded through one
    instance; results are cached per support because populations routinely
    carry duplicate active sets.

    Parameters
    ----------
    Y : ndarray, shape (M, T)
    A : ndarray, shape (M, N)
        Manifold at the current (possibly refined) grid.
    W : ndarray, shape (M, T)
        Per-measurement weights.
    """

    def __init__(self, Y, A, W):
        self.Y = Y
        self.A = A
        self.W = W
        self._WT = np.ascontiguousarray(W.T)
        self._WYT = np.ascontiguousarray((W * Y).T)
        self._cache = {}

    @classmethod
    def from_reference(cls, Y, A, S_ref, sigma):
        """Build the weights from a reference signal matrix (the knee)."""
        return cls(Y, A, weight_matrix(Y, A, S_ref, sigma))

    @classmethod
    def from_knee(cls, Y, A, support, rows, sigma):
        """Same as :meth:`from_reference` for a knee stored as support plus rows."""
        return cls(Y, A, weight_matrix(Y, A[:, support], rows, sigma))

    @property
    def n_sensors(self):
        return self.A.shape[0]

    def _solve_group(self, idx):
        # idx: (n, k) supports sharing one cardinality
        AI = self.A[:, idx].transpose(1, 0, 2)                      # (n, M, k)
        AIH = AI.conj().transpose(0, 2, 1)                          # (n, k, M)
        weighted = self._WT[None, :, :, None] * AI[:, None, :, :]   # (n, T, M, k)
        G = AIH[:, None] @ weighted                                 # (n, T, k, k)
        b = (AIH[:, None] @ self._WYT[None, :, :, None])[..., 0]    # (n, T, k)
        x = _solve_gram(G, b)
        return x.transpose(0, 2, 1)                                 # (n, k, T)

    def rows(self, supports):
        """Nonzero rows for each support.

        Parameters
        ----------
        supports : sequence of int arrays
            Sorted grid indices of each active set.

        Returns
        -------
        list of ndarray, each of shape (k, T)
        """
        M = self.n_sensors
        T = self.Y.shape[1]
        out = [None] * len(supports)
        pending = {}
        for i, sup in enumerate(supports):
            sup = np.asarray(sup, dtype=np.intp)
            if sup.size > M:
                raise OvercompleteSupportError(f"{sup.size} atoms exceed {M} sensors")
            key = sup.tobytes()
            hit = self._cache.get(key)
            if hit is not None:
                out[i] = hit
            elif sup.size == 0:
                out[i] = self._cache[key] = np.zeros((0, T), dtype=complex)
            else:
                pending.setdefault(sup.size, {}).setdefault(key, []).append(i)
        for k, groups in pending.items():
            keys = list(groups)
            idx = np.stack([np.frombuffer(key, dtype=np.intp) for key in keys])
            solved = self._solve_group(idx)
            for key, rows in zip(keys, solved):
                self._cache[key] = rows
                for i in groups[key]:
                    out[i] = rows
        return out

    def decode(self, e):
        """Full ``N x T`` signal matrix for one active set."""
        e = check_active_set(e, self.A.shape[1])
        sup = np.flatnonzero(e)
        S = np.zeros((self.A.shape[1], self.Y.shape[1]), dtype=complex)
        S[sup] = self.rows([sup])[0]
        return S


def decode(active_sets, S_ref, zeta, sigma, *, Y, grid_points, array):
    """Decode each active set against the grid shifted by ``zeta``.

    Returns
    -------
    list of ndarray, each of shape (N, T)
        Rows outside the active set are exactly zero; an empty active set
        yields the zero matrix.
    """
    Y = check_snapshots(Y, array.num_sensors)
    A = shifted_manifold(grid_points, zeta, array)
    decoder = Decoder.from_reference(Y, A, S_ref, sigma)
    return [decoder.decode(e) for e in active_sets]
