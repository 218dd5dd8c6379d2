"""Random unitary matrices and the small exact identities used to test them.

Reproducibility model: every consumer of randomness derives its generator
from ``stream(seed, label)``, where the label is a short string naming the
purpose.  The same (seed, label) pair always yields the same generator, and
distinct labels give independent streams, so adding a new consumer never
shifts the draws of existing ones.
"""

from __future__ import annotations

import hashlib
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .groups import GroupError

__all__ = [
    "stream",
    "haar_sample",
    "haar_sample_batch",
    "hs_norm",
    "geodesic_distance",
    "second_moment_check",
    "NotUnitary",
    "SecondMoment",
]

UNITARY_TOL = 1e-10


class NotUnitary(GroupError):
    pass


def stream(seed: int, label: str) -> np.random.Generator:
    """Deterministic generator for a (seed, label) pair."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**63 - 1), *words]))


def haar_sample(dim: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-distributed unitary of size dim x dim."""
    return haar_sample_batch(dim, 1, rng)[0]


def haar_sample_batch(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, dim, dim) stack of independent Haar unitaries.

    Complex Ginibre + QR, with the R-diagonal phase correction that makes the
    distribution exactly Haar rather than merely approximately so.
    """
    if dim < 1:
        raise ValueError(f"unitary dimension must be >= 1, got {dim}")
    if count < 0:
        raise ValueError(f"sample count must be >= 0, got {count}")
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    z /= np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.einsum("nii->ni", r)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def hs_norm(matrix: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    return float(np.linalg.norm(matrix))


def _check_unitary(name, u):
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NotUnitary(f"{name}: expected a square matrix, got shape {u.shape}")
    dev = float(np.abs(u @ u.conj().T - np.eye(u.shape[0])).max())
    if dev > UNITARY_TOL:
        raise NotUnitary(f"{name}: not unitary (max |U U* - I| = {dev:.3e})")
    return u


def geodesic_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Riemannian distance on the unitary group.

    Equal to the l2 norm of the eigenvalue angles of U* V, with angles taken
    in (-pi, pi] (an eigenvalue of exactly -1 contributes +pi).
    """
    u = _check_unitary("first argument", u)
    v = _check_unitary("second argument", v)
    if u.shape != v.shape:
        raise NotUnitary(f"size mismatch: {u.shape} vs {v.shape}")
    eig = np.linalg.eigvals(u.conj().T @ v)
    theta = np.angle(eig)
    theta[theta <= -np.pi + 1e-15] = np.pi
    return float(np.sqrt((theta**2).sum()))


SecondMoment = namedtuple("SecondMoment", ["empirical", "exact", "stderr"])


def second_moment_check(
    matrix: np.ndarray, trials: int, seed: int, label: str = "second-moment"
) -> SecondMoment:
    """Monte Carlo vs. closed form for E |(U e_k)* A (U e_k)|^2 under Haar U.

    The exact value is (||A||_HS^2 + |Tr A|^2) / (d (d + 1)).  The coordinate
    index k cycles through 0..d-1 across trials so the check does not depend
    on any single column convention.  Returns (empirical, exact, stderr).
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    d = a.shape[0]
    exact = (hs_norm(a) ** 2 + abs(np.trace(a)) ** 2) / (d * (d + 1))
    rng = stream(seed, label)
    samples = np.empty(trials)
    done = 0
    while done < trials:
        batch = min(trials - done, 20000)
        u = haar_sample_batch(d, batch, rng)
        cols = u[np.arange(batch), :, (np.arange(done, done + batch) % d)]
        vals = np.einsum("na,ab,nb->n", cols.conj(), a, cols)
        samples[done : done + batch] = np.abs(vals) ** 2
        done += batch
    empirical = float(samples.mean())
    stderr = float(samples.std(ddof=1) / np.sqrt(trials)) if trials > 1 else float("inf")
    return SecondMoment(empirical, exact, stderr)
