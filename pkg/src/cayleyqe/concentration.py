"""Monte Carlo checks of the measure-concentration facts behind the construction.

The central experiment: draw an independent Haar unitary U_s for each
traceless block A_s and form the statistic

    X = (1/T) * sum_s sum_k |e_k^T U_s^H A_s U_s e_k|,    T = sum_s d_s.

The tail guarantee says P(X > beta * alpha) <= exp(-RATE * beta^2 * T) for
beta >= 2, where alpha is the quadratic mean of the per-block scales
||A_s||_HS / d_s weighted by dimension.  ``run_tail`` estimates these tail
frequencies and reports the sub-guarantee betas (1 .. 1.75) alongside as
curiosity rows that carry no pass/fail weight.

``lipschitz_check`` samples pairs of unitaries to confirm that
f(U) = sum_k |e_k^T U^H A U e_k| moves by at most 2 ||A||_HS times the
geodesic distance, the smoothness fact the tail bound rests on.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .groups import GroupError
from .sampling import haar_sample_batch, hs_norm, stream

__all__ = [
    "TailExperiment",
    "TailRow",
    "TailResult",
    "LipschitzResult",
    "run_tail",
    "lipschitz_check",
    "alpha_of",
    "get_preset",
    "preset_names",
    "NonZeroTrace",
    "EmptyBlocks",
    "TAIL_RATE",
    "CURIOSITY_BETAS",
    "TRACE_TOL",
]

TAIL_RATE = 1.0 / (12.0 * np.pi**2)
CURIOSITY_BETAS = (1.0, 1.25, 1.5, 1.75)
TRACE_TOL = 1e-10
_BATCH = 20000


class NonZeroTrace(GroupError):
    pass


class EmptyBlocks(GroupError):
    pass


def _as_blocks(blocks):
    out = []
    for i, a in enumerate(blocks):
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"block {i}: expected a square matrix, got shape {a.shape}")
        out.append(a)
    return tuple(out)


def alpha_of(blocks) -> float:
    """Scale of the tail statistic: sqrt(sum_s ||A_s||_HS^2 / d_s / sum_s d_s)."""
    blocks = _as_blocks(blocks)
    if not blocks:
        raise EmptyBlocks("cannot compute a tail scale with no blocks")
    total_dim = sum(a.shape[0] for a in blocks)
    weighted = sum(hs_norm(a) ** 2 / a.shape[0] for a in blocks)
    return float(np.sqrt(weighted / total_dim))


@dataclass(frozen=True)
class TailExperiment:
    """Blocks, thresholds, and sampling budget for one tail experiment.

    Betas below 2 are rejected: the guarantee only covers beta >= 2, and the
    sub-guarantee grid is reported automatically as curiosity rows.
    """

    blocks: tuple
    betas: tuple = (2.0,)
    trials: int = 10000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "blocks", _as_blocks(self.blocks))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.blocks:
            raise EmptyBlocks("a tail experiment needs at least one block")
        for b in self.betas:
            if b < 2.0:
                raise ValueError(
                    f"beta {b} is below 2, outside the guarantee regime; "
                    "betas under 2 are reported automatically as curiosity rows"
                )
        if self.trials < 1:
            raise ValueError(f"need at least one trial, got {self.trials}")

    @property
    def total_dim(self) -> int:
        return sum(a.shape[0] for a in self.blocks)


TailRow = namedtuple("TailRow", ["beta", "frequency", "bound", "stderr", "curiosity"])


@dataclass(frozen=True)
class TailResult:
    alpha: float
    total_dim: int
    trials: int
    seed: int
    rows: tuple  # TailRow per beta; guarantee rows first, curiosity rows after

    def guarantee_rows(self):
        return [r for r in self.rows if not r.curiosity]

    def curiosity_rows(self):
        return [r for r in self.rows if r.curiosity]


def run_tail(experiment: TailExperiment) -> TailResult:
    """Estimate P(statistic > beta * alpha) for each beta, with the bound.

    Each block draws its unitaries from its own named stream, so adding or
    reordering blocks with distinct indices cannot silently correlate draws.

    Raises NonZeroTrace when a block is not traceless (tolerance 1e-10): the
    guarantee is stated for traceless blocks only.
    """
    for i, a in enumerate(experiment.blocks):
        tr = abs(complex(np.trace(a)))
        if tr > TRACE_TOL:
            raise NonZeroTrace(f"block {i} has |trace| = {tr:.3e}, expected 0 (tol {TRACE_TOL})")
    trials = experiment.trials
    total_dim = experiment.total_dim
    sums = np.zeros(trials)
    for s, a in enumerate(experiment.blocks):
        d = a.shape[0]
        rng = stream(experiment.seed, f"tail/{s}")
        done = 0
        while done < trials:
            batch = min(trials - done, _BATCH)
            u = haar_sample_batch(d, batch, rng)
            diag = np.einsum("nak,ab,nbk->nk", u.conj(), a, u)
            sums[done : done + batch] += np.abs(diag).sum(axis=1)
            done += batch
    stats = sums / total_dim
    alpha = alpha_of(experiment.blocks)

    def make_row(beta, curiosity):
        freq = float((stats > beta * alpha).mean())
        bound = float(np.exp(-TAIL_RATE * beta**2 * total_dim))
        stderr = float(np.sqrt(freq * (1.0 - freq) / trials))
        return TailRow(float(beta), freq, bound, stderr, curiosity)

    rows = [make_row(b, False) for b in experiment.betas]
    rows += [make_row(b, True) for b in CURIOSITY_BETAS]
    return TailResult(
        alpha=alpha,
        total_dim=total_dim,
        trials=trials,
        seed=experiment.seed,
        rows=tuple(rows),
    )


LipschitzResult = namedtuple(
    "LipschitzResult", ["max_ratio", "lipschitz_constant", "pairs", "worst_distance"]
)


def lipschitz_check(matrix, pairs: int, seed: int) -> LipschitzResult:
    """Sample unitary pairs and bound |f(U) - f(V)| / (L * distance).

    f(U) = sum_k |e_k^T U^H A U e_k| and L = 2 ||A||_HS.  A max_ratio <= 1
    confirms the claimed modulus of smoothness on the sampled pairs.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if pairs < 1:
        raise ValueError(f"need at least one pair, got {pairs}")
    d = a.shape[0]
    lipschitz = 2.0 * hs_norm(a)
    rng = stream(seed, "lipschitz")
    max_ratio = 0.0
    worst_distance = float("inf")
    done = 0
    while done < pairs:
        batch = min(pairs - done, _BATCH // 2)
        u = haar_sample_batch(d, batch, rng)
        v = haar_sample_batch(d, batch, rng)
        f_u = np.abs(np.einsum("nak,ab,nbk->nk", u.conj(), a, u)).sum(axis=1)
        f_v = np.abs(np.einsum("nak,ab,nbk->nk", v.conj(), a, v)).sum(axis=1)
        w = np.einsum("nba,nbc->nac", u.conj(), v)
        theta = np.angle(np.linalg.eigvals(w))
        theta[theta <= -np.pi + 1e-15] = np.pi
        dist = np.sqrt((theta**2).sum(axis=1))
        ok = dist > 1e-12
        ratios = np.zeros(batch)
        ratios[ok] = np.abs(f_u[ok] - f_v[ok]) / (lipschitz * dist[ok])
        idx = int(np.argmax(ratios))
        if ratios[idx] > max_ratio:
            max_ratio = float(ratios[idx])
            worst_distance = float(dist[idx])
        done += batch
    return LipschitzResult(max_ratio, lipschitz, pairs, worst_distance)


# ---------------------------------------------------------------------------
# named experiment presets

_PRESET_SEED = 0xA11CE  # fixed so preset matrices are the same everywhere


def _random_hermitian(dim, label, traceless):
    rng = stream(_PRESET_SEED, label)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (z + z.conj().T) / 2.0
    if traceless:
        h -= np.trace(h).real / dim * np.eye(dim)
    return h


def _alternating_diag(dim):
    return np.diag([(-1.0) ** k for k in range(dim)]).astype(complex)


def _build_presets():
    presets = {}
    presets["smA-d1"] = lambda: {"kind": "second_moment", "matrix": np.eye(1, dtype=complex)}
    presets["smA-d2"] = lambda: {"kind": "second_moment", "matrix": _alternating_diag(2)}
    presets["smA-d3"] = lambda: {
        "kind": "second_moment",
        "matrix": _random_hermitian(3, "preset/smA-d3", traceless=False),
    }
    presets["smA-d5"] = lambda: {
        "kind": "second_moment",
        "matrix": _random_hermitian(5, "preset/smA-d5", traceless=True),
    }
    presets["tail-sum2"] = lambda: {"kind": "tail", "blocks": (_alternating_diag(2),)}
    presets["tail-sum20"] = lambda: {
        "kind": "tail",
        "blocks": tuple(_alternating_diag(2) for _ in range(10)),
    }
    presets["tail-sum60"] = lambda: {
        "kind": "tail",
        "blocks": tuple(
            _random_hermitian(2, f"preset/tail-sum60/two/{i}", traceless=True) for i in range(20)
        )
        + tuple(
            _random_hermitian(5, f"preset/tail-sum60/five/{i}", traceless=True) for i in range(4)
        ),
    }
    for d in (2, 3, 5):
        presets[f"lip-d{d}"] = (
            lambda dim=d: {
                "kind": "lipschitz",
                "matrix": _random_hermitian(dim, f"preset/lip-d{dim}", traceless=False),
            }
        )
    return presets


_PRESETS = _build_presets()


def preset_names():
    return sorted(_PRESETS)


def get_preset(name: str) -> dict:
    """Named experiment inputs; the 'kind' key says which runner they feed."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        ) from None
    return factory()
