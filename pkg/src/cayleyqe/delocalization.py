"""Product graphs whose spectral degeneracies defeat equidistribution.

Crossing a base group H (generating set S) with a cycle Z/p, p > 3 prime,
using the generating set S x {-1, +1}, gives a Cayley graph whose adjacency
operator is the tensor product of the factors'.  Its nonzero spectrum is the
set of products {lambda_j * mu_k} with mu_k = 2 cos(2 pi k / p), and the
module tabulates these products, searches each base eigenspace for its most
spread-out member (the delocalization ratio), and evaluates the
equidistribution lower-bound witness: the worst deviation of eigenvector
mass on a slice {h} x Z/p from the uniform share 1/|H|.

The delocalization ratio reported per eigenspace is a heuristic upper bound
on an infimum (a nonconvex min-max problem); pure-coordinate candidates are
always evaluated, and random restarts only ever lower the bound.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .groups import (
    CayleyGraph,
    FiniteGroup,
    GroupError,
    catalog_group,
    cayley_graph,
    dense_adjacency,
    genset,
)
from .sampling import stream

__all__ = [
    "ProductInstance",
    "SpectrumTable",
    "ProductLine",
    "DelocEntry",
    "DelocReport",
    "make_product",
    "cycle_character_span",
    "graph_spectrum",
    "product_spectrum",
    "deloc_ratio",
    "deloc_report",
    "qe_lower_witness",
    "NotPrime",
    "PTooSmall",
    "EmptySpace",
    "BasisMismatch",
]

SPECTRUM_TOL = 1e-8


class NotPrime(GroupError):
    pass


class PTooSmall(GroupError):
    pass


class EmptySpace(GroupError):
    pass


class BasisMismatch(GroupError):
    pass


@dataclass(frozen=True, eq=False)
class ProductInstance:
    """A base Cayley graph crossed with a p-cycle, with the product graph."""

    base_group: FiniteGroup
    base_graph: CayleyGraph
    p: int
    group: FiniteGroup
    graph: CayleyGraph

    @property
    def base_order(self) -> int:
        return self.base_group.order

    def slice_indicator(self, h: int) -> np.ndarray:
        """Indicator function of the slice {h} x Z/p inside the product."""
        if not 0 <= h < self.base_order:
            raise ValueError(f"slice index {h} out of range for base order {self.base_order}")
        f = np.zeros(self.group.order)
        f[h * self.p : (h + 1) * self.p] = 1.0
        return f

    def __repr__(self):
        return f"ProductInstance({self.base_group.name} x Z/{self.p})"


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


def make_product(base_group: FiniteGroup, gens, p: int) -> ProductInstance:
    """Cross a base group with Z/p using the step set {-1, +1} on the cycle.

    The product generating set is { (s, 1), (s, -1) : s in gens }; it is
    symmetric, avoids the identity, and generates the full product (checked).

    Raises PTooSmall for p <= 3, NotPrime for composite p, and the usual
    generating-set errors for a bad base generating set.
    """
    p = int(p)
    if p <= 3:
        raise PTooSmall(f"need p > 3, got {p}")
    if not _is_prime(p):
        raise NotPrime(f"{p} is not prime")
    base_gens = genset(base_group, gens)
    base_graph = cayley_graph(base_group, base_gens)
    product = catalog_group("product", base_group, catalog_group("cyclic", p))
    lifted = []
    for s in base_gens:
        lifted.append(s * p + 1)
        lifted.append(s * p + (p - 1))
    graph = cayley_graph(product, lifted)
    return ProductInstance(
        base_group=base_group,
        base_graph=base_graph,
        p=p,
        group=product,
        graph=graph,
    )


# ---------------------------------------------------------------------------
# spectra


def graph_spectrum(graph: CayleyGraph, tol: float = SPECTRUM_TOL):
    """Dense adjacency spectrum clustered at tolerance: (values, multiplicities).

    Values are cluster means in descending order; eigenvalues closer than tol
    are merged.  Works for any graph the dense route can afford.
    """
    eigs = np.linalg.eigvalsh(dense_adjacency(graph))[::-1]
    values = []
    dims = []
    for v in eigs:
        if values and abs(v - values[-1] / dims[-1]) < tol:
            values[-1] += v
            dims[-1] += 1
        else:
            values.append(v)
            dims.append(1)
    values = np.array([s / d for s, d in zip(values, dims)])
    return values, np.array(dims, dtype=int)


ProductLine = namedtuple("ProductLine", ["base_index", "cycle_index", "value", "dim"])
Collision = namedtuple("Collision", ["first", "second", "difference"])


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """Product-spectrum bookkeeping for one instance."""

    p: int
    order: int
    base_values: np.ndarray  # nonzero base eigenvalues, descending
    base_dims: np.ndarray
    kernel_dim: int
    cycle_values: np.ndarray  # mu_k = 2 cos(2 pi k / p), k = 0..(p-1)/2
    cycle_dims: np.ndarray
    products: tuple  # ProductLine per (base, cycle) pair
    collisions: tuple  # Collision per distinct pair closer than tolerance
    tolerance: float

    @property
    def total_dim(self) -> int:
        return int(sum(line.dim for line in self.products) + self.kernel_dim * self.p)

    def values(self) -> np.ndarray:
        return np.array([line.value for line in self.products])

    def advisory(self) -> str | None:
        if not self.collisions:
            return None
        return (
            f"{len(self.collisions)} product-value collision(s) at tolerance "
            f"{self.tolerance}: may indicate an inadmissible p or numerical degeneracy"
        )


def product_spectrum(instance: ProductInstance, base_spectrum=None, tol: float = SPECTRUM_TOL) -> SpectrumTable:
    """All products lambda_j * mu_k with dimensions and collision pairs.

    ``base_spectrum`` is (values, multiplicities) for the base adjacency; when
    omitted it is computed by dense diagonalization.  Zero base eigenvalues
    (within tol) are set aside as the kernel, which contributes its dimension
    times p to the product order; the remaining dimension bookkeeping is
    exact by construction and verified.
    """
    if base_spectrum is None:
        base_spectrum = graph_spectrum(instance.base_graph, tol)
    values, dims = base_spectrum
    values = np.asarray(values, dtype=float)
    dims = np.asarray(dims, dtype=int)
    if values.shape != dims.shape or values.ndim != 1:
        raise ValueError("base spectrum must be two parallel 1-d arrays (values, multiplicities)")
    nonzero = np.abs(values) > tol
    base_values = values[nonzero]
    base_dims = dims[nonzero]
    kernel_dim = int(instance.base_order - base_dims.sum())
    if kernel_dim < 0:
        raise ValueError(
            f"base multiplicities sum to {int(dims.sum())}, "
            f"more than the base order {instance.base_order}"
        )
    p = instance.p
    ks = np.arange((p - 1) // 2 + 1)
    cycle_values = 2.0 * np.cos(2.0 * np.pi * ks / p)
    cycle_dims = np.where(ks == 0, 1, 2)
    lines = []
    for j, (lam, dlam) in enumerate(zip(base_values, base_dims)):
        for k, (mu, dmu) in enumerate(zip(cycle_values, cycle_dims)):
            lines.append(ProductLine(j, k, float(lam * mu), int(dlam * dmu)))
    collisions = []
    for a in range(len(lines)):
        for b in range(a + 1, len(lines)):
            diff = abs(lines[a].value - lines[b].value)
            if diff < tol:
                collisions.append(
                    Collision(
                        (lines[a].base_index, lines[a].cycle_index),
                        (lines[b].base_index, lines[b].cycle_index),
                        float(diff),
                    )
                )
    table = SpectrumTable(
        p=p,
        order=instance.group.order,
        base_values=base_values,
        base_dims=base_dims,
        kernel_dim=kernel_dim,
        cycle_values=cycle_values,
        cycle_dims=cycle_dims,
        products=tuple(lines),
        collisions=tuple(collisions),
        tolerance=tol,
    )
    if table.total_dim != instance.group.order:
        raise ValueError(
            f"dimension bookkeeping failed: products plus kernel cover "
            f"{table.total_dim} of {instance.group.order}"
        )
    return table


# ---------------------------------------------------------------------------
# delocalization ratios


def cycle_character_span(modulus: int = 8, frequencies=(1, 3)) -> np.ndarray:
    """Span of chosen cycle characters, columns exp(2 pi i k x / modulus).

    The default (modulus 8, frequencies 1 and 3) is the standard small
    two-dimensional space used to referee the delocalization heuristic
    against grid search.
    """
    x = np.arange(modulus)
    return np.exp(2j * np.pi * np.outer(x, np.asarray(frequencies)) / modulus)


DelocEntry = namedtuple("DelocEntry", ["ratio", "witness", "restarts"])


def _sup_over_l2(psi: np.ndarray) -> float:
    """sup norm over quadratic-mean norm; 1 for flat, sqrt(n) for a spike."""
    return float(np.abs(psi).max() / np.sqrt((np.abs(psi) ** 2).mean()))


def _descend(space, c, qs=(4, 8, 16, 32, 64, 128), iters=50):
    """Deterministic annealed descent on smoothed max-modulus over the span."""

    def objective(coeff, q):
        psi = space @ coeff
        mag = np.abs(psi)
        peak = mag.max()
        if peak <= 0:
            return np.inf, psi, mag, peak
        w = mag / peak
        val = np.log(peak) + np.log((w**q).sum()) / q - 0.5 * np.log((mag**2).sum())
        return val, psi, mag, peak

    c = c / np.linalg.norm(c)
    for q in qs:
        step = 0.5
        val, psi, mag, peak = objective(c, q)
        for _ in range(iters):
            w = mag / peak
            wq = (w**q).sum()
            grad = 0.5 * (
                space.conj().T @ (w ** (q - 2) * psi) / (peak**2 * wq)
                - space.conj().T @ psi / (mag**2).sum()
            )
            gn = np.linalg.norm(grad)
            if gn < 1e-14:
                break
            cand = c - step * (grad / gn) * np.linalg.norm(c)
            cand /= np.linalg.norm(cand)
            cand_val, cand_psi, cand_mag, cand_peak = objective(cand, q)
            if cand_val < val:
                c, val, psi, mag, peak = cand, cand_val, cand_psi, cand_mag, cand_peak
                step = min(step * 1.5, 2.0)
            else:
                step *= 0.5
                if step < 1e-10:
                    break
    return c


def deloc_ratio(space, restarts: int = 8, rng=None) -> DelocEntry:
    """Heuristic upper bound on inf over the span of sup-norm over L2-norm.

    ``space`` has the spanning vectors as columns.  Every basis column is
    always tried as a candidate, each restart adds one random start followed
    by deterministic annealed descent, and the minimum over all candidates is
    returned, so more restarts can only lower (never raise) the bound.  The
    one-dimensional case is exact.  Returns (ratio, witness, restarts) with
    the witness reproducing the ratio.
    """
    space = np.asarray(space, dtype=complex)
    if space.ndim == 1:
        space = space[:, None]
    if space.ndim != 2 or space.shape[1] == 0 or space.shape[0] == 0:
        raise EmptySpace(f"eigenspace basis must be a nonempty 2-d array, got shape {space.shape}")
    n, m = space.shape
    if m == 1:
        psi = space[:, 0]
        return DelocEntry(_sup_over_l2(psi), psi, 0)
    # orthonormalize for conditioning; the span (hence the inf) is unchanged
    q, _ = np.linalg.qr(space)
    space = q
    if rng is None:
        rng = stream(0, "deloc")
    best_ratio = np.inf
    best_psi = None
    coords = np.eye(m, dtype=complex)
    candidates = [coords[:, i] for i in range(m)]
    for _ in range(max(0, int(restarts))):
        start = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        candidates.append(_descend(space, start))
    for c in candidates:
        psi = space @ c
        ratio = _sup_over_l2(psi)
        if ratio < best_ratio:
            best_ratio = ratio
            best_psi = psi
    return DelocEntry(float(best_ratio), best_psi, int(restarts))


RatioEntry = namedtuple("RatioEntry", ["eigenvalue", "multiplicity", "ratio"])


@dataclass(frozen=True, eq=False)
class DelocReport:
    """Per-base-eigenvalue delocalization ratios and the derived peak value.

    ``m_value`` is the largest ratio bound among nonzero base eigenspaces; if
    every eigenbasis of the product graph equidistributed to quality eps,
    each base eigenspace would contain a member with sup/L2 ratio at most
    sqrt(2 (1 + 2 |H|^3 eps)), so m_value implies a floor on achievable eps.
    The floor appears in two normalizations differing by a factor 2 in the
    denominator; both are reported rather than guessing between them.
    """

    base_order: int
    restarts: int
    entries: tuple  # RatioEntry per nonzero base eigenvalue
    m_value: float
    witness: np.ndarray  # member of the m_value eigenspace achieving it
    implied_eps_conservative: float  # (M^2/2 - 1) / (2 |H|^3)
    implied_eps_direct: float  # (M^2/2 - 1) / |H|^3

    def __post_init__(self):
        self.witness.setflags(write=False)


def deloc_report(instance: ProductInstance, restarts: int = 8, seed: int = 0, tol: float = SPECTRUM_TOL) -> DelocReport:
    """Scan base eigenspaces for their flattest members and derive the peak.

    Uses dense diagonalization of the base adjacency so it works for any base
    group, irreps or not.
    """
    adj = dense_adjacency(instance.base_graph)
    eigvals, eigvecs = np.linalg.eigh(adj)
    order = np.argsort(-eigvals, kind="stable")
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    clusters = []
    start = 0
    for i in range(1, len(eigvals) + 1):
        if i == len(eigvals) or abs(eigvals[i] - eigvals[start]) >= tol:
            clusters.append((start, i))
            start = i
    entries = []
    m_value = -np.inf
    witness = None
    for idx, (a, b) in enumerate(clusters):
        value = float(eigvals[a:b].mean())
        if abs(value) <= tol:
            continue
        entry = deloc_ratio(eigvecs[:, a:b], restarts=restarts, rng=stream(seed, f"deloc/{idx}"))
        entries.append(RatioEntry(value, b - a, entry.ratio))
        if entry.ratio > m_value:
            m_value = entry.ratio
            witness = entry.witness
    if witness is None:
        raise EmptySpace("base adjacency has no nonzero eigenvalues to scan")
    h3 = float(instance.base_order) ** 3
    excess = m_value**2 / 2.0 - 1.0
    return DelocReport(
        base_order=instance.base_order,
        restarts=int(restarts),
        entries=tuple(entries),
        m_value=float(m_value),
        witness=np.asarray(witness),
        implied_eps_conservative=excess / (2.0 * h3),
        implied_eps_direct=excess / h3,
    )


# ---------------------------------------------------------------------------
# the lower-bound witness


def qe_lower_witness(basis, instance: ProductInstance) -> float:
    """Worst slice-mass deviation: max_h of mean_phi |<|phi|^2, 1_slice> - 1/|H||.

    Accepts an eigenbasis object or a plain (|G|, count) array of basis
    vectors as columns.  Equals the equidistribution statistic maximized over
    the |H| slice indicators, so it lower-bounds the eps any such basis can
    claim (slice indicators have sup norm one).
    """
    vectors = getattr(basis, "vectors", basis)
    vectors = np.asarray(vectors)
    n = instance.group.order
    if vectors.ndim != 2 or vectors.shape[0] != n:
        raise BasisMismatch(
            f"basis vectors shaped {vectors.shape} do not sit over the product "
            f"group of order {n} (expected ({n}, count))"
        )
    if vectors.shape[1] == 0:
        raise BasisMismatch("basis must contain at least one vector")
    weights = np.abs(vectors) ** 2
    slice_mass = weights.reshape(instance.base_order, instance.p, -1).sum(axis=1) / n
    devs = np.abs(slice_mass - 1.0 / instance.base_order)
    return float(devs.mean(axis=1).max())
