"""Complete lists of irreducible unitary representations for catalog groups.

Construction routes
-------------------
abelian (catalog or detected from the table)
    One-dimensional characters.  Catalog families use the mixed-radix
    exponent formula; arbitrary abelian tables go through a subgroup
    extension algorithm carried out in exact rational angles.
dihedral / dicyclic
    The standard one- and two-dimensional unitary models.
symmetric (m <= 5)
    Young orthogonal form, which is real orthogonal hence already unitary.
product
    All tensor products of factor irreps.

Every route finishes with a validation pass (unitarity, homomorphism,
irreducibility, completeness, pairwise inequivalence); user-supplied bundles
must pass the same checks before use.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .groups import FiniteGroup, GroupError

__all__ = [
    "Irrep",
    "IrrepSet",
    "ValidationReport",
    "irreps_for",
    "validate_irreps",
    "require_valid",
    "total_dim_ratio",
    "save_irreps",
    "load_irreps",
    "NoConstructionRoute",
    "InvalidIrreps",
]

UNITARITY_TOL = 1e-10
HOMOMORPHISM_TOL = 1e-10
IRREDUCIBILITY_TOL = 1e-8
INEQUIVALENCE_TOL = 1e-8
_EXHAUSTIVE_PAIR_LIMIT = 128


class NoConstructionRoute(GroupError):
    pass


class InvalidIrreps(GroupError):
    pass


@dataclass(frozen=True, eq=False)
class Irrep:
    """A unitary irreducible representation stored densely.

    ``matrices[g]`` is the d x d complex unitary matrix of element g, in the
    group's element order.
    """

    label: str
    dim: int
    matrices: np.ndarray

    def __post_init__(self):
        self.matrices.setflags(write=False)

    def characters(self) -> np.ndarray:
        return np.einsum("gaa->g", self.matrices)

    def __repr__(self):
        return f"Irrep({self.label!r}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class IrrepSet:
    group: FiniteGroup
    irreps: tuple

    def __iter__(self):
        return iter(self.irreps)

    def __len__(self):
        return len(self.irreps)

    def dims(self) -> list:
        return [rho.dim for rho in self.irreps]

    def __repr__(self):
        return f"IrrepSet({self.group.name}, dims={self.dims()})"


@dataclass(frozen=True)
class ValidationReport:
    """Pass/fail per invariant, with the worst observed residual for each."""

    unitarity: tuple
    homomorphism: tuple
    irreducibility: tuple
    completeness: tuple
    inequivalence: tuple

    @property
    def ok(self) -> bool:
        return all(
            flag
            for flag, _ in (
                self.unitarity,
                self.homomorphism,
                self.irreducibility,
                self.completeness,
                self.inequivalence,
            )
        )

    def first_failure(self) -> str | None:
        for name in ("unitarity", "homomorphism", "irreducibility", "completeness", "inequivalence"):
            flag, worst = getattr(self, name)
            if not flag:
                return f"{name} (worst residual {worst})"
        return None


# ---------------------------------------------------------------------------
# character constructions


def _character_irreps(table, prefix="chi"):
    mats = table[:, :, None, None].astype(complex)
    return [
        Irrep(label=f"{prefix}{k}", dim=1, matrices=np.ascontiguousarray(mats[k]))
        for k in range(table.shape[0])
    ]


def _abelian_chars_from_dims(dims):
    dims = np.asarray(dims)
    n = int(dims.prod())
    coords = np.stack(np.unravel_index(np.arange(n), dims), axis=1)
    kfrac = coords / dims.astype(float)
    phases = (kfrac @ coords.T) % 1.0
    return np.exp(2j * np.pi * phases)


def _abelian_chars_from_table(group):
    """Characters of an arbitrary abelian table group.

    Builds the dual group by extending characters one cyclic step at a time;
    angles are kept as exact rationals until the final exponential, so the
    result is a homomorphism to machine precision regardless of group shape.
    """
    n = group.order
    mul = group.mul
    e = group.identity
    members = {e}
    chars = [{e: Fraction(0)}]
    while len(members) < n:
        g = next(x for x in range(n) if x not in members)
        gpow = [e]
        x = g
        while x not in members:
            gpow.append(x)
            x = int(mul[x, g])
        # gpow holds [g^0, ..., g^{k-1}]; k is minimal with g^k in the subgroup
        k = len(gpow)
        anchor = x
        extended = []
        for ch in chars:
            base = ch[anchor]
            for r in range(k):
                w = (base + r) / k
                ext = {}
                for h, ang in ch.items():
                    for t in range(k):
                        ext[int(mul[h, gpow[t]])] = (ang + t * w) % 1
                extended.append(ext)
        chars = extended
        members = set(chars[0].keys())
    chars.sort(key=lambda ch: tuple(ch[x] for x in range(n)))
    table = np.empty((n, n), dtype=complex)
    for i, ch in enumerate(chars):
        angles = np.array([float(ch[x]) for x in range(n)])
        table[i] = np.exp(2j * np.pi * angles)
    return table


# ---------------------------------------------------------------------------
# dihedral and dicyclic models


def _dihedral_irreps(m):
    idx = np.arange(2 * m)
    a, j = idx // m, idx % m
    out = []
    out.append(Irrep("triv", 1, np.ones((2 * m, 1, 1), dtype=complex)))
    out.append(Irrep("sgn", 1, ((-1.0 + 0j) ** a)[:, None, None]))
    if m % 2 == 0:
        out.append(Irrep("sgn_r", 1, ((-1.0 + 0j) ** j)[:, None, None]))
        out.append(Irrep("sgn_sr", 1, ((-1.0 + 0j) ** (a + j))[:, None, None]))
    omega = np.exp(2j * np.pi / m) if m > 1 else 1.0
    for h in range(1, (m + 1) // 2 if m % 2 else m // 2):
        up = omega ** (h * j)
        mats = np.zeros((2 * m, 2, 2), dtype=complex)
        rot = a == 0
        mats[rot, 0, 0] = up[rot]
        mats[rot, 1, 1] = up[rot].conj()
        mats[~rot, 0, 1] = up[~rot].conj()
        mats[~rot, 1, 0] = up[~rot]
        out.append(Irrep(f"rho{h}", 2, mats))
    return out


def _dicyclic_irreps(m):
    idx = np.arange(4 * m)
    i, j = idx % (2 * m), idx // (2 * m)
    out = []
    if m % 2 == 0:
        for u in (0, 1):
            for v in (0, 1):
                vals = (-1.0 + 0j) ** (u * i + v * j)
                out.append(Irrep(f"chi{u}{v}", 1, vals[:, None, None]))
    else:
        for t in range(4):
            vals = ((-1.0 + 0j) ** (t * i)) * (1j ** (t * j))
            out.append(Irrep(f"chi{t}", 1, vals[:, None, None]))
    omega = np.exp(1j * np.pi / m)
    for h in range(1, m):
        up = omega ** (h * i)
        sign = (-1.0) ** h
        mats = np.zeros((4 * m, 2, 2), dtype=complex)
        rot = j == 0
        mats[rot, 0, 0] = up[rot]
        mats[rot, 1, 1] = up[rot].conj()
        mats[~rot, 0, 1] = sign * up[~rot]
        mats[~rot, 1, 0] = up[~rot].conj()
        out.append(Irrep(f"rho{h}", 2, mats))
    return out


# ---------------------------------------------------------------------------
# symmetric groups: Young orthogonal form


def _partitions(m):
    def rec(rest, cap):
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail

    return list(rec(m, m))


def _standard_tableaux(shape):
    m = sum(shape)
    out = []
    rowfill = [0] * len(shape)
    pos = []

    def rec(v):
        if v == m:
            out.append(tuple(pos))
            return
        for r, width in enumerate(shape):
            c = rowfill[r]
            if c < width and (r == 0 or rowfill[r - 1] > c):
                rowfill[r] += 1
                pos.append((r, c))
                rec(v + 1)
                rowfill[r] -= 1
                pos.pop()

    rec(0)
    return out


def _adjacent_word(perm):
    """Indices w with perm = s_{w[0]} o s_{w[1]} o ... (adjacent transpositions)."""
    arr = list(perm)
    rec = []
    changed = True
    while changed:
        changed = False
        for j in range(len(arr) - 1):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                rec.append(j)
                changed = True
    return rec[::-1]


def _young_orthogonal_irreps(m, perms):
    def compose(p, q):
        return tuple(p[q[x]] for x in range(m))

    swaps = [tuple(x + 1 if x == i else x - 1 if x == i + 1 else x for x in range(m)) for i in range(m - 1)]
    out = []
    for shape in _partitions(m):
        tabs = _standard_tableaux(shape)
        dim = len(tabs)
        index = {t: i for i, t in enumerate(tabs)}
        s_mats = []
        for i in range(m - 1):
            mat = np.zeros((dim, dim))
            for a, t in enumerate(tabs):
                r1, c1 = t[i]
                r2, c2 = t[i + 1]
                dist = (c2 - r2) - (c1 - r1)
                mat[a, a] = 1.0 / dist
                swapped = list(t)
                swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
                b = index.get(tuple(swapped))
                if b is not None:
                    mat[b, a] = np.sqrt(1.0 - 1.0 / dist**2)
            s_mats.append(mat)
        mats = np.empty((len(perms), dim, dim), dtype=complex)
        for gi, p in enumerate(perms):
            word = _adjacent_word(p)
            acc = np.eye(dim)
            chk = tuple(range(m))
            for w in word:
                acc = acc @ s_mats[w]
                chk = compose(chk, swaps[w])
            if chk != p:
                raise AssertionError(f"adjacent-transposition word failed for {p}")
            mats[gi] = acc
        label = "[" + ",".join(str(part) for part in shape) + "]"
        out.append(Irrep(label, dim, mats))
    return out


# ---------------------------------------------------------------------------
# products and dispatch


def _tensor_irreps(set1, set2):
    n1 = set1.group.order
    n2 = set2.group.order
    out = []
    for r1 in set1.irreps:
        for r2 in set2.irreps:
            d = r1.dim * r2.dim
            mats = np.einsum("gab,hcd->ghacbd", r1.matrices, r2.matrices)
            mats = np.ascontiguousarray(mats.reshape(n1 * n2, d, d))
            out.append(Irrep(f"{r1.label}*{r2.label}", d, mats))
    return out


def irreps_for(group: FiniteGroup) -> IrrepSet:
    """Complete validated irrep list for a catalog or abelian group.

    Raises
    ------
    NoConstructionRoute
        Non-catalog, non-abelian group: supply a bundle file instead.
    InvalidIrreps
        Internal construction failed validation (should not happen).
    """
    family = group.family
    if family in ("cyclic", "abelian"):
        irreps = _character_irreps(_abelian_chars_from_dims(group.params))
    elif family == "dihedral":
        irreps = _dihedral_irreps(group.params[0])
    elif family == "dicyclic":
        irreps = _dicyclic_irreps(group.params[0])
    elif family == "symmetric":
        import itertools

        perms = list(itertools.permutations(range(group.params[0])))
        irreps = _young_orthogonal_irreps(group.params[0], perms)
    elif family == "product":
        g1, g2 = group.factors
        irreps = _tensor_irreps(irreps_for(g1), irreps_for(g2))
    elif group.is_abelian():
        irreps = _character_irreps(_abelian_chars_from_table(group))
    else:
        raise NoConstructionRoute(
            f"no irrep construction route for {group.name} "
            "(not from the catalog and not abelian); load a bundle file"
        )
    out = IrrepSet(group=group, irreps=tuple(irreps))
    require_valid(group, out)
    return out


def validate_irreps(group: FiniteGroup, irreps) -> ValidationReport:
    """Check unitarity, homomorphism, irreducibility, completeness, inequivalence.

    Homomorphism is checked on all pairs for |G| <= 128, else on 10|G|
    deterministically sampled pairs.  Returns a report; never raises.
    """
    irrep_list = list(getattr(irreps, "irreps", irreps))
    n = group.order
    mul = group.mul

    worst_u = 0.0
    for rho in irrep_list:
        m = rho.matrices
        gram = np.einsum("gab,gcb->gac", m, m.conj())
        worst_u = max(worst_u, float(np.abs(gram - np.eye(rho.dim)).max()))
    unitarity = (worst_u <= UNITARITY_TOL, worst_u)

    if n <= _EXHAUSTIVE_PAIR_LIMIT:
        gs, hs = np.divmod(np.arange(n * n), n)
    else:
        rng = np.random.default_rng(0xC4A1E7)
        pairs = rng.integers(0, n, size=(10 * n, 2))
        gs, hs = pairs[:, 0], pairs[:, 1]
    worst_h = 0.0
    for rho in irrep_list:
        m = rho.matrices
        prod = np.einsum("pab,pbc->pac", m[gs], m[hs])
        worst_h = max(worst_h, float(np.abs(prod - m[mul[gs, hs]]).max()))
    homomorphism = (worst_h <= HOMOMORPHISM_TOL, worst_h)

    worst_i = 0.0
    char_rows = []
    for rho in irrep_list:
        chi = rho.characters()
        char_rows.append(chi)
        worst_i = max(worst_i, float(abs((np.abs(chi) ** 2).mean() - 1.0)))
    irreducibility = (worst_i <= IRREDUCIBILITY_TOL, worst_i)

    total = sum(rho.dim**2 for rho in irrep_list)
    completeness = (total == n, float(total))

    worst_e = 0.0
    if len(char_rows) > 1:
        c = np.stack(char_rows)
        gram = (c @ c.conj().T) / n
        off = gram - np.diag(np.diag(gram))
        worst_e = float(np.abs(off).max())
    inequivalence = (worst_e <= INEQUIVALENCE_TOL, worst_e)

    return ValidationReport(unitarity, homomorphism, irreducibility, completeness, inequivalence)


def require_valid(group: FiniteGroup, irreps) -> None:
    report = validate_irreps(group, irreps)
    if not report.ok:
        raise InvalidIrreps(f"irrep validation failed: {report.first_failure()}")


def total_dim_ratio(irreps: IrrepSet) -> float:
    """(sum of irrep dimensions) / |G|; equals 1 exactly for abelian groups."""
    return sum(rho.dim for rho in irreps.irreps) / irreps.group.order


# ---------------------------------------------------------------------------
# bundle files


def save_irreps(irreps: IrrepSet, path) -> None:
    payload = {
        "group_name": irreps.group.name,
        "irreps": [
            {
                "label": rho.label,
                "dim": rho.dim,
                "matrices": [
                    [[[float(v.real), float(v.imag)] for v in row] for row in mat]
                    for mat in rho.matrices
                ],
            }
            for rho in irreps.irreps
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_irreps(group: FiniteGroup, path, validate: bool = True) -> IrrepSet:
    """Read an irrep bundle; validates against the group unless told not to."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict) or "irreps" not in payload:
        raise InvalidIrreps("bundle file: missing 'irreps' field")
    irreps = []
    for entry in payload["irreps"]:
        label = entry["label"]
        dim = int(entry["dim"])
        raw = np.array(entry["matrices"], dtype=float)
        if raw.shape != (group.order, dim, dim, 2):
            raise InvalidIrreps(
                f"bundle irrep {label!r}: matrices shaped {raw.shape}, "
                f"expected ({group.order}, {dim}, {dim}, 2)"
            )
        irreps.append(Irrep(label, dim, raw[..., 0] + 1j * raw[..., 1]))
    out = IrrepSet(group=group, irreps=tuple(irreps))
    if validate:
        require_valid(group, out)
    return out
