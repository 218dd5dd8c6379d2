"""Finite groups as multiplication tables, generating sets, and Cayley adjacency.

Conventions
-----------
Elements of a group of order n are the indices 0..n-1 and ``mul[a, b]`` is the
product a*b.  Catalog families enumerate their elements lexicographically on
the defining data (tuples, permutations, (flag, rotation) pairs), so a given
family and parameter list always produces the identical table, byte for byte.

The Cayley graph of a symmetric generating set S acts on functions by left
translation: (Af)(x) = sum_{s in S} f(s x).  S never contains the identity,
so the graph is loopless.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FiniteGroup",
    "GenSet",
    "CayleyGraph",
    "group_from_table",
    "catalog_group",
    "genset",
    "cayley_graph",
    "adjacency_apply",
    "dense_adjacency",
    "conjugacy_classes",
    "quasirandom_degree",
    "save_group",
    "load_group",
    "GroupError",
    "NotAssociative",
    "NoIdentity",
    "NotInvertible",
    "UnsupportedFamily",
    "ParamOutOfRange",
    "LengthMismatch",
    "TrivialGroup",
    "NotSymmetric",
    "NotGenerating",
    "IdentityInGenerators",
    "MalformedGroupFile",
]

# Exhaustive associativity checking is O(n^3); above this order we fall back
# to 10*n^2 sampled triples.
_EXHAUSTIVE_ASSOC_LIMIT = 512
_CATALOG_SYMMETRIC_CAP = 5


class GroupError(ValueError):
    """Base class for validation failures in this module."""


class NotAssociative(GroupError):
    pass


class NoIdentity(GroupError):
    pass


class NotInvertible(GroupError):
    pass


class UnsupportedFamily(GroupError):
    pass


class ParamOutOfRange(GroupError):
    pass


class LengthMismatch(GroupError):
    pass


class TrivialGroup(GroupError):
    pass


class NotSymmetric(GroupError):
    pass


class NotGenerating(GroupError):
    pass


class IdentityInGenerators(GroupError):
    pass


class MalformedGroupFile(GroupError):
    """Raised by load_group with a field-precise message."""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its full multiplication table.

    Attributes
    ----------
    name : str
        Display name, e.g. ``"S_3"`` or ``"Z/2 x Z/5"``.
    order : int
        Number of elements n.
    mul : (n, n) int ndarray
        ``mul[a, b]`` is the product a*b.
    inv : (n,) int ndarray
        Two-sided inverses.
    identity : int
        Index of the identity element.
    family, params, factors
        Construction metadata for catalog groups (None/() otherwise); used to
        pick irreducible-representation construction routes.
    default_gens : tuple of int or None
        Canonical symmetric generating set for catalog families.
    """

    name: str
    order: int
    mul: np.ndarray
    inv: np.ndarray
    identity: int
    family: str | None = None
    params: tuple = ()
    factors: tuple = ()
    default_gens: tuple | None = None

    def __post_init__(self):
        self.mul.setflags(write=False)
        self.inv.setflags(write=False)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={self.order})"


@dataclass(frozen=True, eq=False)
class GenSet:
    """A symmetric generating set, stored as sorted element indices."""

    group: FiniteGroup
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return f"GenSet({list(self.elements)} in {self.group.name})"


@dataclass(frozen=True, eq=False)
class CayleyGraph:
    group: FiniteGroup
    gens: GenSet

    @property
    def degree(self) -> int:
        return len(self.gens)


def _validate_table(mul: np.ndarray, identity: int) -> None:
    n = mul.shape[0]
    if mul.ndim != 2 or mul.shape[0] != mul.shape[1]:
        raise LengthMismatch(f"table must be square, got shape {mul.shape}")
    if not (0 <= identity < n):
        raise NoIdentity(f"identity index {identity} outside 0..{n - 1}")
    if mul.min() < 0 or mul.max() >= n:
        bad = np.argwhere((mul < 0) | (mul >= n))[0]
        raise NotInvertible(
            f"entry mul[{bad[0]},{bad[1]}] = {mul[bad[0], bad[1]]} outside 0..{n - 1}"
        )
    ref = np.arange(n)
    for g in range(n):
        if not np.array_equal(np.sort(mul[g]), ref):
            raise NotInvertible(f"row {g} of mul is not a permutation")
        if not np.array_equal(np.sort(mul[:, g]), ref):
            raise NotInvertible(f"column {g} of mul is not a permutation")
    if not (np.array_equal(mul[identity], ref) and np.array_equal(mul[:, identity], ref)):
        bad = int(np.argwhere(mul[identity] != ref)[0][0]) if not np.array_equal(
            mul[identity], ref
        ) else int(np.argwhere(mul[:, identity] != ref)[0][0])
        raise NoIdentity(f"element {identity} is not a two-sided identity (fails at {bad})")
    if n <= _EXHAUSTIVE_ASSOC_LIMIT:
        for a in range(n):
            left = mul[mul[a]]        # left[b, c] = (a*b)*c
            right = mul[a][mul]       # right[b, c] = a*(b*c)
            if not np.array_equal(left, right):
                b, c = np.argwhere(left != right)[0]
                raise NotAssociative(f"(a*b)*c != a*(b*c) at (a,b,c)=({a},{b},{c})")
    else:
        rng = np.random.default_rng(0x5EED_A550C)
        remaining = 10 * n * n
        while remaining > 0:
            batch = min(remaining, 1_000_000)
            remaining -= batch
            abc = rng.integers(0, n, size=(batch, 3))
            a, b, c = abc[:, 0], abc[:, 1], abc[:, 2]
            bad = np.nonzero(mul[mul[a, b], c] != mul[a, mul[b, c]])[0]
            if bad.size:
                i = bad[0]
                raise NotAssociative(
                    f"(a*b)*c != a*(b*c) at (a,b,c)=({a[i]},{b[i]},{c[i]}) [sampled]"
                )


def _inverses(mul: np.ndarray, identity: int) -> np.ndarray:
    n = mul.shape[0]
    inv = np.empty(n, dtype=np.int64)
    rows, cols = np.nonzero(mul == identity)
    inv[rows] = cols
    for g in range(n):
        if mul[g, inv[g]] != identity or mul[inv[g], g] != identity:
            raise NotInvertible(f"element {g} has no two-sided inverse")
    return inv


def group_from_table(table, identity: int, name: str = "table-group") -> FiniteGroup:
    """Build and validate a group from a raw multiplication table.

    Parameters
    ----------
    table : (n, n) array-like of int
        ``table[a][b]`` = a*b over element indices 0..n-1.
    identity : int
        Index of the claimed identity element.

    Raises
    ------
    NotAssociative, NoIdentity, NotInvertible
        Each names the first violating triple or element.
    """
    mul = np.array(table, dtype=np.int64)
    if mul.size == 0:
        raise LengthMismatch("empty table")
    _validate_table(mul, identity)
    inv = _inverses(mul, identity)
    return FiniteGroup(
        name=name, order=mul.shape[0], mul=mul, inv=inv, identity=identity, family="table"
    )


# ---------------------------------------------------------------------------
# catalog families

# Every catalog group materializes its dense order x order multiplication
# table (and downstream consumers build order x order bases), so orders are
# capped before any allocation happens.
_CATALOG_ORDER_CAP = 4096


def _check_catalog_order(family, order):
    if order > _CATALOG_ORDER_CAP:
        raise ParamOutOfRange(
            f"{family} parameters give order {order}, above the catalog cap "
            f"{_CATALOG_ORDER_CAP} (dense multiplication tables only)"
        )


def _cyclic_table(m):
    idx = np.arange(m)
    return np.add.outer(idx, idx) % m


def _abelian_table(dims):
    n = int(np.prod(dims))
    coords = np.stack(np.unravel_index(np.arange(n), dims), axis=1)  # (n, r)
    summed = (coords[:, None, :] + coords[None, :, :]) % np.array(dims)
    return np.ravel_multi_index(np.moveaxis(summed, 2, 0), dims)


def _dihedral_table(m):
    # element a*m + j  <->  s^a r^j with relation r s = s r^{-1}
    idx = np.arange(2 * m)
    a, j = idx // m, idx % m
    a1, a2 = a[:, None], a[None, :]
    j1, j2 = j[:, None], j[None, :]
    sign = 1 - 2 * a2  # (-1)^{a2}
    return ((a1 + a2) % 2) * m + (j2 + sign * j1) % m


def _dicyclic_table(m):
    # element j*2m + i  <->  a^i x^j with a^{2m} = 1, x^2 = a^m, x a x^{-1} = a^{-1}
    idx = np.arange(4 * m)
    i, j = idx % (2 * m), idx // (2 * m)
    i1, i2 = i[:, None], i[None, :]
    j1, j2 = j[:, None], j[None, :]
    sign = 1 - 2 * j1  # (-1)^{j1}
    carry = (j1 + j2) // 2  # x^2 contributes a^m
    ii = (i1 + sign * i2 + carry * m) % (2 * m)
    return ((j1 + j2) % 2) * (2 * m) + ii


def _symmetric_table(m):
    perms = list(itertools.permutations(range(m)))
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    mul = np.empty((n, n), dtype=np.int64)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            mul[i, j] = index[tuple(p[q[x]] for x in range(m))]  # (p o q)(x) = p(q(x))
    return mul, perms, index


def _product_table(mul1, mul2):
    n2 = mul2.shape[0]
    return (mul1[:, None, :, None] * n2 + mul2[None, :, None, :]).reshape(
        mul1.shape[0] * n2, mul1.shape[0] * n2
    )


def _finish(name, mul, family, params, factors=(), default_gens=None):
    mul = np.ascontiguousarray(mul, dtype=np.int64)
    _validate_table(mul, 0)
    inv = _inverses(mul, 0)
    if default_gens is not None:
        default_gens = tuple(sorted(set(int(g) for g in default_gens) - {0}))
    return FiniteGroup(
        name=name,
        order=mul.shape[0],
        mul=mul,
        inv=inv,
        identity=0,
        family=family,
        params=tuple(params),
        factors=tuple(factors),
        default_gens=default_gens,
    )


def catalog_group(family: str, *params) -> FiniteGroup:
    """Construct a group from the built-in catalog.

    Families: ``cyclic(m)``, ``abelian(m_1, ..., m_r)``, ``dihedral(m)``,
    ``dicyclic(m)``, ``symmetric(m <= 5)``, ``product(G_1, G_2)``.  Each
    family ships a canonical symmetric generating set in ``default_gens``.
    Every group stores a dense order x order multiplication table, so the
    catalog rejects orders above ``4096`` before allocating anything.

    Raises
    ------
    UnsupportedFamily
        Unknown family name.
    ParamOutOfRange
        Parameters outside the documented ranges (including total order
        above the catalog cap).
    """
    if family == "cyclic":
        (m,) = _int_params(family, params, 1)
        if m < 1:
            raise ParamOutOfRange(f"cyclic needs m >= 1, got {m}")
        _check_catalog_order(family, m)
        gens = {1 % m, (m - 1) % m}
        return _finish(f"Z/{m}", _cyclic_table(m), "cyclic", (m,), default_gens=gens)

    if family == "abelian":
        dims = _int_params(family, params, None)
        if not dims or any(m < 1 for m in dims):
            raise ParamOutOfRange(f"abelian needs factors >= 1, got {dims}")
        order = 1
        for m in dims:
            order *= m
        _check_catalog_order(family, order)
        gens = []
        for axis, m in enumerate(dims):
            unit = [0] * len(dims)
            unit[axis] = 1 % m
            gens.append(int(np.ravel_multi_index(unit, dims)))
            unit[axis] = (m - 1) % m
            gens.append(int(np.ravel_multi_index(unit, dims)))
        name = " x ".join(f"Z/{m}" for m in dims)
        return _finish(name, _abelian_table(tuple(dims)), "abelian", dims, default_gens=gens)

    if family == "dihedral":
        (m,) = _int_params(family, params, 1)
        if m < 1:
            raise ParamOutOfRange(f"dihedral needs m >= 1, got {m}")
        _check_catalog_order(family, 2 * m)
        gens = {1 % m, (m - 1) % m, m}  # r, r^{-1}, s
        return _finish(f"D_{m}", _dihedral_table(m), "dihedral", (m,), default_gens=gens)

    if family == "dicyclic":
        (m,) = _int_params(family, params, 1)
        if m < 1:
            raise ParamOutOfRange(f"dicyclic needs m >= 1, got {m}")
        _check_catalog_order(family, 4 * m)
        gens = {1 % (2 * m), (2 * m - 1) % (2 * m), 2 * m, 3 * m}  # a, a^{-1}, x, x^{-1}
        return _finish(f"Dic_{m}", _dicyclic_table(m), "dicyclic", (m,), default_gens=gens)

    if family == "symmetric":
        (m,) = _int_params(family, params, 1)
        if not 1 <= m <= _CATALOG_SYMMETRIC_CAP:
            raise ParamOutOfRange(
                f"symmetric needs 1 <= m <= {_CATALOG_SYMMETRIC_CAP}, got {m}"
            )
        mul, perms, index = _symmetric_table(m)
        transpositions = [
            index[p]
            for p in perms
            if sum(p[x] != x for x in range(m)) == 2
        ]
        return _finish(f"S_{m}", mul, "symmetric", (m,), default_gens=transpositions)

    if family == "product":
        if len(params) != 2 or not all(isinstance(g, FiniteGroup) for g in params):
            raise ParamOutOfRange("product needs exactly two FiniteGroup factors")
        g1, g2 = params
        _check_catalog_order(family, g1.order * g2.order)
        n2 = g2.order
        gens = [s * n2 + g2.identity for s in (g1.default_gens or ())] + [
            g1.identity * n2 + s for s in (g2.default_gens or ())
        ]
        return _finish(
            f"{g1.name} x {g2.name}",
            _product_table(g1.mul, g2.mul),
            "product",
            (),
            factors=(g1, g2),
            default_gens=gens or None,
        )

    raise UnsupportedFamily(f"unknown family {family!r}")


def _int_params(family, params, count):
    if len(params) == 1 and isinstance(params[0], (tuple, list)):
        params = tuple(params[0])
    try:
        out = tuple(int(p) for p in params)
    except (TypeError, ValueError):
        raise ParamOutOfRange(f"{family} parameters must be integers, got {params!r}")
    if count is not None and len(out) != count:
        raise ParamOutOfRange(f"{family} takes {count} parameter(s), got {len(out)}")
    return out


# ---------------------------------------------------------------------------
# generating sets and the adjacency action


def genset(group: FiniteGroup, elements) -> GenSet:
    """Validate a symmetric generating set (identity excluded, closure reaches G)."""
    elems = sorted(set(int(g) for g in elements))
    for g in elems:
        if not 0 <= g < group.order:
            raise ParamOutOfRange(f"generator {g} outside 0..{group.order - 1}")
    if group.identity in elems:
        raise IdentityInGenerators("generating set must not contain the identity")
    for g in elems:
        if int(group.inv[g]) not in elems:
            raise NotSymmetric(f"generator {g} lacks its inverse {int(group.inv[g])}")
    reached = np.zeros(group.order, dtype=bool)
    reached[group.identity] = True
    frontier = [group.identity]
    while frontier:
        prods = group.mul[np.ix_(frontier, elems)].ravel() if elems else np.array([], dtype=int)
        fresh = np.unique(prods[~reached[prods]]) if prods.size else prods
        reached[fresh] = True
        frontier = list(fresh)
    if not reached.all():
        missing = int(np.nonzero(~reached)[0][0])
        raise NotGenerating(
            f"set {elems} generates only {int(reached.sum())} of {group.order} "
            f"elements (first unreached: {missing})"
        )
    return GenSet(group=group, elements=tuple(elems))


def cayley_graph(group: FiniteGroup, elements) -> CayleyGraph:
    gens = elements if isinstance(elements, GenSet) else genset(group, elements)
    return CayleyGraph(group=group, gens=gens)


def adjacency_apply(graph: CayleyGraph, f) -> np.ndarray:
    """Apply the Cayley adjacency operator: (Af)(x) = sum_{s in S} f(s x)."""
    f = np.asarray(f)
    n = graph.group.order
    if f.shape != (n,):
        raise LengthMismatch(f"function has shape {f.shape}, expected ({n},)")
    rows = graph.group.mul[list(graph.gens.elements)]  # rows[s, x] = s*x
    return f[rows].sum(axis=0)


def dense_adjacency(graph: CayleyGraph) -> np.ndarray:
    """Assemble the n x n adjacency matrix; A[x, y] = 1 iff y = s*x for some s."""
    n = graph.group.order
    a = np.zeros((n, n))
    x = np.arange(n)
    for s in graph.gens.elements:
        a[x, graph.group.mul[s, x]] += 1.0
    return a


def conjugacy_classes(group: FiniteGroup) -> list:
    """Partition element indices into conjugacy classes (identity class first)."""
    n = group.order
    seen = np.zeros(n, dtype=bool)
    classes = []
    h = np.arange(n)
    for g in range(n):
        if seen[g]:
            continue
        orbit = np.unique(group.mul[group.mul[h, g], group.inv[h]])
        seen[orbit] = True
        classes.append([int(x) for x in orbit])
    return classes


def quasirandom_degree(group: FiniteGroup, irreps) -> tuple:
    """Minimum dimension D over nontrivial irreps, with the class-count check.

    Returns ``(D, bound_ok)`` where ``bound_ok`` verifies that the number of
    irreps is at most 1 + (|G| - 1)/D^2, the counting consequence of every
    nontrivial irrep having dimension >= D.

    Raises
    ------
    TrivialGroup
        If the list contains no nontrivial irrep.
    """
    irrep_list = list(getattr(irreps, "irreps", irreps))
    dims = []
    for rho in irrep_list:
        mats = rho.matrices
        trivial = rho.dim == 1 and np.abs(mats - 1.0).max() < 1e-8
        if not trivial:
            dims.append(rho.dim)
    if not dims:
        raise TrivialGroup("no nontrivial irrep in the supplied list")
    d = int(min(dims))
    bound_ok = len(irrep_list) <= 1 + (group.order - 1) / d**2
    return d, bool(bound_ok)


# ---------------------------------------------------------------------------
# interchange files


def save_group(group: FiniteGroup, path, gens: GenSet | None = None) -> None:
    """Write the group (and optional generating set) as an interchange JSON file."""
    payload = {
        "name": group.name,
        "order": group.order,
        "mul": [int(v) for v in group.mul.ravel()],
        "identity": group.identity,
        "generators": sorted(int(g) for g in gens.elements)
        if gens is not None
        else sorted(int(g) for g in group.default_gens or ()),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_group(path) -> tuple:
    """Read an interchange JSON file; returns ``(group, genset_or_None)``.

    Malformed files raise MalformedGroupFile with the offending field named;
    the table itself is re-validated via group_from_table.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedGroupFile(f"invalid JSON at line {exc.lineno}: {exc.msg}")
    if not isinstance(payload, dict):
        raise MalformedGroupFile("top level: expected a JSON object")
    for key in ("name", "order", "mul", "identity"):
        if key not in payload:
            raise MalformedGroupFile(f"field '{key}': missing")
    name = payload["name"]
    if not isinstance(name, str):
        raise MalformedGroupFile("field 'name': expected a string")
    order = payload["order"]
    if not isinstance(order, int) or order < 1:
        raise MalformedGroupFile("field 'order': expected a positive integer")
    mul = payload["mul"]
    if not isinstance(mul, list):
        raise MalformedGroupFile("field 'mul': expected a list")
    if len(mul) == order and all(isinstance(r, list) for r in mul):
        rows = mul
        for i, row in enumerate(rows):
            if len(row) != order:
                raise MalformedGroupFile(f"field 'mul[{i}]': expected {order} entries, got {len(row)}")
        flat = [v for row in rows for v in row]
    else:
        flat = mul
        if len(flat) != order * order:
            raise MalformedGroupFile(
                f"field 'mul': expected {order * order} row-major entries, got {len(flat)}"
            )
    for i, v in enumerate(flat):
        if not isinstance(v, int):
            raise MalformedGroupFile(f"field 'mul[{i}]': expected an integer, got {v!r}")
    identity = payload["identity"]
    if not isinstance(identity, int):
        raise MalformedGroupFile("field 'identity': expected an integer")
    table = np.array(flat, dtype=np.int64).reshape(order, order)
    group = group_from_table(table, identity, name=name)
    generators = payload.get("generators")
    gens = None
    if generators:
        if not isinstance(generators, list) or not all(isinstance(g, int) for g in generators):
            raise MalformedGroupFile("field 'generators': expected a list of integers")
        gens = genset(group, generators)
    return group, gens
