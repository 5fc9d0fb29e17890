"""
Finite groups as dense id-indexed tables, plus subgroups, cosets and homogeneous spaces.

Every element is a dense integer id 0..|G|-1. Multiplication and inversion are
table lookups, and the word metric is computed lazily by breadth-first search
over the Cayley graph of the (symmetric) generating set.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from gmconv.config import Settings, get_settings
from gmconv.exceptions import (
    CapacityError,
    ElementError,
    GroupMismatchError,
    InvalidActionError,
    InvalidGroupError,
    InvalidKernelError,
    InvalidOrderError,
    InvalidSubgroupError,
    RepresentativeError,
)

ID_DTYPE = np.int32
MAX_SYMMETRIC_DEGREE = 7


class FiniteGroup:
    """
    A finite group given by its multiplication table.

    Example:
        G = make_cyclic(8)
        G.mul(3, 6)          # 1
        G.word_dist[4]       # 4
    """

    def __init__(
        self,
        name: str,
        mul_table: np.ndarray | Sequence[Sequence[int]],
        generators: Sequence[int] = (),
        inv_table: np.ndarray | Sequence[int] | None = None,
        identity: int | None = None,
        element_labels: Sequence[str] | None = None,
        settings: Settings | None = None,
    ):
        """
        Build and verify a group.

        Args:
            name: Display name, e.g. "C8" or "C4xC4"
            mul_table: |G|x|G| table, entry [g, h] is the id of gh
            generators: Generating set; inverses are added so the set is symmetric
            inv_table: Inverse of every element (derived from the table if omitted)
            identity: Identity id (derived from the table if omitted)
            element_labels: Optional human-readable element names
            settings: Capacity and axiom-check settings

        Raises:
            InvalidOrderError: If the table is empty.
            CapacityError: If |G| exceeds the configured maximum order.
            InvalidGroupError: If any group axiom or the generation property fails.
        """
        settings = settings or get_settings()
        table = np.asarray(mul_table, dtype=ID_DTYPE)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise InvalidGroupError(f"mul_table must be square, got shape {table.shape}")
        n = table.shape[0]
        if n == 0:
            raise InvalidOrderError("group order must be positive")
        if n > settings.max_group_order:
            raise CapacityError(f"order {n} exceeds maximum {settings.max_group_order}")
        if table.min() < 0 or table.max() >= n:
            raise InvalidGroupError("mul_table entries must be element ids in 0..|G|-1")

        self.name = name
        self.mul_table = table
        self.identity = _find_identity(table) if identity is None else int(identity)
        self.inv_table = (
            _inverse_from_table(table, self.identity)
            if inv_table is None
            else np.asarray(inv_table, dtype=ID_DTYPE)
        )
        self.element_labels = (
            tuple(str(label) for label in element_labels) if element_labels is not None else None
        )
        if self.element_labels is not None and len(self.element_labels) != n:
            raise InvalidGroupError("element_labels length does not match the group order")

        gens = np.asarray(list(generators), dtype=ID_DTYPE)
        if gens.size and (gens.min() < 0 or gens.max() >= n):
            raise InvalidGroupError("generators must be element ids")
        gens = np.union1d(gens, self.inv_table[gens]) if gens.size else gens
        self.generators = tuple(int(g) for g in gens if g != self.identity)

        self._verify(settings)
        for array in (self.mul_table, self.inv_table):
            array.setflags(write=False)

    def _verify(self, settings: Settings) -> None:
        table, e, n = self.mul_table, self.identity, self.order
        ids = np.arange(n)
        if not (np.array_equal(table[e], ids) and np.array_equal(table[:, e], ids)):
            raise InvalidGroupError(f"element {e} is not a two-sided identity")
        if self.inv_table.shape != (n,):
            raise InvalidGroupError("inv_table must have one entry per element")
        inv = self.inv_table
        if not (np.all(table[ids, inv] == e) and np.all(table[inv, ids] == e)):
            raise InvalidGroupError("inv_table does not invert every element")

        if n <= settings.exhaustive_axiom_order:
            left = table[table[:, :, None], ids[None, None, :]]
            right = table[ids[:, None, None], table[None, :, :]]
            associative = np.array_equal(left, right)
        else:
            rng = np.random.default_rng(0)
            a, b, c = rng.integers(0, n, size=(3, 10 * n))
            associative = np.array_equal(table[table[a, b], c], table[a, table[b, c]])
        if not associative:
            raise InvalidGroupError(f"{self.name}: multiplication is not associative")

        if np.any(self.word_dist < 0):
            raise InvalidGroupError(f"{self.name}: generators do not generate the group")

    @property
    def order(self) -> int:
        return int(self.mul_table.shape[0])

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def elements(self) -> range:
        return range(self.order)

    def check_element(self, g: int) -> int:
        """Return ``g`` as int, or raise ElementError if it is not an element id."""
        if not 0 <= int(g) < self.order:
            raise ElementError(f"element id {g} out of range for {self.name} (order {self.order})")
        return int(g)

    def mul(self, g: int, h: int) -> int:
        return int(self.mul_table[g, h])

    def inv(self, g: int) -> int:
        return int(self.inv_table[g])

    def label(self, g: int) -> str:
        if self.element_labels is None:
            return str(int(g))
        return self.element_labels[int(g)]

    def is_same(self, other: FiniteGroup) -> bool:
        """Same object, or identical multiplication tables."""
        return self is other or (
            self.order == other.order and np.array_equal(self.mul_table, other.mul_table)
        )

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul_table, self.mul_table.T))

    @cached_property
    def word_dist(self) -> np.ndarray:
        """Distance of every element from the identity in the Cayley graph (-1 if unreachable)."""
        dist = np.full(self.order, -1, dtype=np.int64)
        dist[self.identity] = 0
        gens = np.asarray(self.generators, dtype=np.intp)
        frontier = np.array([self.identity], dtype=np.intp)
        step = 0
        while frontier.size and gens.size:
            step += 1
            reached = np.unique(self.mul_table[np.ix_(frontier, gens)])
            frontier = reached[dist[reached] < 0]
            dist[frontier] = step
        dist.setflags(write=False)
        return dist

    @property
    def diameter(self) -> int:
        return int(self.word_dist.max())

    def ball_sizes(self) -> list[int]:
        """N_k for k = 0..diameter."""
        counts = np.bincount(self.word_dist, minlength=self.diameter + 1)
        return [int(c) for c in np.cumsum(counts)]

    @cached_property
    def diagonal_pattern(self) -> np.ndarray:
        """Entry [h, h'] is the element g with h = g h', i.e. the B_g owning that entry."""
        pattern = self.mul_table[:, self.inv_table]
        pattern.setflags(write=False)
        return pattern

    @cached_property
    def inverse_shift(self) -> np.ndarray:
        """Row g lists g^-1 h for every h; the column gather used by B_g and F(M)."""
        shift = self.mul_table[self.inv_table]
        shift.setflags(write=False)
        return shift


def _find_identity(table: np.ndarray) -> int:
    ids = np.arange(table.shape[0])
    rows = np.flatnonzero(np.all(table == ids[None, :], axis=1))
    for e in rows:
        if np.array_equal(table[:, e], ids):
            return int(e)
    raise InvalidGroupError("mul_table has no identity element")


def _inverse_from_table(table: np.ndarray, identity: int) -> np.ndarray:
    hits = table == identity
    if not np.all(hits.sum(axis=1) == 1):
        raise InvalidGroupError("some element has no unique inverse")
    return np.argmax(hits, axis=1).astype(ID_DTYPE)


def _check_capacity(order: int, settings: Settings) -> None:
    if order > settings.max_group_order:
        raise CapacityError(f"order {order} exceeds maximum {settings.max_group_order}")


def make_cyclic(n: int, settings: Settings | None = None) -> FiniteGroup:
    """
    The cyclic group C_n = Z/nZ with generators {1, n-1}.

    Raises:
        InvalidOrderError: If n < 1.
    """
    if n < 1:
        raise InvalidOrderError(f"cyclic group order must be positive, got {n}")
    settings = settings or get_settings()
    _check_capacity(n, settings)
    ids = np.arange(n, dtype=ID_DTYPE)
    return FiniteGroup(
        name=f"C{n}",
        mul_table=np.add.outer(ids, ids) % n,
        generators=[1 % n, (n - 1) % n],
        inv_table=(-ids) % n,
        identity=0,
        settings=settings,
    )


def direct_product(
    G: FiniteGroup, H: FiniteGroup, settings: Settings | None = None
) -> FiniteGroup:
    """
    G x H with element (g, h) stored at id g*|H| + h.

    The generating set is {(s, t) : s in S_G + {e}, t in S_H + {e}} minus (e, e),
    so radius-k balls are products of the factor balls (a 3x3 patch on C_n x C_n).

    Raises:
        CapacityError: If |G||H| exceeds the configured maximum.
    """
    settings = settings or get_settings()
    n_h = H.order
    order = G.order * n_h
    _check_capacity(order, settings)
    ids = np.arange(order)
    gi, hi = ids // n_h, ids % n_h
    table = G.mul_table[gi[:, None], gi[None, :]].astype(np.int64) * n_h + H.mul_table[
        hi[:, None], hi[None, :]
    ]
    inverse = G.inv_table[gi].astype(np.int64) * n_h + H.inv_table[hi]
    generators = [
        s * n_h + t
        for s in (G.identity, *G.generators)
        for t in (H.identity, *H.generators)
        if (s, t) != (G.identity, H.identity)
    ]
    labels = [f"({G.label(g)},{H.label(h)})" for g, h in zip(gi, hi, strict=True)]
    return FiniteGroup(
        name=f"{G.name}x{H.name}",
        mul_table=table,
        generators=generators,
        inv_table=inverse,
        identity=G.identity * n_h + H.identity,
        element_labels=labels,
        settings=settings,
    )


def semidirect_product(
    G: FiniteGroup,
    H: FiniteGroup,
    phi: np.ndarray | Sequence[Sequence[int]],
    name: str | None = None,
    element_labels: Sequence[str] | None = None,
    settings: Settings | None = None,
) -> FiniteGroup:
    """
    G x|_phi H with (g, h)(g', h') = (g phi_h(g'), h h'), ids g*|H| + h.

    Args:
        G: Normal factor
        H: Acting factor
        phi: |H| x |G| array; row h is the permutation g -> phi_h(g)
        name: Display name (defaults to "G:phi:H")
        element_labels: Optional element names
        settings: Capacity settings

    Raises:
        InvalidActionError: If some phi_h is not an automorphism of G, or h -> phi_h
            is not a homomorphism H -> Aut(G).
        CapacityError: If |G||H| exceeds the configured maximum.
    """
    settings = settings or get_settings()
    action = np.asarray(phi, dtype=np.intp)
    n_g, n_h = G.order, H.order
    if action.shape != (n_h, n_g):
        raise InvalidActionError(f"phi must have shape ({n_h}, {n_g}), got {action.shape}")
    if not np.array_equal(np.sort(action, axis=1), np.broadcast_to(np.arange(n_g), action.shape)):
        raise InvalidActionError("every phi_h must be a permutation of G")
    images = action[:, G.mul_table]
    products = G.mul_table[action[:, :, None], action[:, None, :]]
    if not np.array_equal(images, products):
        raise InvalidActionError("some phi_h does not preserve multiplication in G")
    composed = action[np.arange(n_h)[:, None, None], action[None, :, :]]
    if not np.array_equal(action[H.mul_table], composed):
        raise InvalidActionError("phi is not a homomorphism H -> Aut(G)")

    order = n_g * n_h
    _check_capacity(order, settings)
    ids = np.arange(order)
    gi, hi = ids // n_h, ids % n_h
    new_g = G.mul_table[gi[:, None], action[hi[:, None], gi[None, :]]].astype(np.int64)
    table = new_g * n_h + H.mul_table[hi[:, None], hi[None, :]]
    generators = [s * n_h + H.identity for s in G.generators]
    generators += [G.identity * n_h + t for t in H.generators]
    if element_labels is None:
        element_labels = [f"({G.label(g)},{H.label(h)})" for g, h in zip(gi, hi, strict=True)]
    return FiniteGroup(
        name=name or f"{G.name}:phi:{H.name}",
        mul_table=table,
        generators=generators,
        identity=G.identity * n_h + H.identity,
        element_labels=element_labels,
        settings=settings,
    )


def inversion_action(G: FiniteGroup, H: FiniteGroup) -> np.ndarray:
    """
    phi_h = inversion for odd h, identity for even h (H = C_m with residue ids).

    The result only passes semidirect_product's checks when G is abelian and m is even.
    """
    identity_perm = np.arange(G.order)
    return np.stack([G.inv_table if h % 2 else identity_perm for h in range(H.order)])


def make_dihedral(n: int, settings: Settings | None = None) -> FiniteGroup:
    """
    D_n of order 2n, built as C_n x| C_2 with the inversion automorphism.

    Element s^k r^b has id 2k + b; generators are {s, s^-1, r}.

    Raises:
        InvalidOrderError: If n < 1.
    """
    if n < 1:
        raise InvalidOrderError(f"dihedral group parameter must be positive, got {n}")
    rotations = make_cyclic(n, settings)
    flip = make_cyclic(2, settings)
    labels = [f"s{k}r" if b else f"s{k}" for k in range(n) for b in range(2)]
    return semidirect_product(
        rotations,
        flip,
        inversion_action(rotations, flip),
        name=f"D{n}",
        element_labels=labels,
        settings=settings,
    )


def make_symmetric(n: int, settings: Settings | None = None) -> FiniteGroup:
    """
    S_n for n <= 7, elements in lexicographic order of their one-line notation.

    Generators are the transposition (0 1), the n-cycle and its inverse.

    Raises:
        InvalidOrderError: If n < 1.
        CapacityError: If n > 7.
    """
    if n < 1:
        raise InvalidOrderError(f"symmetric group degree must be positive, got {n}")
    if n > MAX_SYMMETRIC_DEGREE:
        raise CapacityError(f"symmetric groups are limited to degree {MAX_SYMMETRIC_DEGREE}")
    settings = settings or get_settings()
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    _check_capacity(len(perms), settings)
    weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = perms @ weights

    def lookup(rows: np.ndarray) -> np.ndarray:
        return np.searchsorted(codes, rows @ weights)

    table = np.empty((len(perms), len(perms)), dtype=ID_DTYPE)
    for a, perm in enumerate(perms):
        table[a] = lookup(perm[perms])

    generators: list[int] = []
    if n >= 2:
        swap = np.arange(n)
        swap[[0, 1]] = [1, 0]
        cycle = np.roll(np.arange(n), -1)
        generators = [int(g) for g in lookup(np.stack([swap, cycle, np.argsort(cycle)]))]
    return FiniteGroup(
        name=f"S{n}",
        mul_table=table,
        generators=generators,
        identity=0,
        element_labels=["".join(map(str, p)) for p in perms],
        settings=settings,
    )


def word_ball(G: FiniteGroup, k: int) -> np.ndarray:
    """
    All elements within word distance k of the identity, sorted by (distance, id).

    Raises:
        InvalidKernelError: If k is negative.
    """
    if k < 0:
        raise InvalidKernelError(f"ball radius must be non-negative, got {k}")
    dist = G.word_dist
    ids = np.flatnonzero(dist <= k)
    return ids[np.lexsort((ids, dist[ids]))]


def _closure(G: FiniteGroup, gens: Sequence[int]) -> np.ndarray:
    gens_arr = np.asarray(list(gens), dtype=np.intp)
    if gens_arr.size:
        gens_arr = np.union1d(gens_arr, G.inv_table[gens_arr])
    seen = np.zeros(G.order, dtype=bool)
    seen[G.identity] = True
    frontier = np.array([G.identity], dtype=np.intp)
    while frontier.size and gens_arr.size:
        reached = np.unique(G.mul_table[np.ix_(frontier, gens_arr)])
        frontier = reached[~seen[reached]]
        seen[frontier] = True
    return np.flatnonzero(seen)


@dataclass(frozen=True, eq=False)
class Subgroup:
    """
    A subgroup H of ``parent`` given by its sorted member ids.

    Raises:
        InvalidSubgroupError: If the members miss the identity or are not closed
            under multiplication and inverse.
    """

    parent: FiniteGroup
    member_ids: tuple[int, ...]
    generators: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        members = np.asarray(self.member_ids, dtype=np.intp)
        if members.size == 0 or not np.array_equal(members, np.unique(members)):
            raise InvalidSubgroupError("member_ids must be sorted, unique and non-empty")
        if members.min() < 0 or members.max() >= self.parent.order:
            raise InvalidSubgroupError("member_ids must be element ids of the parent")
        inside = np.zeros(self.parent.order, dtype=bool)
        inside[members] = True
        if not inside[self.parent.identity]:
            raise InvalidSubgroupError("subgroup must contain the identity")
        if not np.all(inside[self.parent.mul_table[np.ix_(members, members)]]):
            raise InvalidSubgroupError("members are not closed under multiplication")
        if not np.all(inside[self.parent.inv_table[members]]):
            raise InvalidSubgroupError("members are not closed under inverse")
        if self.parent.order % members.size:
            raise InvalidSubgroupError("subgroup order does not divide the group order")

    @classmethod
    def from_members(cls, parent: FiniteGroup, member_ids: Sequence[int]) -> Subgroup:
        return cls(parent, tuple(int(g) for g in np.unique(np.asarray(member_ids))))

    @property
    def order(self) -> int:
        return len(self.member_ids)

    @property
    def index(self) -> int:
        """Number of cosets |G|/|H|."""
        return self.parent.order // self.order

    @cached_property
    def members(self) -> np.ndarray:
        members = np.asarray(self.member_ids, dtype=np.intp)
        members.setflags(write=False)
        return members

    @cached_property
    def index_in_parent(self) -> dict[int, int]:
        """Parent id -> subgroup-local id."""
        return {g: i for i, g in enumerate(self.member_ids)}

    @cached_property
    def local_index(self) -> np.ndarray:
        """Array over parent ids: local id, or -1 outside H."""
        local = np.full(self.parent.order, -1, dtype=np.intp)
        local[self.members] = np.arange(self.order)
        local.setflags(write=False)
        return local

    def contains(self, g: int) -> bool:
        return self.local_index[self.parent.check_element(g)] >= 0

    @cached_property
    def as_group(self) -> FiniteGroup:
        """H as a standalone group over local ids 0..|H|-1."""
        parent = self.parent
        table = self.local_index[parent.mul_table[np.ix_(self.members, self.members)]]
        gens = list(self.generators) or self._greedy_generators()
        labels = [parent.label(g) for g in self.member_ids]
        return FiniteGroup(
            name=f"<{','.join(parent.label(g) for g in gens)}> in {parent.name}",
            mul_table=table,
            generators=[int(self.local_index[g]) for g in gens],
            identity=int(self.local_index[parent.identity]),
            element_labels=labels,
        )

    def _greedy_generators(self) -> list[int]:
        dist = self.parent.word_dist[self.members]
        chosen: list[int] = []
        covered = np.zeros(self.parent.order, dtype=bool)
        covered[self.parent.identity] = True
        for g in self.members[np.lexsort((self.members, dist))]:
            if not covered[g]:
                chosen.append(int(g))
                covered[_closure(self.parent, chosen)] = True
        return chosen


def subgroup_from_generators(G: FiniteGroup, gens: Sequence[int]) -> Subgroup:
    """Smallest subgroup containing ``gens`` (the trivial subgroup for no generators)."""
    gens = [G.check_element(g) for g in gens]
    members = _closure(G, gens)
    return Subgroup(G, tuple(int(g) for g in members), tuple(sorted(set(gens))))


def _minimal_representatives(
    G: FiniteGroup, coset_keys: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per coset, the element closest to the identity (ties -> smallest id), in that order."""
    _, coset_idx = np.unique(coset_keys, return_inverse=True)
    ids = np.arange(G.order)
    order = np.lexsort((ids, G.word_dist))
    _, first = np.unique(coset_idx[order], return_index=True)
    reps = order[first]
    reps = reps[np.lexsort((reps, G.word_dist[reps]))]
    position = np.empty(len(reps), dtype=np.intp)
    position[coset_idx[reps]] = np.arange(len(reps))
    return reps, position[coset_idx]


@dataclass(frozen=True, eq=False)
class CosetPartition:
    """
    Right cosets H g_i with closest-to-identity representatives.

    ``blocks[j, i]`` is h_j * rep_i for the j-th member h_j of H. Column i is the
    coset H rep_i; row j is the pooling block P_{h_j}.
    """

    subgroup: Subgroup
    representatives: np.ndarray
    blocks: np.ndarray
    coset_index: np.ndarray

    @property
    def cosets(self) -> list[np.ndarray]:
        return [self.blocks[:, i] for i in range(self.blocks.shape[1])]

    @property
    def partitions(self) -> dict[int, np.ndarray]:
        """h (parent id) -> sorted block P_h."""
        return {
            int(h): np.sort(self.blocks[j])
            for j, h in enumerate(self.subgroup.member_ids)
        }


def right_cosets(G: FiniteGroup, H: Subgroup) -> CosetPartition:
    """
    Partition G into right cosets of H.

    Raises:
        GroupMismatchError: If H is not a subgroup of G.
    """
    if not H.parent.is_same(G):
        raise GroupMismatchError(f"subgroup belongs to {H.parent.name}, not {G.name}")
    keys = G.mul_table[H.members, :].min(axis=0)
    reps, coset_index = _minimal_representatives(G, keys)
    blocks = G.mul_table[np.ix_(H.members, reps)].astype(np.intp)
    for array in (reps, blocks, coset_index):
        array.setflags(write=False)
    return CosetPartition(H, reps, blocks, coset_index)


@dataclass(frozen=True, eq=False)
class HomogeneousSpace:
    """
    X = G/H with one representative per coset xH.

    ``coset_of[g]`` is the index (into ``representatives``) of the coset gH.
    """

    group: FiniteGroup
    stabilizer: Subgroup
    representatives: np.ndarray
    coset_of: np.ndarray

    @property
    def size(self) -> int:
        return len(self.representatives)

    def act(self, g: int) -> np.ndarray:
        """Index permutation of g.[x] = [gx] on representatives."""
        return self.coset_of[self.group.mul_table[g, self.representatives]]


def homogeneous_space(
    G: FiniteGroup, H: Subgroup, representatives: Sequence[int] | None = None
) -> HomogeneousSpace:
    """
    Build G/H, choosing closest-to-identity representatives unless given.

    Raises:
        GroupMismatchError: If H is not a subgroup of G.
        RepresentativeError: If the given representatives do not hit every coset exactly once.
    """
    if not H.parent.is_same(G):
        raise GroupMismatchError(f"subgroup belongs to {H.parent.name}, not {G.name}")
    keys = G.mul_table[:, H.members].min(axis=1)
    if representatives is None:
        reps, coset_of = _minimal_representatives(G, keys)
    else:
        reps = np.asarray([G.check_element(x) for x in representatives], dtype=np.intp)
        rep_keys = keys[reps]
        if len(reps) != H.index or len(np.unique(rep_keys)) != len(reps):
            raise RepresentativeError(
                f"need exactly one representative for each of the {H.index} cosets"
            )
        lookup = {int(key): i for i, key in enumerate(rep_keys)}
        coset_of = np.asarray([lookup[int(key)] for key in keys], dtype=np.intp)
    for array in (reps, coset_of):
        array.setflags(write=False)
    return HomogeneousSpace(G, H, reps, coset_of)
