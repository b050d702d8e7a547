"""Finite groups with enumerable elements and exact arithmetic.

Elements are integer ids in ``[0, order)`` assigned by a deterministic
enumeration order:

- direct powers use mixed radix with the first coordinate least significant,
  so ``(1, 1, 0)`` in Z_2^3 has id 3;
- permutation groups number elements in discovery order of a breadth-first
  closure that right-multiplies by the sorted generators.

Permutations compose right to left, ``(a·b)(x) = a(b(x))``; under this
convention ``(12)·(23) = (123)``.

Groups of order at most ``settings.GROUP_TABLE_CAP`` carry a full
multiplication table; larger groups multiply on demand through their action.
"""
import logging
import re
from collections import deque
from dataclasses import dataclass
from typing import NewType, Optional

import numpy as np
from django.conf import settings

from snakelab.exceptions import ArgumentError, SizeLimitError

logger = logging.getLogger(__name__)

GroupElement = NewType('GroupElement', int)

_CALL = re.compile(r'(\w+)\((.*)\)')


@dataclass(frozen=True)
class GroupSpec:
    """A group specification in the harness config grammar.

    Attributes:
        kind (str): One of ``cyclic``, ``power``, ``symmetric``, ``perms``
        n (int): Order of the cyclic group, degree of the symmetric group
        base (GroupSpec): Base group of a direct power
        d (int): Exponent of a direct power
        generators (tuple): Permutations (image tuples) for ``perms``
    """
    kind: str
    n: int = 0
    base: Optional['GroupSpec'] = None
    d: int = 0
    generators: tuple = ()

    @classmethod
    def cyclic(cls, n):
        return cls('cyclic', n=int(n))

    @classmethod
    def power(cls, base, d):
        return cls('power', base=base, d=int(d))

    @classmethod
    def symmetric(cls, k):
        return cls('symmetric', n=int(k))

    @classmethod
    def permutation_closure(cls, generators):
        return cls('perms', generators=tuple(tuple(int(i) for i in g) for g in generators))

    def __str__(self):
        if self.kind == 'power':
            return f"power({self.base},{self.d})"
        if self.kind == 'perms':
            body = ';'.join('[' + ','.join(str(i) for i in g) + ']' for g in self.generators)
            return f"perms({body})"
        return f"{self.kind}({self.n})"


def parse_group_spec(text):
    """Parse ``cyclic(n)``, ``power(<spec>,d)``, ``symmetric(k)`` or ``perms([..];[..])``."""
    compact = text.replace(' ', '')
    match = _CALL.fullmatch(compact)
    if not match:
        raise ArgumentError(f"Unrecognised group specification: {text!r}")
    name, body = match.groups()
    try:
        if name == 'cyclic':
            return GroupSpec.cyclic(int(body))
        if name == 'symmetric':
            return GroupSpec.symmetric(int(body))
        if name == 'power':
            base_text, _, exponent = body.rpartition(',')
            return GroupSpec.power(parse_group_spec(base_text), int(exponent))
        if name == 'perms':
            if not body:
                return GroupSpec.permutation_closure([])
            generators = [
                [int(i) for i in chunk.strip('[]').split(',')]
                for chunk in body.split(';')
            ]
            return GroupSpec.permutation_closure(generators)
    except ValueError as exc:
        raise ArgumentError(f"Malformed group specification {text!r}: {exc}") from exc
    raise ArgumentError(f"Unknown group family {name!r} in {text!r}")


class FiniteGroup:
    """A finite group on element ids ``0 .. order-1`` with identity ``0``.

    Subclasses supply the vectorised product ``_products`` and inverses
    ``_inverses``; this class adds the table, argument checking and the
    translation helpers used by Cayley graphs and distributions.

    Attributes:
        spec (GroupSpec): The specification the group was built from
        order (int): Number of elements |G|
        identity (int): Id of the identity element (always 0)
    """

    def __init__(self, spec, order):
        self.spec = spec
        self.order = int(order)
        self.identity = GroupElement(0)
        self._table = None
        if self.order <= settings.GROUP_TABLE_CAP:
            ids = np.arange(self.order)
            self._table = np.empty((self.order, self.order), dtype=np.int32)
            for a in range(self.order):
                self._table[a] = self._products(np.full(self.order, a), ids)
        self._inverse = self._inverses()

    def _products(self, a, b):
        raise NotImplementedError

    def _inverses(self):
        raise NotImplementedError

    def label(self, a):
        """Human-readable name of element ``a``."""
        return str(int(a))

    @property
    def has_table(self):
        return self._table is not None

    def _check(self, a):
        if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
            raise ArgumentError(f"Group element id must be an integer, got {a!r}")
        if not 0 <= a < self.order:
            raise ArgumentError(f"Element id {a} outside [0, {self.order})")
        return int(a)

    def elements(self):
        return np.arange(self.order)

    def multiply(self, a, b):
        """Return the exact product a·b."""
        a, b = self._check(a), self._check(b)
        if self._table is not None:
            return GroupElement(int(self._table[a, b]))
        return GroupElement(int(self._products(np.array([a]), np.array([b]))[0]))

    def invert(self, a):
        """Return the unique b with a·b equal to the identity."""
        return GroupElement(int(self._inverse[self._check(a)]))

    def multiply_arrays(self, a, b):
        """Elementwise products of two broadcastable id arrays."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        if self._table is not None:
            return self._table[a, b]
        shape = a.shape
        return self._products(a.ravel(), b.ravel()).reshape(shape)

    def left_translation(self, x):
        """Array whose entry v is x·v."""
        x = self._check(x)
        if self._table is not None:
            return self._table[x].copy()
        return self._products(np.full(self.order, x), np.arange(self.order))

    def right_translation(self, g):
        """Array whose entry v is v·g."""
        g = self._check(g)
        if self._table is not None:
            return self._table[:, g].copy()
        return self._products(np.arange(self.order), np.full(self.order, g))

    def inverse_array(self):
        return self._inverse.copy()

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec} order={self.order}>"


class CyclicGroup(FiniteGroup):
    """Z_n written additively; element id k is the residue k."""

    def __init__(self, n):
        if n < 1:
            raise ArgumentError(f"cyclic(n) needs n >= 1, got {n}")
        self.n = n
        super().__init__(GroupSpec.cyclic(n), n)

    def _products(self, a, b):
        return (a + b) % self.n

    def _inverses(self):
        return (-np.arange(self.n)) % self.n


class DirectPower(FiniteGroup):
    """The direct power base^d with coordinatewise multiplication."""

    def __init__(self, base, d):
        if d < 1:
            raise ArgumentError(f"power(base, d) needs d >= 1, got {d}")
        order = base.order ** d
        if order > settings.GROUP_ELEMENT_CAP:
            raise SizeLimitError(
                f"power({base.spec},{d}) has {order} elements, cap is {settings.GROUP_ELEMENT_CAP}",
                size=order, cap=settings.GROUP_ELEMENT_CAP)
        self.base = base
        self.d = d
        self._radix = base.order ** np.arange(d, dtype=np.int64)
        super().__init__(GroupSpec.power(base.spec, d), order)

    def coordinates(self, ids):
        """Coordinate tuple(s) of the given id(s), first coordinate least significant."""
        return (np.asarray(ids, dtype=np.int64)[..., None] // self._radix) % self.base.order

    def element(self, coords):
        coords = np.asarray(coords, dtype=np.int64)
        if coords.shape[-1] != self.d or np.any(coords < 0) or np.any(coords >= self.base.order):
            raise ArgumentError(f"Invalid coordinates {coords.tolist()} for {self.spec}")
        return GroupElement(int((coords * self._radix).sum()))

    def _products(self, a, b):
        digits = self.base.multiply_arrays(self.coordinates(a), self.coordinates(b))
        return (digits * self._radix).sum(axis=-1)

    def _inverses(self):
        digits = self.base.inverse_array()[self.coordinates(np.arange(self.order))]
        return (digits * self._radix).sum(axis=-1)

    def label(self, a):
        coords = self.coordinates(a).tolist()
        if self.base.order <= 10:
            return ''.join(str(c) for c in coords)
        return '(' + ','.join(str(c) for c in coords) + ')'


class PermutationGroup(FiniteGroup):
    """The subgroup generated by permutations of ``0 .. degree-1``."""

    # degree**degree must fit in int64 for the vectorised lookup
    _MAX_ENCODED_DEGREE = 15

    def __init__(self, generators, spec=None, cap=None):
        if not generators:
            raise ArgumentError("permutation_closure needs at least one generator")
        degree = len(generators[0])
        perms = sorted({tuple(int(i) for i in g) for g in generators})
        for g in perms:
            if len(g) != degree or sorted(g) != list(range(degree)):
                raise ArgumentError(f"{list(g)} is not a permutation of 0..{degree - 1}")
        cap = settings.GROUP_ELEMENT_CAP if cap is None else cap
        self.degree = degree
        self.generators = perms
        self.perms = self._closure(perms, degree, cap)
        self._index = {tuple(p): i for i, p in enumerate(self.perms.tolist())}
        self._weights = None
        if degree <= self._MAX_ENCODED_DEGREE:
            self._weights = degree ** np.arange(degree, dtype=np.int64)
            codes = self.perms @ self._weights
            self._code_order = np.argsort(codes)
            self._sorted_codes = codes[self._code_order]
        super().__init__(spec or GroupSpec.permutation_closure(perms), len(self.perms))

    @staticmethod
    def _closure(generators, degree, cap):
        identity = tuple(range(degree))
        seen = {identity: 0}
        elements = [identity]
        queue = deque([identity])
        while queue:
            g = queue.popleft()
            for h in generators:
                product = tuple(g[h[x]] for x in range(degree))
                if product not in seen:
                    if len(elements) >= cap:
                        raise SizeLimitError(
                            f"Permutation closure exceeds the element cap {cap}",
                            size=len(elements) + 1, cap=cap)
                    seen[product] = len(elements)
                    elements.append(product)
                    queue.append(product)
        logger.debug("closure of %d generators on %d points: %d elements",
                     len(generators), degree, len(elements))
        return np.array(elements, dtype=np.int64)

    def _lookup(self, composed):
        if self._weights is not None:
            codes = composed @ self._weights
            return self._code_order[np.searchsorted(self._sorted_codes, codes)]
        return np.array([self._index[tuple(row)] for row in composed.tolist()], dtype=np.int64)

    def _products(self, a, b):
        composed = np.take_along_axis(self.perms[a], self.perms[b], axis=1)
        return self._lookup(composed)

    def _inverses(self):
        return self._lookup(np.argsort(self.perms, axis=1))

    def element(self, perm):
        """Id of the permutation given as an image tuple."""
        try:
            return GroupElement(self._index[tuple(int(i) for i in perm)])
        except KeyError:
            raise ArgumentError(f"{list(perm)} is not an element of {self.spec}") from None

    def permutation(self, a):
        return tuple(self.perms[self._check(a)].tolist())

    def label(self, a):
        perm = self.permutation(a)
        seen, cycles = set(), []
        for start in range(self.degree):
            if start in seen or perm[start] == start:
                continue
            cycle, x = [], start
            while x not in seen:
                seen.add(x)
                cycle.append(x + 1)
                x = perm[x]
            cycles.append(cycle)
        if not cycles:
            return '()'
        sep = '' if self.degree <= 9 else ' '
        return ''.join('(' + sep.join(str(c) for c in cycle) + ')' for cycle in cycles)


def symmetric_generators(k):
    """Adjacent transpositions of S_k (the identity alone for k = 1)."""
    if k < 1:
        raise ArgumentError(f"symmetric(k) needs k >= 1, got {k}")
    if k == 1:
        return [(0,)]
    generators = []
    for i in range(k - 1):
        perm = list(range(k))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        generators.append(tuple(perm))
    return generators


def build_group(spec):
    """Build a FiniteGroup from a GroupSpec or its text form.

    Args:
        spec (GroupSpec | str): cyclic(n), power(base, d), symmetric(k) or
            perms(...) (the subgroup generated by the listed permutations)

    Returns:
        FiniteGroup: Group with exact arithmetic on canonical ids
    """
    if isinstance(spec, str):
        spec = parse_group_spec(spec)
    if spec.kind == 'cyclic':
        return CyclicGroup(spec.n)
    if spec.kind == 'power':
        return DirectPower(build_group(spec.base), spec.d)
    if spec.kind == 'symmetric':
        return PermutationGroup(symmetric_generators(spec.n), spec=spec)
    if spec.kind == 'perms':
        return PermutationGroup(list(spec.generators), spec=spec)
    raise ArgumentError(f"Unknown group family {spec.kind!r}")
