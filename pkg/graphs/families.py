"""Preset graph families used by the harness and the sweeps."""
import logging
import math

import numpy as np

from groups.services import GroupSpec, build_group, parse_group_spec
from snakelab.exceptions import ArgumentError, DisconnectedGraphError

from .services import build_cayley

logger = logging.getLogger(__name__)

FAMILIES = ('cycle', 'hypercube', 'torus', 'torus2', 'random_cayley', 'cayley')

_MAX_RANDOM_DRAWS = 100


def cycle(n):
    """C_n as Cayley(Z_n, {1})."""
    graph = build_cayley(build_group(GroupSpec.cyclic(n)), [1])
    graph.family = ('cycle', n)
    return graph


def hypercube(n):
    """Q_n as Cayley(Z_2^n, standard basis)."""
    return torus(2, n, family=('hypercube', n))


def torus(n, dim=2, family=None):
    """The torus Z_n^dim with the standard basis as generators."""
    group = build_group(GroupSpec.power(GroupSpec.cyclic(n), dim))
    basis = [group.element(np.eye(dim, dtype=np.int64)[i]) for i in range(dim)]
    graph = build_cayley(group, basis)
    graph.family = family or ('torus', n, dim)
    return graph


def random_cayley(group_spec, s, rng):
    """Cayley graph of a sequence of s uniformly random elements.

    Draws are repeated until the non-identity elements generate the group.
    The drawn sequence (repeats and identity included) is kept on the graph
    as ``generator_sequence`` for subproduct chunk distributions.
    """
    group = build_group(group_spec)
    for attempt in range(_MAX_RANDOM_DRAWS):
        sequence = rng.integers(group.order, size=s)
        generators = sorted({int(g) for g in sequence} - {group.identity})
        if not generators:
            continue
        try:
            graph = build_cayley(group, generators)
        except DisconnectedGraphError:
            logger.info("random Cayley draw %d on %s does not generate; redrawing", attempt, group.spec)
            continue
        graph.generator_sequence = tuple(int(g) for g in sequence)
        graph.family = ('random_cayley', str(group.spec), s)
        return graph
    raise DisconnectedGraphError(
        f"{_MAX_RANDOM_DRAWS} draws of {s} elements never generated {group.spec}")


def random_cayley_lambda(order, s):
    """Confidence margin of a random generator sequence: s - 5 log N + 2 log s."""
    return s - 5 * math.log2(order) + 2 * math.log2(s)


def build_family(name, n=None, dim=2, group=None, s=None, generators=None, rng=None):
    """Build a preset family member.

    Args:
        name (str): cycle, hypercube, torus, torus2, random_cayley or cayley
        n (int): Size parameter
        dim (int): Torus dimension
        group (str): Group spec for random_cayley / cayley
        s (int): Sequence length for random_cayley
        generators (list): Generator ids for cayley
        rng (np.random.Generator): Randomness for random_cayley
    """
    if name == 'cycle':
        return cycle(n)
    if name == 'hypercube':
        return hypercube(n)
    if name == 'torus':
        return torus(n, dim)
    if name == 'torus2':
        return torus(n, 2)
    if name == 'random_cayley':
        if group is None or s is None or rng is None:
            raise ArgumentError("random_cayley needs group, s and an rng")
        return random_cayley(parse_group_spec(group) if isinstance(group, str) else group, s, rng)
    if name == 'cayley':
        if group is None or not generators:
            raise ArgumentError("cayley needs a group spec and generators")
        graph = build_cayley(build_group(group), generators)
        graph.family = ('cayley', str(group))
        return graph
    raise ArgumentError(f"Unknown graph family {name!r}; choose from {', '.join(FAMILIES)}")
