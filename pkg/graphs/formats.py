"""Line-oriented text format for graphs.

::

    vt-graph v1 N=<n> d=<d> base=<v0>
    cayley group=<spec> gens=<id,id,...>      (Cayley graphs only)
    <id>: <sorted neighbour ids>
    ...
    sigma <x>: <sigma_x(0) ... sigma_x(N-1)>  (explicit graphs only)
"""
import re

import numpy as np

from groups.services import build_group
from snakelab.exceptions import ArgumentError

from .services import build_cayley, build_explicit_vt

_HEADER = re.compile(r'vt-graph v1 N=(\d+) d=(\d+) base=(\d+)')
_CAYLEY = re.compile(r'cayley group=(\S+) gens=([\d,]+)')


def dump_graph(graph):
    lines = [f"vt-graph v1 N={graph.vertex_count} d={graph.diameter} base={graph.base_vertex}"]
    if graph.is_cayley:
        gens = ','.join(str(g) for g in graph.generators)
        lines.append(f"cayley group={graph.group.spec} gens={gens}")
    for v, row in enumerate(graph.adjacency.tolist()):
        lines.append(f"{v}: " + ' '.join(str(w) for w in row))
    if not graph.is_cayley:
        for x in range(graph.vertex_count):
            images = ' '.join(str(int(v)) for v in graph.automorphism_array(x))
            lines.append(f"sigma {x}: {images}")
    return '\n'.join(lines) + '\n'


def load_graph(text):
    """Parse the output of dump_graph and rebuild (and revalidate) the graph."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ArgumentError("Empty graph file")
    header = _HEADER.fullmatch(lines[0].strip())
    if not header:
        raise ArgumentError(f"Bad graph header: {lines[0]!r}")
    n, d, base = (int(x) for x in header.groups())
    cayley = _CAYLEY.fullmatch(lines[1].strip()) if len(lines) > 1 else None
    body = lines[2:] if cayley else lines[1:]
    adjacency, sigma = [], []
    for line in body:
        key, _, values = line.partition(':')
        row = [int(x) for x in values.split()]
        if key.startswith('sigma'):
            sigma.append(row)
        else:
            if int(key) != len(adjacency):
                raise ArgumentError(f"Vertex lines out of order at {key!r}")
            adjacency.append(row)
    if len(adjacency) != n:
        raise ArgumentError(f"Header says N={n} but {len(adjacency)} vertex lines follow")
    if cayley:
        group = build_group(cayley.group(1))
        graph = build_cayley(group, [int(g) for g in cayley.group(2).split(',')])
        if graph.adjacency.tolist() != adjacency:
            raise ArgumentError("Stored adjacency disagrees with the Cayley construction")
    else:
        graph = build_explicit_vt(adjacency, base, np.array(sigma, dtype=np.int64))
    if graph.diameter != d:
        raise ArgumentError(f"Header diameter {d} disagrees with computed {graph.diameter}")
    return graph


def write_graph(graph, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(dump_graph(graph))


def read_graph(path):
    with open(path, encoding='utf-8') as handle:
        return load_graph(handle.read())
