"""Snake text format.

::

    snake v1 L=<L> s=<s>
    <x_0> <x_1> ... <x_L>
    seeds <seed_0> ... <seed_ell>
"""
import re

from snakelab.exceptions import ArgumentError

from .services import Snake

_HEADER = re.compile(r'snake v1 L=(\d+) s=(\d+)')


def dump_snake(snake):
    return '\n'.join([
        f"snake v1 L={snake.L} s={snake.s}",
        ' '.join(str(v) for v in snake.vertices),
        'seeds ' + ' '.join(str(g) for g in snake.seeds),
    ]) + '\n'


def load_snake(text, graph=None):
    """Parse dump_snake output; with a graph, also check steps are edges or stays."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    header = _HEADER.fullmatch(lines[0]) if lines else None
    if not header:
        raise ArgumentError("Bad snake header")
    length, s = int(header.group(1)), int(header.group(2))
    vertices = tuple(int(v) for v in lines[1].split()) if len(lines) > 1 else ()
    if len(vertices) != length + 1:
        raise ArgumentError(f"Header says L={length} but {len(vertices)} vertices follow")
    seeds = ()
    if len(lines) > 2 and lines[2].startswith('seeds'):
        seeds = tuple(int(g) for g in lines[2].split()[1:])
    if seeds and (len(seeds) * s != length):
        raise ArgumentError(f"{len(seeds)} seeds of length {s} do not make L={length}")
    if graph is not None:
        for a, b in zip(vertices, vertices[1:]):
            if a != b and not graph.has_edge(a, b):
                raise ArgumentError(f"Step {a} -> {b} is not an edge")
    return Snake(vertices=vertices, seeds=seeds, s=s)


def write_snake(snake, path):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(dump_snake(snake))


def read_snake(path, graph=None):
    with open(path, encoding='utf-8') as handle:
        return load_snake(handle.read(), graph)
