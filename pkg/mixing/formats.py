"""CSV form of vertex distributions: ``vertex,weight`` rows and a trailer."""
import io
import re

import pandas as pd

from snakelab.exceptions import ArgumentError

from .services import VertexDistribution

_TRAILER = re.compile(r'# sum=(\S+) delta=(\S+)')


def dump_distribution(dist, delta=None):
    """Write every vertex with nonzero weight, then ``# sum=<s> delta=<d>``."""
    delta = dist.tv_to_uniform() if delta is None else delta
    support = dist.support
    frame = pd.DataFrame({'vertex': support, 'weight': dist.weights[support]})
    body = frame.to_csv(index=False, lineterminator='\n', float_format='%.17g')
    return body + f"# sum={float(dist.weights.sum())!r} delta={float(delta)!r}\n"


def load_distribution(text, size):
    """Parse dump_distribution output over ``size`` vertices.

    Returns:
        tuple: (VertexDistribution, delta recorded in the trailer)
    """
    trailer = None
    for line in text.splitlines():
        if line.startswith('#'):
            trailer = _TRAILER.fullmatch(line.strip())
    if trailer is None:
        raise ArgumentError("Distribution CSV is missing its '# sum= delta=' trailer")
    frame = pd.read_csv(io.StringIO(text), comment='#')
    if list(frame.columns) != ['vertex', 'weight']:
        raise ArgumentError(f"Expected columns vertex,weight, got {list(frame.columns)}")
    vertices = frame['vertex'].to_numpy()
    if vertices.size and (vertices.min() < 0 or vertices.max() >= size):
        raise ArgumentError(f"Vertex ids must lie in [0, {size})")
    weights = [0.0] * size
    for v, w in zip(vertices.tolist(), frame['weight'].tolist()):
        weights[v] = w
    return VertexDistribution(weights), float(trailer.group(2))


def write_distribution(dist, path, delta=None):
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(dump_distribution(dist, delta))


def read_distribution(path, size):
    with open(path, encoding='utf-8') as handle:
        return load_distribution(handle.read(), size)
