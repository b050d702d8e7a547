"""Experiment configuration in sectioned ``key = value`` files.

::

    [graph]
    family = hypercube
    n = 6

    [chunk]
    method = uniform_ball
    s = 2

    [snake]
    ell = 3

    [run]
    trials = 1000
    seed = 7

All randomness of a run comes from ``seed``: ``SeedSequence(seed)`` is split
into the graph, snake and run streams, in that order.
"""
import configparser
import io
from dataclasses import dataclass, field, fields, replace

import numpy as np
from django.conf import settings

from graphs.families import build_family
from graphs.formats import read_graph
from mixing.services import build_chunk_distribution
from snakelab.exceptions import ArgumentError
from snakes.services import SnakeParams

STREAMS = ('graph', 'snake', 'run')


def _int_list(text):
    return tuple(int(part) for part in str(text).split(',') if part.strip())


def _option(section, kind=str, default=None):
    return field(default=default, metadata={'section': section, 'kind': kind})


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines the output of a harness command."""
    family: str = _option('graph', default='hypercube')
    n: int = _option('graph', int, 4)
    dim: int = _option('graph', int, 2)
    group: str = _option('graph')
    generators: tuple = _option('graph', _int_list)
    random_s: int = _option('graph', int)
    graph_file: str = _option('graph')
    method: str = _option('chunk', default='uniform_ball')
    s: int = _option('chunk', int)
    ell: int = _option('snake', int)
    c_ell: float = _option('snake', float)
    eps: float = _option('snake', float)
    consist_threshold: float = _option('snake', float)
    good_prob_threshold: float = _option('snake', float)
    x0: int = _option('snake', int)
    trials: int = _option('run', int)
    seed: int = _option('run', int)
    out: str = _option('run')
    budget: int = _option('run', int)

    @classmethod
    def from_text(cls, text):
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ArgumentError(f"Malformed config: {exc}") from exc
        known = {f.name: f for f in fields(cls)}
        values = {}
        for section in parser.sections():
            for key, raw in parser.items(section):
                spec = known.get(key)
                if spec is None or spec.metadata['section'] != section:
                    raise ArgumentError(f"Unknown config key [{section}] {key}")
                try:
                    values[key] = spec.metadata['kind'](raw)
                except ValueError as exc:
                    raise ArgumentError(f"Bad value for [{section}] {key}: {raw!r}") from exc
        return cls(**values)

    @classmethod
    def read(cls, path):
        try:
            with open(path, encoding='utf-8') as handle:
                return cls.from_text(handle.read())
        except OSError as exc:
            raise ArgumentError(f"Cannot read config {path}: {exc}") from exc

    @classmethod
    def from_options(cls, options):
        """Config file named by ``options['config']`` overridden by explicit flags."""
        base = cls.read(options['config']) if options.get('config') else cls()
        return base.merged(**options)

    def merged(self, **overrides):
        names = {f.name for f in fields(self)}
        changes = {k: v for k, v in overrides.items() if k in names and v is not None}
        if isinstance(changes.get('generators'), str):
            changes['generators'] = _int_list(changes['generators'])
        return replace(self, **changes)

    def to_text(self):
        parser = configparser.ConfigParser(interpolation=None)
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            section = f.metadata['section']
            if not parser.has_section(section):
                parser.add_section(section)
            parser.set(section, f.name, ','.join(map(str, value)) if isinstance(value, tuple) else str(value))
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()

    def write(self, path):
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(self.to_text())

    @property
    def run_seed(self):
        return settings.DEFAULT_SEED if self.seed is None else self.seed

    def streams(self):
        """Named generators split from the run seed."""
        children = np.random.SeedSequence(self.run_seed).spawn(len(STREAMS))
        return {name: np.random.default_rng(child) for name, child in zip(STREAMS, children)}

    def build_graph(self, rng=None):
        if self.graph_file:
            return read_graph(self.graph_file)
        rng = self.streams()['graph'] if rng is None else rng
        return build_family(self.family, n=self.n, dim=self.dim, group=self.group,
                            s=self.random_s, generators=list(self.generators or ()), rng=rng)

    def chunk_radius(self, graph):
        if self.s is not None:
            return self.s
        sequence = getattr(graph, 'generator_sequence', None)
        if self.method.startswith('subproduct') and sequence:
            return len(sequence)
        return graph.diameter

    def build_chunk(self, graph):
        return build_chunk_distribution(graph, self.chunk_radius(graph), self.method)

    def build_params(self, graph, chunk):
        shared = dict(delta=chunk.delta, eps=self.eps, consist_threshold=self.consist_threshold,
                      good_prob_threshold=self.good_prob_threshold)
        if self.ell is not None:
            return SnakeParams(s=chunk.radius, ell=self.ell, c_ell=self.c_ell, **shared)
        return SnakeParams.from_formula(graph.vertex_count, chunk.radius, c_ell=self.c_ell, **shared)
