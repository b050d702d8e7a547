"""CSV dumps of adversary matrices and per-snake scores."""
import numpy as np
import pandas as pd

PAIR_COLUMNS = ['X_index', 'Y_index', 'w', 'R']
SNAKE_COLUMNS = ['X_index', 'M_A', 'min_v_ratio']


def pair_frame(w, relation):
    """One row per pair with w(X, Y) > 0."""
    xs, ys = np.nonzero(w > 0)
    return pd.DataFrame({'X_index': xs, 'Y_index': ys, 'w': w[xs, ys], 'R': relation[xs, ys]},
                        columns=PAIR_COLUMNS)


def snake_frame(scores):
    return pd.DataFrame({'X_index': np.arange(len(scores.M_A)), 'M_A': scores.M_A,
                         'min_v_ratio': scores.min_v_ratio()}, columns=SNAKE_COLUMNS)


def dump_pair_scores(w, relation):
    return pair_frame(w, relation).to_csv(index=False, lineterminator='\n', float_format='%.17g')


def dump_snake_scores(scores):
    return snake_frame(scores).to_csv(index=False, lineterminator='\n', float_format='%.17g')
