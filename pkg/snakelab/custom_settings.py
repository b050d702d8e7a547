import os

# Finite groups
GROUP_TABLE_CAP = 4096
GROUP_ELEMENT_CAP = 2 ** 20

# Graphs
GRAPH_VERTEX_CAP = 2 ** 20

# Exact enumeration budgets
ENUMERATION_BUDGET = int(os.getenv('SNAKELAB_BUDGET', 10 ** 6))
EXACT_CONSISTENCY_BUDGET = 10 ** 5
HITTING_DP_BUDGET = 5 * 10 ** 7
MIXING_BUDGET = 5 * 10 ** 7
ADVERSARY_MATRIX_CAP = 4096
TV_CHAIN_OUTCOME_CAP = 10 ** 6

# Snake parameters
DEFAULT_C_ELL = 200
CONSIST_THRESHOLD = 0.9
GOOD_PROB_THRESHOLD = 0.9

# Monte Carlo
DEFAULT_TRIALS = 10 ** 4
DEFAULT_SEED = 7

# Tolerances
PROBABILITY_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-12

# Sweeps stop adding rows once this many oracle queries have been spent
SWEEP_QUERY_BUDGET = int(os.getenv('SNAKELAB_SWEEP_QUERY_BUDGET', 10 ** 8))

# Adversary lab: relation mass assumed when snakes are good and consistent
RELATION_MASS_FLOOR = 0.6
