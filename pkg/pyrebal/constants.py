
# working areas of a task on the workpiece
EXTERNAL = 0
INTERNAL = 1
areas = {EXTERNAL, INTERNAL}

ergonomic_indices = {1, 2, 3, 4, 5}

# objective components, all in minimization form (-MSF is minimized)
NEG_MSF = "neg_msf"
DELTA_L = "delta_l"
DELTA_H = "delta_h"
components = (NEG_MSF, DELTA_L, DELTA_H)

equal_weights = (1/3, 1/3, 1/3)

# weights of the initial balancing: no reference configuration exists yet
baseline_weights = (0.0, 0.5, 0.5)

# synthetic instance protocol
default_time_range = (1, 7)
default_ergo_range = (1, 5)
default_internal_probability = 0.5
default_max_predecessors = 3
default_target_cycle_time = 20
default_baseline_cycle_times = frozenset({17, 18, 19, 21, 22, 23})

# stopping the initial balancing early gives the "suboptimal start"
OPTIMAL_START = "optimal_start"
SUBOPTIMAL_START = "suboptimal_start"
scenarios = (OPTIMAL_START, SUBOPTIMAL_START)
scenario_gap = {
    OPTIMAL_START: 0.0,
    SUBOPTIMAL_START: 0.8,
}

SEMANTIC = "semantic"
LINEARIZED = "linearized"
BOTH = "both"
encodings = (SEMANTIC, LINEARIZED)

# enumeration guards
feasible_guard = {"tasks": 6, "stations": 3, "workers": 4}
optimal_guard = {"tasks": 8, "stations": 3, "workers": 4}

# desk-scale benchmark defaults
default_suite_sizes = (8, 10, 12, 14)
default_suite_seeds = 10
default_suite_time_limit = 60.0

# numerical tolerances
objective_tol = 1e-10
gap_eps = 1e-9
