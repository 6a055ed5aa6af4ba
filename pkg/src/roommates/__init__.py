"""Stable Roommates toolkit: instance model, statistical-culture generators,
stable-partition engine, solution enumeration and an experiment harness."""

__version__ = "0.1.0"

from .model import (Instance, Matching, Partition, Cycle, build_instance,
                    is_blocking_pair, is_stable_matching, is_stable_partition,
                    cycles_of, parse_instance, serialize_instance)
from .engine import (stable_partition, is_solvable, solve,
                     even_cycle_decompositions, EngineState, add_agent,
                     backend_name)
from .generators import Culture, CULTURES, generate
from .derive import (reduce_partition, max_stable_matching, half_matching,
                     cycle_stats, alpha, CycleStats, AlphaRatio, HalfMatching)
from .enumeration import (brute_all_matchings, brute_all_partitions,
                          enum_stable_matchings, enum_reduced_partitions,
                          enum_all_partitions, collect_cycles_and_pairs,
                          solution_sets, SolutionSets, EnumResult)
from .experiments import (ExperimentConfig, ExperimentRecord, run_experiment,
                          alpha_sweep, exact_pn, fit_power_law, fit_sqrt_log,
                          compute_trial)
from . import errors
