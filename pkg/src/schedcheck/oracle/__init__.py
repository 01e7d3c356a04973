"""Independent ground-truth engines used to cross-check the verifier."""

from .eogenum import GraphTooLarge, eog_feasible_bruteforce
from .interp import (Safe, Schedule, Step, StepBoundExceeded, Unsafe, ReplayError,
                     ReplayResult, enumerate_schedules, replay, run_sequential)

__all__ = [
    "GraphTooLarge", "eog_feasible_bruteforce", "Safe", "Schedule", "Step",
    "StepBoundExceeded", "Unsafe", "ReplayError", "ReplayResult", "enumerate_schedules",
    "replay", "run_sequential",
]
