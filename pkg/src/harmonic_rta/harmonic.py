"""Linear-stage exact WCRT for harmonic task sets.

With higher-priority tasks sorted by non-increasing (hence pairwise dividing)
periods, the least fixed point of the processor demand is reached by at most
one refinement stage per higher-priority task, each spending exactly one
ceiling evaluation.  This module implements that staged iteration, its
uniform-jitter variant, jitter min/max bounds, the shifted-demand model whose
fixed point provably coincides (the source of the exclusion intervals), and
the sufficient condition under which the uniform-jitter result is exact for
per-task jitters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import NonHarmonic, PiOrder, TaskSet, pi_order
from .rta import NonConvergent, RtaResult


class JitterPresent(ValueError):
    """A jitter-free method was called on a set with non-zero jitters."""


class DeltaOutOfRange(ValueError):
    """A demand shift lies outside [0, suffix wcet] at some position."""


@dataclass(frozen=True)
class HarmonicIterationTrace:
    """Stage-by-stage record of one staged WCRT run.

    `stage_values[0]` is the utilization-bound base value; each later entry is
    one refinement stage.  `ceil_evals` counts ceiling evaluations (one per
    computed stage).  `early_stop_stage`, when set, is the 1-based stage whose
    refinement was skipped because the previous value already sits on a
    multiple of that stage's period (all remaining stages are then no-ops).
    """

    stage_values: tuple
    ceil_evals: int
    early_stop_stage: int | None


def _order_arrays(ts: TaskSet, pi: PiOrder):
    periods = tuple(ts[i].period for i in pi.order)
    wcets = tuple(ts[i].wcet for i in pi.order)
    utils = tuple(ts[i].utilization for i in pi.order)
    for a, b in zip(periods, periods[1:]):
        if a % b != 0:
            raise NonHarmonic(
                f"higher-priority periods {a} and {b} do not divide")
    return periods, wcets, utils


def _staged_fixed_point(periods, wcets, utils, suffix_utils, const, jitter,
                        early_stop: bool = True):
    """Run the staged iteration for demand t = const + sum C*ceil((t+J)/T).

    Returns (value, stage_values, ceil_evals, early_stop_stage).  `const` is
    the stage-invariant term (the target wcet, or its virtual-jitter
    replacement) and `jitter` the uniform jitter J added inside every ceiling.
    """
    total_util = (suffix_utils[0] + utils[0]) if utils else Fraction(0)
    if total_util >= 1:
        raise NonConvergent(
            f"higher-priority utilization {total_util} >= 1: no fixed point")

    value = Fraction(const + jitter, 1) / (1 - total_util) - jitter
    stage_values = [value]
    ceil_evals = 0
    early_stop_stage = None
    for s, (period, wcet, util) in enumerate(zip(periods, wcets, utils)):
        shifted = value + jitter
        if early_stop and shifted % period == 0:
            # Every remaining period divides this one, so all later
            # refinements would leave the value unchanged.
            early_stop_stage = s + 1
            break
        ceil_evals += 1
        step = (-util * shifted + wcet * math.ceil(shifted / period))
        value = value + step / (1 - suffix_utils[s])
        stage_values.append(value)
    return value, tuple(stage_values), ceil_evals, early_stop_stage


def _staged_result(ts: TaskSet, target_index: int, jitter,
                   early_stop: bool, jitter_aware: bool):
    target = ts[target_index]
    pi = pi_order(ts, target_index, tie_break="jitter")
    periods, wcets, utils = _order_arrays(ts, pi)
    value, stages, ceils, stopped = _staged_fixed_point(
        periods, wcets, utils, pi.cumulative_util, target.wcet, jitter,
        early_stop=early_stop)
    slack = target.deadline - value
    if jitter_aware:
        slack -= target.jitter
    result = RtaResult(value, ceils, stages, slack >= 0, slack)
    return result, HarmonicIterationTrace(stages, ceils, stopped)


def _reject_jitters(ts: TaskSet, target_index: int) -> None:
    involved = list(ts.tasks[:target_index]) + [ts[target_index]]
    for task in involved:
        if task.jitter:
            raise JitterPresent(
                f"task {task.id} has jitter {task.jitter}; use a jitter-aware "
                f"method")


def wcrt_harmonic(ts: TaskSet, target_index: int, early_stop: bool = True):
    """Exact jitter-free WCRT in at most one ceiling per higher-priority task.

    Returns (RtaResult, HarmonicIterationTrace).  Equals wcrt_fixed_point on
    every harmonic input.  Raises JitterPresent when the target or one of its
    higher-priority tasks carries jitter.
    """
    _reject_jitters(ts, target_index)
    return _staged_result(ts, target_index, 0, early_stop, jitter_aware=False)


def wcrt_uniform_jitter(ts: TaskSet, target_index: int, jitter,
                        early_stop: bool = True):
    """Staged WCRT with one uniform jitter applied to all higher-priority tasks.

    Returns (RtaResult, HarmonicIterationTrace) for the least fixed point of
    t = C_n + sum C_pi*ceil((t + jitter)/T_pi).  The schedulability verdict
    uses the target's own declared jitter (wcrt <= deadline - jitter).
    """
    if jitter < 0:
        raise ValueError(f"uniform jitter must be >= 0, got {jitter}")
    return _staged_result(ts, target_index, jitter, early_stop,
                          jitter_aware=True)


def wcrt_jitter_bounds(ts: TaskSet, target_index: int):
    """Lower/upper WCRT bounds from the smallest and largest hp jitter.

    Returns (low, high): the uniform-jitter WCRT evaluated at min and max of
    the higher-priority jitters.  The exact per-task-jitter WCRT always lies
    between the two.
    """
    pi = pi_order(ts, target_index, tie_break="jitter")
    if not pi.order:
        wcrt = Fraction(ts[target_index].wcet)
        return wcrt, wcrt
    jitters = [ts[i].jitter for i in pi.order]
    low, _ = wcrt_uniform_jitter(ts, target_index, min(jitters))
    high, _ = wcrt_uniform_jitter(ts, target_index, max(jitters))
    return low.wcrt, high.wcrt


def wcrt_exclusion_model(ts: TaskSet, target_index: int) -> RtaResult:
    """Fixed point of the suffix-shifted demand; equals the unshifted WCRT.

    Demand variant W(t) = C_n + sum C_pi*ceil((t - suffix_wcet_after)/T_pi):
    each interference term is pushed left by the total wcet of the
    strictly-smaller-period tasks.  Its least fixed point coincides with the
    ordinary one, which is what carves the exclusion intervals.
    """
    _reject_jitters(ts, target_index)
    pi = pi_order(ts, target_index, tie_break="jitter")
    return _shifted_fixed_point(ts, target_index, pi,
                                list(pi.cumulative_wcet))


def wcrt_with_delays(ts: TaskSet, target_index: int, delta) -> RtaResult:
    """Fixed point of the demand with per-position shifts delta.

    delta[k] (rational) applies to the k-th task of the pi order and must lie
    in [0, cumulative_wcet[k]]; any such shift leaves the least fixed point
    unchanged.  Raises DeltaOutOfRange naming the offending position.
    """
    _reject_jitters(ts, target_index)
    pi = pi_order(ts, target_index, tie_break="jitter")
    if len(delta) != len(pi.order):
        raise DeltaOutOfRange(
            f"need {len(pi.order)} shifts, got {len(delta)}")
    for k, d in enumerate(delta):
        if not 0 <= d <= pi.cumulative_wcet[k]:
            raise DeltaOutOfRange(
                f"delta[{k}]={d} outside [0, {pi.cumulative_wcet[k]}]")
    return _shifted_fixed_point(ts, target_index, pi, list(delta))


def _shifted_fixed_point(ts: TaskSet, target_index: int, pi: PiOrder,
                         shifts) -> RtaResult:
    target = ts[target_index]
    periods, wcets, utils = _order_arrays(ts, pi)
    total_util = sum(utils, Fraction(0))
    if total_util >= 1:
        raise NonConvergent(
            f"higher-priority utilization {total_util} >= 1: no fixed point")

    # Kleene iteration from C_n.  Each suffix wcet sum is < the period at its
    # position (utilization < 1 on dividing periods), so shifted arguments
    # stay above -period and every ceiling term is >= 0: iterates are
    # monotone and converge to the least fixed point from below.
    value = target.wcet
    trace = [value]
    iterations = 0
    while True:
        total = target.wcet
        for period, wcet, shift in zip(periods, wcets, shifts):
            total += wcet * math.ceil(Fraction(value - shift, period))
        trace.append(total)
        iterations += 1
        if total == value:
            break
        if iterations >= 10 ** 6:
            raise NonConvergent(f"no fixed point after {iterations} steps")
        value = total
    margin = target.deadline - value
    return RtaResult(value, iterations, tuple(trace), margin >= 0, margin)


def check_restricted_jitter(ts: TaskSet, target_index: int) -> bool:
    """Sufficient condition for uniform-jitter exactness with per-task jitters.

    True iff every higher-priority jitter J_pi(k) satisfies
    max(0, J_last - suffix_wcet_after(k)) <= J_pi(k) <= J_last, where J_last
    is the jitter of the last pi-order task.  When true,
    wcrt_uniform_jitter(ts, target, J_last) equals the exact per-task-jitter
    WCRT.  The condition is sufficient, not necessary.
    """
    pi = pi_order(ts, target_index, tie_break="jitter")
    if not pi.order:
        raise ValueError("target has no higher-priority tasks")
    j_last = ts[pi.order[-1]].jitter
    for k, idx in enumerate(pi.order):
        j = ts[idx].jitter
        if not max(0, j_last - pi.cumulative_wcet[k]) <= j <= j_last:
            return False
    return True
