"""Virtual-jitter feasibility: turn per-task jitters into one uniform jitter.

Each higher-priority task's jitter J_i may be shifted by whole periods,
J'_i = J_i + m_i*T_i with integer m_i >= 0, without changing its worst-case
interference, provided the shifted jitters satisfy a coupled system of
inequalities against the largest shifted jitter J'_max.  When that system is
satisfiable, the exact per-task-jitter WCRT equals a single uniform-jitter
computation at J'_max with a constant correction: one ceiling per task
overall.

This module solves the system by interval propagation over tasks in
non-increasing period order (ties by original priority index, the order the
bound windows are defined over), with a width-greedy choice when a stage
admits two shift counts.  A brute-force oracle checks the same system by
enumeration, and wcrt_virtual_jitter turns a feasible solution into the WCRT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import NonHarmonic, TaskSet
from .rta import RtaResult
from .harmonic import _staged_fixed_point

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"


class CapTooSmall(ValueError):
    """The brute-force search box provably excludes the solver's witness."""


class InfeasibleInput(ValueError):
    """A feasible FeasibilityResult was required."""


class IndexOutOfRange(ValueError):
    """Stage index outside 1..n-2."""


@dataclass(frozen=True)
class Branch:
    """Record of one two-candidate stage: window widths and the pick."""

    stage: int
    lower_m: int
    upper_m: int
    diff_lower: int
    diff_upper: int
    chosen: str


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the shift-count search.

    `m` and `virtual_jitter_max` are set iff feasible; `failure_stage` is the
    1-based stage whose window crossed iff infeasible.  `bound_trace` holds
    the per-stage [lower, upper] windows for m_last * T_last in time units;
    `branches` records every two-candidate decision.
    """

    verdict: str
    m: tuple[int, ...] | None
    virtual_jitter_max: int | None
    failure_stage: int | None
    bound_trace: tuple[tuple[int, int], ...]
    branches: tuple[Branch, ...] = ()

    @property
    def is_feasible(self) -> bool:
        return self.verdict == FEASIBLE


@dataclass(frozen=True)
class GammaCase:
    """Local solution count of one adjacent-pair congruence stage."""

    case_id: str
    jtilde: int


def feasibility_order(ts: TaskSet, target_index: int | None):
    """Indices of the interfering tasks, non-increasing period, priority ties.

    target_index None treats the whole set as the higher-priority set of a
    virtual lowest-priority task.
    """
    hp = range(len(ts)) if target_index is None else range(target_index)
    if target_index is not None and not 0 <= target_index < len(ts):
        raise IndexError(f"target index {target_index} out of range")
    return tuple(sorted(hp, key=lambda i: (-ts[i].period, i)))


def _order_arrays(ts: TaskSet, target_index: int | None):
    order = feasibility_order(ts, target_index)
    if not order:
        raise ValueError("need at least one higher-priority task")
    periods = tuple(ts[i].period for i in order)
    wcets = tuple(ts[i].wcet for i in order)
    jitters = tuple(ts[i].jitter for i in order)
    for a, b in zip(periods, periods[1:]):
        if a % b != 0:
            raise NonHarmonic(f"periods {a} and {b} do not divide")
    return order, periods, wcets, jitters


def _suffix_wcets(wcets):
    k = len(wcets)
    suffix = [0] * k
    for s in range(k - 2, -1, -1):
        suffix[s] = suffix[s + 1] + wcets[s + 1]
    return suffix


def satisfies_constraints(periods, wcets, jitters, m) -> bool:
    """Check the full shift system for a candidate m (normalization aside).

    Requires every m_i >= 0 integer, every shifted jitter at most the last
    one, and every shifted jitter at least the last one minus the wcet sum of
    the strictly-later tasks.
    """
    k = len(periods)
    if len(m) != k:
        return False
    suffix = _suffix_wcets(wcets)
    j_last = jitters[-1] + m[-1] * periods[-1]
    for i in range(k):
        if not (isinstance(m[i], int) and m[i] >= 0):
            return False
        shifted = jitters[i] + m[i] * periods[i]
        if shifted > j_last:
            return False
        if shifted < j_last - suffix[i]:
            return False
    return True


def solve_feasibility(ts: TaskSet, target_index: int | None = None
                      ) -> FeasibilityResult:
    """Find shift counts m making all jitters reachable from one uniform value.

    Tasks with priority above the target (the whole set when target_index is
    None) are processed largest period first.  Returns a feasible result with
    m (m_1 normalized to 1), J'_max and the bound-window trace, or an
    infeasible verdict naming the stage whose window crossed.  A feasible m is
    verified against the full constraint system before being returned.
    """
    _, periods, wcets, jitters = _order_arrays(ts, target_index)
    return solve_feasibility_arrays(periods, wcets, jitters)


def solve_feasibility_arrays(periods, wcets, jitters) -> FeasibilityResult:
    """solve_feasibility on pre-ordered arrays (non-increasing periods)."""
    k = len(periods)
    t_last = periods[-1]
    j_last = jitters[-1]
    suffix = _suffix_wcets(wcets)

    if k == 1:
        result = FeasibilityResult(
            FEASIBLE, (1,), jitters[0] + periods[0], None,
            ((periods[0], periods[0]),))
        assert satisfies_constraints(periods, wcets, jitters, result.m)
        return result

    # Window [lb, ub] brackets m_last*T_last in time units; the anchor stage
    # intersects the m_1 = 1 shift of the largest-period task with the last
    # task's congruence class.
    lb = periods[0] + t_last * math.ceil(Fraction(jitters[0] - j_last, t_last))
    ub = periods[0] + t_last * math.floor(
        Fraction(jitters[0] - j_last + suffix[0], t_last))
    trace = [(lb, ub)]
    branches: list[Branch] = []
    chosen_m = [1]
    if lb > ub:
        return FeasibilityResult(INFEASIBLE, None, None, 1, tuple(trace))

    for s in range(1, k - 1):
        stage = s + 1
        period = periods[s]
        jit = jitters[s]
        m_lo = math.ceil(Fraction(lb + j_last - jit - suffix[s], period))
        m_hi = math.floor(Fraction(ub + j_last - jit, period))
        if m_lo > m_hi:
            return FeasibilityResult(INFEASIBLE, None, None, stage,
                                     tuple(trace), tuple(branches))
        q_lo = t_last * math.ceil(Fraction(jit - j_last, t_last))
        q_hi = t_last * math.floor(Fraction(jit - j_last + suffix[s], t_last))

        def window(m_val):
            return (max(m_val * period + q_lo, lb),
                    min(m_val * period + q_hi, ub))

        if m_lo == m_hi:
            m_val = m_lo
            lb, ub = window(m_val)
        else:
            # Two admissible shift counts; keep the one leaving the wider
            # window (ties to the upper), a greedy heuristic.
            lo_lb, lo_ub = window(m_lo)
            hi_lb, hi_ub = window(m_hi)
            diff_lower = lo_ub - lo_lb
            diff_upper = hi_ub - hi_lb
            if diff_lower > diff_upper:
                m_val, (lb, ub) = m_lo, (lo_lb, lo_ub)
                pick = "lower"
            else:
                m_val, (lb, ub) = m_hi, (hi_lb, hi_ub)
                pick = "upper"
            branches.append(Branch(stage, m_lo, m_hi, diff_lower,
                                   diff_upper, pick))
        trace.append((lb, ub))
        if lb > ub:
            return FeasibilityResult(INFEASIBLE, None, None, stage,
                                     tuple(trace), tuple(branches))
        chosen_m.append(m_val)

    assert lb % t_last == 0, "window bounds stay multiples of the last period"
    chosen_m.append(lb // t_last)
    result = FeasibilityResult(FEASIBLE, tuple(chosen_m), j_last + lb, None,
                               tuple(trace), tuple(branches))
    assert satisfies_constraints(periods, wcets, jitters, result.m)
    return result


def brute_force_last_values(periods, wcets, jitters, last_cap: int):
    """All m_last in [0, last_cap] for which the full system has a witness.

    Every m_i is constrained only against m_last, so for each candidate the
    per-task intervals are checked independently (m_1 must admit 1).
    Returns (values, witnesses) in ascending order.
    """
    k = len(periods)
    suffix = _suffix_wcets(wcets)
    values, witnesses = [], []
    for y in range(last_cap + 1):
        j_max = jitters[-1] + y * periods[-1]
        witness = []
        ok = True
        for i in range(k - 1):
            hi = math.floor(Fraction(j_max - jitters[i], periods[i]))
            lo = math.ceil(Fraction(j_max - suffix[i] - jitters[i], periods[i]))
            lo = max(lo, 0)
            if i == 0:
                if not lo <= 1 <= hi:
                    ok = False
                    break
                witness.append(1)
            else:
                if lo > hi:
                    ok = False
                    break
                witness.append(lo)
        if ok:
            witness.append(y)
            values.append(y)
            witnesses.append(tuple(witness))
    return values, witnesses


def brute_force_feasibility(ts: TaskSet, target_index: int | None = None,
                            m_cap: int = 4,
                            solver_result: FeasibilityResult | None = None
                            ) -> FeasibilityResult:
    """Independent exhaustive check of the shift system.

    Searches m_last up to m_cap * T_first/T_last (covering shift classes a few
    periods beyond the m_1 = 1 normalization) and reports the first witness.
    When `solver_result` is supplied and feasible, a brute-force miss outside
    the searched box raises CapTooSmall instead of returning a false
    infeasible.
    """
    _, periods, wcets, jitters = _order_arrays(ts, target_index)
    if len(periods) == 1:
        return FeasibilityResult(FEASIBLE, (1,), jitters[0] + periods[0],
                                 None, ((periods[0], periods[0]),))
    last_cap = m_cap * (periods[0] // periods[-1])
    values, witnesses = brute_force_last_values(periods, wcets, jitters,
                                                last_cap)
    if not values:
        if (solver_result is not None and solver_result.is_feasible
                and solver_result.m[-1] > last_cap):
            raise CapTooSmall(
                f"solver witness m_last={solver_result.m[-1]} exceeds "
                f"searched cap {last_cap}")
        return FeasibilityResult(INFEASIBLE, None, None, None, ())
    y = values[0]
    witness = witnesses[0]
    return FeasibilityResult(FEASIBLE, witness,
                             jitters[-1] + y * periods[-1], None,
                             ((y * periods[-1], y * periods[-1]),))


def classify_gamma(ts: TaskSet, target_index: int | None, i: int) -> GammaCase:
    """Solution count of the adjacent congruence at stage i (1-based).

    Looks at the pair (pi(i), pi(i+1)): jtilde is the jitter difference
    modulo the smaller period; the case says how many shift counts the pair
    admits locally: "Zero" extra, exactly "One", "Both" candidates, or an
    "Empty" local window.
    """
    _, periods, wcets, jitters = _order_arrays(ts, target_index)
    k = len(periods)
    if not 1 <= i <= k - 1:
        raise IndexOutOfRange(f"stage {i} outside 1..{k - 1}")
    suffix = _suffix_wcets(wcets)
    jtilde = (jitters[i] - jitters[i - 1]) % periods[i]
    after = suffix[i]                      # wcets strictly after pi(i+1)
    gap = periods[i] - suffix[i - 1]       # period minus wcets after pi(i)
    if jtilde <= after and jtilde <= gap - 1:
        case = "Zero"
    elif jtilde >= after + 1 and jtilde >= gap:
        case = "One"
    elif gap <= jtilde <= after:
        case = "Both"
    else:
        case = "Empty"
    return GammaCase(case, jtilde)


def wcrt_virtual_jitter(ts: TaskSet, target_index: int,
                        fr: FeasibilityResult) -> RtaResult:
    """Exact per-task-jitter WCRT from a feasible shift solution.

    Runs the staged uniform-jitter iteration at J = fr.virtual_jitter_max
    with the constant term C_n - sum_i m_i*C_pi(i) (each whole-period shift
    of a jitter is compensated by removing one job's worth of interference).
    Equals wcrt_fixed_point_jitter with the true per-task jitters.
    """
    if not fr.is_feasible:
        raise InfeasibleInput("need a feasible shift solution")
    order, periods, wcets, jitters = _order_arrays(ts, target_index)
    if fr.m is None or len(fr.m) != len(order):
        raise InfeasibleInput(
            f"solution covers {0 if fr.m is None else len(fr.m)} tasks, "
            f"target has {len(order)}")
    target = ts[target_index]
    const = target.wcet - sum(mi * c for mi, c in zip(fr.m, wcets))
    utils = tuple(ts[i].utilization for i in order)
    suffix_utils = [Fraction(0)] * len(order)
    for s in range(len(order) - 2, -1, -1):
        suffix_utils[s] = suffix_utils[s + 1] + utils[s + 1]
    value, stages, ceils, _ = _staged_fixed_point(
        periods, wcets, utils, tuple(suffix_utils), const,
        fr.virtual_jitter_max)
    margin = target.deadline - target.jitter - value
    return RtaResult(value, ceils, stages, margin >= 0, margin)
