"""Reproducible task-set generation for the experiments.

The random source is xoshiro256** seeded through splitmix64, a small,
portable, explicitly specified 64-bit generator, so identical seeds give
identical task sets on any platform or Python build (golden vectors are
pinned in the tests).  Utilizations come from UUniFast evaluated on a fixed
rational grid: each stick-breaking step runs the classic recurrence in
floating point, then floor-quantizes onto denominator(U_total) * 2^53, so
every utilization is an exact rational, the sum telescopes to exactly the
requested total, and denominators stay small enough for million-set sweeps.

Periods are harmonic chains (each period a small integer multiple of the
previous), jitters are drawn either unconstrained in [0, alpha*T] or as a
constraint-satisfying vector sampled in shifted-jitter space, which makes the
generated system feasible by construction with witness m_i = J'_i div T_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import Task, TaskSet, validate

_MASK64 = (1 << 64) - 1
_TWO53 = 1 << 53

JITTER_NONE = "none"
JITTER_UNCONSTRAINED = "unconstrained"
JITTER_CONSTRAINED = "constrained"


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Rng:
    """xoshiro256** with splitmix64 seeding; 64-bit pure-integer state."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state = (state + 0x9E3779B97F4A7C15) & _MASK64
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            s.append(z ^ (z >> 31))
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], rejection-sampled (no modulo bias)."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            u = self.next_u64()
            if u < limit:
                return lo + u % span

    def uniform53(self) -> int:
        """53-bit numerator of a uniform draw over [0, 1) at denominator 2^53."""
        return self.next_u64() >> 11


@dataclass(frozen=True)
class GenConfig:
    """Knobs for one generation stream.

    factor_range bounds the integer ratio between consecutive periods;
    jitter_mode is one of "none", "unconstrained" (uses alpha) or
    "constrained"; integer_wcets False keeps exact rational wcets
    (experiment-grade sets that skip strict validation).
    """

    task_count: int
    total_utilization: Fraction
    base_period: int = 10
    factor_range: tuple[int, int] = (1, 4)
    jitter_mode: str = JITTER_NONE
    alpha: Fraction = Fraction(1)
    seed: int = 0
    integer_wcets: bool = True

    def __post_init__(self):
        object.__setattr__(self, "total_utilization",
                           Fraction(self.total_utilization))
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 < self.total_utilization < 1:
            raise ValueError("total utilization must be in (0, 1)")
        if self.task_count < 1:
            raise ValueError("need at least one task")
        if self.factor_range[0] < 1 or self.factor_range[1] < self.factor_range[0]:
            raise ValueError(f"bad factor range {self.factor_range}")
        if self.jitter_mode not in (JITTER_NONE, JITTER_UNCONSTRAINED,
                                    JITTER_CONSTRAINED):
            raise ValueError(f"unknown jitter mode {self.jitter_mode!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")


def uunifast(n: int, total_utilization, rng: Rng) -> list[Fraction]:
    """n positive rational utilizations summing exactly to the total.

    Classic stick breaking: the running remainder is multiplied by
    u^(1/(n-i)) with u uniform on [0, 1); the product is floor-quantized to
    the fixed grid denominator(total) * 2^53 (clamped so every task keeps a
    positive share), which preserves the exact telescoping sum.
    """
    total = Fraction(total_utilization)
    if not 0 < total < 1:
        raise ValueError(f"total utilization {total} outside (0, 1)")
    if n < 1:
        raise ValueError("need n >= 1")
    denom = total.denominator * _TWO53
    remainder = total.numerator * _TWO53
    out = []
    for i in range(1, n):
        slots = n - i
        u = rng.uniform53() / _TWO53
        x_num = round((u ** (1.0 / slots)) * _TWO53)
        x_num = min(max(x_num, 1), _TWO53 - 1)
        nxt = (remainder * x_num) >> 53
        nxt = min(max(nxt, slots), remainder - 1)
        out.append(Fraction(remainder - nxt, denom))
        remainder = nxt
    out.append(Fraction(remainder, denom))
    return out


def gen_harmonic_periods(n: int, config: GenConfig, rng: Rng) -> list[int]:
    """Non-decreasing harmonic chain T_1 = base, T_{k+1} = T_k * factor."""
    lo, hi = config.factor_range
    periods = [config.base_period]
    for _ in range(n - 1):
        periods.append(periods[-1] * rng.randint(lo, hi))
    return periods


def gen_constrained_jitters(periods, wcets, rng: Rng) -> list[int]:
    """Jitters whose shift system is feasible by construction.

    Arrays must be in non-increasing period order.  Samples the shifted
    jitters directly: J'_first = T_first + J_first, J'_last within wcet-sum
    reach above it, every middle J' within wcet-sum reach below J'_last; real
    jitters are the shifted ones reduced mod the period, making
    m_i = J'_i div T_i a witness of the full system.
    """
    k = len(periods)
    if k == 0:
        return []
    j_first = rng.randint(0, periods[0] - 1)
    if k == 1:
        return [j_first]
    suffix = [0] * k
    for s in range(k - 2, -1, -1):
        suffix[s] = suffix[s + 1] + wcets[s + 1]
    shifted_first = periods[0] + j_first
    shifted_last = rng.randint(shifted_first,
                               shifted_first + math.floor(suffix[0]))
    shifted = [shifted_first]
    for s in range(1, k - 1):
        lo = shifted_last - math.floor(suffix[s])
        shifted.append(rng.randint(lo, shifted_last))
    shifted.append(shifted_last)
    return [sj % t for sj, t in zip(shifted, periods)]


def gen_unconstrained_jitters(periods, alpha, rng: Rng) -> list[int]:
    """Independent jitters, each uniform in [0, alpha*T] clamped below T."""
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    out = []
    for t in periods:
        hi = min(math.floor(alpha * t), t - 1)
        out.append(rng.randint(0, hi))
    return out


def gen_unconstrained_jitters_raw(periods, alpha, rng: Rng) -> list[Fraction]:
    """Independent rational jitters, each uniform in [0, alpha*T) at 53-bit
    resolution.

    Integral jitters align with the harmonic period lattice often enough to
    measurably inflate the feasible fraction in statistical sweeps; the
    raw-parameter regime therefore draws real-valued jitters, matching its
    raw rational wcets.
    """
    alpha = Fraction(alpha)
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    return [Fraction(rng.next_u64() >> 11, _TWO53) * (alpha * t)
            for t in periods]


def _integer_wcets(periods, utils):
    # Round half up, clamped to [1, T-1] for T >= 2 so one near-saturated
    # task cannot pin utilization at exactly 1; the set-level cap is still
    # re-checked by the caller (rounding can push the sum past 1).
    out = []
    for t, u in zip(periods, utils):
        c = (2 * t * u.numerator + u.denominator) // (2 * u.denominator)
        hi = t - 1 if t > 1 else t
        out.append(max(1, min(int(c), hi)))
    return out


def generate_interference_set(config: GenConfig, rng: Rng | None = None
                              ) -> TaskSet:
    """One random interfering task set (the higher-priority set of a target).

    Priority 1 is assigned to the largest period and so on downward, so the
    set's priority order equals the non-increasing period order its
    constrained jitters are sampled over.  Integer-wcet sets are strictly
    validated (resampling on utilization overload from rounding); raw sets
    keep exact rational wcets and relaxed validation.
    """
    rng = Rng(config.seed) if rng is None else rng
    n = config.task_count
    for _ in range(1000):
        periods_up = gen_harmonic_periods(n, config, rng)
        utils_up = uunifast(n, config.total_utilization, rng)
        periods = periods_up[::-1]
        utils = utils_up[::-1]
        if config.integer_wcets:
            wcets = _integer_wcets(periods, utils)
            if sum(Fraction(c, t) for c, t in zip(wcets, periods)) >= 1:
                continue
        else:
            wcets = [t * u for t, u in zip(periods, utils)]
        if config.jitter_mode == JITTER_CONSTRAINED:
            jitters = gen_constrained_jitters(periods, wcets, rng)
        elif config.jitter_mode == JITTER_UNCONSTRAINED:
            jitters = gen_unconstrained_jitters(periods, config.alpha, rng)
        else:
            jitters = [0] * n
        tasks = [Task(period=t, wcet=c, deadline=t, jitter=j, priority=p + 1)
                 for p, (t, c, j) in enumerate(zip(periods, wcets, jitters))]
        return validate(tasks, relaxed=not config.integer_wcets)
    raise RuntimeError("could not sample a valid set in 1000 attempts")


def generate_with_target(config: GenConfig, rng: Rng | None = None) -> TaskSet:
    """An interfering set plus a lowest-priority analysis target.

    The target extends the harmonic chain by one factor draw (doubled as
    needed until the utilization headroom admits a strictly valid wcet),
    takes a wcet from half that headroom, deadline = period, and (in the
    jittered modes) its own jitter below its period.  config.task_count
    counts the higher-priority tasks.
    """
    rng = Rng(config.seed) if rng is None else rng
    lo, hi = config.factor_range
    for _ in range(1000):
        hp = generate_interference_set(config, rng)
        t_max = max(t.period for t in hp)
        period = t_max * rng.randint(lo, hi)
        slack = 1 - hp.total_utilization
        while slack * period < 2:
            period *= 2
        c_hi = max(1, math.floor(slack * period / 2))
        wcet = 1 if c_hi <= 1 else rng.randint(1, c_hi)
        jitter = 0
        if config.jitter_mode != JITTER_NONE:
            jitter = rng.randint(0, period - 1)
        target = Task(period=period, wcet=wcet, deadline=period, jitter=jitter,
                      priority=len(hp) + 1)
        try:
            return validate(list(hp.tasks) + [target],
                            relaxed=not config.integer_wcets)
        except ValueError:
            continue
    raise RuntimeError("could not sample a valid set in 1000 attempts")
