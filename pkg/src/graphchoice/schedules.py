"""Exploration and sharpening schedules for the walk dynamics.

Two coupled sequences drive a run: the exploration probability eps(n), which
decays slowly toward zero, and the preference exponent alpha(n) = 1/T(n),
which either stays fixed or grows ("cooling" the temperature T). The update
rules implemented here:

  eps(n+1) = (1 - c(n)) * eps(n)          (recursion mode)
  eps(n)   = min(1, 1/log(n+1))           (explicit log mode)
  T(n+1)   = (1 - b(n)) * T(n),  b(n) = cool_scale / (n log n)   (cooled mode)

with c(n) = 1/(1 + (n+1) log(n+1)) as the stock choice, which makes
eps(n) = Theta(1/log n). Logs are natural throughout. Schedule indexing
starts at n = 1: c(0) would equal 1 and annihilate eps, and the cooling
divisor n*log(n) vanishes below n = 2, so step 0 (and step 1 for cooling)
leave the values unchanged.

All functions are pure; ScheduleState is plain data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_COOL_B_MAX = 0.75  # cap on a single cooling step so T stays positive;
# chosen above 1/(2 log 2) so the stock rate is never distorted


@dataclass(frozen=True)
class ScheduleConfig:
    """Parameters of the eps/T sequences.

    epsilon0   initial exploration probability, in (0, 1]
    T0         fixed-mode temperature (alpha = 1/T0 forever)
    c_mode     'recursion_example' | 'explicit_log' | 'constant'
    c_const    decay constant for c_mode='constant' (0 keeps eps fixed)
    eps_hold   steps during which eps stays at epsilon0 before decaying;
               applies to the recursive modes (the explicit log formula
               is a function of n alone), and the decay clock restarts
               when the hold ends
    eps_floor  lower clamp on eps (0 = none); a small floor keeps every
               node visited at a positive rate even under fast decay
    alpha_mode 'fixed' | 'cooled'
    burn_in    steps to hold alpha at alpha_burn before cooling starts
    alpha_burn exponent held during burn-in (cooled mode starts from it)
    cool_scale multiplier on the cooling step b(n) = cool_scale/(n log n)
    gamma_sa   temperature scale of the simulated-annealing baseline
    """

    epsilon0: float = 1.0
    T0: float = 100.0
    c_mode: str = "explicit_log"
    c_const: float = 0.0
    eps_hold: int = 0
    eps_floor: float = 0.0
    alpha_mode: str = "fixed"
    burn_in: int = 50
    alpha_burn: float = 1e-2
    cool_scale: float = 1.0
    gamma_sa: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.epsilon0 <= 1.0:
            raise ValueError("epsilon0 must be in (0, 1]")
        if self.T0 <= 0 or self.alpha_burn <= 0 or self.gamma_sa <= 0:
            raise ValueError("scale parameters must be positive")
        if self.burn_in < 0:
            raise ValueError("burn_in must be nonnegative")
        if self.c_mode not in ("recursion_example", "explicit_log", "constant"):
            raise ValueError(f"unknown c_mode {self.c_mode!r}")
        if self.alpha_mode not in ("fixed", "cooled"):
            raise ValueError(f"unknown alpha_mode {self.alpha_mode!r}")
        if not 0.0 <= self.c_const < 1.0:
            raise ValueError("c_const must be in [0, 1)")
        if self.eps_hold < 0:
            raise ValueError("eps_hold must be nonnegative")
        if not 0.0 <= self.eps_floor <= 1.0:
            raise ValueError("eps_floor must be in [0, 1]")
        if self.cool_scale <= 0:
            raise ValueError("cool_scale must be positive")


@dataclass(frozen=True)
class ScheduleState:
    """Schedule values at step n; alpha is maintained as exactly 1/temp."""

    n: int
    eps: float
    temp: float
    alpha: float = field(default=0.0)

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must be in [0, 1]")
        if self.temp <= 0:
            raise ValueError("temp must be positive")
        object.__setattr__(self, "alpha", 1.0 / self.temp)


def default_c(n: int) -> float:
    """The stock decay sequence c(n) = 1/(1 + (n+1) log(n+1)), n >= 1."""
    if n < 1:
        raise ValueError("c(n) is defined for n >= 1 (c(0) would equal 1)")
    return 1.0 / (1.0 + (n + 1) * math.log(n + 1))


def explicit_log_eps(n: int) -> float:
    """eps(n) = 1/log(n+1), clamped into (0, 1] (the clamp binds for n <= 2)."""
    if n < 1:
        return 1.0
    return min(1.0, 1.0 / math.log(n + 1))


def _eps_next(n: int, eps: float, cfg: ScheduleConfig) -> float:
    """Scalar core of step_epsilon: eps(n+1) from (n, eps(n)).

    The decay clock starts after the hold, so the recursion always applies
    its early (large) factors first regardless of eps_hold.
    """
    if cfg.c_mode == "explicit_log":
        nxt = explicit_log_eps(n + 1)
    elif n < cfg.eps_hold + 1:
        nxt = eps
    elif cfg.c_mode == "constant":
        nxt = (1.0 - cfg.c_const) * eps
    else:
        nxt = (1.0 - default_c(n - cfg.eps_hold)) * eps
    return max(nxt, cfg.eps_floor)


def step_epsilon(state: ScheduleState, cfg: ScheduleConfig) -> float:
    """Exploration probability at step n+1 given the state at step n."""
    return _eps_next(state.n, state.eps, cfg)


def _cooling_b(n: int, cfg: ScheduleConfig) -> float:
    """Temperature step b(n); zero during burn-in and for n < 2."""
    if cfg.alpha_mode != "cooled" or n < max(2, cfg.burn_in):
        return 0.0
    return min(_COOL_B_MAX, cfg.cool_scale / (n * math.log(n)))


def step_temperature(state: ScheduleState, cfg: ScheduleConfig) -> tuple[float, float]:
    """(T, alpha) at step n+1. Fixed mode never changes them."""
    b = _cooling_b(state.n, cfg)
    temp = (1.0 - b) * state.temp
    return temp, 1.0 / temp


def initial_state(cfg: ScheduleConfig) -> ScheduleState:
    """Schedule values at n = 0.

    Cooled mode starts from temp = 1/alpha_burn (T0 only applies to fixed
    mode); explicit-log mode ignores epsilon0 and starts clamped at 1.
    """
    eps = explicit_log_eps(0) if cfg.c_mode == "explicit_log" else cfg.epsilon0
    temp = 1.0 / cfg.alpha_burn if cfg.alpha_mode == "cooled" else cfg.T0
    return ScheduleState(n=0, eps=eps, temp=temp)


def advance(state: ScheduleState, cfg: ScheduleConfig) -> ScheduleState:
    """Schedule state at step n+1."""
    eps = step_epsilon(state, cfg)
    temp, _ = step_temperature(state, cfg)
    return ScheduleState(n=state.n + 1, eps=eps, temp=temp)


def schedule_arrays(cfg: ScheduleConfig, n_steps: int):
    """(eps, alpha, temp) for n = 0..n_steps, exactly matching `advance`.

    Built by the same scalar recurrences (temp is the multiplicatively
    maintained primary, alpha its reciprocal), so simulation engines can
    index into precomputed schedules and still agree bit for bit with
    stepwise updates.
    """
    eps = np.empty(n_steps + 1)
    alpha = np.empty(n_steps + 1)
    temps = np.empty(n_steps + 1)
    st = initial_state(cfg)
    e, temp = st.eps, st.temp
    eps[0], alpha[0], temps[0] = e, 1.0 / temp, temp
    for n in range(n_steps):
        e = _eps_next(n, e, cfg)
        temp = (1.0 - _cooling_b(n, cfg)) * temp
        eps[n + 1] = e
        alpha[n + 1] = 1.0 / temp
        temps[n + 1] = temp
    return eps, alpha, temps


def epsilon_chunks(cfg: ScheduleConfig, n_max: int, chunk: int = 1 << 16,
                   eps_override=None):
    """Yield (n_array, eps_array) covering n = 0..n_max in order.

    Vectorized enough to sweep 1e7 steps in well under a second, which the
    asymptotics diagnostics need. `eps_override(n_array)` replaces the
    configured sequence when diagnosing an external schedule.
    """
    if eps_override is not None:
        for lo in range(0, n_max + 1, chunk):
            ns = np.arange(lo, min(lo + chunk, n_max + 1), dtype=np.int64)
            yield ns, np.asarray(eps_override(ns), dtype=float)
        return

    if cfg.c_mode == "explicit_log":
        for lo in range(0, n_max + 1, chunk):
            ns = np.arange(lo, min(lo + chunk, n_max + 1), dtype=np.int64)
            with np.errstate(divide="ignore"):
                eps = np.minimum(1.0, 1.0 / np.log(ns + 1.0))
            yield ns, np.maximum(eps, cfg.eps_floor)
        return

    hold = cfg.eps_hold
    if cfg.c_mode == "constant":
        q = 1.0 - cfg.c_const
        for lo in range(0, n_max + 1, chunk):
            ns = np.arange(lo, min(lo + chunk, n_max + 1), dtype=np.int64)
            expo = np.maximum(ns - hold - 1, 0).astype(float)
            yield ns, np.maximum(cfg.epsilon0 * q ** expo, cfg.eps_floor)
        return

    # recursion mode: eps(n) = epsilon0 * prod_{j=1}^{n-1-hold} (1 - c(j))
    log_eps_last = math.log(cfg.epsilon0)
    for lo in range(0, n_max + 1, chunk):
        ns = np.arange(lo, min(lo + chunk, n_max + 1), dtype=np.int64)
        js = np.maximum(ns - 1 - hold, 1).astype(float)
        logfac = np.log1p(-1.0 / (1.0 + (js + 1) * np.log(js + 1)))
        logfac[ns - 1 - hold < 1] = 0.0
        log_eps = log_eps_last + np.cumsum(logfac)
        yield ns, np.maximum(np.exp(log_eps), cfg.eps_floor)
        log_eps_last = float(log_eps[-1])


@dataclass
class ConditionCheck:
    """One diagnosed schedule condition: values at checkpoints plus a verdict."""

    name: str
    checkpoints: list[int]
    values: list[float]
    satisfied: bool
    note: str = ""


@dataclass
class ConditionReport:
    n_max: int
    checks: list[ConditionCheck]

    @property
    def ok(self) -> bool:
        return all(c.satisfied for c in self.checks)

    def flagged(self) -> list[str]:
        return [f"{c.name}: {c.note}" for c in self.checks if not c.satisfied]


def verify_conditions(cfg: ScheduleConfig, n_max: int, m: int = 4,
                      eps_override=None) -> ConditionReport:
    """Numeric trend report for the schedule admissibility conditions.

    Checks, up to n_max (diagnostic, not a proof):
      sum_eps_pow_m   partial sums of eps(n)^m keep growing (divergence)
      sum_a_eps       partial sums of eps(n)/(n+1) keep growing
      eps_sqrt_n      eps(n)*sqrt(n) trending up (eps = omega(1/sqrt n))
      n_c_to_zero     n*c(n) trending down to zero
      n_b_to_zero     n*b(n) trending down to zero (vacuous when not cooling)
      b_small_o_c     b(n)/c(n) trending to zero

    A condition "trends satisfied" when the checkpoint values move the right
    way; anything drifting the wrong way or flattening is flagged.
    """
    if n_max < 100:
        raise ValueError("n_max too small for a meaningful trend report")
    cps = sorted({n_max // 1000, n_max // 100, n_max // 10, n_max} - {0})

    sum_eps_m = 0.0
    sum_a_eps = 0.0
    cp_sum_eps_m, cp_sum_a_eps, cp_eps_sqrt = {}, {}, {}
    eps_at = {}
    for ns, eps in epsilon_chunks(cfg, n_max, eps_override=eps_override):
        live = ns >= 1
        sum_eps_m += float(np.sum(eps[live] ** m))
        sum_a_eps += float(np.sum(eps[live] / (ns[live] + 1.0)))
        for cp in cps:
            if ns[0] <= cp <= ns[-1]:
                k = int(cp - ns[0])
                cp_sum_eps_m[cp] = sum_eps_m - float(np.sum(eps[k + 1:][ns[k + 1:] >= 1] ** m))
                cp_sum_a_eps[cp] = sum_a_eps - float(
                    np.sum(eps[k + 1:][ns[k + 1:] >= 1] / (ns[k + 1:][ns[k + 1:] >= 1] + 1.0)))
                cp_eps_sqrt[cp] = float(eps[k]) * math.sqrt(cp)
                eps_at[cp] = float(eps[k])

    checks: list[ConditionCheck] = []

    def growing(vals):  # divergence heuristic: the last decade still contributes
        total = vals[-1]
        earlier = vals[-2] if len(vals) > 1 else 0.0
        return total > 0 and (total - earlier) > 5e-3 * total

    v = [cp_sum_eps_m[c] for c in cps]
    checks.append(ConditionCheck(
        f"sum_eps_pow_m (m={m})", cps, v, growing(v),
        "" if growing(v) else "partial sums flattening: divergence doubtful"))

    v = [cp_sum_a_eps[c] for c in cps]
    checks.append(ConditionCheck(
        "sum_a_eps", cps, v, growing(v),
        "" if growing(v) else "partial sums flattening: divergence doubtful"))

    v = [cp_eps_sqrt[c] for c in cps]
    up = all(b > a for a, b in zip(v, v[1:]))
    checks.append(ConditionCheck(
        "eps_sqrt_n", cps, v, up,
        "" if up else "eps(n)*sqrt(n) not increasing: eps(n)=omega(1/sqrt n) violated"))

    # implied c(n) = 1 - eps(n+1)/eps(n), reconstructed at checkpoints
    cvals = []
    for cp in cps:
        e0 = eps_at[cp]
        if eps_override is not None:
            e1 = float(np.asarray(eps_override(np.array([cp + 1]))).ravel()[0])
        elif cfg.c_mode == "explicit_log":
            e1 = explicit_log_eps(cp + 1)
        elif cfg.c_mode == "constant":
            e1 = (1.0 - cfg.c_const) * e0
        else:
            e1 = (1.0 - default_c(cp)) * e0
        c_cp = 1.0 - e1 / e0 if e0 > 0 else math.nan
        cvals.append(cp * c_cp)
    down = all(b < a for a, b in zip(cvals, cvals[1:])) and cvals[-1] < 0.5
    checks.append(ConditionCheck(
        "n_c_to_zero", cps, cvals, down,
        "" if down else "n*c(n) -> 0 violated"))

    bvals = [cp * _cooling_b(cp, cfg) for cp in cps]
    if all(b == 0 for b in bvals):
        checks.append(ConditionCheck("n_b_to_zero", cps, bvals, True,
                                     "no cooling: b(n) = 0"))
        checks.append(ConditionCheck("b_small_o_c", cps, [0.0] * len(cps), True,
                                     "no cooling: b(n) = 0"))
    else:
        bdown = all(b <= a for a, b in zip(bvals, bvals[1:])) and bvals[-1] < 0.5
        checks.append(ConditionCheck(
            "n_b_to_zero", cps, bvals, bdown,
            "" if bdown else "n*b(n) -> 0 violated"))
        ratios = []
        for cp, ncp in zip(cps, cvals):
            c_cp = ncp / cp
            ratios.append(_cooling_b(cp, cfg) / c_cp if c_cp > 0 else math.inf)
        vanishing = ratios[-1] < 0.1 and all(b < a for a, b in zip(ratios, ratios[1:]))
        checks.append(ConditionCheck(
            "b_small_o_c", cps, ratios, vanishing,
            "" if vanishing else
            f"b(n)/c(n) not vanishing (last ratio {ratios[-1]:.3g})"))

    return ConditionReport(n_max=n_max, checks=checks)
