"""Average-case security experiment.

A campaign samples promised conjugacy instances with a length-invariant
distribution, races the length-based heuristic H against brute force D, and
summarises each length n by

* ``b``: percentage of instances H solves within its budget,
* ``h(n)``: the largest H step count among those successes,
* ``d(n)``: the largest D step count on the instances H failed,
* ``e(n) = (h·b + d·(100 - b)) / 100``, the expected-time bound.

Step counts are the primary metric; wall time is recorded alongside in the
trial log only.  The e(n) series is then extrapolated by a low-degree
polynomial, and H's failure rate is classified by how fast it decays.
"""

from __future__ import annotations

import csv
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .attacks import (
    ConjugacyInstance,
    SolverConfig,
    brute_force_search,
    composite_run,
    length_based_attack,
)
from .platform import PlatformDescriptor, normal_form
from .words import conjugate, random_reduced_word

STRONG = "strongly-generic"
GENERIC = "generic-only"
NON_GENERIC = "non-generic"


@dataclass(frozen=True)
class SamplerConfig:
    platform: PlatformDescriptor
    lengths: tuple[int, ...]
    trials_per_length: int
    pairs_per_instance: int = 1
    base_word_length: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.trials_per_length < 1 or self.pairs_per_instance < 1 or self.base_word_length < 1:
            raise ValueError("sampler counts must be positive")
        if not self.lengths or min(self.lengths) < 0:
            raise ValueError("lengths must be a nonempty list of nonnegative integers")


def sample_instance(cfg: SamplerConfig, n: int, instance_id: int) -> ConjugacyInstance:
    """Promised instance whose hidden conjugator is a uniform reduced word of
    length ``n``.  Each (n, id) has its own random stream, so instances do not
    depend on evaluation order."""
    if n not in cfg.lengths:
        raise ValueError(f"length {n} is not in the campaign")
    p = cfg.platform
    rng = random.Random(f"{cfg.seed}:{n}:{instance_id}")
    bases = [random_reduced_word(rng, cfg.base_word_length, p.alphabet_size)
             for _ in range(cfg.pairs_per_instance)]
    x = random_reduced_word(rng, n, p.alphabet_size)
    pairs = tuple((a, normal_form(p, conjugate(a, x))) for a in bases)
    return ConjugacyInstance(p, pairs, True, n, hidden=x)


def expected_time(h: float, d: float, b: float) -> float:
    """``(h·b + d·(100 - b)) / 100`` with ``b`` a percentage."""
    if not 0 <= b <= 100:
        raise ValueError(f"b must be a percentage in [0, 100], got {b}")
    if h < 0 or d < 0:
        raise ValueError("h and d must be nonnegative")
    return (h * b + d * (100 - b)) / 100


@dataclass(frozen=True)
class TrialOutcome:
    success: bool
    steps: int
    elapsed: float


@dataclass(frozen=True)
class TrialRecord:
    n: int
    instance_id: int
    heuristic: TrialOutcome
    deterministic: Optional[TrialOutcome]  # only run where H failed
    composite: TrialOutcome


def run_trial(sampler: SamplerConfig, solver: SolverConfig, n: int, instance_id: int) -> TrialRecord:
    inst = sample_instance(sampler, n, instance_id)
    h = length_based_attack(inst, solver)
    d = None if h.success else brute_force_search(inst, solver)
    c = composite_run(inst, solver)

    def pack(o):
        return TrialOutcome(o.success, o.steps, o.elapsed)

    return TrialRecord(n, instance_id, pack(h), pack(d) if d else None, pack(c))


def _run_task(args: tuple) -> TrialRecord:
    return run_trial(*args)


@dataclass(frozen=True)
class FitModel:
    degree: int
    coefficients: tuple[float, ...]  # ascending powers of n
    residual: float
    relative_residual: float
    fits: bool

    def predict(self, n: Sequence[float]) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(n, dtype=float), self.coefficients)


def fit_polynomial(points: Sequence[tuple[float, float]], degree: int,
                   rel_threshold: float = 0.05, coeff_bound: float = 1e3) -> FitModel:
    """Least-squares polynomial through ``(n, t)`` points.

    The verdict says a small-degree polynomial fits when the relative residual
    is under ``rel_threshold`` and the leading coefficient is at most
    ``coeff_bound`` in magnitude.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    ns = np.array([float(n) for n, _ in points])
    ts = np.array([float(t) for _, t in points])
    if len(set(ns.tolist())) < degree + 1:
        raise ValueError(f"need at least {degree + 1} distinct n values for degree {degree}")
    vander = np.vander(ns, degree + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(vander, ts, rcond=None)
    resid = float(np.linalg.norm(vander @ coef - ts))
    scale = float(np.linalg.norm(ts))
    rel = resid / scale if scale > 0 else 0.0
    fits = rel < rel_threshold and abs(coef[-1]) <= coeff_bound
    return FitModel(degree, tuple(float(c) for c in coef), resid, rel, bool(fits))


@dataclass(frozen=True)
class Genericity:
    classification: str
    rho: float
    scale: float
    relative_residual: float
    lengths_used: int


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and relative residual of a least-squares line."""
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.linalg.norm(A @ np.array([slope, icpt]) - y))
    scale = float(np.linalg.norm(y))
    return float(slope), float(icpt), (resid / scale if scale > 0 else 0.0)


def _head_mean(qs: list[tuple[float, float]]) -> float:
    half = len(qs) // 2
    return float(np.mean([q for _, q in sorted(qs)[:max(half, 1)]]))


def _tail_mean(qs: list[tuple[float, float]]) -> float:
    half = len(qs) // 2
    return float(np.mean([q for _, q in sorted(qs)[half:]]))


def genericity_estimate(failure_rates: Sequence[tuple[float, float]], threshold: float = 0.1,
                        min_lengths: int = 5) -> Genericity:
    """Classify how H's failure rate ``q(n)`` decays.

    ``q ≈ c·ρ^n`` is fitted in log space on the positive entries.  Strongly
    generic needs ``ρ < 1``, a relative residual under ``threshold`` over at
    least ``min_lengths`` lengths, and a fit no worse than a power law
    ``c·n^k``.  A series failing that test is generic only if the log fit
    falls and the longer half of the lengths fails less often than the
    shorter half; single endpoints are too noisy when most rates are zero.
    """
    qs = [(float(n), float(q)) for n, q in failure_rates]
    if any(not 0 <= q <= 1 for _, q in qs):
        raise ValueError("failure rates must lie in [0, 1]")
    pos = [(n, q) for n, q in qs if q > 0]
    if not pos:
        return Genericity(STRONG, 0.0, 0.0, 0.0, 0)
    if len(pos) < 2:
        last = max(qs)[1]
        cls = STRONG if last == 0 else NON_GENERIC
        return Genericity(cls, 0.0, pos[0][1], 0.0, 1)
    ns = np.array([n for n, _ in pos])
    logq = np.log([q for _, q in pos])
    slope, icpt, rel = _line_fit(ns, logq)
    rho, scale = math.exp(slope), math.exp(icpt)
    power_rel = math.inf
    if all(n > 0 for n in ns) and len(set(ns.tolist())) > 1:
        _, _, power_rel = _line_fit(np.log(ns), logq)
    if len(pos) >= min_lengths and rho < 1 and rel < threshold and rel <= power_rel:
        cls = STRONG
    elif slope < 0 and _tail_mean(qs) < _head_mean(qs):
        cls = GENERIC
    else:
        cls = NON_GENERIC
    return Genericity(cls, rho, scale, rel, len(pos))


def multi_round_success(p: float, r: int) -> float:
    """Chance an attack that breaks one round with probability ``p`` breaks
    all ``r`` independent rounds."""
    if not 0 <= p <= 1 or r < 1:
        raise ValueError("need 0 <= p <= 1 and r >= 1")
    return p ** r


@dataclass(frozen=True)
class MonteCarloCheck:
    estimate: float
    expected: float
    stderr: float
    agrees: bool


def monte_carlo_check(p: float, r: int, trials: int, seed: int = 0,
                      chunk: int = 200_000) -> MonteCarloCheck:
    expected = multi_round_success(p, r)
    rng = np.random.default_rng(seed)
    hits, left = 0, trials
    while left:
        m = min(chunk, left)
        hits += int(np.all(rng.random((m, r)) < p, axis=1).sum())
        left -= m
    est = hits / trials
    se = math.sqrt(expected * (1 - expected) / trials)
    agrees = abs(est - expected) <= 4 * se if se > 0 else est == expected
    return MonteCarloCheck(est, expected, se, bool(agrees))


@dataclass(frozen=True)
class LengthStats:
    n: int
    trials: int
    b: float
    h: float
    d: float
    e: float
    h_mean: float
    d_mean: float
    composite_mean: float
    no_failures: bool
    failure_rate: float
    race_bound: float
    within_bound: bool


@dataclass(frozen=True)
class BenchReport:
    platform: str
    per_length: tuple[LengthStats, ...]
    fit: Optional[FitModel]
    genericity: Genericity
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "platform": self.platform,
            "config": self.config,
            "per_length": [asdict(s) for s in self.per_length],
            "fit": asdict(self.fit) if self.fit else None,
            "genericity": asdict(self.genericity),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def race_bound(h: float, d: float, b: float, ratio: int) -> float:
    """Upper bound on the composite's mean steps implied by (h, d, b).

    On an H-solved input the race spends at most ``h + h/ratio + 1`` steps; on
    the rest, at most ``ratio`` heuristic steps per brute-force step.
    """
    return ((h * (1 + 1 / ratio) + 1) * b + (ratio + 1) * d * (100 - b)) / 100


def summarize(records: Sequence[TrialRecord], lengths: Sequence[int], interleave_ratio: int,
              platform: str = "", fit_degree: int = 2, config: Optional[dict] = None) -> BenchReport:
    stats = []
    for n in lengths:
        rows = [r for r in records if r.n == n]
        if not rows:
            raise ValueError(f"no trials recorded for length {n}")
        wins = [r.heuristic.steps for r in rows if r.heuristic.success]
        fails = [r.deterministic.steps for r in rows
                 if not r.heuristic.success and r.deterministic is not None]
        b = 100.0 * len(wins) / len(rows)
        h = float(max(wins)) if wins else 0.0
        d = float(max(fails)) if fails else 0.0
        comp = float(np.mean([r.composite.steps for r in rows]))
        bound = race_bound(h, d, b, interleave_ratio)
        stats.append(LengthStats(
            n=n, trials=len(rows), b=b, h=h, d=d, e=expected_time(h, d, b),
            h_mean=float(np.mean(wins)) if wins else 0.0,
            d_mean=float(np.mean(fails)) if fails else 0.0,
            composite_mean=comp, no_failures=not fails,
            failure_rate=1.0 - len(wins) / len(rows),
            race_bound=bound, within_bound=comp <= bound,
        ))
    fit = None
    if len(stats) >= fit_degree + 1:
        fit = fit_polynomial([(s.n, s.e) for s in stats], fit_degree)
    gen = genericity_estimate([(s.n, s.failure_rate) for s in stats])
    return BenchReport(platform, tuple(stats), fit, gen, config or {})


def run_campaign(sampler: SamplerConfig, solver: SolverConfig, workers: int = 1,
                 trial_fn: Callable[..., TrialRecord] = run_trial) -> list[TrialRecord]:
    """All trials, sorted by (n, instance id) whatever the worker count."""
    tasks = [(sampler, solver, n, i) for n in sampler.lengths
             for i in range(sampler.trials_per_length)]
    if workers > 1 and trial_fn is run_trial:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=4))
    else:
        records = [trial_fn(*t) for t in tasks]
    return sorted(records, key=lambda r: (r.n, r.instance_id))


def run_experiment(sampler: SamplerConfig, solver: SolverConfig, workers: int = 1,
                   fit_degree: int = 2,
                   trial_fn: Callable[..., TrialRecord] = run_trial
                   ) -> tuple[BenchReport, list[TrialRecord]]:
    records = run_campaign(sampler, solver, workers, trial_fn)
    config = {
        "platform": str(sampler.platform),
        "lengths": list(sampler.lengths),
        "trials": sampler.trials_per_length,
        "pairs_per_instance": sampler.pairs_per_instance,
        "base_word_length": sampler.base_word_length,
        "seed": sampler.seed,
        "budgets": asdict(solver),
        "fit_degree": fit_degree,
    }
    report = summarize(records, sampler.lengths, solver.interleave_ratio,
                       str(sampler.platform), fit_degree, config)
    return report, records


TRIALS_HEADER = ("n", "instance_id", "solver", "success", "steps", "elapsed_ms")


def write_trials_csv(records: Sequence[TrialRecord], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIALS_HEADER)
        for r in records:
            for name, o in (("heuristic", r.heuristic), ("deterministic", r.deterministic),
                            ("composite", r.composite)):
                if o is None:
                    continue
                w.writerow([r.n, r.instance_id, name, int(o.success), o.steps,
                            f"{o.elapsed * 1000:.3f}"])


def load_campaign(path: Path) -> tuple[SamplerConfig, SolverConfig, dict]:
    """Read a campaign JSON document.

    Keys: ``platform``, ``lengths``, ``trials``, optional ``pairs_per_instance``,
    ``base_word_length``, ``seed``, ``budgets`` (solver settings), ``fit_degree``
    and ``workers``.
    """
    doc = json.loads(Path(path).read_text())
    try:
        sampler = SamplerConfig(
            platform=PlatformDescriptor.parse(doc["platform"]),
            lengths=tuple(int(n) for n in doc["lengths"]),
            trials_per_length=int(doc["trials"]),
            pairs_per_instance=int(doc.get("pairs_per_instance", 1)),
            base_word_length=int(doc.get("base_word_length", 8)),
            seed=int(doc.get("seed", 0)),
        )
        budgets = dict(doc.get("budgets", {}))
        budgets.setdefault("seed", sampler.seed)
        solver = SolverConfig(**budgets)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad campaign config: {exc}") from exc
    extra = {"fit_degree": int(doc.get("fit_degree", 2)), "workers": int(doc.get("workers", 1))}
    return sampler, solver, extra


def write_outputs(report: BenchReport, records: Sequence[TrialRecord], out_dir: Path,
                  figures: bool = True) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "report.json", out_dir / "trials.csv"]
    paths[0].write_text(report.to_json())
    write_trials_csv(records, paths[1])
    if figures:
        from .plotting import render_report
        paths.extend(render_report(report, out_dir))
    return paths
