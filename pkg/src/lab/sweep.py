"""
Sweep - run the bound checks over generated instance grids.

A sweep expands its grids into tasks, runs every selected check on each
instance (in worker processes when configured) and folds the per-instance
records into an aggregate.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from sympy import Rational

from ..core.config import Settings, get_settings
from ..core.exceptions import (
    CertificationError,
    HypothesisError,
    LiftDefectError,
    ProxlabError,
    WalkStalledError,
)
from ..core.logger import setup_logger
from ..models.report import ReportRecord
from ..models.sweep import SweepAggregate, SweepConfig, SweepGrid
from ..utils.codec import report_to_record, walk_to_summary
from .exactmath import ExactMatrix, IndexSet, format_scalar, to_scalar, unit_vector
from .generators import InstanceGenerator, certify_lower_bound
from .lifting import lift, verify_lift
from .polyhedron import area_2d, dimension, lp_max, polar_2d, polygon_area, symmetric_polygon
from .proximity import (
    Instance,
    NormalizedInstance,
    check_volume_bound,
    delta_k,
    kappa_profile,
    lt_rational_plus_sqrt2,
    measure_proximity,
    normalize,
    normalized_width,
    planar_section,
)
from .spindle import build_spindle, ray_decomposition, template_walk

logger = setup_logger(__name__)

# Limits on kappa per slice dimension: (rational part, sqrt(2) coefficient)
KAPPA_LIMITS = {1: (1, 0), 2: (1, 0), 3: (0, 1)}

PROXIMITY_FIELDS = (
    "proximity",
    "proximity_feasible",
    "lp_value",
    "ip_value",
    "witness_vertex",
    "witness_point",
    "delta_table",
    "bounds",
    "flags",
)

DEFECTS = (CertificationError, HypothesisError, LiftDefectError, WalkStalledError)


@dataclass(frozen=True)
class SweepTask:
    """One instance to generate and check."""

    instance_id: str
    kind: str
    seed: Optional[int]
    params: Tuple[Tuple[str, Any], ...]

    @property
    def param_dict(self) -> Dict[str, Any]:
        return dict(self.params)


@dataclass
class InstanceRun:
    """Everything the checks need for one instance."""

    inst: Instance
    witness: Optional[Tuple[ExactMatrix, ExactMatrix]] = None
    lower_bound: Any = None
    norm: Optional[NormalizedInstance] = None
    profiles: Dict[Tuple[int, ...], Dict[int, Tuple[Rational, IndexSet]]] = field(default_factory=dict)


def plan_grid(grid: SweepGrid) -> List[SweepTask]:
    """Expand one grid into tasks (invalid combinations are skipped)."""
    tasks = []
    if grid.kind == "lowerbound":
        for n, delta in product(grid.n, grid.delta):
            for k in grid.k if grid.k is not None else range(n):
                if delta < 3 or n < 2 or not 0 <= k <= n - 1 or delta - n + k < 1:
                    logger.debug(f"Skipping invalid P_(Δ={delta}, n={n}, k={k})")
                    continue
                tasks.append(SweepTask(f"lb-d{delta}-n{n}-k{k}", "lowerbound", None, (("delta", delta), ("n", n), ("k", k))))
        return tasks

    deltas = grid.delta if grid.kind == "sdm" else [0]
    for n, m, delta in product(grid.n, grid.m, deltas):
        if m < n or (grid.kind == "sdm" and (m < n + 1 or (grid.t_source == "network" and m < 2 * n))):
            logger.debug(f"Skipping {grid.kind} grid point n={n}, m={m}")
            continue
        for offset in range(grid.count):
            seed = grid.seed_start + offset
            params: List[Tuple[str, Any]] = [("n", n), ("m", m), ("entry_bound", grid.entry_bound)]
            tag = f"{grid.kind}-n{n}-m{m}"
            if grid.kind == "sdm":
                params.extend([("delta", delta), ("t_source", grid.t_source)])
                tag += f"-d{delta}"
            tasks.append(SweepTask(f"{tag}-s{seed}", grid.kind, seed, tuple(params)))
    return tasks


def _build(task: SweepTask, settings: Settings) -> InstanceRun:
    drawn = InstanceGenerator(settings).generate(task.kind, task.seed, **task.param_dict)
    return InstanceRun(inst=drawn.instance, witness=drawn.witness, lower_bound=drawn.lower_bound)


def _directions(n: int) -> List[Tuple[int, ...]]:
    return [tuple(int(x) for x in unit_vector(n, i, s)) for i in range(n) for s in (1, -1)]


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------


def _check_proximity(run: InstanceRun, record: ReportRecord, settings: Settings) -> None:
    report = measure_proximity(run.inst, witness=run.witness, settings=settings)
    flat = report_to_record(report, record.instance_id, run.inst)
    for name in PROXIMITY_FIELDS:
        setattr(record, name, getattr(flat, name))
    record.checks.update({f"bound_{name}": ok for name, ok in flat.checks.items()})

    n = run.inst.n
    width = normalized_width(run.norm, settings)
    main = Rational(n, 2) * delta_k(run.norm.base.A, n - 1, settings)
    record.checks["normalized_width"] = bool(width < main) if n >= 2 else bool(width < 1)


def _profiles(run: InstanceRun, settings: Settings) -> Dict[Tuple[int, ...], Dict[int, Tuple[Rational, IndexSet]]]:
    if not run.profiles:
        run.profiles = {alpha: kappa_profile(run.norm, alpha, settings) for alpha in _directions(run.inst.n)}
    return run.profiles


def _check_kappa(run: InstanceRun, record: ReportRecord, settings: Settings) -> None:
    best: Dict[int, Rational] = {}
    for profile in _profiles(run, settings).values():
        for d, (value, _) in profile.items():
            if d not in best or value > best[d]:
                best[d] = value
    record.kappa = {str(d): format_scalar(v) for d, v in sorted(best.items())}
    for d, (c, a) in KAPPA_LIMITS.items():
        if d in best:
            record.checks[f"kappa_{d}"] = lt_rational_plus_sqrt2(best[d], Rational(c), Rational(a))


def _check_lift(run: InstanceRun, record: ReportRecord, settings: Settings, samples: int) -> None:
    n = run.inst.n
    seen = set()
    for alpha, profile in _profiles(run, settings).items():
        for d, (_, rows) in sorted(profile.items()):
            if len(seen) >= samples or not rows or d != n - len(rows) or (alpha, rows) in seen:
                continue
            verify_lift(run.norm, lift(run.norm, alpha, rows, settings), settings)
            seen.add((alpha, rows))
    if seen:
        record.checks["lift"] = True


def _check_volume(run: InstanceRun, record: ReportRecord, settings: Settings) -> None:
    n = run.inst.n
    if n not in (2, 3) or dimension(run.norm.polyhedron, settings) != n:
        return
    record.checks["volume"] = all(check_volume_bound(run.norm, a, settings).holds for a in _directions(n))
    if n == 3:
        record.checks["planar_section"] = all(planar_section(run.norm, a, settings).holds for a in _directions(n))


def _check_walk(run: InstanceRun, record: ReportRecord, settings: Settings) -> None:
    P = run.norm.polyhedron
    # alpha with max 0 over P has nothing to walk
    directions = [a for a in _directions(run.inst.n) if lp_max(P, a, settings)[0] > 0]
    traces = [template_walk(run.norm, a, settings=settings) for a in directions]
    if not traces:
        return
    record.walk = walk_to_summary(traces[0])
    record.checks["walk"] = all(t.template_bound_holds() is not False for t in traces)
    record.checks["spindle_symmetric"] = all(build_spindle(run.norm.base.A, t.points[0]).is_centrally_symmetric(settings) for t in traces)


def _check_delta_modular(run: InstanceRun, record: ReportRecord, settings: Settings) -> None:
    if run.witness is None:
        return
    T, B = run.witness
    norm = run.norm
    # the appended rows -A_{I*} factor through -T_{I*}
    T_bar = T.vstack(-T.select_rows(norm.basis))
    decomposition = ray_decomposition(norm.base.A, T_bar, B, norm.optimal_vertex, settings)
    record.checks["ray_count"] = decomposition.length <= decomposition.lattice_index - 1
    record.checks["ray_norms"] = decomposition.norms_within_bound
    record.checks["cone_ray_norms"] = decomposition.cone_rays_within_bound
    record.checks["ray_chain"] = decomposition.partial_sums_in_spindle and decomposition.residues_distinct


def _check_lower_bound(run: InstanceRun, record: ReportRecord, settings: Settings) -> None:
    if run.lower_bound is None:
        return
    record.checks["lower_bound"] = certify_lower_bound(run.lower_bound, settings).holds


def _guard(record: ReportRecord, name: str, fn: Callable[[], None]) -> None:
    """Run one check; anything it raises counts against it."""
    try:
        fn()
    except DEFECTS as e:
        logger.warning(f"{record.instance_id}: check '{name}' failed: {e}")
        record.checks[name] = False
        record.check_errors[name] = f"{type(e).__name__}: {e}"
    except ProxlabError as e:
        logger.error(f"{record.instance_id}: check '{name}' crashed: {type(e).__name__}: {e}")
        record.checks[name] = False
        record.check_errors[name] = f"{type(e).__name__}: {e}"


def run_task(task: SweepTask, checks: Tuple[str, ...], lift_samples: int, settings: Settings) -> ReportRecord:
    """Generate one instance and run the selected checks; never raises ProxlabError."""
    start = time.time()
    try:
        run = _build(task, settings)
        run.norm = normalize(run.inst, settings)
    except ProxlabError as e:
        logger.warning(f"{task.instance_id}: {type(e).__name__}: {e}")
        p = task.param_dict
        return ReportRecord(
            instance_id=task.instance_id,
            n=p.get("n", 1),
            m=p.get("m", max(p.get("n", 1), 1)),
            error=str(e),
            error_type=type(e).__name__,
            timing_ms=round((time.time() - start) * 1000, 2),
        )

    record = ReportRecord(instance_id=task.instance_id, n=run.inst.n, m=run.inst.m)
    steps = {
        "proximity": lambda: _check_proximity(run, record, settings),
        "kappa": lambda: _check_kappa(run, record, settings),
        "lift": lambda: _check_lift(run, record, settings, lift_samples),
        "volume": lambda: _check_volume(run, record, settings),
        "walk": lambda: _check_walk(run, record, settings),
        "delta_modular": lambda: _check_delta_modular(run, record, settings),
        "lower_bound": lambda: _check_lower_bound(run, record, settings),
    }
    for name in checks:
        if name in steps:
            _guard(record, name, steps[name])
    record.timing_ms = round((time.time() - start) * 1000, 2)
    logger.debug(f"{task.instance_id}: {sum(record.checks.values())}/{len(record.checks)} checks passed")
    return record


def mahler_products(samples: int, seed: int = 0, bound: int = 5, settings: Optional[Settings] = None) -> List[Rational]:
    """area(Q) * area(Q°) for random centrally symmetric polygons Q."""
    rng = np.random.default_rng(seed)
    products = []
    while len(products) < samples:
        count = int(rng.integers(2, 6))
        gens = rng.integers(-bound, bound + 1, size=(count, 2)).tolist()
        if ExactMatrix(gens, cols=2).rank() < 2:
            continue
        Q = symmetric_polygon(gens)
        products.append(area_2d(Q, settings) * polygon_area(polar_2d(Q, settings)))
    return products


class SweepRunner:
    """
    Run sweeps over generator grids.

    Responsibilities:
    - Expanding grids into deterministic task lists
    - Dispatching tasks in-process or to worker processes
    - Folding records into an aggregate
    """

    def __init__(self, settings: Optional[Settings] = None):
        """
        Initialize Sweep Runner.

        Args:
            settings: Caps and worker count (default from settings)
        """
        self.settings = settings or get_settings()
        self.logger = logger
        self.history: List[Dict[str, Any]] = []

    def plan(self, config: SweepConfig) -> List[SweepTask]:
        tasks = [task for grid in config.grids for task in plan_grid(grid)]
        self.logger.info(f"Sweep '{config.name}': {len(tasks)} tasks from {len(config.grids)} grids")
        return tasks

    def run(self, config: SweepConfig) -> Tuple[SweepAggregate, List[ReportRecord]]:
        """
        Run every task of a sweep.

        Returns:
            (aggregate, per-instance records in task order)
        """
        start = time.time()
        tasks = self.plan(config)
        worker = partial(run_task, checks=tuple(config.checks), lift_samples=config.lift_samples, settings=self.settings)
        workers = self.settings.sweep_workers
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(pool.map(worker, tasks))
        else:
            records = [worker(task) for task in tasks]

        aggregate = self.aggregate(config, records)
        if "mahler" in config.checks and config.mahler_samples:
            products = mahler_products(config.mahler_samples, settings=self.settings)
            aggregate.check_counts["mahler"] = len(products)
            aggregate.violations.extend(
                {"instance_id": f"polygon-{i}", "check": "mahler", "value": format_scalar(p)}
                for i, p in enumerate(products)
                if p < 8
            )
        aggregate.elapsed_sec = round(time.time() - start, 3)
        self.history.append({"name": config.name, "instances": aggregate.instances, "violations": len(aggregate.violations)})
        self.logger.info(
            f"Sweep '{config.name}' finished: {aggregate.instances} instances, "
            f"{aggregate.failures} failures, {len(aggregate.violations)} violations in {aggregate.elapsed_sec:.1f}s"
        )
        return aggregate, records

    @staticmethod
    def aggregate(config: SweepConfig, records: List[ReportRecord]) -> SweepAggregate:
        agg = SweepAggregate(name=config.name, instances=len(records))
        best_kappa: Dict[str, Rational] = {}
        best_ratio: Optional[Rational] = None
        for r in records:
            if r.error:
                agg.failures += 1
            for name, ok in r.checks.items():
                agg.check_counts[name] = agg.check_counts.get(name, 0) + 1
                if not ok:
                    violation = {"instance_id": r.instance_id, "check": name}
                    if name in r.check_errors:
                        violation["error"] = r.check_errors[name]
                    agg.violations.append(violation)
            for d, value in r.kappa.items():
                v = to_scalar(value)
                if d not in best_kappa or v > best_kappa[d]:
                    best_kappa[d] = v
            main = r.bounds.get("main")
            if r.proximity is not None and main:
                ratio = to_scalar(r.proximity) / to_scalar(main)
                if best_ratio is None or ratio > best_ratio:
                    best_ratio = ratio
        agg.max_kappa = {d: format_scalar(v) for d, v in sorted(best_kappa.items())}
        if "3" in best_kappa:
            agg.kappa3_squared = format_scalar(best_kappa["3"] ** 2)
        if best_ratio is not None:
            agg.max_proximity_ratio = format_scalar(best_ratio)
        return agg
