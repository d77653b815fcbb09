"""
Experiment orchestration: channel sampling per trial, scheme evaluation, aggregation
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
import structlog

from ..channel.sampler import ChannelSet, sample_channels
from ..models.experiment import (
    ExperimentKind,
    ExperimentRecord,
    ExperimentSpec,
    Metric,
    SchemeKind,
)
from ..models.system import DomainError, SecrecyReport, StarSecrecyError, User
from .baselines import (
    COEFFICIENT_STREAM,
    evaluate_scheme,
    optimize_fixed_coefficients,
    quantize_coefficients,
    random_coefficients,
)
from .full_csi import ahb_solve
from .statistical_csi import extended_ahb, sop_closed_form, sop_monte_carlo, sop_params

logger = structlog.get_logger(__name__)

MC_STREAM_BASE = 2
THREADS_ENV = "STAR_SECRECY_THREADS"

# Value recorded for a trial whose optimization failed
FAILURE_VALUES = {
    Metric.SECRECY_CAPACITY.value: 0.0,
    Metric.TRANSMISSION_RATE.value: 0.0,
    Metric.SOP.value: 1.0,
    "sop_iu": 1.0,
    "sop_ou": 1.0,
}


@dataclass(frozen=True)
class TrialTask:
    spec: ExperimentSpec
    x: float
    trial: int


@dataclass(frozen=True)
class TrialValue:
    scheme: str
    x: float
    metric: str
    value: Optional[float]


def resolve_workers(requested: Optional[int]) -> int:
    """Requested worker count, defaulting to the CPU count, capped by STAR_SECRECY_THREADS."""
    workers = requested or os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            workers = min(workers, max(int(cap), 1))
        except ValueError:
            logger.warning("Ignoring malformed worker cap", variable=THREADS_ENV, value=cap)
    return max(workers, 1)


def metric_value(report: SecrecyReport, metric: Metric) -> float:
    if metric is Metric.SOP:
        if report.max_sop is None:
            raise DomainError(f"Report of order {report.order} carries no outage probabilities")
        return report.max_sop
    return report.min_secrecy


def _scenario(spec: ExperimentSpec, x: float, trial: int) -> Tuple[ChannelSet, ExperimentSpec]:
    """Channels and per-point configuration of one (x, trial) task."""
    geometry, radio = spec.geometry, spec.radio
    if spec.experiment is ExperimentKind.SWEEP_POWER:
        radio = radio.with_power_dbm(x)
    elif spec.experiment is ExperimentKind.SWEEP_ELEMENTS:
        radio = radio.model_copy(update={"num_ris_elements": int(x)})
    elif spec.experiment is ExperimentKind.PLACEMENT:
        geometry = geometry.with_ris_x(x)
    elif spec.experiment is ExperimentKind.SOP_TIGHTNESS:
        geometry = geometry.with_eve_distance(x)
    channels = sample_channels(geometry, radio, spec.seed, (trial,))
    return channels, spec.model_copy(update={"geometry": geometry, "radio": radio})


def _guarded(scheme: str, x: float, metric: str, fn: Callable[[], float]) -> TrialValue:
    try:
        return TrialValue(scheme, x, metric, float(fn()))
    except (StarSecrecyError, ArithmeticError, np.linalg.LinAlgError) as e:
        logger.warning("Trial failed", scheme=scheme, x=x, metric=metric, error=str(e))
        return TrialValue(scheme, x, metric, None)


def _sweep_trial(task: TrialTask) -> List[TrialValue]:
    channels, point = _scenario(task.spec, task.x, task.trial)
    metric = point.metric
    values = []
    for scheme in point.schemes:
        def run(scheme=scheme):
            report = evaluate_scheme(SchemeKind(scheme), channels, point.radio, point.rates, point.tolerances,
                                     metric, point.solver, point.seed, (task.trial,))
            return metric_value(report, metric)
        values.append(_guarded(scheme, task.x, metric.value, run))
    return values


def _tightness_trial(task: TrialTask) -> List[TrialValue]:
    channels, point = _scenario(task.spec, task.x, task.trial)
    coefficients = random_coefficients(channels.num_elements, point.seed, (task.trial, COEFFICIENT_STREAM))
    values = []
    for index, user in enumerate(User):
        power = point.radio.power_cap(user)
        name = f"sop_{user.value}"
        if "closed-form" in point.schemes:
            values.append(_guarded("closed-form", task.x, name, lambda user=user, power=power: sop_closed_form(
                sop_params(coefficients, channels, user, point.rates, power, point.radio.noise_power))))
        if "monte-carlo" in point.schemes:
            values.append(_guarded("monte-carlo", task.x, name, lambda user=user, power=power, index=index: sop_monte_carlo(
                coefficients, user, channels.small_scale.user(user), channels.large_scale, point.rates,
                power, point.radio.noise_power, point.mc_trials, point.seed,
                (task.trial, MC_STREAM_BASE + index)).estimate))
    return values


def _padded(trace: List[float], length: int) -> List[float]:
    if not trace:
        return []
    return list(trace[:length]) + [trace[-1]] * max(length - len(trace), 0)


def _converge_trial(task: TrialTask) -> List[TrialValue]:
    channels, point = _scenario(task.spec, task.x, task.trial)
    scheme = SchemeKind.STAR_NOMA.value
    length = point.tolerances.max_alt
    statistical = point.experiment is ExperimentKind.CONVERGE_STAT
    metric = Metric.SOP if statistical else Metric.SECRECY_CAPACITY
    try:
        if statistical:
            trace = extended_ahb(channels, point.radio, point.rates, point.tolerances, point.solver,
                                 seed=point.seed, substream=(task.trial,)).trace
        else:
            trace = ahb_solve(channels, point.radio, point.tolerances, point.solver,
                              seed=point.seed, substream=(task.trial,)).trace
    except (StarSecrecyError, ArithmeticError, np.linalg.LinAlgError) as e:
        logger.warning("Trial failed", scheme=scheme, metric=metric.value, error=str(e))
        return [TrialValue(scheme, float(n), metric.value, None) for n in range(1, length + 1)]
    return [TrialValue(scheme, float(n), metric.value, value)
            for n, value in enumerate(_padded(trace, length), start=1)]


def _quantization_trial(task: TrialTask) -> List[TrialValue]:
    channels, point = _scenario(task.spec, 0.0, task.trial)
    scheme = SchemeKind.STAR_NOMA.value
    values = []
    references = {
        Metric.TRANSMISSION_RATE: channels.without_eavesdropper(),
        Metric.SECRECY_CAPACITY: channels,
    }
    for metric, realization in references.items():
        try:
            outcome = ahb_solve(realization, point.radio, point.tolerances, point.solver,
                                seed=point.seed, substream=(task.trial,))
        except (StarSecrecyError, ArithmeticError, np.linalg.LinAlgError) as e:
            logger.warning("Trial failed", scheme=scheme, metric=metric.value, error=str(e))
            values.extend(TrialValue(scheme, x, metric.value, None) for x in point.sweep)
            continue
        for x in point.sweep:
            bits = int(x)
            if bits == 0:
                values.append(TrialValue(scheme, x, metric.value, outcome.objective))
                continue
            values.append(_guarded(scheme, x, metric.value, lambda bits=bits, outcome=outcome, realization=realization: (
                optimize_fixed_coefficients(realization, quantize_coefficients(outcome.coefficients, bits),
                                            point.radio, point.rates, Metric.SECRECY_CAPACITY).min_secrecy)))
    return values


def run_trial(task: TrialTask) -> List[TrialValue]:
    """Evaluate every scheme of one (sweep value, trial) task."""
    kind = task.spec.experiment
    if kind is ExperimentKind.SOP_TIGHTNESS:
        return _tightness_trial(task)
    if kind in (ExperimentKind.CONVERGE_FULL, ExperimentKind.CONVERGE_STAT):
        return _converge_trial(task)
    if kind is ExperimentKind.QUANTIZATION:
        return _quantization_trial(task)
    return _sweep_trial(task)


def build_tasks(spec: ExperimentSpec) -> List[TrialTask]:
    if spec.experiment in (ExperimentKind.CONVERGE_FULL, ExperimentKind.CONVERGE_STAT,
                           ExperimentKind.QUANTIZATION, ExperimentKind.SOLVE_ONE):
        return [TrialTask(spec, 0.0, trial) for trial in range(spec.trials)]
    return [TrialTask(spec, x, trial) for x in spec.sweep for trial in range(spec.trials)]


def aggregate(values: Iterable[TrialValue], seed: int) -> List[ExperimentRecord]:
    """Mean/std per (scheme, x, metric); failed trials count as infeasible at their penalty value."""
    cells: Dict[Tuple[str, float, str], List[Optional[float]]] = {}
    for value in values:
        cells.setdefault((value.scheme, value.x, value.metric), []).append(value.value)
    records = []
    for (scheme, x, metric), raw in sorted(cells.items()):
        failure = FAILURE_VALUES.get(metric, 0.0)
        filled = np.array([failure if v is None else v for v in raw], dtype=float)
        records.append(ExperimentRecord(
            scheme=scheme,
            x=x,
            metric=metric,
            mean=float(np.mean(filled)),
            std=float(np.std(filled)),
            trials=len(raw),
            infeasible=sum(v is None for v in raw),
            seed=seed,
        ))
    return records


def run_experiment(spec: ExperimentSpec, workers: Optional[int] = None) -> List[ExperimentRecord]:
    """
    Run every (sweep value, trial) task and aggregate per scheme and metric.

    Tasks are mapped in a fixed order and merged by index, so results do not depend on
    the worker count.

    Args:
        spec: Experiment specification
        workers: Worker processes; overrides spec.workers

    Returns:
        Records sorted by (scheme, x, metric)
    """
    tasks = build_tasks(spec)
    count = min(resolve_workers(workers or spec.workers), len(tasks))
    logger.info("Experiment started", experiment=spec.experiment.value, tasks=len(tasks),
                workers=count, seed=spec.seed)

    if count <= 1:
        results = [run_trial(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=count) as pool:
            results = list(pool.map(run_trial, tasks))

    records = aggregate((value for batch in results for value in batch), spec.seed)
    logger.info("Experiment finished", experiment=spec.experiment.value, records=len(records),
                infeasible=sum(r.infeasible for r in records))
    return records


def solve_one(spec: ExperimentSpec, trial: int = 0) -> SecrecyReport:
    """Full-CSI star-noma operating point of one channel realization."""
    channels, point = _scenario(spec, 0.0, trial)
    if point.metric is Metric.SOP:
        return extended_ahb(channels, point.radio, point.rates, point.tolerances, point.solver,
                            seed=point.seed, substream=(trial,)).report
    return ahb_solve(channels, point.radio, point.tolerances, point.solver,
                     seed=point.seed, substream=(trial,)).report
