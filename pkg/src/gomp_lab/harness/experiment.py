"""Experiment configurations, per-trial drivers and result files.

A run expands ``trials x |N_range| x |K_range|`` trials in a fixed order
and gives each one a seed derived from ``(config.seed, trial_id)``, so the
result does not depend on how trials are scheduled.  Results are sorted
by ``trial_id`` before they are written.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from gomp_lab import bounds
from gomp_lab.errors import ConfigError, DomainError, GompLabError
from gomp_lab.harness import generators as gen
from gomp_lab.harness.rng import derive_seed, describe
from gomp_lab.oracle import audit_deltas, audit_noiseless_run, audit_noisy_run
from gomp_lab.pursuit import PursuitConfig, gomp_solve
from gomp_lab.rip import exact_rip

SCHEMA_VERSION = 1
THREADS_ENV = "GOMP_LAB_THREADS"


class ExperimentKind(str, enum.Enum):
    CERTIFIED_RECOVERY = "CertifiedRecovery"
    PHASE_TRANSITION = "PhaseTransition"
    NOISE_BOUND = "NoiseBound"
    SNR_THRESHOLD = "SnrThreshold"
    AUDIT_CORPUS = "AuditCorpus"


class NoiseMode(str, enum.Enum):
    SIGMA = "sigma"
    SNR = "snr"
    NORM = "norm"


def _int_range(value, name):
    if isinstance(value, int) and not isinstance(value, bool):
        return [value]
    if isinstance(value, dict):
        try:
            lo, hi = int(value["start"]), int(value["stop"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"{name} range needs integer 'start' and 'stop'") from None
        step = int(value.get("step", 1))
        if step < 1:
            raise ConfigError(f"{name} step must be positive")
        return list(range(lo, hi + 1, step))
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            if isinstance(v, bool) or int(v) != v:
                raise ConfigError(f"{name} entries must be integers, got {v!r}")
            out.append(int(v))
        return out
    raise ConfigError(f"{name} must be an integer, a list or a start/stop range")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.  ``K_range`` and ``N_range`` accept integers, lists or
    inclusive ``{"start": a, "stop": b}`` ranges in JSON.

    ``noise_level`` is interpreted per ``noise_mode``: per-entry standard
    deviation, target SNR ``||Phi x|| / ||n||`` or target ``||n||``.  For
    ``SnrThreshold`` runs the target SNR is ``snr_margin`` times the
    instance's threshold and ``noise_level`` is ignored.
    """

    kind: ExperimentKind
    m: int
    n: int
    K_range: tuple[int, ...]
    N_range: tuple[int, ...] = (1,)
    trials: int = 1
    seed: int = 0
    noise_level: float = 0.0
    noise_mode: NoiseMode = NoiseMode.SIGMA
    matrix_ensemble: gen.Ensemble = gen.Ensemble.GAUSSIAN_UNIT_COLUMNS
    epsilon: float = 0.0
    gamma: float = 2.0
    output_path: str = "results.csv"
    signal_distribution: gen.SignalDistribution = gen.SignalDistribution.RADEMACHER
    matrix_path: str | None = None
    snr_margin: float = 1.01
    residual_tolerance: float = 1e-8

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", ExperimentKind(self.kind))
            object.__setattr__(self, "noise_mode", NoiseMode(self.noise_mode))
            object.__setattr__(self, "matrix_ensemble", gen.Ensemble(self.matrix_ensemble))
            object.__setattr__(self, "signal_distribution",
                               gen.SignalDistribution(self.signal_distribution))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "K_range", tuple(_int_range(self.K_range, "K_range")))
        object.__setattr__(self, "N_range", tuple(_int_range(self.N_range, "N_range")))
        self.validate()

    def validate(self):
        for name in ("m", "n", "trials"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if not self.K_range or not self.N_range:
            raise ConfigError("K_range and N_range must be non-empty")
        if min(self.K_range) < 1 or min(self.N_range) < 1:
            raise ConfigError("K and N values must be positive")
        if max(self.N_range) * max(self.K_range) >= self.m:
            raise ConfigError(
                f"N*K must stay below m: max N * max K = "
                f"{max(self.N_range) * max(self.K_range)}, m = {self.m}"
            )
        if max(self.K_range) > self.n:
            raise ConfigError("K cannot exceed n")
        if not self.noise_level >= 0:
            raise ConfigError("noise_level must be nonnegative")
        if self.noise_mode is NoiseMode.SNR and self.noise_level == 0 and \
                self.kind in (ExperimentKind.NOISE_BOUND,):
            raise ConfigError("an SNR target must be positive")
        if not self.gamma >= 1.0:
            raise ConfigError("gamma must be at least 1")
        if self.matrix_ensemble is gen.Ensemble.FROM_FILE and not self.matrix_path:
            raise ConfigError("FromFile ensemble needs matrix_path")
        if self.matrix_ensemble in (gen.Ensemble.PERTURBED_IDENTITY, gen.Ensemble.SPREAD_IDENTITY) \
                and not self.m <= self.n <= 2 * self.m:
            raise ConfigError("identity-based ensembles need m <= n <= 2m")
        if self.matrix_ensemble is gen.Ensemble.NEAR_ORTHONORMAL and self.n > self.m:
            raise ConfigError("NearOrthonormal needs n <= m")
        if self.kind is ExperimentKind.SNR_THRESHOLD and \
                self.signal_distribution is not gen.SignalDistribution.GAMMA:
            raise ConfigError("SnrThreshold needs GammaConstrained signals")
        if self.kind in (ExperimentKind.NOISE_BOUND,) and self.noise_level == 0:
            raise ConfigError("NoiseBound needs a positive noise_level")
        if not self.snr_margin > 1.0:
            raise ConfigError("snr_margin must exceed 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("experiment config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        missing = sorted(k for k in ("kind", "m", "n", "K_range") if k not in data)
        if missing:
            raise ConfigError(f"missing config keys: {missing}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, source):
        """Parse a path, a JSON string or an already-decoded mapping."""
        if isinstance(source, dict):
            return cls.from_dict(source)
        text = str(source)
        if not text.lstrip().startswith("{"):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config {source}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, enum.Enum):
                d[k] = v.value
            elif isinstance(v, tuple):
                d[k] = list(v)
        return d

    def with_overrides(self, **changes):
        d = self.to_dict()
        d.update(changes)
        return ExperimentConfig.from_dict(d)

    def trial_grid(self):
        """``(trial_id, N, K)`` for every trial, in id order."""
        out = []
        tid = 0
        for N in self.N_range:
            for K in self.K_range:
                for _ in range(self.trials):
                    out.append((tid, N, K))
                    tid += 1
        return out


@dataclass
class TrialRecord:
    trial_id: int
    seed: int
    m: int
    n: int
    K: int
    N: int
    exact_support_recovered: bool = False
    halt_reason: str = ""
    iterations_used: int = 0
    residual_norm: float = math.nan
    reconstruction_error: float = math.nan
    snr: float | None = None
    delta_NK: float | None = None
    delta_NK1: float | None = None
    cert_T1: bool | None = None
    cert_T2: bool | None = None
    constant: float | None = None
    bound_violations: int | None = None
    audit_checks: int | None = None
    audit_failures: int | None = None
    error: str = ""

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def row(self):
        return [_cell(getattr(self, c)) for c in self.columns()]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# trial drivers


def _matrix(config, seed):
    n_cols = config.n
    return gen.gen_matrix(config.matrix_ensemble, config.m, n_cols, seed,
                          epsilon=config.epsilon, path=config.matrix_path)


def _solve(Phi, y, N, K, truth, config):
    return gomp_solve(Phi, y, K, PursuitConfig(n_atoms=N), truth=truth)


def _recovered(truth, result):
    return bool(np.isin(truth.support, result.final_support).all())


def _fill_solution(rec, truth, result):
    rec.halt_reason = result.halt_reason.value
    rec.iterations_used = result.iterations
    rec.residual_norm = result.residual_norm
    rec.reconstruction_error = float(np.linalg.norm(truth.dense() - result.dense()))
    rec.exact_support_recovered = _recovered(truth, result)


def _noise(config, m, seed, clean_norm, target_snr=None):
    if target_snr is not None:
        return gen.gen_noise(m, seed, snr=target_snr, clean_norm=clean_norm)
    if config.noise_level == 0:
        return np.zeros(m)
    if config.noise_mode is NoiseMode.SIGMA:
        return gen.gen_noise(m, seed, sigma=config.noise_level)
    if config.noise_mode is NoiseMode.SNR:
        return gen.gen_noise(m, seed, snr=config.noise_level, clean_norm=clean_norm)
    return gen.gen_noise(m, seed, norm=config.noise_level)


def _trial_certified(config, rec, Phi, truth, y):
    N, K = rec.N, rec.K
    dNK = exact_rip(Phi, N * K)
    dNK1 = exact_rip(Phi, N * K + 1)
    rec.delta_NK, rec.delta_NK1 = dNK.delta, dNK1.delta
    reps = {r.theorem: r for r in bounds.recovery_certificate([dNK, dNK1], N, K)}
    rec.cert_T1 = reps[bounds.Theorem.T1].satisfied
    rec.cert_T2 = reps[bounds.Theorem.T2].satisfied
    result = _solve(Phi, y, N, K, truth, config)
    _fill_solution(rec, truth, result)
    ok = rec.exact_support_recovered and rec.residual_norm <= config.residual_tolerance * np.linalg.norm(y)
    rec.bound_violations = int((rec.cert_T1 or rec.cert_T2) and not ok)


def _noise_deltas(Phi, N, K):
    orders = sorted({N, K, N * K, N * K + 1, N * K + K})
    return {o: exact_rip(Phi, o) for o in orders}


def _trial_noise_bound(config, rec, Phi, truth, y, seed):
    N, K = rec.N, rec.K
    d = _noise_deltas(Phi, N, K)
    rec.delta_NK, rec.delta_NK1 = d[N * K].delta, d[N * K + 1].delta
    noise = _noise(config, config.m, seed, float(np.linalg.norm(y)))
    n_norm = float(np.linalg.norm(noise))
    rec.snr = float(np.linalg.norm(y)) / n_norm if n_norm else None
    result = _solve(Phi, y + noise, N, K, truth, config)
    _fill_solution(rec, truth, result)
    args = (d[K].delta, d[N].delta, d[N * K + K].delta, N, K)
    violations = 0
    consts = []
    for fn, dv, thr in ((bounds.c_k1, rec.delta_NK, bounds.theorem1_bound(N, K)),
                        (bounds.c_k1_appendix, rec.delta_NK, bounds.theorem1_bound(N, K)),
                        (bounds.c_k2, rec.delta_NK1, bounds.theorem2_bound(N, K))):
        if dv < thr and d[N * K + K].delta < 1.0:
            c = fn(dv, *args)
            consts.append(c)
            violations += int(not rec.reconstruction_error < c * n_norm)
    rec.cert_T1 = rec.delta_NK < bounds.theorem1_bound(N, K)
    rec.cert_T2 = rec.delta_NK1 < bounds.theorem2_bound(N, K)
    rec.constant = consts[0] if consts else None
    rec.bound_violations = violations


def _trial_snr(config, rec, Phi, truth, y, seed):
    N, K = rec.N, rec.K
    d = _noise_deltas(Phi, N, K)
    rec.delta_NK, rec.delta_NK1 = d[N * K].delta, d[N * K + 1].delta
    try:
        c3 = bounds.c_k3(d[N * K].delta, d[K].delta, d[N].delta, config.gamma, N, K)
    except DomainError as exc:
        rec.error = f"vacuous: {exc}"
        rec.bound_violations = 0
        return
    rec.constant = c3
    noise = _noise(config, config.m, seed, float(np.linalg.norm(y)),
                   target_snr=config.snr_margin * c3)
    rec.snr = float(np.linalg.norm(y)) / float(np.linalg.norm(noise))
    result = _solve(Phi, y + noise, N, K, truth, config)
    _fill_solution(rec, truth, result)
    rec.bound_violations = int(rec.snr > c3 and not rec.exact_support_recovered)


def _trial_audit(config, rec, Phi, truth, y, seed):
    N, K = rec.N, rec.K
    deltas = audit_deltas(Phi, N * K + K + N)
    rec.delta_NK, rec.delta_NK1 = deltas[N * K].delta, deltas[N * K + 1].delta
    noise = _noise(config, config.m, seed, float(np.linalg.norm(y)))
    result = _solve(Phi, y + noise, N, K, truth, config)
    _fill_solution(rec, truth, result)
    if np.any(noise):
        rec.snr = float(np.linalg.norm(y) / np.linalg.norm(noise))
        reports = audit_noisy_run(Phi, truth, noise, result, deltas, N, config.gamma,
                                  instance_id=str(rec.trial_id))
    else:
        reports = audit_noiseless_run(Phi, truth, result, deltas, N, seed=seed,
                                      instance_id=str(rec.trial_id))
    checks = [c for r in reports for c in r.checks]
    rec.audit_checks = sum(c.evaluated for c in checks)
    rec.audit_failures = sum(not c.passed for c in checks)


def run_trial(config, trial_id, N, K) -> TrialRecord:
    """Run one trial; solver and RIP errors are recorded, not raised."""
    seed = derive_seed(config.seed, trial_id)
    rec = TrialRecord(trial_id, seed, config.m, config.n, K, N)
    try:
        Phi = _matrix(config, derive_seed(seed, "matrix"))
        truth = gen.gen_sparse_signal(config.n, K, config.signal_distribution, config.gamma,
                                      derive_seed(seed, "signal"))
        y = Phi[:, truth.support] @ truth.values
        noise_seed = derive_seed(seed, "noise")
        kind = config.kind
        if kind is ExperimentKind.PHASE_TRANSITION:
            result = _solve(Phi, y + _noise(config, config.m, noise_seed, float(np.linalg.norm(y))),
                            N, K, truth, config)
            _fill_solution(rec, truth, result)
        elif kind is ExperimentKind.CERTIFIED_RECOVERY:
            _trial_certified(config, rec, Phi, truth, y)
        elif kind is ExperimentKind.NOISE_BOUND:
            _trial_noise_bound(config, rec, Phi, truth, y, noise_seed)
        elif kind is ExperimentKind.SNR_THRESHOLD:
            _trial_snr(config, rec, Phi, truth, y, noise_seed)
        else:
            _trial_audit(config, rec, Phi, truth, y, noise_seed)
    except (GompLabError, ValueError, np.linalg.LinAlgError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def thread_cap(threads=None) -> int:
    """Worker count: ``threads`` if given, else ``$GOMP_LAB_THREADS``, else
    the CPU count."""
    if threads is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigError("thread count must be positive")
    return int(threads)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summary: dict = field(default_factory=dict)
    csv_path: Path | None = None
    summary_path: Path | None = None


def records_csv(records) -> str:
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TrialRecord.columns())
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def _mean(values):
    vals = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.mean(vals)) if vals else None


def summarize(config, records) -> dict:
    cells = []
    for N in config.N_range:
        for K in config.K_range:
            rs = [r for r in records if r.N == N and r.K == K]
            ok = [r for r in rs if not r.error]
            cells.append({
                "N": N,
                "K": K,
                "trials": len(rs),
                "errored": len(rs) - len(ok),
                "success_rate": (sum(r.exact_support_recovered for r in ok) / len(ok)) if ok else None,
                "mean_reconstruction_error": _mean([r.reconstruction_error for r in ok]),
                "bound_violations": sum(r.bound_violations or 0 for r in ok),
                "audit_failures": sum(r.audit_failures or 0 for r in ok),
                "delta_NK": [r.delta_NK for r in rs if r.delta_NK is not None],
                "delta_NK1": [r.delta_NK1 for r in rs if r.delta_NK1 is not None],
            })
    return {
        "schema": SCHEMA_VERSION,
        "config": config.to_dict(),
        "rng": describe(),
        "delta_method": "Exact" if config.kind is not ExperimentKind.PHASE_TRANSITION else None,
        "trials": len(records),
        "errored": sum(bool(r.error) for r in records),
        "bound_violations": sum(r.bound_violations or 0 for r in records),
        "audit_failures": sum(r.audit_failures or 0 for r in records),
        "cells": cells,
    }


def summary_path_for(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".summary.json")


def run_experiment(config, threads=None, write=True, output_path=None) -> ExperimentResult:
    """Run every trial of ``config`` and (by default) write the CSV and the
    JSON summary next to it (``<stem>.summary.json``)."""
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_json(config)
    workers = thread_cap(threads)
    grid = config.trial_grid()
    if workers == 1:
        records = [run_trial(config, *t) for t in grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda t: run_trial(config, *t), grid))
    records.sort(key=lambda r: r.trial_id)
    summary = summarize(config, records)
    out = ExperimentResult(config, records, summary)
    if write:
        path = Path(output_path or config.output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(records_csv(records))
        sp = summary_path_for(path)
        sp.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        out.csv_path, out.summary_path = path, sp
    return out
