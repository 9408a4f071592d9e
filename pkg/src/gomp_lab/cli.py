"""Command-line entry point: ``gomp-lab <verb> ...``.

Exit codes: 0 on success, 1 on a configuration or input error, 2 when an
audit (or a bound check) finds a violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from gomp_lab import bounds
from gomp_lab.errors import GompLabError
from gomp_lab.harness import generators as gen
from gomp_lab.harness.experiment import ExperimentConfig, ExperimentKind, run_experiment, thread_cap
from gomp_lab.harness.matrix_io import read_matrix
from gomp_lab.harness.rng import derive_seed
from gomp_lab.oracle import audit_deltas, audit_noiseless_run, audit_noisy_run
from gomp_lab.pursuit import PursuitConfig, gomp_solve, omp_solve
from gomp_lab.rip import exact_rip, monte_carlo_rip

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(rows, fmt, out):
    """Write a list of flat dicts as CSV or a JSON array."""
    if fmt == "json":
        out.write(json.dumps(rows, indent=2, default=_jsonable) + "\n")
        return
    if not rows:
        return
    cols = list(rows[0])
    for r in rows[1:]:
        cols += [c for c in r if c not in cols]
    w = csv.DictWriter(out, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(v) for k, v in r.items()})


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return " ".join(str(_csv_cell(x)) for x in np.asarray(v).tolist())
    if isinstance(v, bool):
        return "true" if v else "false"
    return "" if v is None else v


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    if hasattr(v, "value"):
        return v.value
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _matrix_args(p):
    p.add_argument("--matrix", help="matrix file ('m n' header then rows)")
    p.add_argument("--ensemble", default="GaussianUnitColumns",
                   choices=[e.value for e in gen.Ensemble if e is not gen.Ensemble.FROM_FILE])
    p.add_argument("-m", type=int, default=16)
    p.add_argument("-n", type=int, default=32)
    p.add_argument("--epsilon", type=float, default=0.05)


def _load_matrix(args):
    if args.matrix:
        return read_matrix(args.matrix)
    return gen.gen_matrix(args.ensemble, args.m, args.n, derive_seed(args.seed, "matrix"),
                          epsilon=args.epsilon)


def _instance(args, Phi):
    truth = gen.gen_sparse_signal(Phi.shape[1], args.K, args.distribution, args.gamma,
                                  derive_seed(args.seed, "signal"))
    y = Phi[:, truth.support] @ truth.values
    noise = np.zeros(Phi.shape[0])
    if args.snr:
        noise = gen.gen_noise(Phi.shape[0], derive_seed(args.seed, "noise"), snr=args.snr,
                              clean_norm=float(np.linalg.norm(y)))
    elif args.sigma:
        noise = gen.gen_noise(Phi.shape[0], derive_seed(args.seed, "noise"), sigma=args.sigma)
    return truth, y, noise


def _signal_args(p):
    p.add_argument("-K", type=int, required=True)
    p.add_argument("-N", type=int, default=1)
    p.add_argument("--distribution", default="RademacherPM1",
                   choices=[d.value for d in gen.SignalDistribution])
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=0.0, help="noise standard deviation")
    p.add_argument("--snr", type=float, default=0.0, help="target ||Phi x|| / ||n||")


def cmd_solve(args, out):
    Phi = _load_matrix(args)
    if args.measurements:
        y = read_matrix(args.measurements).ravel()
        truth = None
    else:
        truth, clean, noise = _instance(args, Phi)
        y = clean + noise
    cfg = PursuitConfig(n_atoms=args.N)
    solver = omp_solve if args.N == 1 and args.omp else gomp_solve
    res = solver(Phi, y, args.K, cfg, truth=truth)
    rows = [{
        "iteration": rec.k,
        "selected": rec.selected,
        "support": rec.support,
        "residual_norm": rec.residual_norm,
        "correct_count": rec.correct_count,
    } for rec in res.trace.records]
    rows.append({
        "iteration": "final",
        "selected": None,
        "support": res.final_support,
        "residual_norm": res.residual_norm,
        "correct_count": None if truth is None else int(np.isin(truth.support, res.final_support).sum()),
        "halt_reason": res.halt_reason.value,
        "values": res.estimate.values,
    })
    _emit(rows, args.format, out)
    return EXIT_OK


def cmd_rip(args, out):
    Phi = _load_matrix(args)
    rows = []
    for order in args.order:
        if args.trials:
            est = monte_carlo_rip(Phi, order, args.trials, args.seed)
        else:
            est = exact_rip(Phi, order)
        rows.append({"order": est.order, "delta": est.delta, "method": est.method.value,
                     "supports_evaluated": est.supports_evaluated, "seed": est.seed,
                     "worst_support": list(est.worst_support)})
    _emit(rows, args.format, out)
    return EXIT_OK


def _parse_deltas(items):
    out = {}
    for item in items or ():
        try:
            k, v = item.split("=")
            out[int(k)] = float(v)
        except ValueError:
            raise UsageError(f"--delta expects ORDER=VALUE, got {item!r}") from None
    return out


def cmd_bounds(args, out):
    N, K = args.N, args.K
    row = {"N": N, "K": K, "T1": bounds.theorem1_bound(N, K), "T2": bounds.theorem2_bound(N, K)}
    d = _parse_deltas(args.delta)
    get = d.get
    for name, fn, key in (("C_K1", bounds.c_k1, N * K), ("C_K1_appendix", bounds.c_k1_appendix, N * K),
                          ("C_K2", bounds.c_k2, N * K + 1)):
        if all(o in d for o in (key, K, N, N * K + K)):
            try:
                row[name] = fn(get(key), get(K), get(N), get(N * K + K), N, K)
            except GompLabError as exc:
                row[name] = f"undefined: {exc}"
    if all(o in d for o in (N * K, K, N)):
        try:
            row["C_K3"] = bounds.c_k3(get(N * K), get(K), get(N), args.gamma, N, K)
        except GompLabError as exc:
            row["C_K3"] = f"undefined: {exc}"
    _emit([row], args.format, out)
    return EXIT_OK


def cmd_certify(args, out):
    Phi = _load_matrix(args)
    N, K = args.N, args.K
    orders = sorted(o for o in {N, K, N * K, N * K + 1, N * K + K} if o <= min(Phi.shape))
    rips = [exact_rip(Phi, o) for o in orders]
    reports = bounds.recovery_certificate(rips, N, K)
    try:
        reports += bounds.noise_certificate(rips, N, K, gamma=args.gamma)
    except GompLabError as exc:
        print(f"noise certificates unavailable: {exc}", file=sys.stderr)
    rows = [{"theorem": r.theorem.value, "order": r.required_delta_order, "bound": r.bound_value,
             "delta": r.measured_delta, "satisfied": r.satisfied, "constant": r.constant,
             "method": r.method, "note": r.note} for r in reports]
    _emit(rows, args.format, out)
    return EXIT_OK


def cmd_audit(args, out):
    Phi = _load_matrix(args)
    N, K = args.N, args.K
    deltas = audit_deltas(Phi, N * K + K + N)
    failures = 0
    rows = []
    for t in range(args.trials):
        seed = derive_seed(args.seed, "audit-trial", t)
        sub = argparse.Namespace(**{**vars(args), "seed": seed})
        truth, y, noise = _instance(sub, Phi)
        res = gomp_solve(Phi, y + noise, K, PursuitConfig(n_atoms=N), truth=truth)
        if np.any(noise):
            reports = audit_noisy_run(Phi, truth, noise, res, deltas, N, args.gamma, str(t))
        else:
            reports = audit_noiseless_run(Phi, truth, res, deltas, N, seed=seed, instance_id=str(t))
        for rep in reports:
            for c in rep.checks:
                failures += not c.passed
                if args.all or not c.passed:
                    rows.append({"trial": t, "iteration": rep.iteration, "check": c.name,
                                 "status": c.status, "lhs": c.lhs, "rhs": c.rhs,
                                 "margin": c.margin, "note": c.note})
    rows.append({"trial": "total", "check": "failures", "status": "fail" if failures else "pass",
                 "lhs": float(failures)})
    _emit(rows, args.format, out)
    return EXIT_VIOLATION if failures else EXIT_OK


def cmd_experiment(args, out):
    config = ExperimentConfig.from_json(args.config)
    overrides = {}
    if args.seed_given:
        overrides["seed"] = args.seed
    if args.output:
        overrides["output_path"] = args.output
    if overrides:
        config = config.with_overrides(**overrides)
    res = run_experiment(config, threads=thread_cap(args.threads))
    s = res.summary
    if args.format == "json":
        out.write(json.dumps(s, indent=2, sort_keys=True) + "\n")
    else:
        _emit([{k: v for k, v in c.items() if not isinstance(v, list)} for c in s["cells"]],
              "csv", out)
    print(f"wrote {res.csv_path} and {res.summary_path}", file=sys.stderr)
    gated = config.kind in (ExperimentKind.AUDIT_CORPUS, ExperimentKind.CERTIFIED_RECOVERY,
                            ExperimentKind.NOISE_BOUND, ExperimentKind.SNR_THRESHOLD)
    if gated and (s["audit_failures"] or s["bound_violations"]):
        return EXIT_VIOLATION
    return EXIT_OK


def _global_flags(default):
    g = _Parser(add_help=False)
    g.add_argument("--seed", type=int, default=default(None), help="64-bit seed (default 0)")
    g.add_argument("--output", default=default(None), help="write results here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default=default("csv"))
    return g


def build_parser():
    # flags may come before or after the verb; the verb's copy must not
    # overwrite a value given before it, hence SUPPRESS there
    common = _global_flags(lambda v: argparse.SUPPRESS)
    p = _Parser(prog="gomp-lab", description="OMP/gOMP solvers, RIP constants, recovery bounds "
                "and inequality audits.",
                parents=[_global_flags(lambda v: v)])
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="run OMP/gOMP on one instance")
    _matrix_args(s)
    _signal_args(s)
    s.add_argument("--measurements", help="measurement vector as an 'm 1' matrix file")
    s.add_argument("--omp", action="store_true", help="use the single-atom solver (N=1)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("rip", parents=[common], help="exact or sampled RIP constants")
    _matrix_args(s)
    s.add_argument("--order", type=int, nargs="+", required=True)
    s.add_argument("--trials", type=int, default=0, help="sample this many supports instead")
    s.set_defaults(func=cmd_rip)

    s = sub.add_parser("bounds", parents=[common], help="thresholds and noise constants")
    s.add_argument("-N", type=int, required=True)
    s.add_argument("-K", type=int, required=True)
    s.add_argument("--gamma", type=float, default=2.0)
    s.add_argument("--delta", action="append", metavar="ORDER=VALUE",
                   help="RIP constant of ORDER (repeatable)")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("certify", parents=[common], help="certificates from exact constants")
    _matrix_args(s)
    s.add_argument("-N", type=int, required=True)
    s.add_argument("-K", type=int, required=True)
    s.add_argument("--gamma", type=float, default=2.0)
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("experiment", parents=[common], help="run a JSON experiment config")
    s.add_argument("config")
    s.add_argument("--threads", type=int, default=None)
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("audit", parents=[common], help="audit seeded runs on one matrix")
    _matrix_args(s)
    _signal_args(s)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("--all", action="store_true", help="list passing checks too")
    s.set_defaults(func=cmd_audit)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.seed_given = args.seed is not None
        if args.seed is None:
            args.seed = 0
        if args.verb == "experiment":
            return args.func(args, sys.stdout)
        buf = io.StringIO()
        code = args.func(args, buf)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return code
    except UsageError as exc:
        print(f"gomp-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GompLabError, ValueError, OSError) as exc:
        print(f"gomp-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
