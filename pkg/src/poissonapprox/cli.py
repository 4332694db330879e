"""Command-line front end.

Every command prints one envelope ``{command, inputs, results,
artifact_version}`` as JSON (default) or CSV. Exit status: 0 on success, 1
when a certification finds violations, 2 on usage or precondition errors.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bounds import bound_reports
from .discrete_dist import (
    BinomialParams,
    PoissonParams,
    binom_log_pmf,
    binom_tails,
    poisson_log_pmf,
    poisson_tails,
)
from .distances import distance_report
from .exceptions import CertificationError, HypothesisError, InfeasibleDesign
from .hypo_tests import TestDesign, design, p_value_right, power_curve
from .lambda_opt import summary
from .monotonicity import (
    certify_mlr_failure,
    certify_sequence,
    certify_stochastic_order,
    certify_theorem1,
    corollary1_sequence,
    corollary2_sequence,
    theorem2_sequence,
)

THREADS_ENV = "POISSON_APPROX_THREADS"


def _clean(obj):
    # JSON has no inf/nan; numpy scalars become plain Python numbers
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


@dataclass
class OutputEnvelope:
    command: str
    inputs: dict
    results: object
    artifact_version: str = __version__

    def to_dict(self):
        return _clean({
            "artifact_version": self.artifact_version,
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
        })

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(data["command"], data["inputs"], data["results"], data["artifact_version"])

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        results = self.to_dict()["results"]
        if isinstance(results, list) and results and isinstance(results[0], dict):
            header = list(results[0].keys())
            writer.writerow(header)
            for row in results:
                writer.writerow([_cell(row.get(h)) for h in header])
        else:
            writer.writerow(["key", "value"])
            for key, value in _flatten(results):
                writer.writerow([key, _cell(value)])
        return buf.getvalue()


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _threads(args):
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def cmd_dist(args):
    if args.family == "binom":
        if args.n is None or args.p is None:
            raise ValueError("binom needs --n and --p")
        params = BinomialParams(args.n, args.p)
        upper, _ = binom_tails(params.n, params.p, args.k)
        _, cdf = binom_tails(params.n, params.p, args.k + 1)
        log_pmf = binom_log_pmf(params.n, params.p, args.k)
    else:
        if args.lam is None:
            raise ValueError("poisson needs --lambda")
        params = PoissonParams(args.lam)
        upper, _ = poisson_tails(params.lam, args.k)
        _, cdf = poisson_tails(params.lam, args.k + 1)
        log_pmf = poisson_log_pmf(params.lam, args.k)
    results = {"log_pmf": log_pmf, "pmf": math.exp(log_pmf), "cdf": cdf, "sf": upper}
    return {"family": args.family, "n": args.n, "p": args.p, "lambda": args.lam, "k": args.k}, results, 0


def cmd_distance(args):
    report = distance_report(args.n, args.p, args.lam)
    return {"n": args.n, "p": args.p, "lambda": args.lam}, report.as_dict(), 0


def cmd_optimal_lambda(args):
    return {"p": args.p}, summary(args.p), 0


def cmd_bounds(args):
    reports = bound_reports(args.n, args.p, lam=args.lam, m=args.m)
    rows = [r.as_dict() for r in reports]
    code = 0 if all(r.certified for r in reports) else 1
    return {"n": args.n, "p": args.p, "lambda": args.lam, "m": args.m}, rows, code


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValueError(f"--claim {args.claim} needs " + ", ".join("--" + m.replace("_", "-") for m in missing))


def cmd_verify(args):
    claim = args.claim
    inputs = {"claim": claim, "seed": args.seed}
    if claim in ("T1i", "T1ii"):
        report = certify_theorem1("i" if claim == "T1i" else "ii", samples=args.samples,
                                  seed=args.seed, n_max=args.n_max, workers=_threads(args))
        inputs.update(samples=args.samples, n_max=args.n_max)
    elif claim == "C1":
        _need(args, "lam", "m")
        report = certify_sequence(corollary1_sequence(args.lam, args.m, args.n_max))
        inputs.update({"lambda": args.lam, "m": args.m, "n_max": args.n_max})
    elif claim == "C2":
        _need(args, "lam", "m1", "m2")
        report = certify_sequence(corollary2_sequence(args.lam, args.m1, args.m2, args.n_max))
        inputs.update({"lambda": args.lam, "m1": args.m1, "m2": args.m2, "n_max": args.n_max})
    elif claim == "T2":
        _need(args, "lam", "m")
        report = certify_sequence(theorem2_sequence(args.lam, args.m, args.n_max))
        inputs.update({"lambda": args.lam, "m": args.m, "n_max": args.n_max})
    elif claim == "SM":
        _need(args, "lam")
        report = certify_stochastic_order(args.lam, args.n_max)
        inputs.update({"lambda": args.lam, "n_max": args.n_max})
    else:
        if (args.c is None) != (args.a is None):
            raise ValueError("--c and --a go together")
        pairs = ((args.c, args.a),) if args.c is not None else ((1.0, 0.2), (2.0, 0.3), (0.5, 0.1))
        report = certify_mlr_failure(pairs, n_start=args.n_start)
        inputs.update(pairs=[list(p) for p in pairs], n_start=args.n_start)
    return inputs, report.as_dict(), 0 if report.certified else 1


def cmd_test_design(args):
    direction = args.direction.replace("-", "_")
    d = design(direction, args.n, args.p0, args.alpha)
    return {"direction": direction, "n": args.n, "p0": args.p0, "alpha": args.alpha}, d.as_dict(), 0


def cmd_p_value(args):
    pv = p_value_right(args.n, args.p0, args.x)
    return {"n": args.n, "p0": args.p0, "x": args.x}, pv._asdict(), 0


def _load_design(text):
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    data = json.loads(text)
    # accept a full envelope as printed by test-design
    if "results" in data and "direction" not in data:
        data = data["results"]
    return TestDesign.from_dict(data)


def cmd_power(args):
    d = _load_design(args.design)
    if not 0 < args.p_min < args.p_max < 1 or args.steps < 2:
        raise ValueError("need 0 < p-min < p-max < 1 and steps >= 2")
    grid = np.linspace(args.p_min, args.p_max, args.steps)
    power = power_curve(d, grid)
    rows = [{"p": float(p), "power": float(v)} for p, v in zip(grid, power)]
    inputs = {"design": d.as_dict(), "p_min": args.p_min, "p_max": args.p_max, "steps": args.steps}
    return inputs, rows, 0


def build_parser():
    parser = argparse.ArgumentParser(prog="poissonapprox", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, default_format="json"):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--format", choices=("json", "csv"), default=default_format)
        p.set_defaults(func=func)
        return p

    p = add("dist", cmd_dist, "mass, cdf and survival at one point")
    p.add_argument("--family", choices=("binom", "poisson"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--k", type=int, required=True)

    p = add("distance", cmd_distance, "total-variation and Kolmogorov distance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)

    p = add("optimal-lambda", cmd_optimal_lambda, "best Poisson rate for a Bernoulli law")
    p.add_argument("--p", type=float, required=True)

    p = add("bounds", cmd_bounds, "explicit bounds against exact values")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=int, help="tail event {X >= m} for the envelope")

    p = add("verify", cmd_verify, "certify a monotonicity claim")
    p.add_argument("--claim", choices=("T1i", "T1ii", "C1", "C2", "T2", "SM", "MLR"), required=True)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--m1", type=int)
    p.add_argument("--m2", type=int)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--seed", type=int, default=20190501)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--c", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--n-start", type=int, default=1)
    p.add_argument("--threads", type=int)

    p = add("test-design", cmd_test_design, "conservative test with a Poisson level")
    p.add_argument("--direction", choices=("right", "left", "two-sided"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)

    p = add("p-value", cmd_p_value, "conservative right-tail p-value")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--x", type=int, required=True)

    p = add("power", cmd_power, "rejection probability over a p grid", default_format="csv")
    p.add_argument("--design", required=True, help="design JSON, or a file holding it")
    p.add_argument("--p-min", type=float, default=0.01)
    p.add_argument("--p-max", type=float, default=0.99)
    p.add_argument("--steps", type=int, default=99)
    return parser


def run(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        inputs, results, code = args.func(args)
    except (ValueError, HypothesisError, InfeasibleDesign, CertificationError, LookupError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    envelope = OutputEnvelope(args.command, inputs, results)
    stdout.write(envelope.to_csv() if args.format == "csv" else envelope.to_json() + "\n")
    return code


def main():
    sys.exit(run())
