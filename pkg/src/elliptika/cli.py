"""elliptika command line: reproduce named cases, profiles, scans, checks and searches.

Exit codes: 0 pass (scans and searches always exit 0 once they run),
1 a reproduction or check failed, 2 usage error, 3 numeric or domain failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import counterexample_factory as cf
from . import energy_models as em
from . import strain_measures as sm
from . import tensor_core as tc
from .convexity_lab import (
    RankOneProbe,
    SearchConfig,
    baker_ericksen_check,
    concave_critical_point,
    convexify_1d_check,
    criterion_2d,
    lh_scan,
    line_profile,
    monotonicity_necessity_check,
    search_violation,
    sendova_walton_check,
)
from .convexity_lab.reports import jsonable
from .errors import ElliptikaError, InvalidInputError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
REPRO_REL_TOL = 1e-4
VOLISO_ALPHAS = (0.0, np.pi / 6, np.pi / 3, np.pi / 2)


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int | None
    tolerances: dict
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    argv: list = field(default_factory=list)

    def to_dict(self):
        return jsonable(asdict(self))

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"


def _fmt(x) -> str:
    return format(float(x), ".17g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


# --------------------------------------------------------------------------
# spec parsing


_NUM = re.compile(r"^([+-]?)e(\^)?([+-]?[0-9.]+)$")


def parse_number(tok: str) -> float:
    """Decimal literal, or `e20` / `-e2.5` meaning a power of e."""
    tok = tok.strip()
    m = _NUM.match(tok)
    try:
        if m:
            v = float(np.exp(float(m.group(3))))
            return -v if m.group(1) == "-" else v
        return float(tok)
    except ValueError:
        raise UsageError(f"bad number {tok!r}") from None


def parse_F(spec: str, dim: int | None = None) -> np.ndarray:
    """`id`, `diag:a,b,c` or `rows:a,b;c,d`."""
    s = spec.strip()
    if s == "id":
        return np.eye(dim or 3)
    kind, _, body = s.partition(":")
    if kind == "diag" and body:
        F = np.diag([parse_number(t) for t in body.split(",")])
    elif kind == "rows" and body:
        rows = [[parse_number(t) for t in r.split(",")] for r in body.split(";")]
        if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
            raise UsageError("rows: spec must be square")
        F = np.array(rows)
    else:
        raise UsageError(f"bad F spec {spec!r}")
    if dim is not None and F.shape[0] != dim:
        raise UsageError(f"F is {F.shape[0]}x{F.shape[0]} but the energy is {dim}-dimensional")
    return F


ENERGIES = ("hencky", "exp-hencky-2d", "exp-hencky-3d", "ihat", "quadratic", "constant", "log-ctc",
            *sm.MEASURES)


def build_energy(name, args, dim=None):
    """Energy from a family name and the --mu/--kappa/--k/--khat/--part flags; returns (energy, dim)."""
    mu, kappa, k, khat = args.mu, args.kappa, args.k, args.khat
    if name.startswith("exp-hencky"):
        d = {"exp-hencky-2d": 2, "exp-hencky-3d": 3}.get(name)
        if d is None:
            raise UsageError(f"unknown energy {name!r}")
        E = em.exp_hencky_energy(mu, kappa, k, khat, d)
        part = getattr(args, "part", "full")
        return (E if part == "full" else E.components[part]), d
    if name == "hencky":
        d = dim or 3
        return em.hencky_energy(mu, kappa, d), d
    if name == "ihat":
        return em.ihat_energy(), 3
    if name == "quadratic":
        return em.QUADRATIC_ENERGY, dim
    if name == "constant":
        return em.compose(em.constant_profile(1.0), sm.OMEGA_LOG), dim
    if name == "log-ctc":
        # ||log F^T F||^2 = 4 ||log U||^2
        return em.compose(em.linear_profile(4.0), sm.OMEGA_LOG), dim
    if name in sm.MEASURES:
        return sm.MEASURES[name], dim
    raise UsageError(f"unknown energy {name!r}; choose from {', '.join(ENERGIES)}")


PROFILE_NAMES = ("exp", "exp8", "identity", "quadratic", "linear", "constant", "neg", "sin")


def build_profile(name, args):
    if name == "exp":
        return em.exponential_profile(args.mu, args.k)
    if name == "neg":
        return em.linear_profile(-1.0)
    if name in ("quadratic", "linear", "constant"):
        return em.PROFILES[name](args.a)
    if name in em.PROFILES:
        return em.PROFILES[name]()
    raise UsageError(f"unknown profile {name!r}; choose from {', '.join(PROFILE_NAMES)}")


def parse_grid(spec):
    if spec is None:
        return None
    try:
        lo, hi, n = spec.split(":")
        n = int(n)
    except ValueError:
        raise UsageError("grid spec is lo:hi:n") from None
    if n < 2:
        raise UsageError("grid needs at least 2 points")
    return np.linspace(parse_number(lo), parse_number(hi), n)


def resolve_seed(args, default):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ELLIPTIKA_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError("ELLIPTIKA_SEED must be an integer") from None
    return default


# --------------------------------------------------------------------------
# commands; each returns (payload, exit code, csv header, csv rows)


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a)


def cmd_reproduce(args):
    if args.case not in cf.CASES:
        raise UsageError(f"unknown case {args.case!r}; choose from {', '.join(cf.CASES)}")
    case = cf.CASES[args.case]()
    v = concave_critical_point(case.measure, case.probe)
    rel_tol = args.tol if args.tol is not None else REPRO_REL_TOL
    first_ok = abs(v.first) <= max(1e-8, v.tol_grad)
    rel = _rel(v.second, case.expected_second)
    second_ok = rel <= rel_tol
    rows = [("first", case.expected_first, v.first, abs(v.first - case.expected_first), first_ok),
            ("second", case.expected_second, v.second, rel, second_ok)]
    extra = {}
    if case.eigenvalue_oracle is not None:
        _, h2 = cf.oracle_line_derivatives(case, 0.0)
        extra["oracle_second"] = float(h2)
        extra["oracle_rel_error"] = _rel(float(h2), case.expected_second)
    if args.case == "voliso3d":
        seconds = []
        for a in VOLISO_ALPHAS:
            c = cf.case_voliso_3d(a)
            seconds.append(concave_critical_point(c.measure, c.probe).second)
        spread = (max(seconds) - min(seconds)) / abs(np.mean(seconds))
        F, xi, eta = case.probe.F, case.probe.xi, case.probe.eta
        m = tc.inv_transpose(F) @ eta
        w = tc.deviatoric(tc.log_stretch(F)) @ xi
        orth = [abs(w @ m) / (np.linalg.norm(w) * np.linalg.norm(m)), abs(xi @ m) / np.linalg.norm(m)]
        spread_ok = spread <= 1e-6
        orth_ok = max(orth) <= 1e-10
        rows.append(("alpha_spread", 0.0, spread, spread, spread_ok))
        rows.append(("orthogonality", 0.0, max(orth), max(orth), orth_ok))
        extra.update(alphas=list(VOLISO_ALPHAS), alpha_seconds=seconds)
    passed = all(r[4] for r in rows)
    payload = {
        "case": case.identifier,
        "passed": passed,
        "relative_tolerance": rel_tol,
        "quantities": {r[0]: {"expected": r[1], "computed": r[2], "error": r[3], "pass": r[4]} for r in rows},
        "is_counterexample": v.is_counterexample,
        "note": case.note,
        **extra,
    }
    return payload, (EXIT_OK if passed else EXIT_FAIL), ["quantity", "expected", "computed", "error", "pass"], rows


def _load_probe(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
        return RankOneProbe.from_dict(d), d
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read probe file: {exc}") from None


def cmd_profile(args):
    if args.n < 3:
        raise UsageError("profile needs n >= 3")
    if (args.case is None) == (args.probe_file is None):
        raise UsageError("give either a case id or --probe-file")
    if args.case is not None:
        if args.case not in cf.CASES:
            raise UsageError(f"unknown case {args.case!r}")
        case = cf.CASES[args.case]()
        probe, E = case.probe, case.measure
    else:
        probe, d = _load_probe(args.probe_file)
        E = sm.MEASURES.get(d.get("measure", "omega-log"))
        if E is None:
            raise UsageError(f"unknown measure {d.get('measure')!r}")
    if args.energy is not None:
        E, _ = build_energy(args.energy, args, probe.dim)
    t0 = probe.t_interval[0] if args.t_min is None else args.t_min
    t1 = probe.t_interval[1] if args.t_max is None else args.t_max
    if not t0 < t1:
        raise UsageError("need t-min < t-max")
    t = np.linspace(t0, t1, args.n)
    p = line_profile(E, probe, t_interval=(t0, t1), n_samples=args.n) if t0 <= 0 <= t1 else None
    if p is None:
        # interval does not contain 0: sample directly
        F_t = probe.at(t)
        d = tc.det(F_t)
        if np.any(d <= 0):
            from .errors import IntervalError
            raise IntervalError(f"det(F + t xi(x)eta) <= 0 at t = {t[np.argmax(d <= 0)]:.17g}")
        h = np.asarray(E(F_t) if callable(E) else E.value(F_t), float)
    else:
        t, h = p.t, p.h
    rows = list(zip(t.tolist(), h.tolist()))
    payload = {"t": t, "h": h, "argmax": float(t[int(np.argmax(h))]), "probe": probe.to_dict()}
    return payload, EXIT_OK, ["t", "h"], rows


def _random_F(rng, n):
    G = rng.normal(size=(n, n)) + 1.5 * np.eye(n)
    if np.linalg.det(G) < 0:
        G[:, 0] *= -1
    return G


def cmd_scan(args):
    seed = resolve_seed(args, 0)
    if args.random_F is not None and args.F is not None:
        raise UsageError("give --F or --random-F, not both")
    dim = args.dim
    if args.F is not None:
        F0 = parse_F(args.F, dim)
        dim = F0.shape[0]
    E, edim = build_energy(args.energy, args, dim)
    dim = edim or dim or 3
    if args.random_F is not None:
        rng = np.random.default_rng(seed)
        Fs = [_random_F(rng, dim) for _ in range(args.random_F)]
    else:
        Fs = [parse_F(args.F or "id", dim)]
    tol = args.tol if args.tol is not None else 1e-8
    reports = [lh_scan(E, F, args.directions, refine=args.refine, seed=seed + i, tol=tol, workers=args.workers,
                       n_critical=args.critical) for i, F in enumerate(Fs)]
    worst = min(range(len(reports)), key=lambda i: (reports[i].satisfied, reports[i].verdict.worst_value))
    r = reports[worst]
    mins = [rep.details.get("min_second", np.nan) for rep in reports]
    payload = {
        "energy": args.energy,
        "seed": seed,
        "n_F": len(Fs),
        "violation_found": not all(rep.satisfied for rep in reports),
        "min_second": float(np.nanmin(mins)),
        "worst_F": Fs[worst],
        "report": r.to_dict(),
    }
    rows = [(i, rep.verdict.worst_value, rep.satisfied) for i, rep in enumerate(reports)]
    return payload, EXIT_OK, ["F_index", "worst_second", "satisfied"], rows


def cmd_check(args):
    psi = build_profile(args.profile, args)
    grid = parse_grid(args.grid)
    tol = args.tol
    kw = {} if tol is None else {"tol": tol}
    if args.check == "criterion2d":
        rep = criterion_2d(psi, grid, **kw)
    elif args.check == "sw":
        rep = sendova_walton_check(psi, grid, **kw)
    elif args.check == "conv1d":
        rep = convexify_1d_check(psi, grid, **kw)
    elif args.check == "mono":
        rep = monotonicity_necessity_check(psi, grid, **kw)
    elif args.check == "be":
        omega = sm.MEASURES.get(args.measure)
        if omega is None:
            raise UsageError(f"unknown measure {args.measure!r}")
        rep = baker_ericksen_check(em.compose(psi, omega), n_samples=args.samples, seed=resolve_seed(args, 0),
                                   dim=args.dim or 3, **kw)
    else:
        raise UsageError(f"unknown check {args.check!r}")
    payload = {"check": args.check, "profile": psi.name, "passed": rep.satisfied, "report": rep.to_dict()}
    rows = [(k, v.worst_value, str(v.worst_location), v.satisfied) for k, v in rep.verdicts.items()]
    return payload, (EXIT_OK if rep.satisfied else EXIT_FAIL), ["verdict", "worst_value", "where", "satisfied"], rows


def cmd_search(args):
    seed = resolve_seed(args, 7)
    E, edim = build_energy(args.measure, args, args.dim)
    dim = edim or args.dim
    cfg = SearchConfig(maxfev=args.maxfev, workers=args.workers)
    res = search_violation(E, dim, n_seeds=args.seeds, seed=seed, config=cfg)
    payload = {"measure": args.measure, "dim": dim, "result": res.to_dict()}
    rows = [("first", res.first), ("second", res.second), ("certified", res.certified),
            ("seed_index", res.seed_index)]
    return payload, EXIT_OK, ["quantity", "value"], rows


COMMANDS = {"reproduce": cmd_reproduce, "profile": cmd_profile, "scan": cmd_scan, "check": cmd_check,
            "search": cmd_search}


# --------------------------------------------------------------------------
# parser


def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="random seed (falls back to ELLIPTIKA_SEED)")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output")
    fmt.add_argument("--csv", action="store_true", help="CSV output")
    p.add_argument("--tol", type=float, default=None, help="override the command's tolerance")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--manifest", default=None, help="also write the run manifest to this path")
    return p


def _energy_params(p):
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--k", type=float, default=0.25)
    p.add_argument("--khat", type=float, default=0.125)
    p.add_argument("--a", type=float, default=1.0, help="coefficient for quadratic/linear/constant profiles")


def build_parser():
    common = _common()
    ap = argparse.ArgumentParser(prog="elliptika", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reproduce", parents=[common], help="recompute a named concave critical point")
    p.add_argument("case", help="|".join(cf.CASES))

    p = sub.add_parser("profile", parents=[common], help="sample h(t) = W(F + t xi(x)eta)")
    p.add_argument("case", nargs="?", default=None)
    p.add_argument("--probe-file", default=None, help="JSON with F, xi, eta[, t_interval, measure]")
    p.add_argument("--energy", default=None, help="evaluate this energy instead of the case measure")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("-n", type=int, default=101)
    _energy_params(p)

    p = sub.add_parser("scan", parents=[common], help="sampled Legendre-Hadamard scan")
    p.add_argument("energy", help="|".join(ENERGIES))
    p.add_argument("--F", default=None, help="id | diag:1,e20,e15 | rows:a,b;c,d")
    p.add_argument("--random-F", type=int, default=None, metavar="N")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--directions", type=int, default=2000)
    p.add_argument("--critical", type=int, default=200, help="extra directions from the orthogonal constructions")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--part", choices=("full", "iso", "vol"), default="full",
                   help="exp-hencky component to scan")
    _energy_params(p)

    p = sub.add_parser("check", parents=[common], help="scalar inequality on a profile")
    p.add_argument("check", choices=("criterion2d", "sw", "be", "conv1d", "mono"))
    p.add_argument("profile", help="|".join(PROFILE_NAMES))
    p.add_argument("--grid", default=None, help="lo:hi:n")
    p.add_argument("--measure", default="omega-log", help="measure composed with the profile for be")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--dim", type=int, default=None)
    _energy_params(p)

    p = sub.add_parser("search", parents=[common], help="search for a concave critical point")
    p.add_argument("measure", help="|".join(ENERGIES))
    p.add_argument("--dim", type=int, default=2, choices=(2, 3))
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--maxfev", type=int, default=600)
    _energy_params(p)

    p = sub.add_parser("replay", help="re-run a saved manifest")
    p.add_argument("manifest_file")
    p.add_argument("--out", default=None)
    return ap


def _emit(text, out):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _text_report(payload):
    lines = []
    for k in sorted(payload):
        v = payload[k]
        if isinstance(v, dict):
            lines.append(f"{k}:")
            for kk in sorted(v):
                lines.append(f"  {kk}: {jsonable(v[kk])}")
        elif isinstance(v, (list, np.ndarray)) and len(v) > 8:
            lines.append(f"{k}: [{len(v)} values]")
        else:
            lines.append(f"{k}: {jsonable(v)}")
    return "\n".join(lines) + "\n"


def _manifest(args, argv):
    params = {k: v for k, v in vars(args).items() if k not in ("json", "csv", "out", "manifest", "command")}
    tols = {"tol": args.tol}
    if args.command == "reproduce":
        tols.update(relative=args.tol or REPRO_REL_TOL, first_absolute=1e-8)
    seed = None
    if args.command in ("scan", "search") or (args.command == "check" and args.check == "be"):
        seed = resolve_seed(args, 7 if args.command == "search" else 0)
    # replayable argv: no output paths, and the resolved seed pinned
    clean, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a in ("--out", "--manifest"):
            skip = True
        elif not a.startswith(("--out=", "--manifest=")):
            clean.append(a)
    if seed is not None and args.seed is None:
        clean += ["--seed", str(seed)]
    return RunManifest(args.command, params, seed, tols, argv=clean)


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        try:
            with open(args.manifest_file) as fh:
                m = RunManifest.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            print(f"error: cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_USAGE
        replay_argv = [a for a in m.argv]
        if args.out:
            replay_argv += ["--out", args.out]
        return run(replay_argv)
    try:
        payload, code, header, rows = COMMANDS[args.command](args)
    except (UsageError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ElliptikaError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = _manifest(args, argv)
    if args.manifest:
        _emit(dump_json(manifest.to_dict()), args.manifest)
    if args.json:
        text = dump_json({**payload, "manifest": manifest.to_dict()})
    elif args.csv:
        text = csv_text(header, rows)
    else:
        text = _text_report(payload)
        if args.command in ("reproduce", "check"):
            text += ("PASS" if code == EXIT_OK else "FAIL") + "\n"
    _emit(text, args.out)
    return code


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
