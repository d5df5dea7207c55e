"""Command-line front end.

Configuration is a plain-text file of ``section.key = value`` lines; a
bundled scenario can be named instead of a path.  Values given with
``--set`` and the shortcut flags override the file.

Exit codes: 0 when every check passes, 1 on a violated check, 2 on a usage
or configuration error.
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import classical as C
from . import harnack as H
from . import params as P
from . import phi as F
from . import solver as S
from . import waves as W
from .errors import HarnackError
from .field import TorusGrid
from .parallel import ordered_map

SCENARIO_DIR = Path(__file__).with_name("scenarios")

DEFAULTS = {
    "params.n": "1",
    "params.c": "1",
    "params.alpha": "0.25",
    "params.beta": "-1",
    "grid.dim": "1",
    "grid.points": "512",
    "grid.length": "16",
    "solver.t_end": "5",
    "solver.t_start": "0.05",
    "solver.samples": "100",
    "solver.safety": "0.5",
    "init.kind": "smooth_random",
    "init.band": "4",
    "init.floor": "0.05",
    "init.width": "1",
    "init.height": "0.9",
    "init.value": "0.5",
    "check.estimate": "compact",
    "check.format": "text",
    "classical.pairs": "50",
    "classical.t_min": "0.5",
    "classical.t_max": "5",
    "classical.rel_tol": "1e-3",
    "waves.tol": "1e-3",
    "waves.t": "50",
    "waves.v_max": "1e-4",
    "waves.eps3": "1e-3",
    "waves.alpha": "1e-4",
    "cutoff.R": "1,2,10",
    "cutoff.radii": "1000",
    "cutoff.dims": "1,2,3",
    "converge.resolutions": "64,128,256",
    "converge.time": "1",
    "converge.tau": "1e-3",
    "converge.min_order": "1.9",
    "sweep.alpha_points": "50",
    "sweep.beta_points": "50",
    "sweep.alpha_min": "0",
    "sweep.alpha_max": "1",
    "sweep.beta_min": "-3",
    "sweep.beta_max": "0",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: Path | None = None

    def raw(self, key: str) -> str:
        try:
            return self.values[key]
        except KeyError:
            raise UsageError(f"missing configuration key {key!r}") from None

    def get_float(self, key: str) -> float:
        try:
            return float(self.raw(key))
        except ValueError:
            raise UsageError(f"{key} must be a number, got {self.raw(key)!r}") from None

    def get_int(self, key: str) -> int:
        try:
            return int(self.raw(key))
        except ValueError:
            raise UsageError(f"{key} must be an integer, got {self.raw(key)!r}") from None

    def get_floats(self, key: str) -> list:
        try:
            return [float(v) for v in self.raw(key).split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"{key} must be a comma-separated list of numbers") from None

    def params(self) -> P.ParamSet:
        try:
            return P.ParamSet(
                self.get_int("params.n"),
                self.get_float("params.c"),
                self.get_float("params.alpha"),
                self.get_float("params.beta"),
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    def manifest(self, command: str) -> str:
        lines = [f"command = {command}", f"seed = {self.seed}"]
        lines += [f"{k} = {v}" for k, v in sorted(self.values.items())]
        return "\n".join(lines) + "\n"


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or "." not in key or not value.strip():
            raise UsageError(f"{origin}:{lineno}: expected 'section.key = value'")
        out[key] = value.strip()
    return out


def resolve_config_path(name: str) -> Path:
    path = Path(name)
    if path.is_file():
        return path
    bundled = SCENARIO_DIR / f"{name}.cfg"
    if bundled.is_file():
        return bundled
    raise UsageError(f"no config file or bundled scenario named {name!r}")


def bundled_scenarios() -> list:
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.cfg"))


def build_config(args) -> RunConfig:
    values = dict(DEFAULTS)
    if args.config:
        path = resolve_config_path(args.config)
        values.update(parse_config_text(path.read_text(), str(path)))
    for item in args.set or []:
        values.update(parse_config_text(item, "--set"))
    for flag, key in (("n", "params.n"), ("c", "params.c"), ("alpha", "params.alpha"), ("beta", "params.beta")):
        v = getattr(args, flag, None)
        if v is not None:
            values[key] = str(v)
    seed = args.seed if args.seed is not None else int(values.get("run.seed", "0"))
    values["run.seed"] = str(seed)
    out = Path(args.out) if args.out else None
    return RunConfig(values, seed, out)


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


class Output:
    """Collects named artifacts; writes them under ``--out`` or streams the main one to stdout."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        if cfg.output_dir is not None:
            cfg.output_dir.mkdir(parents=True, exist_ok=True)
            (cfg.output_dir / "manifest.txt").write_text(cfg.manifest(command), newline="\n")
        else:
            sys.stderr.write(cfg.manifest(command))

    def emit(self, name: str, text: str, echo: bool = True) -> None:
        if self.cfg.output_dir is not None:
            (self.cfg.output_dir / name).write_text(text, newline="\n")
        if echo or self.cfg.output_dir is None:
            sys.stdout.write(text)


# scenario assembly


def make_grid(cfg: RunConfig, points: int | None = None) -> TorusGrid:
    dim = cfg.get_int("grid.dim")
    m = cfg.get_int("grid.points") if points is None else points
    try:
        return TorusGrid.uniform(dim, m, cfg.get_float("grid.length"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def make_init_kind(cfg: RunConfig):
    kind = cfg.raw("init.kind")
    if kind == "smooth_random":
        return S.SmoothRandom(cfg.seed, cfg.get_int("init.band"), cfg.get_float("init.floor"))
    if kind == "bump":
        center = tuple(cfg.get_floats("init.center")) if "init.center" in cfg.values else ()
        return S.Bump(center, cfg.get_float("init.width"), cfg.get_float("init.floor"), cfg.get_float("init.height"))
    if kind == "constant":
        return S.Constant(cfg.get_float("init.value"))
    raise UsageError(f"init.kind must be smooth_random, bump or constant, got {kind!r}")


def sample_times(cfg: RunConfig) -> np.ndarray:
    t0, t1 = cfg.get_float("solver.t_start"), cfg.get_float("solver.t_end")
    count = cfg.get_int("solver.samples")
    if not 0 < t0 <= t1 or count < 1:
        raise UsageError("need 0 < solver.t_start <= solver.t_end and solver.samples >= 1")
    return np.linspace(t0, t1, count)


def run_simulation(cfg: RunConfig, p: P.ParamSet, times, points: int | None = None) -> S.Trajectory:
    grid = make_grid(cfg, points)
    f0 = S.make_initial(grid, make_init_kind(cfg))
    return S.simulate(f0, p, float(max(times)), times, safety=cfg.get_float("solver.safety"))


def harnack_profile(cfg: RunConfig, p: P.ParamSet) -> F.PhiProfile:
    est = cfg.raw("check.estimate")
    if est == "compact":
        return F.compact_profile(p, limit=True)
    if est == "noncompact":
        return F.noncompact_profile(p, limit=True)
    raise UsageError(f"check.estimate must be compact or noncompact, got {est!r}")


# commands


def cmd_feasible(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    compact = P.validate_compact(p)
    nonc = P.validate_noncompact(p)
    lines = [compact.summary()]
    lines += [f"  margin_{k}={fmt(v)}" for k, v in compact.margins.items()]
    lines.append(f"noncompact: {nonc.summary()}")
    lines += [f"  margin_{k}={fmt(v)}" for k, v in nonc.margins.items()]
    if 0 < p.alpha < 1:
        rng = P.classical_beta_range(p.n, p.c, p.alpha)
        lines.append("classical_beta_range=" + ("empty" if rng is None else f"[{fmt(rng[0])}, {fmt(rng[1])}]"))
    out.emit("feasible.txt", "\n".join(lines) + "\n")
    return 0


def sweep_rows(n: int, c: float, alphas, betas) -> list:
    def row(ab):
        a, b = ab
        v = P.validate_compact(P.ParamSet(n, c, a, b))
        label = v.regime.value if v.feasible else "infeasible"
        return (a, b, label, v.margins["ii"], v.margins["iii"])

    return ordered_map(row, [(a, b) for a in alphas for b in betas])


def _open_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return lo + (hi - lo) * np.arange(1, count + 1) / (count + 1)


def cmd_sweep(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    na, nb = cfg.get_int("sweep.alpha_points"), cfg.get_int("sweep.beta_points")
    if na < 1 or nb < 1:
        raise UsageError("sweep sizes must be positive")
    alphas = _open_grid(cfg.get_float("sweep.alpha_min"), cfg.get_float("sweep.alpha_max"), na)
    betas = _open_grid(cfg.get_float("sweep.beta_min"), cfg.get_float("sweep.beta_max"), nb)
    rows = sweep_rows(p.n, p.c, alphas, betas)
    out.emit("sweep.csv", csv_text(["alpha", "beta", "regime", "margin_ii", "margin_iii"], rows))
    return 0


def cmd_simulate(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    times = sample_times(cfg)
    traj = run_simulation(cfg, p, times)
    if cfg.output_dir is not None:
        traj.save(cfg.output_dir / "trajectory")
    rows = [(t, float(s.values.min()), float(s.values.max()), float(s.values.mean())) for t, s in zip(traj.times, traj.snapshots)]
    out.emit("simulate.csv", csv_text(["t", "min_f", "max_f", "mean_f"], rows))
    return 0


def verify_phi(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    ts = np.logspace(-4, 2, 200) / p.c
    lines, ok = [], True

    def record(name, value, passed):
        nonlocal ok
        ok = ok and passed
        lines.append(f"check={name} value={fmt(value)} pass={'yes' if passed else 'no'}")

    profiles = []
    if P.validate_compact(p).feasible:
        profiles += [F.compact_profile(p), F.compact_profile(p, limit=True)]
    if P.validate_noncompact(p).feasible:
        profiles += [F.noncompact_profile(p), F.noncompact_profile(p, limit=True)]
    if not profiles:
        raise UsageError(f"{p} is feasible for neither estimate")
    for prof in profiles:
        tag = prof.family.value
        vals = F.evaluate(prof, ts)
        if prof.family in F.COMPACT_FAMILIES:
            record(f"{tag}.positivity_min", float(vals.min()), bool(np.all(vals > 0)))
        blow = F.evaluate(prof, 1e-8 / p.c)
        record(f"{tag}.blowup_at_1e-8", blow, blow > 1e6)
        if prof.family in (F.Family.COMPACT_III, F.Family.NONCOMPACT_EPSILON, F.Family.COMPACT_IV):
            tt = ts[ts > prof.T2] if prof.family is F.Family.COMPACT_IV else ts
            phi_v = F.evaluate(prof, tt)
            res = np.abs(F.riccati_residual(prof, tt)) / (1.0 + phi_v**2)
            record(f"{tag}.riccati_residual_scaled", float(res.max()), bool(np.all(res <= 1e-10)))
            w = prof.omega
            unshifted = F.riccati_residual(prof, tt, shifted=False)
            expect = (2.0 * prof.eps * w - prof.eps**2) * phi_v**2
            rel = np.abs(unshifted - expect) / np.maximum(np.abs(expect), 1e-300)
            record(f"{tag}.unshifted_identity_rel", float(rel.max()), bool(np.all(rel <= 1e-10)))
        if prof.family in (F.Family.COMPACT_IV, F.Family.COMPACT_LIMIT_IV):
            gap = F.continuity_gap_at_T2(prof)
            scale = abs(F.switch_value(p))
            record(f"{tag}.continuity_gap_rel", gap / scale, gap <= 1e-12 * scale)
        late = F.evaluate(prof, 100.0 / p.c)
        lim = F.long_time_limit(prof)
        record(f"{tag}.distance_to_limit_at_100", abs(late - lim), abs(late - lim) <= 1e-3 * max(1.0, abs(lim)))
        if prof.family is F.Family.NONCOMPACT_LIMIT:
            lines.append(f"note={F.NONCOMPACT_DENOMINATOR_NOTE}")
    lines.append(f"overall_pass={'yes' if ok else 'no'}")
    out.emit("phi.txt", "\n".join(lines) + "\n")
    return 0 if ok else 1


def verify_harnack(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    profile = harnack_profile(cfg, p)
    traj = run_simulation(cfg, p, sample_times(cfg))
    report = H.check_trajectory(traj, profile)
    rows = [(s.t, s.min_h, s.tol, "yes" if s.passed else "no") for s in report.samples]
    out.emit("harnack.csv", csv_text(["t", "min_h", "tol", "pass"], rows), echo=False)
    if cfg.raw("check.format") == "jsonl":
        out.emit("harnack.jsonl", report.to_jsonl())
    else:
        out.emit("harnack.txt", report.to_text())
    return 0 if report.overall_pass else 1


def verify_classical(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    t_lo, t_hi = cfg.get_float("classical.t_min"), cfg.get_float("classical.t_max")
    times = np.linspace(t_lo, t_hi, cfg.get_int("solver.samples"))
    pair_file = cfg.values.get("classical.pair_file")
    grid = make_grid(cfg)
    if pair_file:
        pairs = C.parse_pairs(Path(pair_file).read_text(), grid.n)
        times = np.array(sorted({t for pr in pairs for t in (pr[1], pr[3])}))
    traj = run_simulation(cfg, p, times)
    if not pair_file:
        pairs = C.random_pairs(grid, traj.times, cfg.get_int("classical.pairs"), cfg.seed, 10 * traj.dt_used)
    rel = cfg.get_float("classical.rel_tol")
    checks = C.verify_pairs(traj, p, pairs, tol_policy=lambda rhs: rel * rhs)
    ok = all(r.passed for r in checks)
    text = "\n".join(r.to_line() for r in checks)
    text += f"\nsummary: pairs={len(checks)} overall_pass={'yes' if ok else 'no'}\n"
    rows = [(r.t1, r.t2, r.distance, r.lhs, r.rhs, r.margin, "yes" if r.passed else "no") for r in checks]
    out.emit("classical.csv", csv_text(["t1", "t2", "d", "lhs", "rhs", "margin", "pass"], rows), echo=False)
    out.emit("classical.txt", text)
    return 0 if ok else 1


def verify_waves(cfg: RunConfig, out: Output) -> int:
    p0 = cfg.params()
    n, c = p0.n, p0.c
    tol = cfg.get_float("waves.tol")
    rc = math.sqrt(c)
    lines = ["eta,classification"]
    for eta, shape in W.scan_speeds(c, [f * rc for f in (0.5, 1.0, 1.5, 1.9, 2.0, 2.5, 3.0)], tol):
        lines.append(f"{fmt(eta)},{shape.value}")
    rep = W.verify_speed_bound(n, c, tol)
    lines.append(rep.to_text().rstrip("\n"))
    # bound chain along the small-alpha family, nudged inside the strict noncompact conditions
    alpha = cfg.get_float("waves.alpha")
    beta = W.boundary_beta(n, c, alpha) * (1.0 + 1e-8)
    p = P.ParamSet(n, c, alpha, beta)
    front = W.shoot_profile(rep.eta_min if rep.searched else 2.0 * rc, c, tol=tol)
    t = cfg.get_float("waves.t") / c
    wit = W.find_witness(p, front, t, cfg.get_float("waves.v_max"), cfg.get_float("waves.eps3"))
    m2_exact = W.m_double_prime(P.ParamSet(n, c, alpha, W.boundary_beta(n, c, alpha)))
    lines.append(f"chain_alpha={fmt(alpha)} chain_beta={fmt(beta)}")
    ok = rep.passed
    if wit is None:
        lines.append("witness=none")
        ok = False
    else:
        eta2 = front.eta**2
        lines.append(f"witness_z={fmt(wit.z)} witness_v={fmt(wit.v)} t={fmt(wit.t)}")
        lines.append(f"M_prime={fmt(wit.M_prime)} M_double_prime={fmt(wit.M_double_prime)} M_triple_prime={fmt(wit.M_triple_prime)}")
        lines.append(f"margin_eta2_minus_M_prime={fmt(eta2 - wit.M_prime)}")
        lines.append(f"margin_M_prime_minus_M_double_prime={fmt(wit.gap)}")
        ok = ok and eta2 >= wit.M_prime
    lines.append(f"gap_M_double_prime_to_M_triple_prime={fmt(abs(m2_exact - rep.bound))}")
    lines.append(f"overall_pass={'yes' if ok else 'no'}")
    out.emit("waves.txt", "\n".join(lines) + "\n")
    return 0 if ok else 1


def verify_cutoff(cfg: RunConfig, out: Output) -> int:
    count = cfg.get_int("cutoff.radii")
    lines, ok = [], True
    for n in (int(v) for v in cfg.get_floats("cutoff.dims")):
        for R in cfg.get_floats("cutoff.R"):
            radii = np.linspace(0.0, R, count, endpoint=False)
            rep = H.cutoff_check(n, R, 1.0, radii)
            ok = ok and rep.passed
            lines.append(rep.to_text().rstrip("\n").replace("\n", " "))
    lines.append(f"overall_pass={'yes' if ok else 'no'}")
    out.emit("cutoff.txt", "\n".join(lines) + "\n")
    return 0 if ok else 1


def verify_identity(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    t, tau = cfg.get_float("converge.time"), cfg.get_float("converge.tau")
    traj = run_simulation(cfg, p, [t - tau, t, t + tau])
    res = H.evolution_identity_residual(traj, harnack_profile(cfg, p), t)
    dx = max(traj.grid.spacing)
    worst = float(res.values.max())
    tol = H.TOLERANCE_CONSTANT * (dx * dx + tau * tau) * max(1.0, abs(p.beta))
    ok = worst <= tol
    text = f"time={fmt(t)} dx={fmt(dx)} tau={fmt(tau)} max_residual={fmt(worst)} tol={fmt(tol)} pass={'yes' if ok else 'no'}\n"
    out.emit("identity.txt", text)
    return 0 if ok else 1


VERIFIERS = {
    "phi": verify_phi,
    "harnack": verify_harnack,
    "classical": verify_classical,
    "waves": verify_waves,
    "cutoff": verify_cutoff,
    "identity": verify_identity,
}


def cmd_converge(cfg: RunConfig, out: Output) -> int:
    p = cfg.params()
    res = [int(v) for v in cfg.get_floats("converge.resolutions")]
    if len(res) < 3:
        raise UsageError("converge needs at least 3 resolutions")
    if len(set(res)) != len(res):
        raise UsageError("converge resolutions must be distinct")
    res.sort()
    kind = make_init_kind(cfg)
    study = H.refinement_study(
        p,
        harnack_profile(cfg, p),
        lambda m: S.make_initial(make_grid(cfg, m), kind),
        res,
        sample_times(cfg),
        identity_time=cfg.get_float("converge.time"),
        tau=cfg.get_float("converge.tau"),
        safety=cfg.get_float("solver.safety"),
    )
    rows = [(r.dx, r.dt, r.max_identity_residual, r.min_h_negative_part) for r in study.rows]
    text = csv_text(["dx", "dt", "max_identity_residual", "min_h_negative_part"], rows)
    text += f"# order_identity={fmt(study.identity_order)}\n"
    text += f"# order_min_h_negative_part={fmt(study.negative_part_order)}\n"
    text += f"# order_h_refinement={fmt(study.h_order)}\n"
    out.emit("converge.csv", text)
    ok = study.identity_order >= cfg.get_float("converge.min_order")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file path or bundled scenario name")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one config value")
    common.add_argument("--out", help="directory for reports, CSV files and the manifest")
    common.add_argument("--seed", type=int, help="seed for random initial data and pairs")
    common.add_argument("--n", type=int, help="shortcut for params.n")
    common.add_argument("--c", type=float, help="shortcut for params.c")
    common.add_argument("--alpha", type=float, help="shortcut for params.alpha")
    common.add_argument("--beta", type=float, help="shortcut for params.beta")

    parser = argparse.ArgumentParser(prog="fisher-harnack", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("feasible", parents=[common], help="feasibility verdict and margins")
    sub.add_parser("sweep", parents=[common], help="CSV feasibility map over (alpha, beta)")
    sub.add_parser("simulate", parents=[common], help="integrate and archive a trajectory")
    v = sub.add_parser("verify", parents=[common], help="run one verification pipeline")
    v.add_argument("target", choices=sorted(VERIFIERS))
    sub.add_parser("converge", parents=[common], help="refinement study with fitted orders")
    sub.add_parser("scenarios", help="list bundled scenario names")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "scenarios":
        print("\n".join(bundled_scenarios()))
        return 0
    try:
        cfg = build_config(args)
        label = f"verify {args.target}" if args.command == "verify" else args.command
        out = Output(cfg, label)
        if args.command == "verify":
            return VERIFIERS[args.target](cfg, out)
        handler = {"feasible": cmd_feasible, "sweep": cmd_sweep, "simulate": cmd_simulate, "converge": cmd_converge}
        return handler[args.command](cfg, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HarnackError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, ValueError) else 1


if __name__ == "__main__":
    sys.exit(main())
