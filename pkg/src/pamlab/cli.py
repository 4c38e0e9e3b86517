"""Batch front door: config parsing, orchestration, CSV emission, selfcheck.

Subcommands: sweep, solve, correlate, conditions, selfcheck. Options come
from flags or a plain-text key=value config file (flags override the file);
the fully resolved configuration, master seed included, is echoed into every
output CSV as '#' header comments, so any emitted number is reproducible
from its file alone. Exit codes: 0 ok, 1 config error, 2 simulation
failure, 3 selfcheck failure.
"""

from __future__ import annotations

import argparse
import io
import math
import sys

import numpy as np

from . import _csv
from .environment import (
    EnvKind, env_evolve, env_init, env_integral, load_trajectory,
    save_trajectory,
)
from .lattice import (
    Field, Params, Torus, green_function_origin, heat_kernel,
    laplacian_apply,
)
from .lyapunov import kappa_sweep
from .rng import RngStream
from .solver import (
    InitialCondition, SolverError, log_partition_function, solve_direct,
    solve_feynman_kac,
)
from .stats import (
    correlation_empirical_many, correlation_exact, noisiness_e1,
    noisiness_e2_e4, noisiness_e2_oracle, poisson_rate,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SIMULATION = 2
EXIT_SELFCHECK = 3

# Desk-scale defaults: each command finishes in minutes on one core.
DESK_L = {1: 32, 2: 8, 3: 6}
DEFAULT_RHO = {"ISRW": 1.0, "SEP": 0.5, "SVM": 0.5, "CONSTANT": 1.0}


class ConfigError(ValueError):
    pass


def _parse_kind(text):
    try:
        return EnvKind(text.upper())
    except ValueError:
        raise ConfigError(f"unknown dynamics kind {text!r}") from None


def _parse_floats(text):
    return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]


def _parse_ints(text):
    return [int(tok) for tok in str(text).split(",") if tok.strip() != ""]


def _parse_sites(text, torus):
    out = []
    for tok in str(text).split(","):
        tok = tok.strip()
        if tok == "":
            continue
        out.append(torus.unit_neighbor if tok == "e" else int(tok))
    return out


_COMMON_OPTIONS = {
    "kind": (str, "ISRW", "dynamics kind: ISRW, SEP, SVM or CONSTANT"),
    "d": (int, 1, "torus dimension"),
    "L": (int, None, "torus side (default: desk-scale by d)"),
    "gamma": (float, 1.0, "coupling constant"),
    "rho": (float, None, "catalyst density (default by kind)"),
    "master_seed": (int, 20260810, "experiment master seed"),
    "output": (str, None, "output CSV path (default: <command>.csv)"),
    "workers": (int, 1, "concurrency budget; outputs independent of it"),
}

_COMMAND_OPTIONS = {
    "sweep": {
        "kappa_grid": (str, "0.5,2,8", "comma list of kappa values"),
        "t_end": (float, 100.0, "horizon per environment"),
        "n_env": (int, 8, "environments per cell"),
        "p_list": (str, "", "comma list of moment orders (may be empty)"),
        "n_env_annealed": (int, 200, "environments per annealed cell"),
    },
    "solve": {
        "kappa": (float, 0.5, "diffusion constant"),
        "t_end": (float, 2.0, "horizon"),
        "n_paths": (int, 100000, "Monte Carlo paths"),
        "u0": (str, "delta", "initial condition: delta or flat"),
        "save_trajectory": (str, "", "optional path for the binary record"),
        "load_trajectory": (str, "", "re-solve a stored trajectory"),
    },
    "correlate": {
        "t_list": (str, "0.5,1,2", "comma list of lag times"),
        "x_list": (str, "0,e", "comma list of sites (ints or 'e')"),
        "n_env": (int, 10000, "replica environments"),
    },
    "conditions": {
        "t_list": (str, "25,100,400", "comma list of horizons T"),
        "n_env": (int, 400, "replica environments"),
    },
    "selfcheck": {},
}


def _read_config_file(path):
    values = {}
    try:
        with open(path) as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(
                        f"{path}:{ln}: expected 'key = value', got {raw!r}"
                    )
                key, val = (part.strip() for part in line.split("=", 1))
                values[key] = val
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return values


def _resolve(command, args):
    """Merge defaults < config file < flags into one plain dict."""
    spec = dict(_COMMON_OPTIONS)
    spec.update(_COMMAND_OPTIONS[command])
    resolved = {name: default for name, (_, default, _) in spec.items()}
    file_values = _read_config_file(args.config) if args.config else {}
    for key, val in file_values.items():
        if key == "command":
            continue
        if key not in spec:
            raise ConfigError(f"unknown config key {key!r} for {command}")
        caster = spec[key][0]
        try:
            resolved[key] = caster(val)
        except ValueError:
            raise ConfigError(
                f"config key {key}={val!r} is not a valid {caster.__name__}"
            ) from None
    for key in spec:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = flag_val
    resolved["command"] = command
    _validate(command, resolved)
    return resolved


def _validate(command, cfg):
    kind = _parse_kind(cfg["kind"])
    cfg["kind"] = kind.value
    if cfg["d"] < 1:
        raise ConfigError(f"d must be >= 1, got {cfg['d']}")
    if cfg["L"] is None:
        cfg["L"] = DESK_L.get(cfg["d"], 6)
    if cfg["L"] < 4:
        raise ConfigError(f"L must be >= 4, got {cfg['L']}")
    if cfg["rho"] is None:
        cfg["rho"] = DEFAULT_RHO[kind.value]
    if cfg["output"] is None:
        cfg["output"] = f"{command}.csv"
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if not cfg["gamma"] > 0:
        raise ConfigError(f"gamma must be > 0, got {cfg['gamma']}")
    if kind == EnvKind.ISRW and not cfg["rho"] > 0:
        raise ConfigError(f"ISRW requires rho > 0, got {cfg['rho']}")
    if kind in (EnvKind.SEP, EnvKind.SVM) and not 0 < cfg["rho"] < 1:
        raise ConfigError(
            f"{kind.value} requires 0 < rho < 1, got {cfg['rho']}"
        )
    if "t_end" in cfg and not cfg["t_end"] > 0:
        raise ConfigError(f"t_end must be > 0, got {cfg['t_end']}")
    if "n_env" in cfg and cfg["n_env"] < 1:
        raise ConfigError("n_env must be >= 1")
    if "n_paths" in cfg and cfg["n_paths"] < 1:
        raise ConfigError("n_paths must be >= 1")
    if command == "sweep":
        grid = _parse_floats(cfg["kappa_grid"])
        if not grid or sorted(grid) != grid:
            raise ConfigError("kappa_grid must be nonempty and sorted")
        if any(k < 0 for k in grid):
            raise ConfigError("kappa values must be >= 0")
        p_list = _parse_ints(cfg["p_list"])
        if any(p not in (1, 2) for p in p_list):
            raise ConfigError("p_list entries must be 1 or 2")
        if p_list and cfg["n_env_annealed"] < 100:
            raise ConfigError("n_env_annealed must be >= 100 when p_list set")
        if cfg["n_env"] < 4:
            raise ConfigError("n_env must be >= 4 for sweeps")
        if cfg["t_end"] < 10:
            raise ConfigError("t_end must be >= 10 for sweeps")
    if command == "solve":
        if cfg["kappa"] < 0:
            raise ConfigError(f"kappa must be >= 0, got {cfg['kappa']}")
        if cfg["u0"] not in ("delta", "flat"):
            raise ConfigError(f"u0 must be 'delta' or 'flat', got {cfg['u0']}")
    if command == "correlate":
        if kind not in (EnvKind.ISRW, EnvKind.SEP):
            raise ConfigError(
                "correlate needs an exact formula: kind must be ISRW or SEP"
            )
        if cfg["n_env"] < 1000:
            raise ConfigError("correlate needs n_env >= 1000")
    if command == "conditions":
        if kind not in (EnvKind.ISRW, EnvKind.SEP):
            raise ConfigError("conditions: kind must be ISRW or SEP")


def _comments(cfg):
    # workers is an execution detail, not part of the experiment: outputs
    # are contractually independent of it, including byte-for-byte.
    out = {"command": cfg["command"]}
    for key in sorted(k for k in cfg if k not in ("command", "workers")):
        out[key] = cfg[key]
    return out


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_sweep(cfg):
    kind = EnvKind(cfg["kind"])
    torus = Torus(cfg["d"], cfg["L"])
    params = Params(0.0, cfg["gamma"], cfg["rho"])
    result = kappa_sweep(
        kind, params, torus, _parse_floats(cfg["kappa_grid"]),
        cfg["t_end"], _parse_ints(cfg["p_list"]), cfg["n_env"],
        RngStream(cfg["master_seed"]), workers=cfg["workers"],
        n_env_annealed=cfg["n_env_annealed"],
    )
    comments = _comments(cfg)
    for (kappa, p), msg in sorted(result.failures.items()):
        comments[f"failure_kappa_{kappa}_p_{p}"] = msg
    _csv.write_csv(
        cfg["output"], comments,
        ("kappa", "p", "t", "lambda_hat", "std_error", "replicas",
         "heavy_tail_flag"),
        result.rows(),
    )
    print(f"sweep: wrote {cfg['output']}")
    return EXIT_OK


def _cmd_solve(cfg):
    kind = EnvKind(cfg["kind"])
    torus = Torus(cfg["d"], cfg["L"])
    params = Params(cfg["kappa"], cfg["gamma"], cfg["rho"])
    stream = RngStream(cfg["master_seed"])
    if cfg["load_trajectory"]:
        traj = load_trajectory(cfg["load_trajectory"])
        if traj.t_end < cfg["t_end"]:
            raise ConfigError(
                f"stored trajectory ends at {traj.t_end} < t_end"
            )
    else:
        state = env_init(kind, torus, cfg["rho"], stream.child(0))
        traj = env_evolve(kind, state, cfg["t_end"], stream.child(1))
    if cfg["save_trajectory"]:
        save_trajectory(traj, cfg["save_trajectory"])
    u0 = InitialCondition(cfg["u0"])
    report = solve_direct(traj, params, u0, cfg["t_end"])
    fk = solve_feynman_kac(
        traj, params, u0, cfg["t_end"], cfg["n_paths"], stream.child(2),
        workers=cfg["workers"],
    )
    direct_u = math.exp(report.log_u0)
    z = (
        (fk.mean - direct_u) / fk.std_error
        if fk.std_error and fk.std_error > 0 else 0.0
    )
    comments = _comments(cfg)
    comments.update(
        fk_mean=fk.mean, fk_std_error=fk.std_error, fk_log_mean=fk.log_mean,
        fk_accepted=fk.n_accepted, fk_degenerate=fk.degenerate,
        direct_u0=direct_u, equivalence_z=z,
        max_step_error_estimate=report.max_step_error_estimate,
    )
    _csv.write_csv(
        cfg["output"], comments,
        ("seed", "kind", "d", "L", "kappa", "gamma", "rho", "t_end",
         "log_u0", "step_count"),
        [report.csv_row(cfg["master_seed"], kind.value, torus.d, torus.L,
                        params.kappa, params.gamma, params.rho,
                        cfg["t_end"])],
    )
    print(
        f"solve: direct log u(0,t)={report.log_u0:.10g}  "
        f"fk mean={fk.mean:.10g} se={fk.std_error:.4g} |z|={abs(z):.3f}"
    )
    if kind == EnvKind.CONSTANT:
        closed = (
            params.gamma * cfg["rho"] * cfg["t_end"]
            + math.log(heat_kernel(torus, params.kappa,
                                   cfg["t_end"]).values[0])
        )
        print(f"solve: constant-environment closed form log u = {closed:.10g}")
    print(f"solve: wrote {cfg['output']}")
    return EXIT_OK


def _cmd_correlate(cfg):
    kind = EnvKind(cfg["kind"])
    torus = Torus(cfg["d"], cfg["L"])
    rho = cfg["rho"]
    cells = [
        (x, t)
        for x in _parse_sites(cfg["x_list"], torus)
        for t in _parse_floats(cfg["t_list"])
    ]
    estimates = correlation_empirical_many(
        kind, cells, rho, torus, cfg["n_env"],
        RngStream(cfg["master_seed"]), workers=cfg["workers"],
    )
    rows = []
    for (x, t) in cells:
        est = estimates[(x, t)]
        exact = correlation_exact(kind, x, t, rho, torus)
        z = (est.mean - exact) / est.std_error if est.std_error > 0 else 0.0
        rows.append((
            f"corr_{kind.value}_x{x}_t{t:g}", kind.value, torus.d, torus.L,
            rho, x, t, est.n, est.mean, est.std_error, exact, z,
        ))
    _csv.write_csv(
        cfg["output"], _comments(cfg),
        ("check_name", "kind", "d", "L", "rho", "x", "t", "n_env",
         "empirical", "std_error", "exact", "z_score"),
        rows,
    )
    worst = max(abs(r[-1]) for r in rows)
    print(f"correlate: {len(rows)} cells, worst |z| = {worst:.3f}")
    print(f"correlate: wrote {cfg['output']}")
    return EXIT_OK


def _cmd_conditions(cfg):
    kind = EnvKind(cfg["kind"])
    torus = Torus(cfg["d"], cfg["L"])
    rho = cfg["rho"]
    stream = RngStream(cfg["master_seed"])
    rows = []
    for j, T in enumerate(_parse_floats(cfg["t_list"])):
        e1 = noisiness_e1(
            kind, rho, torus, T, cfg["n_env"], stream.child(2 * j),
            workers=cfg["workers"],
        )
        e2, e4 = noisiness_e2_e4(
            kind, rho, torus, T, cfg["n_env"], stream.child(2 * j + 1),
            workers=cfg["workers"],
        )
        oracle = noisiness_e2_oracle(kind, rho, torus, T)
        z = (e2.mean - oracle) / e2.std_error if e2.std_error > 0 else 0.0
        rows.append(("E1", kind.value, torus.d, torus.L, rho, T, e1.n,
                     e1.mean, e1.std_error, "", ""))
        rows.append(("E2", kind.value, torus.d, torus.L, rho, T, e2.n,
                     e2.mean, e2.std_error, oracle, z))
        rows.append(("E4bar", kind.value, torus.d, torus.L, rho, T, e4.n,
                     e4.mean, e4.std_error, "", ""))
    _csv.write_csv(
        cfg["output"], _comments(cfg),
        ("check_name", "kind", "d", "L", "rho", "T", "n_env",
         "empirical", "std_error", "exact", "z_score"),
        rows,
    )
    print(f"conditions: wrote {cfg['output']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Selfcheck: the in-package oracle suite.
# ---------------------------------------------------------------------------


def _selfcheck_suite(master_seed):
    checks = []

    def check(suite, name):
        def deco(fn):
            checks.append((suite, name, fn))
            return fn
        return deco

    seed = RngStream(master_seed)

    @check("lattice", "laplacian_constant_field")
    def _():
        torus = Torus(2, 8)
        v = laplacian_apply(Field(torus, np.full(torus.sites, 3.7)), 1.0)
        ok = np.all(v.values == 0.0)
        return ok, "laplacian of constant field is exactly zero"

    @check("lattice", "laplacian_point_source")
    def _():
        torus = Torus(1, 4)
        u = np.zeros(4)
        u[0] = 1.0
        v = laplacian_apply(Field(torus, u), 1.0).values
        ok = np.allclose(v, [-2.0, 1.0, 0.0, 1.0], atol=0)
        return ok, f"point source image {v.tolist()}"

    @check("lattice", "laplacian_conservation")
    def _():
        torus = Torus(2, 8)
        u = seed.child(1).generator.normal(size=torus.sites)
        v = laplacian_apply(Field(torus, u), 0.7).values
        rel = abs(v.sum()) / np.abs(v).sum()
        return rel < 1e-12, f"relative mass residual {rel:.2e}"

    @check("lattice", "heat_kernel_mass_symmetry")
    def _():
        worst = 0.0
        for d, L in ((1, 8), (2, 6)):
            torus = Torus(d, L)
            for t in (0.3, 1.0, 4.0):
                p = heat_kernel(torus, 0.5, t).values
                worst = max(worst, abs(p.sum() - 1.0))
                coords = torus.site_coords(np.arange(torus.sites))
                mirrored = torus.site_index((-coords) % L)
                worst = max(worst, float(np.abs(p - p[mirrored]).max()))
        return worst < 1e-10, f"worst mass/symmetry residual {worst:.2e}"

    @check("lattice", "heat_kernel_vs_matrix_exponential")
    def _():
        import scipy.linalg

        torus = Torus(1, 8)
        kappa, t = 0.5, 1.0
        p = heat_kernel(torus, kappa, t).values
        nbr = torus.neighbor_table()
        gen = np.zeros((8, 8))
        for x in range(8):
            for y in nbr[x]:
                gen[y, x] += kappa
            gen[x, x] -= 2 * kappa
        q = scipy.linalg.expm(gen * t)[:, 0]
        err = float(np.abs(p - q).max())
        return err < 1e-8, f"max entry error vs expm {err:.2e}"

    @check("lattice", "heat_kernel_semigroup")
    def _():
        torus = Torus(1, 8)
        ps = heat_kernel(torus, 0.7, 0.6).values
        pt = heat_kernel(torus, 0.7, 1.1).values
        pst = heat_kernel(torus, 0.7, 1.7).values
        conv = np.real(np.fft.ifft(np.fft.fft(ps) * np.fft.fft(pt)))
        err = float(np.abs(conv - pst).max())
        return err < 1e-8, f"semigroup residual {err:.2e}"

    @check("lattice", "green_function_report")
    def _():
        g3a = green_function_origin(3, 100.0, Torus(3, 24))
        g3b = green_function_origin(3, 200.0, Torus(3, 24))
        g4 = green_function_origin(4, 100.0, Torus(4, 10))
        ok = g3a.value < g3b.value and g4.value < g3a.value
        return ok, (
            f"g3({g3a.t_cut:g})={g3a.value:.4f} < g3({g3b.t_cut:g})="
            f"{g3b.value:.4f}, g4={g4.value:.4f}"
        )

    @check("environment", "trajectory_determinism")
    def _():
        runs = []
        for _rep in range(2):
            s = RngStream(master_seed, 7)
            state = env_init(EnvKind.ISRW, Torus(1, 16), 1.0, s.child(0))
            traj = env_evolve(EnvKind.ISRW, state, 2.0, s.child(1))
            runs.append(traj)
        a, b = runs
        ok = (
            np.array_equal(a.times, b.times)
            and np.array_equal(a.payload_a, b.payload_a)
            and np.array_equal(a.payload_b, b.payload_b)
            and np.array_equal(a.final_state().occupation,
                               b.final_state().occupation)
        )
        return ok, f"{a.n_events} events bit-identical across reruns"

    @check("environment", "sep_conservation")
    def _():
        s = seed.child(2)
        state = env_init(EnvKind.SEP, Torus(1, 32), 0.5, s.child(0))
        n0 = state.particle_count()
        traj = env_evolve(EnvKind.SEP, state, 5.0, s.child(1))
        counts = [traj.state_at(t).sum() for t in (0.0, 1.3, 2.9, 5.0)]
        counts.append(traj.final_state().particle_count())
        ok = all(c == n0 for c in counts)
        return ok, f"particle count {n0:g} conserved exactly"

    @check("environment", "svm_consensus_absorbing")
    def _():
        torus = Torus(1, 16)
        state = env_init(EnvKind.CONSTANT, torus, 1.0, seed.child(3))
        state.occupation = np.ones(torus.sites, dtype=np.int64)
        traj = env_evolve(EnvKind.SVM, state, 10.0, seed.child(4))
        final = traj.final_state().occupation
        ok = np.all(final == 1) and traj._changes()[1].size == 0
        return ok, "all-ones voter configuration is absorbing"

    @check("environment", "isrw_event_rate")
    def _():
        torus = Torus(1, 16)
        counts = []
        for i in range(200):
            s = seed.child(5).child(i)
            state = env_init(EnvKind.ISRW, torus, 1.0, s.child(0))
            traj = env_evolve(EnvKind.ISRW, state, 1.0, s.child(1))
            counts.append(traj.n_events)
        mean = float(np.mean(counts))
        se = float(np.std(counts, ddof=1) / math.sqrt(len(counts)))
        ok = abs(mean - 16.0) <= 3 * se
        return ok, f"mean events {mean:.2f} vs 16 (se {se:.2f})"

    @check("environment", "binary_roundtrip")
    def _():
        s = seed.child(6)
        state = env_init(EnvKind.SEP, Torus(2, 6), 0.5, s.child(0))
        traj = env_evolve(EnvKind.SEP, state, 2.0, s.child(1))
        buf = io.BytesIO()
        save_trajectory(traj, buf)
        buf.seek(0)
        back = load_trajectory(buf)
        ok = (
            np.array_equal(traj.times, back.times)
            and np.array_equal(traj.payload_a, back.payload_a)
            and np.array_equal(traj.initial.occupation,
                               back.initial.occupation)
            and traj.kind == back.kind
        )
        return ok, f"{traj.n_events} events round-trip bit-identically"

    @check("solver", "constant_env_closed_forms")
    def _():
        torus = Torus(1, 8)
        c, gamma, t = 1.5, 0.8, 2.0
        state = env_init(EnvKind.CONSTANT, torus, c, seed.child(7))
        traj = env_evolve(EnvKind.CONSTANT, state, t, seed.child(8))
        r0 = solve_direct(traj, Params(0.0, gamma, c),
                          InitialCondition.DELTA, t)
        err0 = abs(r0.log_u0 - gamma * c * t)
        kappa = 0.7
        r1 = solve_direct(traj, Params(kappa, gamma, c),
                          InitialCondition.DELTA, t)
        u = r1.final.values * math.exp(r1.final.log_norm - gamma * c * t)
        p = heat_kernel(torus, kappa, t).values
        err1 = float(np.abs(u / p - 1.0).max())
        ok = err0 < 1e-8 and err1 < 1e-6
        return ok, f"kappa=0 err {err0:.2e}; kernel-factor rel err {err1:.2e}"

    @check("solver", "frozen_walk_integral_identity")
    def _():
        torus = Torus(1, 16)
        s = seed.child(9)
        state = env_init(EnvKind.ISRW, torus, 1.0, s.child(0))
        traj = env_evolve(EnvKind.ISRW, state, 3.0, s.child(1))
        gamma = 1.3
        r = solve_direct(traj, Params(0.0, gamma, 1.0),
                         InitialCondition.DELTA, 3.0)
        want = gamma * (env_integral(traj, 0, 3.0, 1.0) + 1.0 * 3.0)
        err = abs(r.log_u0 - want)
        return err < 1e-10, f"|log u - gamma*integral| = {err:.2e}"

    @check("solver", "feynman_kac_vs_direct")
    def _():
        torus = Torus(1, 8)
        s = seed.child(10)
        params = Params(0.5, 1.0, 1.0)
        state = env_init(EnvKind.ISRW, torus, 1.0, s.child(0))
        traj = env_evolve(EnvKind.ISRW, state, 1.5, s.child(1))
        direct = solve_direct(traj, params, InitialCondition.DELTA, 1.5)
        fk = solve_feynman_kac(traj, params, InitialCondition.DELTA, 1.5,
                               20000, s.child(2))
        gap = abs(fk.mean - math.exp(direct.log_u0))
        tol = 3 * fk.std_error + 1e-9 * math.exp(direct.log_u0)
        return gap <= tol, f"|fk - direct| = {gap:.3g} vs 3se = {tol:.3g}"

    @check("solver", "superadditivity_samples")
    def _():
        s = seed.child(11)
        torus = Torus(1, 8)
        params = Params(0.5, 1.0, 1.0)
        state = env_init(EnvKind.ISRW, torus, 1.0, s.child(0))
        traj = env_evolve(EnvKind.ISRW, state, 3.0, s.child(1))
        gen = s.child(2).generator
        worst = math.inf
        for _i in range(50):
            a, b, c = np.sort(gen.uniform(0.0, 3.0, size=3))
            whole = log_partition_function(traj, params, a, c)
            split = (log_partition_function(traj, params, a, b)
                     + log_partition_function(traj, params, b, c))
            worst = min(worst, whole - split)
        return worst >= -1e-9, f"min log-split margin {worst:.3g}"

    @check("stats", "poisson_rate_values")
    def _():
        vals = (poisson_rate(1.0), poisson_rate(math.e), poisson_rate(2.0))
        want = (0.0, 1.0, 2.0 * math.log(2.0) - 1.0)
        err = max(abs(a - b) for a, b in zip(vals, want))
        return err < 1e-12, f"rate values {vals} vs {want}"

    @check("stats", "correlation_zero_lag")
    def _():
        torus = Torus(1, 32)
        a = correlation_exact(EnvKind.ISRW, 0, 0.0, 1.0, torus)
        b = correlation_exact(EnvKind.SEP, 0, 0.0, 0.5, torus)
        ok = abs(a - 1.0) < 1e-12 and abs(b - 0.25) < 1e-12
        return ok, f"variance at lag 0: isrw {a:.3f}, sep {b:.3f}"

    return checks


def _cmd_selfcheck(cfg):
    checks = _selfcheck_suite(cfg["master_seed"])
    rows = []
    any_fail = False
    for suite, name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        any_fail |= not ok
        status = "PASS" if ok else "FAIL"
        print(f"{status} {suite}/{name}: {detail}")
        rows.append((suite, name, status, detail))
    _csv.write_csv(
        cfg["output"], _comments(cfg),
        ("suite", "check", "status", "detail"), rows,
    )
    n_fail = sum(1 for r in rows if r[2] == "FAIL")
    print(f"selfcheck: {len(rows) - n_fail}/{len(rows)} checks passed; "
          f"wrote {cfg['output']}")
    return EXIT_SELFCHECK if any_fail else EXIT_OK


_COMMANDS = {
    "sweep": _cmd_sweep,
    "solve": _cmd_solve,
    "correlate": _cmd_correlate,
    "conditions": _cmd_conditions,
    "selfcheck": _cmd_selfcheck,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pamlab",
        description="Lattice reactant-growth simulation laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMANDS:
        p = sub.add_parser(command, help=f"run the {command} experiment")
        p.add_argument("--config", default=None,
                       help="plain-text key=value config file")
        spec = dict(_COMMON_OPTIONS)
        spec.update(_COMMAND_OPTIONS[command])
        for name, (caster, _default, help_text) in spec.items():
            p.add_argument(
                f"--{name.replace('_', '-')}", dest=name, type=caster,
                default=None, help=help_text,
            )
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = _resolve(args.command, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, ValueError, OSError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION


if __name__ == "__main__":
    sys.exit(main())
