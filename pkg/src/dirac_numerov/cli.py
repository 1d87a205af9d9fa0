"""Command-line interface.

Subcommands
-----------
table1   ground states of the 1/r problem for D = 3..9 against the closed form
solve    single ground-state search (exit 0 found, 3 certified not-found)
scan     ground-state search per dimension over a range
profile  CSV export of phi_+, F, G, the effective potential, or a mismatch scan
selftest quick internal consistency battery

Exit codes: 0 success / eigenvalue found, 1 configuration error, 2 numerical
failure, 3 certified not-found. Option precedence: command-line flags, then
``--config`` file entries (plain ``key = value`` lines, same keys as the long
flags), then built-in defaults. DIRAC_NUMEROV_THREADS overrides --threads.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import analytic, manifest, solver
from .core import Ansatz, ELECTRON_MASS_EV, PhysicalConfig
from .errors import ConfigError
from .numerov import Scheme, scheme_report

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_NOT_FOUND = 3

_RATIO_TOL = 5e-8      # |E/M numeric - closed form| acceptance per dimension
_EPSILON_REL_TOL = 0.01

_OPTION_TYPES = {
    "dimension": int,
    "ell": int,
    "ansatz": int,
    "d-min": int,
    "d-max": int,
    "eta-min": float,
    "eta-max": float,
    "grid-a": float,
    "grid-b": float,
    "grid-delta": float,
    "scan-points": int,
    "mismatch-tol": float,
    "root-tol": float,
    "scheme": str,
    "threads": int,
    "output": str,
    "format": str,
    "quantity": str,
    "eta": str,
    "mass": float,
}

_DEFAULTS = {
    "dimension": 3,
    "ell": 0,
    "ansatz": 2,
    "d-min": 4,
    "d-max": 10,
    "eta-min": 0.5,
    "eta-max": 1.0 - 1e-9,
    "grid-a": 1e-6,
    "grid-b": None,
    "grid-delta": 1e-3,
    "scan-points": 2000,
    "mismatch-tol": 1e-8,
    "root-tol": 1e-12,
    "scheme": "canonical",
    "threads": None,
    "output": None,
    "format": "csv",
    "quantity": "phi_plus",
    "eta": "ground",
    "mass": ELECTRON_MASS_EV,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dirac-numerov", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=manifest.TOOL_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *names):
        p.add_argument("--config", help="key = value option file (flags take precedence)")
        for name in names:
            kind = _OPTION_TYPES[name]
            p.add_argument(f"--{name}", type=kind, default=None, dest=name.replace("-", "_"))

    p_table = sub.add_parser("table1", help="1/r ground states, D = 3..9, vs the closed form")
    add_common(p_table, "scheme", "threads", "output", "format",
               "eta-min", "eta-max", "grid-a", "grid-b", "grid-delta", "scan-points",
               "mismatch-tol", "root-tol", "mass")

    p_solve = sub.add_parser("solve", help="single ground-state search")
    add_common(p_solve, "dimension", "ell", "ansatz", "eta-min", "eta-max",
               "grid-a", "grid-b", "grid-delta", "scan-points", "mismatch-tol",
               "root-tol", "scheme", "threads", "output", "format", "mass")

    p_scan = sub.add_parser("scan", help="ground-state search per dimension over a range")
    add_common(p_scan, "d-min", "d-max", "ell", "ansatz", "eta-min", "eta-max",
               "grid-a", "grid-b", "grid-delta", "scan-points", "mismatch-tol",
               "root-tol", "scheme", "threads", "output", "format", "mass")

    p_prof = sub.add_parser("profile", help="CSV export of radial profiles and scans")
    add_common(p_prof, "quantity", "eta", "dimension", "ell", "ansatz", "eta-min",
               "eta-max", "grid-a", "grid-b", "grid-delta", "scan-points",
               "mismatch-tol", "root-tol", "scheme", "threads", "output", "mass")

    sub.add_parser("selftest", help="quick internal consistency battery")
    return parser


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, raw in enumerate(handle, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in _OPTION_TYPES:
                    raise ConfigError(f"{path}:{lineno}: unknown option {key!r}")
                values[key] = _OPTION_TYPES[key](value.strip())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def _resolve(args: argparse.Namespace) -> dict:
    """Merge flags > config file > defaults into one option dict."""
    merged = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        merged.update(_read_config_file(config_path))
    for key in _OPTION_TYPES:
        flag_value = getattr(args, key.replace("-", "_"), None)
        if flag_value is not None:
            merged[key] = flag_value
    return merged


def _threads(opts: dict) -> int:
    env = os.environ.get("DIRAC_NUMEROV_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"DIRAC_NUMEROV_THREADS must be an integer, got {env!r}") from exc
    if opts["threads"] is not None:
        return max(1, opts["threads"])
    return os.cpu_count() or 1


def _settings(opts: dict) -> solver.SolverSettings:
    scheme_name = str(opts["scheme"]).lower()
    schemes = {"canonical": Scheme.CANONICAL, "generalized": Scheme.GENERALIZED}
    if scheme_name not in schemes:
        raise ConfigError(f"scheme must be canonical or generalized, got {opts['scheme']!r}")
    return solver.SolverSettings(
        eta_window=(opts["eta-min"], opts["eta-max"]),
        scan_points=opts["scan-points"],
        root_tol=opts["root-tol"],
        mismatch_tol=opts["mismatch-tol"],
        grid_a=opts["grid-a"],
        grid_b=opts["grid-b"],
        grid_delta=opts["grid-delta"],
        scheme=schemes[scheme_name],
    )


def _physical(opts: dict, dimension=None) -> PhysicalConfig:
    ansatz = {1: Ansatz.ONE_OVER_R, 2: Ansatz.GENERALIZED}.get(opts["ansatz"])
    if ansatz is None:
        raise ConfigError(f"ansatz must be 1 or 2, got {opts['ansatz']!r}")
    try:
        return PhysicalConfig(
            dimension=int(dimension if dimension is not None else opts["dimension"]),
            ell=opts["ell"],
            mass=opts["mass"],
            ansatz=ansatz,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _emit_results(command, config, settings, records, opts):
    run = manifest.RunManifest(
        tool_version=manifest.TOOL_VERSION,
        command=command,
        config_echo=manifest.config_echo(config, settings),
        results=records,
    )
    if opts["output"] is None:
        return run
    if opts["format"] == "json":
        _write_text(opts["output"], run.serialize())
    elif opts["format"] == "csv":
        columns = ["dimension", "found", "eta_star", "epsilon_ev", "match_rho",
                   "mismatch_residual", "wall_time_ms"]
        rows = [
            [r["dimension"], r["found"], r["eta_star"], r["epsilon_ev"],
             r["match_rho"], r["mismatch_residual"], r["wall_time_ms"]]
            for r in records
        ]
        meta = {"tool_version": manifest.TOOL_VERSION, "command": command}
        _write_text(opts["output"], manifest.render_csv(columns, rows, meta))
    else:
        raise ConfigError(f"format must be csv or json, got {opts['format']!r}")
    return run


def _cmd_table1(opts) -> int:
    settings = _settings(opts)
    workers = _threads(opts)
    t0 = time.perf_counter()
    results = solver.dimension_scan((3, 9), Ansatz.ONE_OVER_R, settings,
                                    mass=opts["mass"], workers=workers)
    wall_each = int(1000 * (time.perf_counter() - t0)) // len(results)
    records = []
    all_pass = True
    header = f"{'D':>2} {'E/M closed form':>20} {'E/M numeric':>20} " \
             f"{'eps closed (eV)':>16} {'eps numeric (eV)':>17} {'status':>8}"
    print(header)
    for d, result in results:
        level = analytic.analytic_energy(
            PhysicalConfig(dimension=d, ell=0, mass=opts["mass"], ansatz=Ansatz.ONE_OVER_R)
        )
        eps_ref = -(1.0 - level.energy_ratio) * opts["mass"]
        if result.found:
            ratio_err = abs(result.eta_star - level.energy_ratio)
            eps_err = abs(result.epsilon_ev - eps_ref) / abs(eps_ref)
            ok = ratio_err <= _RATIO_TOL and eps_err <= _EPSILON_REL_TOL
            print(f"{d:>2} {level.energy_ratio:>20.15f} {result.eta_star:>20.15f} "
                  f"{eps_ref:>16.3f} {result.epsilon_ev:>17.3f} {'ok' if ok else 'FAIL':>8}")
            if not ok:
                print(f"   detail: |dE/M| = {ratio_err:.2e} (tol {_RATIO_TOL}), "
                      f"eps rel err = {eps_err:.2e} (tol {_EPSILON_REL_TOL})")
        else:
            ok = False
            print(f"{d:>2} {level.energy_ratio:>20.15f} {'-':>20} "
                  f"{eps_ref:>16.3f} {'-':>17} {'FAIL':>8}  ({result.verdict_reason})")
        all_pass &= ok
        records.append(manifest.result_record(d, result, wall_each))
    config = PhysicalConfig(dimension=3, ell=0, mass=opts["mass"], ansatz=Ansatz.ONE_OVER_R)
    _emit_results("table1", config, settings, records, opts)
    return EXIT_OK if all_pass else EXIT_CONFIG


def _cmd_solve(opts) -> int:
    config = _physical(opts)
    settings = _settings(opts)
    t0 = time.perf_counter()
    result = solver.solve_ground_state(config, settings)
    wall = int(1000 * (time.perf_counter() - t0))
    records = [manifest.result_record(config.dimension, result, wall)]
    if result.found:
        print(f"found: eta* = {result.eta_star:.15f}, epsilon = {result.epsilon_ev:.6f} eV, "
              f"match rho = {result.match_rho:.6f}, residual = {result.mismatch_residual:.3e}")
    else:
        print(f"not found: {result.verdict_reason}")
    run = _emit_results("solve", config, settings, records, opts)
    if opts["output"] is None:
        sys.stdout.write(run.serialize())
    return EXIT_OK if result.found else EXIT_NOT_FOUND


def _cmd_scan(opts) -> int:
    if opts["d-min"] > opts["d-max"]:
        raise ConfigError(f"d-min {opts['d-min']} exceeds d-max {opts['d-max']}")
    ansatz = {1: Ansatz.ONE_OVER_R, 2: Ansatz.GENERALIZED}.get(opts["ansatz"])
    if ansatz is None:
        raise ConfigError(f"ansatz must be 1 or 2, got {opts['ansatz']!r}")
    settings = _settings(opts)
    workers = _threads(opts)
    t0 = time.perf_counter()
    results = solver.dimension_scan((opts["d-min"], opts["d-max"]), ansatz, settings,
                                    ell=opts["ell"], mass=opts["mass"], workers=workers)
    wall = int(1000 * (time.perf_counter() - t0))
    records = []
    for d, result in results:
        records.append(manifest.result_record(d, result, wall // len(results)))
        if result.found:
            print(f"D = {d}: eta* = {result.eta_star:.15f}, epsilon = {result.epsilon_ev:.4f} eV")
        else:
            print(f"D = {d}: no bound state ({result.verdict_reason})")
    config = _physical(opts, dimension=opts["d-min"])
    _emit_results("scan", config, settings, records, opts)
    return EXIT_OK


def _ground_eta(config, settings):
    result = solver.solve_ground_state(config, settings)
    if not result.found:
        return None, result
    return result.eta_star, result


def _cmd_profile(opts) -> int:
    quantity = opts["quantity"]
    valid = {"phi_plus", "F", "G", "effective_potential", "mismatch_scan"}
    if quantity not in valid:
        raise ConfigError(f"quantity must be one of {sorted(valid)}, got {quantity!r}")
    config = _physical(opts)
    settings = _settings(opts)
    meta = {
        "tool_version": manifest.TOOL_VERSION,
        "quantity": quantity,
        "dimension": config.dimension,
        "ell": config.ell,
        "ansatz": config.ansatz.name,
        "scheme": settings.scheme.name,
    }

    if quantity == "mismatch_scan":
        rows = []
        for eta, delta in solver.mismatch_scan(config, settings):
            rows.append([eta, "NoTurningPoint" if delta is None else delta])
        _write_text(opts["output"], manifest.render_csv(["eta", "mismatch"], rows, meta))
        return EXIT_OK

    if opts["eta"] == "ground":
        eta_star, result = _ground_eta(config, settings)
        if eta_star is None:
            print(f"not found: {result.verdict_reason}")
            return EXIT_NOT_FOUND
    else:
        try:
            eta_star = float(opts["eta"])
        except ValueError as exc:
            raise ConfigError(f"--eta must be a number or 'ground', got {opts['eta']!r}") from exc
    meta["eta"] = manifest.format_float(eta_star)

    from .coefficients import build_coefficients
    from .core import dimensionless_state

    state = dimensionless_state(config, eta_star)
    coeffs = build_coefficients(state, config)
    meta["tau"] = manifest.format_float(coeffs.match_level)
    meta["tau_prime"] = manifest.format_float(coeffs.turning_scale)

    if quantity == "effective_potential":
        grid = settings.resolve_grid(coeffs.turning_scale)
        nodes = grid.nodes()
        gap = coeffs.match_level - np.asarray(coeffs.v_fn(nodes), dtype=float)
        rows = [[float(r), float(g)] for r, g in zip(nodes, gap)]
        _write_text(opts["output"], manifest.render_csv(["rho", "level_minus_potential"], rows, meta))
        return EXIT_OK

    try:
        wave = solver.eigenfunction(config, settings, eta_star)
    except ConfigError:
        print(f"no turning point at eta = {eta_star}; nothing to export")
        return EXIT_NOT_FOUND
    nodes = wave.grid.nodes()
    if quantity == "phi_plus":
        columns = ["rho", "phi_plus"]
        series = [nodes, wave.phi_plus]
        if config.dimension == 3 and config.ell == 0:
            overlay = analytic.analytic_ground_wavefunction_d3(nodes, config)
            columns.append("phi_plus_closed_form")
            series.append(overlay)
        rows = [[float(vals[i]) for vals in series] for i in range(len(nodes))]
        _write_text(opts["output"], manifest.render_csv(columns, rows, meta))
        return EXIT_OK
    values = wave.f_component if quantity == "F" else wave.g_component
    rows = [[float(r), float(v)] for r, v in zip(nodes, values)]
    _write_text(opts["output"], manifest.render_csv(["rho", quantity], rows, meta))
    return EXIT_OK


def _cmd_selftest() -> int:
    checks = []

    def check(name, fn):
        try:
            fn()
            checks.append((name, True, ""))
        except Exception as exc:  # report and continue
            checks.append((name, False, str(exc)))

    def scalar_identities():
        rng = np.random.default_rng(7)
        from .core import dimensionless_state
        for _ in range(1000):
            d = int(rng.integers(3, 11))
            eta = float(rng.uniform(-0.999999, 0.999999))
            config = PhysicalConfig(dimension=d, ansatz=Ansatz.GENERALIZED)
            st = dimensionless_state(config, eta)
            lhs = (st.tau_prime - st.tau) * (st.tau_prime + st.tau)
            rhs = st.a_const**2 * st.lambda_ ** (d - 3)
            stable = st.tau_prime**2 * st.lambda_
            assert abs(stable - rhs) <= 1e-12 * abs(rhs) + 1e-300, (d, eta)
            assert abs(lhs - rhs) <= 1e-9 * abs(rhs) + 1e-300, (d, eta)

    def closed_form_energies():
        # three-dimensional ground state must sit at the textbook value
        level = analytic.analytic_energy(PhysicalConfig(dimension=3, ansatz=Ansatz.ONE_OVER_R))
        assert abs(level.energy_ratio - 0.999973373968532) < 1e-12

    def order_signature():
        report = scheme_report()
        assert 3.5 < report["orders"]["canonical"] < 4.5, report["orders"]
        print(report["text"])

    def d3_solve():
        config = PhysicalConfig(dimension=3, ansatz=Ansatz.ONE_OVER_R)
        result = solver.solve_ground_state(config)
        level = analytic.analytic_energy(config)
        assert result.found and abs(result.eta_star - level.energy_ratio) < 5e-8

    check("dimensionless identities (1000 samples)", scalar_identities)
    check("closed-form energy table", closed_form_energies)
    check("integrator order signature", order_signature)
    check("three-dimensional ground state vs closed form", d3_solve)

    failures = 0
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        failures += 0 if ok else 1
    return EXIT_OK if failures == 0 else EXIT_CONFIG


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "selftest":
            return _cmd_selftest()
        opts = _resolve(args)
        if args.command == "table1":
            return _cmd_table1(opts)
        if args.command == "solve":
            return _cmd_solve(opts)
        if args.command == "scan":
            return _cmd_scan(opts)
        if args.command == "profile":
            return _cmd_profile(opts)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ValueError) as exc:
        # EtaOutOfRange, UnsupportedDimension, etc. are ValueError subclasses:
        # all describe invalid problem statements, not numerical breakdowns
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
