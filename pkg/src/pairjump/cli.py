"""Batch command-line front end.

Subcommands compute machine-readable data files: `steady` (JSON), `pattern`
and `g2` (CSV), `trajectory` (JSON lines), `validate` (consistency report).
Options come from built-in defaults, overridden by a JSON config file
(--config), overridden by explicit flags.  Every output starts with a
metadata block holding the fully resolved config and the code version, and
reruns with identical config produce identical bytes.

Exit codes: 0 success, 1 computation failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .core import Direction, PhysicalParams, dicke_populations, ket
from .dynamics import dipole_coupling
from .master import build_liouvillian, steady_state_analytic, steady_state_numeric
from .observables import g2_zero, interference_pattern
from .trajectory import MAX_DT, run_trajectory
from .validate import run_suite

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_CONFIG = 2

_COMMON_DEFAULTS = {
    "omega": "0.0",
    "omega2": None,  # defaults to omega
    "r": 10.0,
    "dipole": "0,0,1",
    "neglect_c": False,
    "output": None,
}

DEFAULTS = {
    "steady": {**_COMMON_DEFAULTS, "analytic": False},
    "pattern": {**_COMMON_DEFAULTS, "theta_points": 64, "phi_points": 128},
    "g2": {**_COMMON_DEFAULTS, "theta": np.pi / 2, "phi_points": 4096},
    "trajectory": {
        **_COMMON_DEFAULTS,
        "n": 100,
        "seed": 0,
        "dt": 1e-3,
        "t_final": 5.0,
        "initial": "g",
        "snapshots": 200,
    },
    "validate": {
        "n_traj": 2000,
        "seed": 1234,
        "dt": 1e-3,
        "t_final": 3.0,
        "threads": None,
        "output": None,
        "corrupt_c_sign": False,
    },
}


class ConfigError(Exception):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _fmt(x: float) -> str:
    """17 significant digits: round-trip exact for doubles."""
    return format(float(x), ".17g")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairjump",
        description="Quantum-jump simulation of two driven, dipole-coupled atoms",
    )
    parser.add_argument("--version", action="version", version=f"pairjump {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--omega", help="Rabi frequency of both atoms, in units of A")
        p.add_argument("--omega2", help="Rabi frequency of atom 2, if different")
        p.add_argument("--r", type=float, help="interatomic distance in wavelengths")
        p.add_argument("--dipole", help="dipole direction as 'x,y,z' (normalized)")
        p.add_argument(
            "--neglect-c",
            dest="neglect_c",
            action="store_const",
            const=True,
            help="drop the dipole coupling constant",
        )
        p.add_argument("-o", "--output", help="output path (default: stdout)")

    p = sub.add_parser("steady", help="stationary density matrix")
    add_common(p)
    p.add_argument(
        "--analytic",
        action="store_const",
        const=True,
        help="require the closed-form populations alongside the numeric solve",
    )

    p = sub.add_parser("pattern", help="angular emission pattern CSV")
    add_common(p)
    p.add_argument("--theta-points", dest="theta_points", type=int)
    p.add_argument("--phi-points", dest="phi_points", type=int)

    p = sub.add_parser("g2", help="zero-delay correlation vs azimuth CSV")
    add_common(p)
    p.add_argument("--theta", type=float, help="fixed polar angle in radians")
    p.add_argument("--phi-points", dest="phi_points", type=int)

    p = sub.add_parser("trajectory", help="stochastic trajectories as JSON lines")
    add_common(p)
    p.add_argument("--n", type=int, help="number of trajectories")
    p.add_argument("--seed", type=int, help="base seed of the counter-based streams")
    p.add_argument("--dt", type=float, help="step size in units of 1/A")
    p.add_argument("--t-final", dest="t_final", type=float, help="horizon in 1/A")
    p.add_argument("--initial", help="initial state label (g,s,a,e,11,12,21,22)")
    p.add_argument("--snapshots", type=int, help="snapshot grid size")

    p = sub.add_parser("validate", help="run the cross-route consistency suite")
    p.add_argument("--config", help="JSON file with option defaults")
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("-o", "--output", help="write the JSON report here")
    p.add_argument(
        "--corrupt-c-sign",
        dest="corrupt_c_sign",
        action="store_const",
        const=True,
        help=argparse.SUPPRESS,  # negative control: flips the coupling sign
    )
    return parser


def _resolve_config(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS[args.command])
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read config file: {exc}")
        for key, value in file_cfg.items():
            if key not in cfg:
                raise ConfigError(key, f"unknown option for command {args.command!r}")
            cfg[key] = value
    for key in cfg:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    return cfg


def _parse_complex(cfg: dict, field: str) -> complex:
    raw = cfg[field]
    try:
        value = complex(str(raw).replace(" ", ""))
    except ValueError:
        raise ConfigError(field, f"cannot parse {raw!r} as a (complex) number")
    if not (np.isfinite(value.real) and np.isfinite(value.imag)):
        raise ConfigError(field, f"must be finite, got {raw!r}")
    return value


def _parse_params(cfg: dict) -> PhysicalParams:
    omega1 = _parse_complex(cfg, "omega")
    omega2 = omega1 if cfg["omega2"] is None else _parse_complex(cfg, "omega2")
    r = float(cfg["r"])
    if not r > 0.0:
        raise ConfigError("r", f"must be positive, got {r}")
    try:
        parts = [float(c) for c in str(cfg["dipole"]).replace(" ", "").split(",")]
    except ValueError:
        raise ConfigError("dipole", f"cannot parse {cfg['dipole']!r} as 'x,y,z'")
    if len(parts) != 3:
        raise ConfigError("dipole", "needs exactly three components")
    norm = float(np.linalg.norm(parts))
    if norm < 1e-12:
        raise ConfigError("dipole", "must be a nonzero vector")
    dipole = tuple(c / norm for c in parts)
    return PhysicalParams(rabi_1=omega1, rabi_2=omega2, separation=r, dipole=dipole)


def _coupling(cfg: dict, params: PhysicalParams) -> complex:
    return 0.0 + 0.0j if cfg["neglect_c"] else dipole_coupling(params)


def _require_positive_int(cfg: dict, field: str, minimum: int = 1) -> int:
    val = int(cfg[field])
    if val < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {val}")
    return val


def _meta(command: str, cfg: dict) -> dict:
    shown = {k: v for k, v in cfg.items() if k != "output"}
    return {"tool": "pairjump", "version": __version__, "command": command, "config": shown}


def _emit(text: str, output: str | None):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _csv_text(command: str, cfg: dict, header: str, rows) -> str:
    lines = [
        f"# pairjump {__version__}",
        f"# command: {command}",
        f"# config: {json.dumps(_meta(command, cfg)['config'], sort_keys=True)}",
        header,
    ]
    lines.extend(",".join(_fmt(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def cmd_steady(cfg: dict) -> int:
    params = _parse_params(cfg)
    coupling = _coupling(cfg, params)
    rho = steady_state_numeric(build_liouvillian(params, coupling))
    pops = dicke_populations(rho)
    numeric = dict(zip(("g", "s", "a", "e"), (float(p) for p in pops)))
    analytic = None
    difference = None
    if params.equal_real_rabi:
        ref = steady_state_analytic(params, coupling)
        analytic = {"g": ref.gg, "s": ref.ss, "a": ref.aa, "e": ref.ee, "im_sa": ref.im_sa}
        difference = {
            "g": numeric["g"] - ref.gg,
            "s": numeric["s"] - ref.ss,
            "a": numeric["a"] - ref.aa,
            "e": numeric["e"] - ref.ee,
        }
    elif cfg["analytic"]:
        raise ConfigError(
            "omega2", "analytic steady state requires equal real Rabi frequencies"
        )
    doc = {
        "_meta": _meta("steady", cfg),
        "density_matrix": {"re": rho.real.tolist(), "im": rho.imag.tolist()},
        "populations_numeric": numeric,
        "populations_analytic": analytic,
        "difference": difference,
    }
    _emit(json.dumps(doc, sort_keys=True, indent=1) + "\n", cfg["output"])
    return EXIT_OK


def cmd_pattern(cfg: dict) -> int:
    params = _parse_params(cfg)
    coupling = _coupling(cfg, params)
    n_theta = _require_positive_int(cfg, "theta_points", 2)
    n_phi = _require_positive_int(cfg, "phi_points", 2)
    rho = steady_state_numeric(build_liouvillian(params, coupling))
    theta = np.linspace(0.0, np.pi, n_theta)
    phi = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    grid = interference_pattern(rho, params, theta, phi)
    rows = (
        (grid.theta[i], grid.phi[j], grid.values[i, j])
        for i in range(n_theta)
        for j in range(n_phi)
    )
    _emit(_csv_text("pattern", cfg, "theta,phi,intensity", rows), cfg["output"])
    return EXIT_OK


def cmd_g2(cfg: dict) -> int:
    params = _parse_params(cfg)
    coupling = _coupling(cfg, params)
    theta = float(cfg["theta"])
    if not 0.0 <= theta <= np.pi:
        raise ConfigError("theta", f"must lie in [0, pi], got {theta}")
    n_phi = _require_positive_int(cfg, "phi_points", 2)
    rho = steady_state_numeric(build_liouvillian(params, coupling))
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    rows = (
        (ph, g2_zero(rho, params, Direction(theta=theta, phi=float(ph)))) for ph in phis
    )
    _emit(_csv_text("g2", cfg, "phi,g2", rows), cfg["output"])
    return EXIT_OK


def cmd_trajectory(cfg: dict) -> int:
    params = _parse_params(cfg)
    coupling = _coupling(cfg, params)
    n = _require_positive_int(cfg, "n", 1)
    seed = int(cfg["seed"])
    if seed < 0:
        raise ConfigError("seed", "must be non-negative")
    dt = float(cfg["dt"])
    if not 0.0 < dt <= MAX_DT:
        raise ConfigError("dt", f"must lie in (0, {MAX_DT}], got {dt}")
    t_final = float(cfg["t_final"])
    if t_final <= 0.0:
        raise ConfigError("t_final", "must be positive")
    snapshots = _require_positive_int(cfg, "snapshots", 2)
    try:
        initial = ket(str(cfg["initial"]))
    except ValueError as exc:
        raise ConfigError("initial", str(exc))
    lines = [json.dumps(_meta("trajectory", cfg), sort_keys=True)]
    total_jumps = 0
    rates = np.empty(n)
    for i in range(n):
        rec = run_trajectory(
            params,
            initial,
            t_final,
            dt,
            seed,
            stream=i,
            coupling=coupling,
            n_snapshots=snapshots,
        )
        total_jumps += rec.n_jumps
        rates[i] = rec.n_jumps / t_final
        lines.append(
            json.dumps(
                {
                    "seed": seed,
                    "stream": i,
                    "jumps": [
                        [j.time, j.direction.theta, j.direction.phi] for j in rec.jumps
                    ],
                    "final_state": {
                        "re": rec.final_state.real.tolist(),
                        "im": rec.final_state.imag.tolist(),
                    },
                },
                sort_keys=True,
            )
        )
    sem = float(rates.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    lines.append(
        json.dumps(
            {
                "summary": True,
                "n_trajectories": n,
                "total_jumps": total_jumps,
                "mean_jump_rate": total_jumps / (n * t_final),
                "mean_jump_rate_stderr": sem,
            },
            sort_keys=True,
        )
    )
    _emit("\n".join(lines) + "\n", cfg["output"])
    return EXIT_OK


def cmd_validate(cfg: dict) -> int:
    n_traj = _require_positive_int(cfg, "n_traj", 1)
    dt = float(cfg["dt"])
    if dt <= 0.0:
        raise ConfigError("dt", "must be positive")
    t_final = float(cfg["t_final"])
    if t_final <= 0.0:
        raise ConfigError("t_final", "must be positive")
    results = run_suite(
        n_trajectories=n_traj,
        dt=dt,
        t_final=t_final,
        seed=int(cfg["seed"]),
        corrupt_coupling_sign=bool(cfg["corrupt_c_sign"]),
        threads=cfg["threads"],
    )
    for res in results:
        print(res.summary())
    all_passed = all(r.passed for r in results)
    if cfg["output"]:
        doc = {
            "_meta": _meta("validate", cfg),
            "checks": [
                {"name": r.name, "passed": r.passed, "details": r.details}
                for r in results
            ],
            "all_passed": all_passed,
        }
        with open(cfg["output"], "w") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")
    print("validation:", "PASS" if all_passed else "FAIL")
    return EXIT_OK if all_passed else EXIT_COMPUTE


_HANDLERS = {
    "steady": cmd_steady,
    "pattern": cmd_pattern,
    "g2": cmd_g2,
    "trajectory": cmd_trajectory,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
