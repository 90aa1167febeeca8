"""Command-line batch driver.

    python -m vdwmodes <subcommand> [--config PATH] [--out PATH] [--threads N]
    python -m vdwmodes --print-defaults

Subcommands: sphere-scan, prism-scan, lateral-scan, rotation-scan, pfa.
Exit codes: 0 success, 2 configuration or usage error, 3 every grid point
failed. Output is CSV with ``#`` header lines (version, config echo, units,
sign convention and columns).
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

from scipy.constants import hbar

from . import __version__
from . import bem, multipole, pfa
from .config import Config, defaults_text, load_config, parse_config
from .dielectrics import gold, polystyrene
from .errors import ConfigError, VdwError
from .quadrature import QuadSpec
from .results import ScanResult, write_csv

__all__ = ["main", "run"]

SIGN = "U < 0 for binding; F > 0 for attraction"


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _error_text(exc: Exception) -> str:
    return f"error: {type(exc).__name__}: {exc}"


def _materials(cfg: Config, undamped: bool = False):
    m = cfg["materials"]
    au = gold(m.float("gold_plasma_ev", positive=True),
              0.0 if undamped else m.float("gold_damping_ev"))
    if au.gamma < 0:
        m._fail("gold_damping_ev", "must be >= 0")
    ps = polystyrene(m.float("polystyrene_c_uv", positive=True),
                     m.float("polystyrene_uv_ev", positive=True))
    return au, ps


# --------------------------------------------------------------------------
# subcommands; each returns (result, units line)


def cmd_sphere_scan(cfg: Config, threads: int = 1):
    s = cfg["sphere-scan"]
    kind = s.choice("kind", ("shell", "coated", "solid"))
    R = s.float("radius_m", positive=True)
    dr = s.float("delta_over_R")
    if not 0 <= dr <= 1:
        s._fail("delta_over_R", "must lie in [0, 1]")
    grid = s.grid("d_over_R", positive=True)
    quad = QuadSpec(nodes=s.int("nodes"), tol=None)
    tol = s.float("tol", positive=True)
    cap = s.int("l_max_cap")
    au, ps = _materials(cfg)

    def system(z):
        if kind == "shell":
            return multipole.SphereSystem.shell(R, dr * R, z, au, au)
        if kind == "coated":
            return multipole.SphereSystem(R, dr * R, z, ps, au, au)
        return multipole.SphereSystem.solid(R, z, au, au)

    scale = hbar * au.omega_p

    def point(x):
        row = dict(d_over_R=float(x))
        try:
            trunc = multipole.auto_truncation(x, tol=tol, L_cap=cap)
            sys_ = system(x * R)
            U = multipole.multipole_energy(sys_, quad=quad, truncation=trunc).energy
            F = multipole.force(sys_, quad=quad, truncation=trunc)
            wanted = multipole.auto_truncation(x, tol=tol, L_cap=2**31).L_max
            warn = f"L_max capped at {cap} (needs {wanted})" if wanted > cap else ""
            row.update(U_reduced=U / scale, U_J=U, RF_reduced=R * F / scale, RF_SI=R * F,
                       L_max_used=trunc.L_max, warn=warn)
        except (VdwError, ArithmeticError, ValueError) as exc:
            row.update(warn=_error_text(exc))
        return row

    res = ScanResult("d_over_R", ["d_over_R", "U_reduced", "U_J", "RF_reduced", "RF_SI",
                                  "L_max_used", "warn"],
                     metadata={"kind": kind, "nodes": quad.nodes, "truncation_tol": tol})
    for row in _map(point, grid, threads):
        res.add(**row)
    units = ("d_over_R = gap / R; U_reduced = U / (hbar omega_p); U_J in J; "
             "RF_reduced = R F / (hbar omega_p); RF_SI = R F in N m")
    return res, units


def cmd_prism_scan(cfg: Config, threads: int = 1):
    s = cfg["prism-scan"]
    shapes = s.choices("shapes", bem.SHAPES)
    L = s.float("size_m", positive=True)
    grid = s.grid("d_over_L", positive=True)
    target = s.int("target_panels", minimum=24)
    graded = s.bool("graded")
    quad = QuadSpec(nodes=s.int("nodes"), tol=None)
    au, _ = _materials(cfg)
    scale = hbar * au.omega_p
    base = {"cube": L * L, "standing": L * L, "lying": 2 * L * L, "cylinder": L * L}

    def point(item):
        shape, x = item
        d = x * L
        row = dict(shape=shape, d_over_L=float(x))
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                mesh = bem.substrate_body(shape, L, d, target, graded)
                F = bem.force_object_substrate(mesh, au, au, d, quad=quad)
            Fpfa = base[shape] * pfa.halfspace_force_per_area(pfa.PlanarPair(au, au, d))
            row.update(F_N=F, LF_reduced=L * F / scale, F_pfa_N=Fpfa, F_over_pfa=F / Fpfa,
                       panels=len(mesh),
                       warn="; ".join(str(w.message) for w in caught))
        except (VdwError, ArithmeticError, ValueError) as exc:
            row.update(warn=_error_text(exc))
        return row

    res = ScanResult("d_over_L", ["shape", "d_over_L", "F_N", "LF_reduced", "F_pfa_N",
                                  "F_over_pfa", "panels", "warn"],
                     metadata={"nodes": quad.nodes, "graded": graded, "kernel": "panel"})
    for row in _map(point, [(sh, x) for sh in shapes for x in grid], threads):
        res.add(**row)
    units = ("d_over_L = gap / L; F_N in N; LF_reduced = L F / (hbar omega_p); "
             "F_pfa_N = base area x half-space pressure")
    return res, units


def cmd_lateral_scan(cfg: Config, threads: int = 1):
    from .mesh import gen_box

    s = cfg["lateral-scan"]
    L = s.float("size_m", positive=True)
    gap = s.float("gap_over_L", positive=True) * L
    directions = s.choices("directions", ("side", "diagonal"))
    grid = s.grid("l_over_L")
    target = s.int("target_panels", minimum=24)
    au, _ = _materials(cfg, undamped=True)
    prism = gen_box(L, L, L / 2, target)
    res = ScanResult("l_over_L", ["direction", "l_over_L", "U_reduced", "U_J", "warn"],
                     metadata={"panels": 2 * len(prism), "gap_over_L": gap / L,
                               "method": "neutral mode sum, undamped Drude"})
    for direction in directions:
        try:
            part = bem.lateral_scan(prism, prism, gap, direction, grid * L, au,
                                    threads=threads)
            rows = part.rows
        except (VdwError, ArithmeticError, ValueError) as exc:
            rows = [dict(l=x * L, warn=_error_text(exc)) for x in grid]
        for r in rows:
            res.add(direction=direction, l_over_L=r["l"] / L, U_reduced=r.get("U_reduced"),
                    U_J=r.get("U_J"), warn=r["warn"])
    return res, "l_over_L = offset / L; U_reduced = U / (hbar omega_p); U_J in J"


def cmd_rotation_scan(cfg: Config, threads: int = 1):
    s = cfg["rotation-scan"]
    L = s.float("size_m", positive=True)
    crosses = s.choices("crosses", ("circle", "square"))
    lengths = s.grid("lengths_over_L", positive=True)
    gap = s.float("gap_over_L", positive=True) * L
    theta = s.grid("theta")
    if theta[0] < 0 or theta[-1] > math.pi / 2 + 1e-12:
        s._fail("theta", "angles must lie in [0, pi/2]")
    target = s.int("target_panels", minimum=24)
    au, _ = _materials(cfg, undamped=True)
    res = ScanResult("theta", ["cross", "length_over_L", "theta", "U_reduced", "U_J", "warn"],
                     metadata={"gap_over_L": gap / L, "target_panels": target,
                               "method": "neutral mode sum, undamped Drude"})
    for cross in crosses:
        for length in lengths:
            try:
                rows = bem.rotation_scan(cross, L, [length * L], gap, theta, au,
                                         target_panels=target, threads=threads).rows
            except (VdwError, ArithmeticError, ValueError) as exc:
                rows = [dict(theta=t, warn=_error_text(exc)) for t in theta]
            for r in rows:
                res.add(cross=cross, length_over_L=float(length), theta=r["theta"],
                        U_reduced=r.get("U_reduced"), U_J=r.get("U_J"), warn=r["warn"])
    return res, "theta in rad; U_reduced = U / (hbar omega_p); U_J in J"


def cmd_pfa(cfg: Config, threads: int = 1):
    s = cfg["pfa"]
    R = s.float("radius_m", positive=True)
    dr = s.float("delta_over_R", positive=True)
    grid = s.grid("d_over_R", positive=True)
    au, _ = _materials(cfg)
    scale = hbar * au.omega_p
    A, tail = pfa.hamaker_constant(au, au, return_tail=True)
    delta = dr * R

    def e_half(h):
        return pfa.halfspace_energy_per_area(pfa.PlanarPair(au, au, h))

    def point(x):
        d = x * R
        row = dict(d_over_R=float(x))
        try:
            e_film = pfa.halfspace_film_energy_per_area(d, delta, au, au)
            rf2d = pfa.film2d_force(R, d, delta, drude=au)
            row.update(
                Ep_halfspace_J_m2=e_half(d), Ep_film_J_m2=e_film,
                Ep_film2d_J_m2=-rf2d / (2 * math.pi * R * R),
                RF_pfa_reduced=R * pfa.pfa_sphere_force(R, d, e_half) / scale,
                RF_pfa_corr_reduced=R * pfa.pfa_sphere_force(R, d, e_half, True) / scale,
                RF_pfa_film_reduced=R * pfa.pfa_sphere_force(R, d, lambda h: e_film) / scale,
                RF_film2d_reduced=rf2d / scale, warn="")
        except (VdwError, ArithmeticError, ValueError) as exc:
            row.update(warn=_error_text(exc))
        return row

    cols = ["d_over_R", "Ep_halfspace_J_m2", "Ep_film_J_m2", "Ep_film2d_J_m2",
            "RF_pfa_reduced", "RF_pfa_corr_reduced", "RF_pfa_film_reduced",
            "RF_film2d_reduced", "warn"]
    res = ScanResult("d_over_R", cols, metadata={
        "hamaker_J": f"{A:.17g}", "hamaker_tail_bound_J": f"{tail:.17g}",
        "A12_J": f"{pfa.a12_from_hamaker(A):.17g}"})
    for row in _map(point, grid, threads):
        res.add(**row)
    units = ("Ep_* in J/m^2 (film2d from the sheet-plasma force via PFA); "
             "RF_* = R F / (hbar omega_p); hamaker_J is A with E_p = -A / (12 pi d^2)")
    return res, units


COMMANDS = {
    "sphere-scan": cmd_sphere_scan,
    "prism-scan": cmd_prism_scan,
    "lateral-scan": cmd_lateral_scan,
    "rotation-scan": cmd_rotation_scan,
    "pfa": cmd_pfa,
}


# --------------------------------------------------------------------------
# entry point


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vdwmodes",
                                description="Non-retarded van der Waals energies and forces.")
    p.add_argument("command", nargs="?", choices=sorted(COMMANDS))
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")
    p.add_argument("--threads", type=int, default=1, metavar="N",
                   help="concurrent scan points (default 1)")
    p.add_argument("--print-defaults", action="store_true",
                   help="print the default configuration and exit")
    return p


def run(command: str, cfg: Config, threads: int = 1):
    """Run one subcommand; returns ``(ScanResult, header_lines)``."""
    res, units = COMMANDS[command](cfg, threads)
    sections = ["materials", command]
    header = [f"vdwmodes {__version__} {command}",
              f"units: {units}",
              f"sign convention: {SIGN}",
              f"columns: {', '.join(res.columns)}"]
    header += [f"config {line}" for line in cfg.echo(sections)]
    return res, header


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(defaults_text())
        return 0
    if args.command is None:
        print("error: a subcommand is required (or --print-defaults)", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        res, header = run(args.command, cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(res, fh, header)
    else:
        write_csv(res, sys.stdout, header)
    if res.rows and res.n_failed == len(res.rows):
        print("error: every grid point failed", file=sys.stderr)
        return 3
    return 0
