"""Command-line front end.

Every subcommand is a ``compute_*`` function returning ``(scalars, artifacts)``:
a flat dict of numbers (what ``sweep`` aggregates) and a dict of file name to
file content (what the command writes under ``--out``). Writes are atomic.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence.
"""
import argparse
import concurrent.futures
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import cluster as cl
from . import effective as em
from . import gate as gt
from .config import SCHEMA, ConfigError, RunConfig, canonical_key, load_config, parse_values
from .exact import SINGLET, TRIPLET, ConvergenceError, EffectiveParams, SquareDotSolver
from .units import HBAR, K_B, MaterialParams, effective_bohr_radius

log = logging.getLogger("squaredot")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3

HEADERS = {
    "solve": ["V_ueV", "sector", "level", "energy_ueV"],
    "density": ["x_nm", "y_nm", "rho_per_nm2"],
    "filter": ["t_ns", "P_ac", "P_bd", "norm"],
    "effective": ["V_ueV", "E_S1", "E_S2", "E_Tv", "E_Th", "theta_rad", "J_ueV"],
    "gate": ["t_ns"] + [f"re_amp_{i}" for i in range(16)] + [f"im_amp_{i}" for i in range(16)],
    "fig4a": ["V_ueV", "exact_S1", "exact_S2", "exact_T1", "exact_T2",
              "model_S1", "model_S2", "model_T1", "model_T2"],
    "fig4c": ["V_ueV", "V_over_Delta0", "J_exact_ueV", "J_model_ueV"],
}

# sections whose keys a sweep over each target may vary (most specific first)
TARGET_SECTIONS = {
    "materials": ["material"],
    "solve": ["solver", "material"],
    "effective": ["effective", "solver", "material"],
    "filter": ["effective", "solver", "material"],
    "gate": ["gate", "effective", "solver", "material"],
    "cluster": ["cluster"],
}


# --- formatting and atomic output -------------------------------------------------


def fmt(x):
    """Shortest round-trip representation."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        if len(r) != len(header):
            raise ValueError("row length does not match header")
        buf.write(",".join(fmt(v) for v in r) + "\n")
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def json_text(obj):
    return json.dumps({"schema_version": SCHEMA_VERSION, **_jsonable(obj)}, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_artifacts(out: Path, artifacts: dict):
    for name, text in artifacts.items():
        write_atomic(out / name, text)


# --- shared builders --------------------------------------------------------------


def material_of(cfg: RunConfig) -> MaterialParams:
    m = cfg["material"]
    try:
        return MaterialParams(m["m_star"], m["eps_r"], m["g_factor"])
    except ValueError as exc:
        raise ConfigError(f"[material] {exc}") from None


def solver_of(cfg: RunConfig) -> SquareDotSolver:
    s = cfg["solver"]
    if s["n_max"] < 2:
        raise ConfigError("[solver] n_max must be at least 2")
    if s["quadrature_order"] < 16:
        raise ConfigError("[solver] quadrature_order must be at least 16")
    if not s["L"] > 0:
        raise ConfigError("[solver] L must be positive")
    return SquareDotSolver(s["L"], s["n_max"], s["quadrature_order"], material_of(cfg), s["spectrum_cutoff"])


def effective_of(cfg: RunConfig, solver=None):
    """Effective parameters from ``[effective]`` when given, else from the exact solver."""
    e = cfg["effective"]
    given = [math.isfinite(e[k]) for k in ("Delta0", "p_S", "p_T")]
    if all(given):
        try:
            return EffectiveParams(e["E0S"], e["E0T"], e["Delta0"], e["p_S"], e["p_T"]), solver
        except ValueError as exc:
            raise ConfigError(f"[effective] {exc}") from None
    if any(given):
        raise ConfigError("[effective] Delta0, p_S and p_T must be given together")
    solver = solver or solver_of(cfg)
    return solver.effective_params(), solver


def _eff_dict(eff: EffectiveParams):
    return {"E0S": eff.E0S, "E0T": eff.E0T, "Delta0": eff.Delta0, "p_S": eff.p_S, "p_T": eff.p_T,
            "a_S": eff.a_S, "t_R": eff.t_R}


def effective_row(eff, V):
    s1, s2 = em.singlet_spectrum(eff, V)
    tv, th = em.triplet_energies(eff, V)
    return [V, s1, s2, tv, th, em.mixing_angle(eff, V), em.exchange_J(eff, V)]


# --- subcommands ------------------------------------------------------------------


def compute_materials(cfg: RunConfig, args=None):
    mat = material_of(cfg)
    scalars = {
        "m_star": mat.m_star, "eps_r": mat.eps_r, "g_factor": mat.g_factor,
        "kinetic_scale_ueV_nm2": mat.kinetic_scale, "coulomb_scale_ueV_nm": mat.coulomb_scale,
        "bohr_radius_nm": effective_bohr_radius(mat), "hbar_ueV_ns": HBAR, "k_B_ueV_per_mK": K_B,
    }
    return scalars, {"materials.json": json_text(scalars)}


def compute_solve(cfg: RunConfig, args=None, solver=None, V_list=None, prefix=""):
    solver = solver or solver_of(cfg)
    t0 = time.perf_counter()
    eff = solver.effective_params()
    levels = cfg["solver"]["levels"]
    if V_list is None:
        V_list = [0.0] if args is None or args.Vs is None else parse_values(args.Vs)
        if args is not None and args.V_unit == "delta0":
            V_list = [v * eff.Delta0 for v in V_list]
    rows = []
    for V in V_list:
        for sector in (SINGLET, TRIPLET):
            res = solver.spectrum(V, sector, levels)
            rows += [[float(V), sector, n, E] for n, E in enumerate(res.energies)]
    scalars = {**_eff_dict(eff), "a_S_numeric": solver.mixing_integral(),
               "L": solver.L, "n_max": solver.n_max, "runtime_s": time.perf_counter() - t0}
    arts = {prefix + "spectrum.csv": csv_text(HEADERS["solve"], rows)}
    meta = {k: v for k, v in scalars.items() if k != "runtime_s"}
    arts[prefix + "solve.json"] = json_text(meta)
    if args is not None and getattr(args, "density", None):
        arts.update(density_artifacts(solver, cfg, args.density.split(","), prefix))
    return scalars, arts


def _state_vector(solver: SquareDotSolver, name: str):
    """``S1, S2, Sv, Sh, Tv, Th`` at V=0 or ``S1@<V/Delta0>`` for the ground singlet at a gate voltage."""
    if "@" in name:
        label, v = name.split("@", 1)
        if label not in ("S1", "S2"):
            raise ConfigError(f"only S1/S2 can be taken at finite V, got {name!r}")
        V = float(v) * solver.effective_params().Delta0
        return SINGLET, solver.spectrum(V, SINGLET, 2).vectors[:, 0 if label == "S1" else 1]
    cs = solver.configuration_states
    if name not in cs:
        raise ConfigError(f"unknown state {name!r}; choose from {sorted(cs)}")
    return (TRIPLET if name.startswith("T") else SINGLET), cs[name]


def density_artifacts(solver, cfg, names, prefix=""):
    out = {}
    for name in names:
        sector, vec = _state_vector(solver, name.strip())
        g = solver.charge_density(sector, vec, cfg["solver"]["n_grid"])
        X, Y = np.meshgrid(g.x, g.y, indexing="ij")
        rows = np.column_stack([X.ravel(), Y.ravel(), g.rho.ravel()])
        tag = name.strip().replace("@", "_V")
        out[f"{prefix}density_{tag}.csv"] = csv_text(HEADERS["density"], rows.tolist())
    return out


def compute_effective(cfg: RunConfig, args=None, solver=None):
    eff, _ = effective_of(cfg, solver)
    e = cfg["effective"]
    if math.isfinite(e["V"]):
        grid = [e["V"]]
    else:
        if e["V_points"] < 1:
            raise ConfigError("[effective] V_points must be positive")
        grid = np.linspace(e["V_min"], e["V_max"], e["V_points"]).tolist()
    rows = [effective_row(eff, v * eff.Delta0) for v in grid]
    scalars = _eff_dict(eff)
    if len(rows) == 1:
        scalars.update(dict(zip(HEADERS["effective"], rows[0])))
    arts = {"effective.csv": csv_text(HEADERS["effective"], rows), "effective.json": json_text(_eff_dict(eff))}
    return scalars, arts


def _model_trace(eff, schedule, initial, samples, horizontal=em.SH):
    """Four-level configuration-model evolution; weights ``p_bd`` per configuration.

    Returns the CSV rows and the weight on the ``horizontal`` configuration.
    """
    w = np.array([eff.p_S, 1 - eff.p_S, eff.p_T, 1 - eff.p_T])
    total = sum(dt for _, dt in schedule)
    grid = np.linspace(0.0, total, samples)
    psi = np.asarray(initial, complex)
    rows, horiz, t0 = [], [], 0.0
    for n, (V, dt) in enumerate(schedule):
        E, U = np.linalg.eigh(em.config_hamiltonian(eff, V))
        last = n == len(schedule) - 1
        inside = (grid >= t0) & ((grid <= t0 + dt) if last else (grid < t0 + dt))
        a = U.conj().T @ psi
        for t in grid[inside]:
            phi = U @ (a * np.exp(-1j * E * (t - t0) / HBAR))
            p = np.abs(phi) ** 2
            pbd = float(p @ w + 2 * eff.a_S * np.real(np.conj(phi[em.SV]) * phi[em.SH]))
            nrm = float(np.linalg.norm(phi))
            rows.append([float(t), nrm**2 - pbd, pbd, nrm])
            horiz.append(float(p[horizontal]))
        psi = U @ (a * np.exp(-1j * E * dt / HBAR))
        t0 += dt
    return rows, np.array(horiz)


def compute_filter(cfg: RunConfig, args=None, solver=None):
    mode = getattr(args, "mode", "exact") if args is not None else "exact"
    protocol = getattr(args, "protocol", "release") if args is not None else "release"
    spin = getattr(args, "spin", "singlet") if args is not None else "singlet"
    shots = getattr(args, "shots", 0) if args is not None else 0
    s = cfg["solver"]
    eff, solver = effective_of(cfg, solver) if mode == "model" else effective_of(cfg, solver or solver_of(cfg))
    V = cfg["effective"]["V"]
    V = 0.0 if not math.isfinite(V) else V * eff.Delta0
    if protocol == "fig4b":
        schedule = em.freeze_release_schedule(eff)
    else:
        if not s["periods"] > 0:
            raise ConfigError("[solver] periods must be positive")
        schedule = [(V, s["periods"] * eff.t_R)]
    samples = s["samples"]
    if samples < 2:
        raise ConfigError("[solver] samples must be at least 2")
    if mode == "model":
        init = np.zeros(4, complex)
        init[em.TV if spin == "triplet" else em.SV] = 1.0
        if protocol == "fig4b" and spin == "singlet":
            th = em.mixing_angle(eff, 3.0 * eff.Delta0)
            init[:] = 0
            init[em.SV], init[em.SH] = np.cos(th), np.sin(th)
        rows, horizontal = _model_trace(eff, schedule, init, samples,
                                        em.TH if spin == "triplet" else em.SH)
    else:
        sector = TRIPLET if spin == "triplet" else SINGLET
        if protocol == "fig4b" and spin == "singlet":
            init = solver.spectrum(3.0 * eff.Delta0, SINGLET, 1).vectors[:, 0]
        else:
            init = solver.configuration_states["Tv" if spin == "triplet" else "Sv"]
        ref = solver.configuration_states["Th" if spin == "triplet" else "Sh"]
        tr = solver.evolve_piecewise(init, schedule, sector, samples, reference=[ref])
        rows = np.column_stack([tr.t, tr.P_ac, tr.P_bd, tr.norm]).tolist()
        horizontal = np.abs(tr.amplitudes[:, 0]) ** 2
    arr = np.array(rows)
    t_R = eff.t_R
    i_R = int(np.argmin(np.abs(arr[:, 0] - t_R)))
    scalars = {"t_R": t_R, "P_bd_at_t_R": arr[i_R, 2], "P_bd_max": float(arr[:, 2].max()),
               "norm_deviation": float(np.max(np.abs(arr[:, 3] - 1.0)))}
    scalars["horizontal_at_t_R"] = float(horizontal[i_R])
    meta = {**scalars, "mode": mode, "protocol": protocol, "spin": spin,
            "schedule": [[V_, dt] for V_, dt in schedule]}
    if shots:
        rng = np.random.default_rng(cfg.seed)
        outcomes = em.sample_filter(em.initialize_plus(), shots, rng)
        meta["readout_plus_state"] = {"shots": shots, "singlet": int(outcomes.sum())}
        meta["seed"] = cfg.seed
    return scalars, {"filter.csv": csv_text(HEADERS["filter"], rows), "filter.json": json_text(meta)}


def couplings_of(cfg: RunConfig, eff: EffectiveParams):
    g = cfg["gate"]
    if math.isfinite(g["u0"]) != math.isfinite(g["u1"]):
        raise ConfigError("[gate] u0 and u1 must be given together")
    try:
        if math.isfinite(g["u0"]):
            return gt.CouplingParams(g["u0"], g["u1"], g["d"], g["L"])
        return gt.coupling_energies(g["L"], g["d"], material_of(cfg))
    except ValueError as exc:
        raise ConfigError(f"[gate] {exc}") from None


def compute_gate(cfg: RunConfig, args=None, solver=None):
    eff, _ = effective_of(cfg, solver)
    c = couplings_of(cfg, eff)
    g = cfg["gate"]
    t_I = gt.entangling_time(c)
    U_rot = gt.gate_unitary(eff, c, t_I, rotating=True)
    U_lab = gt.gate_unitary(eff, c, t_I, rotating=False)
    corr = gt.cz_correction(U_rot)
    psi = gt.qubit_block(U_rot) @ np.full(4, 0.5)
    schedule = gt.gate_schedule(eff, c, V_freeze=g["V_freeze"] * eff.Delta0)
    traj = gt.full_dynamics(eff, c, schedule, samples=g["samples"])
    fid = gt.gate_fidelity(U_lab, traj.unitary)
    phases = gt.qubit_phases(U_rot)
    try:
        oracle = gt.point_charge_oracle(g["L"], g["d"], material_of(cfg))
        oracle_d = {"u0": oracle.u0, "u1": oracle.u1}
    except ValueError:
        oracle_d = None
    scalars = {"u0": c.u0, "u1": c.u1, "u0_plus_u1": c.total, "t_R": eff.t_R, "t_I": t_I,
               "total_time": 2 * eff.t_R + t_I, "concurrence": gt.concurrence(psi),
               "fidelity_vs_exact": fid, "cz_invariant": gt.cz_invariant(phases)}
    meta = {**scalars,
            "phase_table": dict(zip(("00", "01", "10", "11"), phases)),
            "cz_correction": {"alpha_left": corr.alpha_left, "alpha_right": corr.alpha_right,
                              "global_phase": corr.global_phase},
            "point_charge_oracle": oracle_d, "V_freeze_ueV": g["V_freeze"] * eff.Delta0,
            "effective": _eff_dict(eff)}
    rows = np.column_stack([traj.t, traj.states.real, traj.states.imag]).tolist()
    return scalars, {"gate.json": json_text(meta), "gate_trajectory.csv": csv_text(HEADERS["gate"], rows)}


def compute_cluster(cfg: RunConfig, args=None, solver=None):
    k = cfg["cluster"]
    try:
        row = gt.CouplingParams(k["u0_row"], k["u1_row"])
        col = gt.CouplingParams(k["u0_col"], k["u1_col"])
        arr = cl.build_cluster(k["rows"], k["cols"], row, col, correct=k["correct"])
    except ValueError as exc:
        raise ConfigError(f"[cluster] {exc}") from None
    rep = cl.stabilizer_report(arr)
    chk = cl.asymmetric_gate_check(row, col)
    scalars = {"fidelity": arr.fidelity(), "min_stabilizer": float(rep.values.min()),
               "n_qubits": arr.n_qubits}
    meta = {**scalars, "rows": k["rows"], "cols": k["cols"], "stabilizers": rep.values.tolist(),
            "row_col_gates_identical": chk.identical, "flagged_bonds": list(chk.flagged)}
    return scalars, {"cluster.json": json_text(meta)}


COMPUTE = {
    "materials": compute_materials,
    "solve": compute_solve,
    "effective": compute_effective,
    "filter": compute_filter,
    "gate": compute_gate,
    "cluster": compute_cluster,
}


# --- sweep ------------------------------------------------------------------------


def resolve_parameter(target, name):
    if target not in TARGET_SECTIONS:
        raise ConfigError(f"unknown sweep target {target!r}; choose from {sorted(TARGET_SECTIONS)}")
    if "." in name:
        section, key = name.split(".", 1)
        if section not in TARGET_SECTIONS[target]:
            raise ConfigError(f"section [{section}] is not used by target {target!r}")
        return section, canonical_key(section, key)
    for section in TARGET_SECTIONS[target]:
        canon = {k.lower(): k for k in SCHEMA[section]}.get(name.lower())
        if canon:
            return section, canon
    raise ConfigError(f"parameter {name!r} is not in the config schema of target {target!r}")


def _sweep_point(cfg: RunConfig, target, section, key, value):
    c = cfg.copy()
    typ = SCHEMA[section][key][0]
    try:
        c.set(section, key, typ(value) if typ is not int else int(round(value)))
        scalars, _ = COMPUTE[target](c, None)
        return scalars, "ok"
    except (ConfigError, ConvergenceError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return {}, f"error:{type(exc).__name__}:{exc}".replace(",", ";").replace("\n", " ")


def sweep(cfg: RunConfig, target, parameter, values, jobs=1):
    """One row per value, in input order; failing points carry their error in ``status``."""
    if not values:
        raise ConfigError("empty sweep value list")
    section, key = resolve_parameter(target, parameter)
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, *zip(*[(cfg, target, section, key, v) for v in values])))
    else:
        results = [_sweep_point(cfg, target, section, key, v) for v in values]
    columns = []
    for scalars, _ in results:
        for k in scalars:
            if k not in columns and k != "runtime_s":
                columns.append(k)
    header = [key] + columns + ["status"]
    typ = SCHEMA[section][key][0]
    shown = [int(round(v)) if typ is int else v for v in values]
    rows = [[v] + [s.get(k, float("nan")) for k in columns] + [st] for v, (s, st) in zip(shown, results)]
    return header, rows


# --- figure reproductions ---------------------------------------------------------


def _fig_solver(cfg, L):
    c = cfg.copy()
    c["solver"]["L"] = L
    return c, solver_of(c)


def reproduce(cfg: RunConfig, figure: str):
    """Canned configurations for each figure; returns ``(scalars, artifacts)``."""
    if figure in ("fig2a", "fig2b"):
        c, solver = _fig_solver(cfg, 400.0 if figure == "fig2a" else 800.0)
        c["solver"]["levels"] = max(c["solver"]["levels"], 6)
        t0 = time.perf_counter()
        eff = solver.effective_params()
        Vs = [v * eff.Delta0 for v in parse_values("-3,-2.5,...,3")]
        scalars, arts = compute_solve(c, None, solver, Vs, prefix=figure + "_")
        scalars["runtime_s"] = time.perf_counter() - t0
        log.info("%s finished in %.1f s", figure, scalars["runtime_s"])
        return scalars, arts
    if figure == "fig3":
        c, solver = _fig_solver(cfg, 400.0)
        eff = solver.effective_params()
        arts = density_artifacts(solver, c, ["S1", "Sv", "Sh", "S1@3"], prefix="fig3_")
        return _eff_dict(eff), arts
    if figure == "fig4a":
        c, solver = _fig_solver(cfg, 400.0)
        eff = solver.effective_params()
        Vs = [v * eff.Delta0 for v in parse_values("-3,-2.75,...,3")]
        rows = solver.compare_spectra(Vs, eff)
        dev = np.abs(rows[:, 1:5] - rows[:, 5:9]) / eff.Delta0
        inside = np.abs(rows[:, 0]) <= 2 * eff.Delta0 + 1e-9
        scalars = {**_eff_dict(eff), "max_dev_over_Delta0_within_2": float(dev[inside].max()),
                   "max_dev_over_Delta0": float(dev.max())}
        return scalars, {"fig4a.csv": csv_text(HEADERS["fig4a"], rows.tolist()), "fig4a.json": json_text(scalars)}
    if figure == "fig4b":
        c, solver = _fig_solver(cfg, 400.0)
        eff = solver.effective_params()
        init = solver.spectrum(3.0 * eff.Delta0, SINGLET, 1).vectors[:, 0]
        samples = c["solver"]["samples"]
        sched = em.freeze_release_schedule(eff)
        total = sum(dt for _, dt in sched)
        frozen = solver.evolve_piecewise(init, sched, SINGLET, samples)
        free = solver.evolve_piecewise(init, [(0.0, total)], SINGLET, samples)
        t_on, t_off = sched[0][1], sched[0][1] + sched[1][1]
        hold = (frozen.t >= t_on) & (frozen.t <= t_off)
        scalars = {**_eff_dict(eff), "t_freeze_on": t_on, "t_freeze_off": t_off,
                   "plateau_spread": float(np.ptp(frozen.P_ac[hold]))}
        f = lambda tr: np.column_stack([tr.t, tr.P_ac, tr.P_bd, tr.norm]).tolist()  # noqa: E731
        return scalars, {"fig4b_freeze.csv": csv_text(HEADERS["filter"], f(frozen)),
                         "fig4b_free.csv": csv_text(HEADERS["filter"], f(free)),
                         "fig4b.json": json_text({**scalars, "schedule": [list(s) for s in sched]})}
    if figure == "fig4c":
        c, solver = _fig_solver(cfg, 400.0)
        eff = solver.effective_params()
        rows = []
        for v in parse_values("0,0.25,...,4"):
            V = v * eff.Delta0
            s1 = solver.spectrum(V, SINGLET, 1).energies[0]
            t = solver.spectrum(V, TRIPLET, 2).energies[0]
            rows.append([V, v, t - s1, em.exchange_J(eff, V)])
        return _eff_dict(eff), {"fig4c.csv": csv_text(HEADERS["fig4c"], rows)}
    raise ConfigError(f"unknown figure {figure!r}")


FIGURES = ("fig2a", "fig2b", "fig3", "fig4a", "fig4b", "fig4c")


# --- argument parsing -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _eff_flags(parser):
    grp = parser.add_argument_group("effective parameters (skip the exact solver when all three are given)")
    grp.add_argument("--Delta0", type=float, help="ueV")
    grp.add_argument("--p-S", type=float)
    grp.add_argument("--p-T", type=float)


def build_parser():
    p = _Parser(prog="squaredot", description="Singlet-triplet qubits in square quantum dots.")
    p.add_argument("--config", help="INI file (default: $QDOT_CONFIG or ./qdot.ini)")
    p.add_argument("--seed", type=int, help="override [run] seed")
    p.add_argument("--out", help="output directory (overrides [run] output_dir)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("materials", help="material constants and unit scales")

    s = sub.add_parser("solve", help="exact spectrum at a list of gate voltages")
    s.add_argument("--L", type=float)
    s.add_argument("--n-max", type=int)
    s.add_argument("--quad-order", type=int)
    s.add_argument("--levels", type=int)
    s.add_argument("--Vs", help="gate voltages, e.g. '-3,-2,...,3' or '-3:3:0.5'")
    s.add_argument("--V-unit", choices=("ueV", "delta0"), default="ueV")
    s.add_argument("--density", help="comma list of states for density CSVs (S1,Sv,Sh,Tv,Th,S1@3)")

    e = sub.add_parser("effective", help="effective-model spectrum, mixing angle and J versus V")
    _eff_flags(e)
    e.add_argument("--V", type=float, help="single gate voltage in units of Delta0")

    f = sub.add_parser("filter", help="singlet-triplet filtering trace")
    _eff_flags(f)
    f.add_argument("--mode", choices=("exact", "model"), default="exact")
    f.add_argument("--protocol", choices=("release", "fig4b"), default="release")
    f.add_argument("--spin", choices=("singlet", "triplet"), default="singlet")
    f.add_argument("--V", type=float, help="release voltage in units of Delta0")
    f.add_argument("--periods", type=float, help="duration in units of t_R")
    f.add_argument("--samples", type=int)
    f.add_argument("--shots", type=int, default=0, help="sample readouts of |+> with the run seed")

    g = sub.add_parser("gate", help="capacitive two-qubit gate")
    _eff_flags(g)
    g.add_argument("--L", type=float)
    g.add_argument("--d", type=float)
    g.add_argument("--u0", type=float)
    g.add_argument("--u1", type=float)
    g.add_argument("--V-freeze", type=float, help="in units of Delta0")

    c = sub.add_parser("cluster", help="cluster state on a small array")
    c.add_argument("--rows", type=int)
    c.add_argument("--cols", type=int)
    for name in ("u0-row", "u1-row", "u0-col", "u1-col"):
        c.add_argument("--" + name, type=float)

    w = sub.add_parser("sweep", help="scan one config parameter of a target subcommand")
    w.add_argument("--target", choices=sorted(TARGET_SECTIONS))
    w.add_argument("--parameter")
    w.add_argument("--values", help="'a,b,c', 'a,b,...,z' or 'start:stop:step'")
    _eff_flags(w)

    r = sub.add_parser("reproduce", help="canned figure reproductions")
    r.add_argument("figure", choices=FIGURES)
    r.add_argument("--n-max", type=int)
    r.add_argument("--quad-order", type=int)
    return p


# flag -> (section, key); applied when the flag was given
_OVERRIDES = {
    "solve": {"L": ("solver", "L"), "n_max": ("solver", "n_max"), "quad_order": ("solver", "quadrature_order"),
              "levels": ("solver", "levels")},
    "effective": {"Delta0": ("effective", "Delta0"), "p_S": ("effective", "p_S"),
                  "p_T": ("effective", "p_T"), "V": ("effective", "V")},
    "filter": {"Delta0": ("effective", "Delta0"), "p_S": ("effective", "p_S"), "p_T": ("effective", "p_T"),
               "V": ("effective", "V"), "periods": ("solver", "periods"), "samples": ("solver", "samples")},
    "gate": {"Delta0": ("effective", "Delta0"), "p_S": ("effective", "p_S"), "p_T": ("effective", "p_T"),
             "L": ("gate", "L"), "d": ("gate", "d"), "u0": ("gate", "u0"), "u1": ("gate", "u1"),
             "V_freeze": ("gate", "V_freeze")},
    "cluster": {"rows": ("cluster", "rows"), "cols": ("cluster", "cols"), "u0_row": ("cluster", "u0_row"),
                "u1_row": ("cluster", "u1_row"), "u0_col": ("cluster", "u0_col"),
                "u1_col": ("cluster", "u1_col")},
    "sweep": {"Delta0": ("effective", "Delta0"), "p_S": ("effective", "p_S"), "p_T": ("effective", "p_T"),
              "target": ("sweep", "target"), "parameter": ("sweep", "parameter"),
              "values": ("sweep", "values")},
    "reproduce": {"n_max": ("solver", "n_max"), "quad_order": ("solver", "quadrature_order")},
}


def configure(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.set("run", "seed", args.seed)
    if args.out is not None:
        cfg.set("run", "output_dir", args.out)
    for flag, (section, key) in _OVERRIDES.get(args.command, {}).items():
        val = getattr(args, flag, None)
        if val is not None:
            cfg.set(section, key, val)
    return cfg


def dispatch(args, cfg: RunConfig):
    if args.command == "sweep":
        sw = cfg["sweep"]
        if not sw["target"] or not sw["parameter"]:
            raise ConfigError("sweep needs a target and a parameter")
        values = parse_values(sw["values"])
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        header, rows = sweep(cfg, sw["target"], sw["parameter"], values, args.jobs)
        return {"sweep.csv": csv_text(header, rows)}
    if args.command == "reproduce":
        return reproduce(cfg, args.figure)[1]
    return COMPUTE[args.command](cfg, args)[1]


_LIST_FLAGS = ("--Vs", "--values")


def _glue_lists(argv):
    """``--Vs -3,-2`` would read as an option; rewrite to ``--Vs=-3,-2``."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _LIST_FLAGS and i + 1 < len(argv):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv=None) -> int:
    argv = _glue_lists(sys.argv[1:] if argv is None else list(argv))
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = configure(args)
        artifacts = dispatch(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    write_artifacts(cfg.output_dir, artifacts)
    for name in sorted(artifacts):
        print(cfg.output_dir / name)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
