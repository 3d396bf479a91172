"""Command-line front end.

Every rate and frequency flag is in units of gamma0 and every time flag in
units of 1/gamma0.  Settings resolve as built-in defaults, then the key=value
config file (``--config`` or ``$JCH_CONFIG``), then explicit flags.

Exit status: 0 on success (including sweeps with flagged cells), 1 on invalid
input, 2 when a computation fails to converge.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import os
import sys
from pathlib import Path

import numpy as np

from .dynamics import InitialAmplitudes, coherence_series
from .errors import ConvergenceError, JCHError, ParameterError, TruncationError
from .formats import FORMATS, OutputError, dumps_json
from .model import ModelParams, validate_params
from .nonmarkov import ScanSpec, nonmarkovianity
from .oracle import (
    OracleConfig,
    compare_oracle,
    exact_evolution,
    identity_deviations,
    quadrature_cumulative,
    quadrature_rates,
    required_fock_cutoff,
)
from .rates import TruncationSpec, series_for
from .sweep import PRESETS, Axis, GridResult, SweepSpec, default_jobs, preset, preset_panel_param, run, serialize_result

CONFIG_ENV = "JCH_CONFIG"
MODEL_KEYS = ("gamma0", "lambda", "delta", "omega_ph", "g_p", "omega0")

UNITS_NOTE = (
    "Units: gamma0 = 1 sets the scale. Rates and frequencies (--gamma0, --lambda, "
    "--delta, --omega-ph, --omega0) are in units of gamma0; times (--t-max, "
    "--horizon) in units of 1/gamma0; --g-p is dimensionless."
)


class _Parser(argparse.ArgumentParser):
    """argparse with exit status 1 (not 2) for usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class UsageError(ValueError):
    pass


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt(group, flag: str, conv, default, help: str, **kw):
    """Flag whose parsed default is None so config values can fill the gap."""
    dest = flag.lstrip("-").replace("-", "_")
    if conv is _bool:
        action = group.add_argument(flag, dest=dest, action="store_const", const=True, default=None, help=help)
    else:
        action = group.add_argument(flag, dest=dest, type=conv, default=None, help=help, **kw)
    action.setting = (conv, default)


def _parents():
    model = _Parser(add_help=False)
    g = model.add_argument_group("model parameters (units of gamma0)")
    _opt(g, "--gamma0", float, 1.0, "qubit-cavity coupling strength, the unit of frequency (default 1)")
    _opt(g, "--lambda", float, 1.0, "Lorentzian spectral width [gamma0] (default 1)")
    _opt(g, "--delta", float, 0.0, "qubit-cavity detuning [gamma0] (default 0)")
    _opt(g, "--omega-ph", float, 10.0, "phonon frequency Omega [gamma0] (default 10)")
    _opt(g, "--g-p", float, 0.0, "dimensionless Holstein coupling (default 0)")
    _opt(g, "--omega0", float, 0.0, "qubit splitting [gamma0]; drops out in the rotating frame (default 0)")
    n = model.add_argument_group("numerics")
    _opt(n, "--rel-tol", float, 1e-12, "sideband series truncation tolerance (default 1e-12)")
    _opt(n, "--max-terms", int, 512, "maximum number of phonon sidebands (default 512)")
    io = model.add_argument_group("input/output")
    io.add_argument("--config", help=f"key=value config file (default ${CONFIG_ENV})")
    _opt(io, "--out", str, None, "output file or directory (default stdout)")
    _opt(io, "--format", str, None, f"one of {', '.join(FORMATS)} (default from --out suffix, else csv)")
    return model


def _state_opts(p):
    g = p.add_argument_group("initial state a|0> + b|1> (normalised on input)")
    _opt(g, "--a", complex, complex(2**-0.5), "excited-state amplitude, e.g. 0.6 or 0.6+0.1j (default 1/sqrt2)")
    _opt(g, "--b", complex, complex(2**-0.5), "ground-state amplitude (default 1/sqrt2)")


def _nm_opts(p, horizon=50.0):
    g = p.add_argument_group("non-Markovianity")
    _opt(g, "--horizon", float, horizon, f"integration horizon T [1/gamma0] (default {horizon:g})")
    _opt(g, "--fixed-horizon", _bool, False, "do not extend T until the analytic tail bound is met")
    _opt(g, "--max-horizon", float, 5000.0, "largest horizon reached by extension [1/gamma0] (default 5000)")
    _opt(g, "--tail-tol", float, 1e-6, "tolerance on the neglected tail of N (default 1e-6)")
    _opt(g, "--scan-step", float, None, "sign-scan step [1/gamma0] (default automatic)")
    _opt(g, "--root-tol", float, None, "bisection tolerance on sign changes [1/gamma0] (default 1e-10 T)")


def _time_opts(p, t_max, samples):
    g = p.add_argument_group("time grid")
    _opt(g, "--t-max", float, t_max, f"final time [1/gamma0] (default {t_max:g})")
    _opt(g, "--samples", int, samples, f"number of equally spaced times from 0 (default {samples})")


def build_parser() -> argparse.ArgumentParser:
    """The ``jch`` parser; ``parser.commands`` maps command paths to subparsers."""
    common = _parents()
    fmt = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog="jch", description=__doc__.split("\n\n")[0], epilog=UNITS_NOTE, formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    commands = {}

    def add(name, help):
        commands[(name,)] = sub.add_parser(name, parents=[common], help=help, description=help, epilog=UNITS_NOTE)
        return commands[(name,)]

    p = add("rates", "decay rate Gamma, Lamb shift S and their integrals gamma, Phi over a time grid")
    _time_opts(p, 10.0, 201)

    p = add("coherence", "l1 coherence C(t) of a pure initial state")
    _time_opts(p, 50.0, 1001)
    _state_opts(p)

    p = add("nonmarkov", "coherence-backflow measure N with its rate-sign intervals")
    _nm_opts(p)
    _state_opts(p)

    p = add("sweep", "coherence series or N over a parameter grid")
    g = p.add_argument_group("grid")
    _opt(g, "--preset", str, None, f"named figure grid: {', '.join(PRESETS)}")
    _opt(g, "--mode", str, None, "coherence_vs_time or nm_grid (explicit axes only)")
    _opt(g, "--axis1", str, None, "NAME:LO:HI:COUNT or NAME=v1,v2,...; NAME in lambda, delta, g_p, omega_ph, gamma0")
    _opt(g, "--axis2", str, None, "second axis, same syntax")
    _opt(g, "--grid-count", int, 60, "points per axis for the fig2/fig3 presets (default 60)")
    _opt(g, "--samples", int, 1001, "time samples for coherence sweeps (default 1001)")
    _opt(g, "--jobs", int, None, "worker processes (default: available cores)")
    _nm_opts(p)
    _state_opts(p)

    oracle = add("oracle", "independent brute-force checks of the analytic results")
    osub = oracle.add_subparsers(dest="oracle", required=True, metavar="ORACLE")

    def oadd(name, help):
        q = osub.add_parser(name, parents=[common], help=help, description=help, epilog=UNITS_NOTE)
        commands[("oracle", name)] = q
        _opt(q, "--compare", _bool, False, "also report the analytic values and the deviations")
        return q

    q = oadd("quadrature", "Gamma, S, gamma, Phi by adaptive quadrature of the bath correlation function")
    _time_opts(q, 5.0, 11)
    q = oadd("exact", "coherence from brute-force evolution of qubit, discretised cavity and phonon")
    _time_opts(q, 20.0, 201)
    _state_opts(q)
    g = q.add_argument_group("truncation")
    _opt(g, "--modes", int, 300, "number of discretised cavity modes (default 300)")
    _opt(g, "--window", float, None, "half-width of the mode window [gamma0] (default 25 lambda)")
    _opt(g, "--n-ph-max", int, None, "phonon Fock cutoff (default from g_p)")
    _opt(g, "--dt", float, None, "integrator step [1/gamma0] (default 0.09/||H||)")
    _opt(g, "--scaling", _bool, False, "with --compare, repeat at gamma0/2 and report the deviation ratio")
    q = oadd("polaron", "operator identities of the polaron transform on a truncated Fock space")
    _opt(q, "--n-ph-max", int, 40, "phonon Fock cutoff (default 40)")
    parser.commands = commands
    return parser


def _settings(parser: argparse.ArgumentParser) -> dict[str, tuple]:
    return {a.dest: a.setting for a in parser._actions if hasattr(a, "setting")}


# --- configuration ----------------------------------------------------------------


def read_config(path: str | os.PathLike) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    out = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{no}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _resolve(parser, ns: argparse.Namespace, cfg: dict[str, str]) -> argparse.Namespace:
    """Fill flags left unset from ``cfg``, then from built-in defaults.

    Keys meant for other subcommands are ignored, so one file can serve all.
    """
    known = set().union(*(_settings(p) for p in parser.commands.values()))
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
    path = (ns.command, ns.oracle) if ns.command == "oracle" else (ns.command,)
    for dest, (conv, default) in _settings(parser.commands[path]).items():
        if getattr(ns, dest) is not None:
            continue
        if dest in cfg:
            try:
                value = conv(cfg[dest])
            except ValueError as exc:
                raise ParameterError(dest, f"config value for {dest}: {exc}") from None
        else:
            value = default
        setattr(ns, dest, value)
    return ns


def _model(ns) -> ModelParams:
    return ModelParams.from_dict({k: getattr(ns, k) for k in MODEL_KEYS})


def _trunc(ns) -> TruncationSpec:
    return TruncationSpec(rel_tol=ns.rel_tol, max_terms=ns.max_terms)


def _init(ns) -> InitialAmplitudes:
    return InitialAmplitudes.normalized(ns.a, ns.b)


def _times(ns) -> np.ndarray:
    if not ns.t_max > 0:
        raise ParameterError("t_max", f"t_max must be positive (got {ns.t_max})")
    if ns.samples < 2:
        raise ParameterError("samples", f"samples must be >= 2 (got {ns.samples})")
    return np.linspace(0.0, ns.t_max, ns.samples)


def _series_result(name: str, t, fields: dict, params: dict, converged=True) -> GridResult:
    return GridResult(
        mode=name,
        axes=[("t", np.asarray(t, dtype=float).tolist())],
        fields={k: np.asarray(v, dtype=float) for k, v in fields.items()},
        converged=np.array(bool(converged)),
        errors=np.array("", dtype=object),
        params=params,
        cell_ndim=0,
        name=name,
    )


# --- output -----------------------------------------------------------------------


def _format(ns) -> str:
    if ns.format:
        fmt = ns.format.lower()
    elif ns.out and Path(ns.out).suffix.lstrip(".").lower() in FORMATS:
        fmt = Path(ns.out).suffix.lstrip(".").lower()
    else:
        fmt = "csv"
    if fmt not in FORMATS:
        raise UsageError(f"unsupported format {fmt!r}; choose from {', '.join(FORMATS)}")
    return fmt


def _digest(res: GridResult) -> str:
    blob = dumps_json({"name": res.name, "axes": res.axes, "params": res.params})
    return hashlib.sha256(blob).hexdigest()[:12]


def _is_dir(out: str) -> bool:
    return out.endswith(("/", os.sep)) or Path(out).is_dir()


def _emit(res: GridResult, ns, file_name: str | None = None) -> None:
    fmt = _format(ns)
    data = serialize_result(res, fmt)
    if not ns.out:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    path = Path(ns.out)
    if _is_dir(ns.out):
        path = path / (file_name or f"{res.name}-{_digest(res)}.{fmt}")
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    print(f"wrote {path}", file=sys.stderr)


# --- subcommands ------------------------------------------------------------------


def cmd_rates(ns) -> int:
    p = validate_params(_model(ns))
    t = _times(ns)
    s = series_for(p, _trunc(ns))
    r, c = s.rates(t), s.cumulative(t)
    fields = {"Gamma": r.real, "S": r.imag, "gamma": c.real, "Phi": c.imag}
    _emit(_series_result("rates", t, fields, {"fixed": p.to_dict(), "sidebands": s.L}), ns)
    return 0


def cmd_coherence(ns) -> int:
    p = validate_params(_model(ns))
    init = _init(ns)
    t = _times(ns)
    c = coherence_series(init, p, t, _trunc(ns))
    _emit(_series_result("coherence", t, {"C_l1": c}, {"fixed": p.to_dict()}), ns)
    return 0


def _scan(ns) -> ScanSpec:
    return ScanSpec(h=ns.scan_step, root_tol=ns.root_tol)


def cmd_nonmarkov(ns) -> int:
    p = validate_params(_model(ns))
    rep = nonmarkovianity(
        p,
        _init(ns),
        ns.horizon,
        _trunc(ns),
        _scan(ns),
        tail_tol=ns.tail_tol,
        extend_horizon=not ns.fixed_horizon,
        max_horizon=ns.max_horizon,
    )
    contrib = iter(rep.contributions)
    res = GridResult(
        mode="nonmarkov",
        axes=[("interval", list(range(len(rep.intervals))))],
        fields={
            "t_start": np.array([iv.t_start for iv in rep.intervals]),
            "t_end": np.array([iv.t_end for iv in rep.intervals]),
            "negative": np.array([int(iv.negative) for iv in rep.intervals], dtype=int),
            "contribution": np.array([next(contrib) if iv.negative else 0.0 for iv in rep.intervals]),
        },
        converged=np.array(rep.converged),
        errors=np.array("", dtype=object),
        params={
            "fixed": p.to_dict(),
            "N": rep.N,
            "horizon": rep.horizon,
            "tail_bound": rep.tail_bound,
        },
        cell_ndim=0,
        name="nonmarkov",
    )
    _emit(res, ns)
    print(
        f"N = {rep.N:.12g} over T = {rep.horizon:.6g} "
        f"({len(rep.negative_intervals)} negative-rate interval(s), tail bound {rep.tail_bound:.3g})",
        file=sys.stderr,
    )
    if not rep.converged:
        raise ConvergenceError(
            f"tail bound {rep.tail_bound:.3g} above --tail-tol {ns.tail_tol:g} at T = {rep.horizon:g}"
        )
    return 0


def parse_axis(text: str) -> Axis:
    """``name:lo:hi:count`` (``(lo`` for an open lower end) or ``name=v1,v2,...``."""
    text = text.strip()
    try:
        if "=" in text:
            name, vals = text.split("=", 1)
            return Axis.of(name.strip(), [float(v) for v in vals.split(",") if v.strip()])
        name, lo, hi, count = text.split(":")
        open_low = lo.startswith("(")
        return Axis.span(name.strip(), float(lo.lstrip("([")), float(hi.rstrip(")]")), int(count), open_low)
    except ValueError as exc:
        if isinstance(exc, ParameterError):
            raise
        raise UsageError(f"bad axis {text!r}; use NAME:LO:HI:COUNT or NAME=v1,v2,...") from None


def _explicit_flags(argv: list[str]) -> set[str]:
    return {a.split("=", 1)[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}


def _sweep_specs(ns, given: set[str], cfg: dict) -> list[SweepSpec]:
    common = dict(
        init=_init(ns),
        trunc=_trunc(ns),
        scan=_scan(ns),
        extend_horizon=not ns.fixed_horizon,
        max_horizon=ns.max_horizon,
        tail_tol=ns.tail_tol,
    )
    chosen = given | set(cfg)
    if ns.preset:
        if ns.axis1 or ns.axis2 or ns.mode:
            raise UsageError("--preset cannot be combined with --mode/--axis1/--axis2")
        if ns.preset not in PRESETS:
            raise ParameterError("preset", f"unknown preset {ns.preset!r}; choose from {', '.join(PRESETS)}")
        panel_key = preset_panel_param(ns.preset)
        panel = getattr(ns, panel_key) if panel_key in chosen else None
        kw = dict(common)
        if ns.preset != "fig1":
            kw["count"] = ns.grid_count
        if "horizon" in chosen:
            kw["time_horizon"] = ns.horizon
        if "samples" in chosen and ns.preset == "fig1":
            kw["t_samples"] = ns.samples
        specs = preset(ns.preset, panel, **kw)
        out = []
        for spec in specs:
            swept = {a.name for a in spec.axes} | {panel_key}
            over = {k: getattr(ns, k) for k in MODEL_KEYS if k in chosen and k not in swept}
            out.append(dataclasses.replace(spec, fixed=spec.fixed.replace(**over)) if over else spec)
        return out
    if not ns.axis1:
        raise UsageError("sweep needs --preset or --axis1")
    axis2 = parse_axis(ns.axis2) if ns.axis2 else None
    mode = ns.mode or ("nm_grid" if axis2 is not None else "coherence_vs_time")
    spec = SweepSpec(
        mode=mode,
        axis1=parse_axis(ns.axis1),
        axis2=axis2,
        fixed=_model(ns),
        time_horizon=ns.horizon,
        t_samples=ns.samples,
        **common,
    )
    return [spec]


def _summarise(res: GridResult) -> None:
    failed = res.failed_cells
    unconverged = int(np.count_nonzero(~np.asarray(res.converged, dtype=bool) & (res.errors == "")))
    if not (failed or unconverged):
        return
    total = int(np.asarray(res.errors).size)
    print(f"{res.name}: {failed} of {total} cell(s) failed, {unconverged} unconverged", file=sys.stderr)
    for msg in sorted({str(e) for e in np.asarray(res.errors).ravel() if e})[:5]:
        print(f"  {msg}", file=sys.stderr)


def cmd_sweep(ns, given: set[str], cfg: dict) -> int:
    specs = [s.validate() for s in _sweep_specs(ns, given, cfg)]
    fmt = _format(ns)
    if len(specs) > 1 and ns.out and not _is_dir(ns.out):
        raise UsageError(
            f"preset {ns.preset} has {len(specs)} panels; give a directory to --out "
            f"or select one panel with --{preset_panel_param(ns.preset).replace('_', '-')}"
        )
    if len(specs) > 1 and not ns.out:
        ns.out = "."
    jobs = default_jobs() if ns.jobs is None else ns.jobs
    if jobs < 1:
        raise ParameterError("jobs", f"jobs must be >= 1 (got {jobs})")
    for spec in specs:
        res = run(spec, jobs)
        _summarise(res)
        _emit(res, ns, spec.file_name(fmt))
    return 0


def cmd_oracle(ns) -> int:
    p = validate_params(_model(ns), allow_decoupled=True)
    if ns.oracle == "quadrature":
        t = _times(ns)
        r = np.array([quadrature_rates(p, float(x)) for x in t])
        c = np.array([quadrature_cumulative(p, float(x)) for x in t])
        fields = {"Gamma": r[:, 0], "S": r[:, 1], "gamma": c[:, 0], "Phi": c[:, 1]}
        if ns.compare:
            s = series_for(p, _trunc(ns))
            sr, sc = s.rates(t), s.cumulative(t)
            fields.update(
                Gamma_series=sr.real,
                S_series=sr.imag,
                gamma_series=sc.real,
                Phi_series=sc.imag,
                rate_abs_dev=np.abs(r[:, 0] + 1j * r[:, 1] - sr),
            )
        _emit(_series_result("oracle-quadrature", t, fields, {"fixed": p.to_dict()}), ns)
        return 0
    if ns.oracle == "exact":
        t = _times(ns)
        n_ph = ns.n_ph_max if ns.n_ph_max is not None else required_fock_cutoff(p.g_p)
        cfg = OracleConfig(M=ns.modes, n_ph_max=n_ph, dt=ns.dt, window_halfwidth=ns.window)
        init = _init(ns)
        if ns.compare:
            rep = compare_oracle(p, cfg, init, t, scaling=ns.scaling)
            _emit(rep.to_grid_result(), ns)
            msg = f"max |dC| = {rep.max_abs_coherence_dev:.3g}, max rel dgamma = {rep.max_rel_gamma_dev:.3g}"
            if rep.scaling_ratio is not None:
                msg += f", scaling ratio = {rep.scaling_ratio:.3g}"
            print(msg, file=sys.stderr)
            return 0
        ev = exact_evolution(p, cfg, init, t)
        fields = {
            "C_l1": ev.coherence,
            "rho_ee": ev.rho[:, 0, 0].real,
            "rho_eg_re": ev.rho[:, 0, 1].real,
            "rho_eg_im": ev.rho[:, 0, 1].imag,
        }
        params = {"fixed": p.to_dict(), "M": cfg.M, "n_ph_max": n_ph, "dt": ev.dt, "norm_drift": ev.norm_drift}
        _emit(_series_result("oracle-exact", t, fields, params), ns)
        return 0
    # polaron
    if ns.n_ph_max < 2:
        raise ParameterError("n_ph_max", f"n_ph_max must be >= 2 (got {ns.n_ph_max})")
    cutoffs = [ns.n_ph_max]
    if ns.compare:
        cutoffs = sorted({max(2, ns.n_ph_max - 20), max(2, ns.n_ph_max - 10), ns.n_ph_max, ns.n_ph_max + 10})
    devs = [identity_deviations(p.g_p, n, p.omega_ph) for n in cutoffs]
    res = GridResult(
        mode="oracle-polaron",
        axes=[("n_ph_max", [float(n) for n in cutoffs])],
        fields={k: np.array([d[k] for d in devs]) for k in devs[0]},
        converged=np.array(True),
        errors=np.array("", dtype=object),
        params={"fixed": p.to_dict()},
        cell_ndim=0,
        name="oracle-polaron",
    )
    _emit(res, ns)
    return 0


def dispatch(argv: list[str] | None = None) -> int:
    """Run one command line and return its exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        path = ns.config or os.environ.get(CONFIG_ENV)
        cfg = read_config(path) if path else {}
        _resolve(parser, ns, cfg)
        if ns.command == "rates":
            return cmd_rates(ns)
        if ns.command == "coherence":
            return cmd_coherence(ns)
        if ns.command == "nonmarkov":
            return cmd_nonmarkov(ns)
        if ns.command == "sweep":
            return cmd_sweep(ns, _explicit_flags(argv), cfg)
        return cmd_oracle(ns)
    except (ConvergenceError, TruncationError) as exc:
        print(f"jch: not converged: {exc}", file=sys.stderr)
        return 2
    except (JCHError, ValueError, OutputError) as exc:
        print(f"jch: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())
