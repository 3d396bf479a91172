"""Time-series and parameter-grid runners behind the coherence and
non-Markovianity figures, plus the named figure presets."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import product

import numpy as np

from .dynamics import InitialAmplitudes, coherence_series
from .errors import JCHError, ParameterError
from .model import ModelParams, validate_params
from .nonmarkov import DEFAULT_SCAN, TAIL_TOL, ScanSpec, nonmarkovianity
from .rates import DEFAULT_TRUNCATION, TruncationSpec

log = logging.getLogger(__name__)

SCHEMA = "jch.grid/1"
AXIS_PARAMS = ("lambda", "delta", "g_p", "omega_ph", "gamma0")
MODES = ("coherence_vs_time", "nm_grid")


@dataclass(frozen=True)
class Axis:
    """A swept parameter and its values (ascending)."""

    name: str
    values: tuple[float, ...]

    @classmethod
    def span(cls, name: str, lo: float, hi: float, count: int, open_low: bool = False) -> "Axis":
        """``count`` equally spaced values over ``[lo, hi]``, or ``(lo, hi]``."""
        if count < 1:
            raise ParameterError(name, f"axis {name!r} is empty")
        if not hi >= lo:
            raise ParameterError(name, f"axis {name!r} range is not ordered ({lo} > {hi})")
        if open_low:
            vals = np.linspace(lo, hi, count + 1)[1:]
        else:
            vals = np.linspace(lo, hi, count)
        return cls(name, tuple(float(v) for v in vals))

    @classmethod
    def of(cls, name: str, values) -> "Axis":
        return cls(name, tuple(float(v) for v in values))

    def validate(self, min_count: int = 1) -> None:
        if self.name not in AXIS_PARAMS:
            raise ParameterError(self.name, f"cannot sweep {self.name!r}; choose from {AXIS_PARAMS}")
        if len(self.values) < min_count:
            if not self.values:
                raise ParameterError(self.name, f"axis {self.name!r} is empty")
            raise ParameterError(self.name, f"axis {self.name!r} needs at least {min_count} values")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ParameterError(self.name, f"axis {self.name!r} values must be ascending")


@dataclass(frozen=True)
class SweepSpec:
    mode: str
    axis1: Axis
    axis2: Axis | None = None
    fixed: ModelParams = ModelParams()
    time_horizon: float = 50.0
    t_samples: int = 1001
    init: InitialAmplitudes = field(default_factory=InitialAmplitudes.equatorial)
    trunc: TruncationSpec = DEFAULT_TRUNCATION
    scan: ScanSpec = DEFAULT_SCAN
    extend_horizon: bool = True
    max_horizon: float = 5000.0
    tail_tol: float = TAIL_TOL
    name: str = "custom"

    def validate(self) -> "SweepSpec":
        if self.mode not in MODES:
            raise ParameterError("mode", f"unknown sweep mode {self.mode!r}")
        grid = self.mode == "nm_grid"
        self.axis1.validate(2 if grid else 1)
        if self.axis2 is not None:
            self.axis2.validate(2 if grid else 1)
            if self.axis2.name == self.axis1.name:
                raise ParameterError(self.axis2.name, "the two axes must sweep different parameters")
        elif grid:
            raise ParameterError("axis2", "nm_grid needs two axes")
        if not self.time_horizon > 0:
            raise ParameterError("time_horizon", "time_horizon must be positive")
        if self.t_samples < 2 and not grid:
            raise ParameterError("t_samples", "t_samples must be >= 2")
        validate_params(self.fixed)
        return self

    @property
    def axes(self) -> list[Axis]:
        return [self.axis1] if self.axis2 is None else [self.axis1, self.axis2]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "mode": self.mode,
            "axes": [{"name": a.name, "values": list(a.values)} for a in self.axes],
            "fixed": self.fixed.to_dict(),
            "time_horizon": self.time_horizon,
            "t_samples": self.t_samples,
            "init": {
                "a": [self.init.a.real, self.init.a.imag],
                "b": [self.init.b.real, self.init.b.imag],
            },
            "trunc": asdict(self.trunc),
            "scan": asdict(self.scan),
            "extend_horizon": self.extend_horizon,
            "max_horizon": self.max_horizon,
            "tail_tol": self.tail_tol,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def file_name(self, ext: str) -> str:
        return f"{self.name}-{self.digest()}.{ext}"


@dataclass
class GridResult:
    """Sweep output.

    ``axes`` lists every axis in storage order.  The first ``cell_ndim`` axes
    index independent cells; any remaining axis (time) runs inside a cell.
    ``fields`` maps column names to arrays shaped like the full axis product;
    ``converged`` and ``errors`` are per cell.
    """

    mode: str
    axes: list[tuple[str, list[float]]]
    fields: dict[str, np.ndarray]
    converged: np.ndarray
    errors: np.ndarray
    params: dict
    cell_ndim: int
    name: str = "custom"
    schema: str = SCHEMA

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for _, v in self.axes)

    @property
    def failed_cells(self) -> int:
        return int(np.count_nonzero(self.errors != ""))


def _cell_params(spec: SweepSpec, values: tuple[float, ...]) -> ModelParams:
    return spec.fixed.replace(**{a.name: v for a, v in zip(spec.axes, values)})


def _coherence_cell(args):
    spec, values, t = args
    try:
        p = validate_params(_cell_params(spec, values))
        return coherence_series(spec.init, p, t, spec.trunc), ""
    except (JCHError, ValueError, ArithmeticError) as exc:
        return np.full(t.shape, np.nan), f"{type(exc).__name__}: {exc}"


def _nm_cell(args):
    spec, values = args
    try:
        p = validate_params(_cell_params(spec, values))
        rep = nonmarkovianity(
            p,
            spec.init,
            spec.time_horizon,
            spec.trunc,
            spec.scan,
            tail_tol=spec.tail_tol,
            extend_horizon=spec.extend_horizon,
            max_horizon=spec.max_horizon,
        )
        return rep.N, rep.horizon, len(rep.negative_intervals), rep.converged, ""
    except (JCHError, ValueError, ArithmeticError) as exc:
        return math.nan, math.nan, 0, False, f"{type(exc).__name__}: {exc}"


def _map(fn, tasks: list, jobs: int | None):
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # non-Linux
        return os.cpu_count() or 1


def _params_echo(spec: SweepSpec) -> dict:
    d = spec.to_dict()
    d.pop("axes")
    return d


def run_coherence_series(spec: SweepSpec, jobs: int | None = 1) -> GridResult:
    """``C_l1(t)`` on a uniform grid of ``t_samples`` points over ``[0, T]`` for
    every axis combination."""
    spec.validate()
    if spec.mode != "coherence_vs_time":
        raise ParameterError("mode", "run_coherence_series needs mode 'coherence_vs_time'")
    t = np.linspace(0.0, spec.time_horizon, spec.t_samples)
    cells = list(product(*(a.values for a in spec.axes)))
    out = _map(_coherence_cell, [(spec, c, t) for c in cells], jobs)
    cell_shape = tuple(len(a.values) for a in spec.axes)
    coh = np.array([o[0] for o in out]).reshape(cell_shape + (t.size,))
    errors = np.array([o[1] for o in out], dtype=object).reshape(cell_shape)
    res = GridResult(
        mode=spec.mode,
        axes=[(a.name, list(a.values)) for a in spec.axes] + [("t", t.tolist())],
        fields={"C_l1": coh},
        converged=errors == "",
        errors=errors,
        params=_params_echo(spec),
        cell_ndim=len(cell_shape),
        name=spec.name,
    )
    _log_failures(res)
    return res


def run_nm_grid(spec: SweepSpec, jobs: int | None = 1) -> GridResult:
    """Non-Markovianity ``N`` for every cell of a two-axis grid."""
    spec.validate()
    if spec.mode != "nm_grid":
        raise ParameterError("mode", "run_nm_grid needs mode 'nm_grid'")
    cells = list(product(spec.axis1.values, spec.axis2.values))
    out = _map(_nm_cell, [(spec, c) for c in cells], jobs)
    shape = (len(spec.axis1.values), len(spec.axis2.values))

    def col(i, dtype=float):
        return np.array([o[i] for o in out], dtype=dtype).reshape(shape)

    res = GridResult(
        mode=spec.mode,
        axes=[(a.name, list(a.values)) for a in spec.axes],
        fields={"N": col(0), "horizon": col(1), "negative_intervals": col(2, int)},
        converged=col(3, bool),
        errors=col(4, object),
        params=_params_echo(spec),
        cell_ndim=2,
        name=spec.name,
    )
    _log_failures(res)
    unconverged = int(np.count_nonzero(~res.converged & (res.errors == "")))
    if unconverged:
        log.warning("%d cell(s) did not meet the tail tolerance", unconverged)
    return res


def run(spec: SweepSpec, jobs: int | None = 1) -> GridResult:
    if spec.mode == "nm_grid":
        return run_nm_grid(spec, jobs)
    return run_coherence_series(spec, jobs)


def _log_failures(res: GridResult) -> None:
    if res.failed_cells:
        log.warning("%d of %d cell(s) failed", res.failed_cells, res.errors.size)


def grid_refinement_change(coarse: GridResult, fine: GridResult) -> float:
    """Relative change of the maximum ``N`` between two resolutions (diagnostic)."""
    a = float(np.nanmax(coarse.fields["N"]))
    b = float(np.nanmax(fine.fields["N"]))
    change = abs(a - b) / max(abs(b), 1e-300)
    log.info("max-N refinement change: %.3g", change)
    return change


# --- figure presets -----------------------------------------------------------

PRESET_OMEGA_PH = 10.0


def _fig1(g_p: float, **kw) -> SweepSpec:
    return SweepSpec(
        mode="coherence_vs_time",
        axis1=Axis.of("lambda", (0.1, 0.3, 0.5, 1.0, 10.0)),
        axis2=Axis.of("delta", (0.0, 1.0, 10.0)),
        fixed=ModelParams(omega_ph=PRESET_OMEGA_PH, g_p=g_p),
        time_horizon=50.0,
        t_samples=2001,
        name=f"fig1-gp{g_p:g}",
        **kw,
    )


def _fig2(g_p: float, count: int = 60, **kw) -> SweepSpec:
    return SweepSpec(
        mode="nm_grid",
        axis1=Axis.span("delta", 0.0, 10.0, count),
        axis2=Axis.span("lambda", 0.02, 2.0, count, open_low=True),
        fixed=ModelParams(omega_ph=PRESET_OMEGA_PH, g_p=g_p),
        name=f"fig2-gp{g_p:g}",
        **kw,
    )


def _fig3(delta: float, count: int = 60, **kw) -> SweepSpec:
    return SweepSpec(
        mode="nm_grid",
        axis1=Axis.span("lambda", 0.02, 2.0, count, open_low=True),
        axis2=Axis.span("g_p", 0.0, 3.0, count),
        fixed=ModelParams(omega_ph=PRESET_OMEGA_PH, delta=delta),
        name=f"fig3-delta{delta:g}",
        **kw,
    )


PRESETS = {"fig1": (_fig1, "g_p", (0.0, 2.0)), "fig2": (_fig2, "g_p", (0.0, 2.0)), "fig3": (_fig3, "delta", (0.0, 1.0, 10.0))}


def preset(name: str, panel: float | None = None, **kw) -> list[SweepSpec]:
    """Specs for a figure preset.

    ``panel`` selects one value of the preset's panel parameter (``g_p`` for
    fig1/fig2, ``delta`` for fig3); by default every panel is returned.
    """
    try:
        factory, _, panels = PRESETS[name]
    except KeyError:
        raise ParameterError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    values = panels if panel is None else (float(panel),)
    return [factory(v, **kw) for v in values]


def preset_panel_param(name: str) -> str:
    return PRESETS[name][1]


def serialize_result(res: GridResult, format: str) -> bytes:
    """Encode ``res`` as csv, json or svg bytes (see :mod:`jch.formats`)."""
    from .formats import serialize_result as _serialize

    return _serialize(res, format)
