"""Side-by-side comparison of the master-equation prediction with the
brute-force evolution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dynamics import InitialAmplitudes, coherence_series
from ..model import ModelParams
from ..sweep import GridResult
from .bath import OracleConfig
from .exact import exact_evolution


@dataclass
class ComparisonReport:
    times: np.ndarray
    coherence_master: np.ndarray
    coherence_exact: np.ndarray
    max_abs_coherence_dev: float
    max_rel_gamma_dev: float
    scaling_ratio: float | None = None
    params: dict = field(default_factory=dict)

    @property
    def coherence_dev(self) -> np.ndarray:
        return np.abs(self.coherence_master - self.coherence_exact)

    def to_grid_result(self) -> GridResult:
        """Time-series view for the sweep serialisers."""
        params = {
            "fixed": self.params,
            "max_abs_coherence_dev": self.max_abs_coherence_dev,
            "max_rel_gamma_dev": self.max_rel_gamma_dev,
            "scaling_ratio": self.scaling_ratio,
        }
        return GridResult(
            mode="oracle_compare",
            axes=[("t", self.times.tolist())],
            fields={
                "C_master": self.coherence_master,
                "C_exact": self.coherence_exact,
                "abs_dev": self.coherence_dev,
            },
            converged=np.array(True),
            errors=np.array("", dtype=object),
            params=params,
            cell_ndim=0,
            name="oracle-compare",
        )


def _rel_gamma_dev(c0: float, c_me: np.ndarray, c_ex: np.ndarray) -> float:
    # gamma(t) = -ln(C / 2|ab|); t = 0 (gamma = 0 on both sides) is skipped
    g_me = -np.log(c_me / c0)
    g_ex = -np.log(c_ex / c0)
    mask = np.abs(g_me) > 0
    if not np.any(mask):
        return float(np.max(np.abs(g_ex - g_me))) if g_me.size else 0.0
    return float(np.max(np.abs(g_ex[mask] - g_me[mask]) / np.abs(g_me[mask])))


def compare_oracle(
    p: ModelParams,
    cfg: OracleConfig,
    init: InitialAmplitudes,
    t_grid,
    scaling: bool = False,
) -> ComparisonReport:
    """Coherence from the closed form vs. exact evolution on ``t_grid``.

    With ``scaling`` the comparison is repeated at ``gamma0 / 2`` and
    ``scaling_ratio`` holds (deviation at gamma0) / (deviation at gamma0 / 2).
    """
    t = np.asarray(t_grid, dtype=float)
    c0 = init.coherence0
    c_me = coherence_series(init, p, t)
    c_ex = exact_evolution(p, cfg, init, t).coherence
    rel = _rel_gamma_dev(c0, c_me, c_ex) if c0 > 0 else 0.0
    ratio = None
    if scaling:
        half = compare_oracle(p.replace(gamma0=p.gamma0 / 2.0), cfg, init, t)
        ratio = rel / half.max_rel_gamma_dev if half.max_rel_gamma_dev > 0 else float("inf")
    return ComparisonReport(
        times=t,
        coherence_master=c_me,
        coherence_exact=c_ex,
        max_abs_coherence_dev=float(np.max(np.abs(c_me - c_ex))),
        max_rel_gamma_dev=rel,
        scaling_ratio=ratio,
        params=p.to_dict(),
    )
