"""Centralised numerical tolerances.

Every default used by the quadrature, phase, eigenfunction and hitting-time
routines lives in :class:`Tolerances`.  The CLI can override fields from a
JSON file (``--tol-file``) and dump the active record (``--dump-config``).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class Tolerances:
    # generic adaptive Gauss-Kronrod
    quad_abs: float = 1e-10
    quad_rel: float = 1e-8
    quad_limit: int = 2000

    # oscillatory half-period summation
    osc_terms: int = 12
    osc_max_terms: int = 400

    # phase / kernel
    h_sing: float = 1e-3
    kernel_window: float = 0.5
    theta_abs: float = 1e-12
    theta_rel: float = 1e-11
    tail_scale: float = 1e10

    # eigenfunction
    f_abs: float = 1e-12
    f_rel: float = 1e-10
    diff_switch: float = 1.0

    # hitting-time integral over lambda
    big_lambda: float = 40.0
    lattice_width: float = 0.5
    tail_rel: float = 1e-9
    tail_abs: float = 1e-300
    max_order: int = 8

    # inverse and scaling certification
    inverse_rtol: float = 1e-13
    scaling_margin: float = 1e-9

    # bound constants
    c3_safety: float = 1e-6

    def with_overrides(self, **kwargs) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(kwargs) - known
        if unknown:
            raise ValueError(f"unknown tolerance fields: {sorted(unknown)}")
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_file(cls, path: str | Path) -> "Tolerances":
        data = json.loads(Path(path).read_text())
        return cls().with_overrides(**data)


DEFAULT = Tolerances()
