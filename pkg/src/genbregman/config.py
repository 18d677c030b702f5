"""Numeric defaults, kept in one place so the CLI can print and override them."""

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    kkt: float = 1e-9
    feasibility: float = 1e-8
    max_iter: int = 500
    root: float = 1e-12
    conjugate: float = 1e-10
    quadrature: float = 1e-10
    fd_step: float = 1e-4
    boundary_slope: float = -1e6
    roundtrip: float = 1e-8
    spectral_threshold: float = 1e-12
    hermitian_tol: float = 1e-12
    metric_floor: float = 1e-10

    def to_dict(self):
        return asdict(self)

    def updated(self, overrides):
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown tolerance keys: {sorted(unknown)}")
        cast = {f.name: f.type for f in fields(self)}
        return replace(self, **{k: (int(v) if cast[k] in (int, "int") else float(v))
                                for k, v in overrides.items()})


DEFAULTS = Tolerances()

# approach schedule for the boundary-slope test
BOUNDARY_APPROACH = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
