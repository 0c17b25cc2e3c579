from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

CSV_COLUMNS = ("iteration", "phase", "array", "objective", "step", "min_slack")


@dataclass(frozen=True)
class SolverParams:
    """Frank-Wolfe loop controls shared by the position and rotation phases."""

    eps_th: float = 5e-4
    t_in_l: int = 50
    t_in_u: int = 50
    t_ou_l: int = 2
    t_ou_u: int = 2
    tau_init: float = 1.0
    delta: float = 0.5
    ell: float = 1e-4
    trust_radius_rad: float = 0.2
    fd_step: float = 1e-5
    max_backtracks: int = 30

    def __post_init__(self):
        for name in ("eps_th", "t_in_l", "t_in_u", "t_ou_l", "t_ou_u", "tau_init",
                     "trust_radius_rad", "fd_step", "max_backtracks"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.tau_init > 1:
            raise ValueError("tau_init must be <= 1")
        if not (0 < self.delta < 1 and 0 < self.ell < 1):
            raise ValueError("delta and ell must lie in (0, 1)")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    phase: str  # "init", "position", "rotation"
    array: int  # -1 for the initial record
    objective: float
    step: float
    min_slack: float


@dataclass
class OptTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, *args) -> None:
        self.records.append(TraceRecord(len(self.records), *args))

    def extend(self, other: "OptTrace") -> None:
        for r in other.records:
            self.append(r.phase, r.array, r.objective, r.step, r.min_slack)

    @property
    def objectives(self) -> list[float]:
        return [r.objective for r in self.records]

    def is_monotone(self, tol: float = 0.0) -> bool:
        obj = self.objectives
        return all(b >= a - tol for a, b in zip(obj, obj[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})
        return buf.getvalue()
