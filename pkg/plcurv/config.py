"""Run configuration for the plcurv command line"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from .solver import Gauge, SolverOptions

ENV_PREFIX = 'PLCURV_'
CONFIG_FILENAME = 'plcurv.json'


class RunConfig(BaseModel):
    """Tolerances, sampling and family parameters shared by the CLI commands"""

    tol: float = Field(default=1e-10, gt=0, description="Gradient tolerance (infinity norm)")
    max_iter: int = Field(default=200, ge=1, description="Newton iteration limit")
    gauge: Gauge = Field(default=Gauge.SUM_ZERO, description="Gauge fixing: sum-zero or pin")
    init: Optional[Path] = Field(default=None, description="File with an initial conformal factor")
    out_prefix: Optional[Path] = Field(default=None, description="Prefix for uniformize outputs")
    samples: int = Field(default=401, ge=2, description="Grid size for scan and roots")
    root_tol: float = Field(default=1e-12, gt=0, description="Bisection tolerance for roots")
    b0: Optional[float] = Field(default=None, description="Family parameter b0")
    c0: Optional[float] = Field(default=None, description="Family parameter c0")
    divergence_bound: float = Field(default=50.0, gt=0, description="Abort when |u| exceeds this")
    trust_damping: float = Field(default=0.0, ge=0, description="Extra Hessian damping")
    workers: int = Field(default=1, ge=1, description="Concurrent evaluations during scans")
    log_level: str = Field(
        default='WARNING', pattern=r'(?i)^(debug|info|warning|error|critical)$', description="Logging level"
    )
    structured_logs: bool = Field(default=False, description="Emit JSON log records")

    @classmethod
    def from_file(cls, config_path: Path) -> 'RunConfig':
        """Load config from a JSON file"""
        config_path = Path(config_path)
        if not config_path.exists():
            raise FileNotFoundError(f"Config file not found: {config_path}")
        return cls(**json.loads(config_path.read_text()))

    @classmethod
    def from_env(cls) -> 'RunConfig':
        """Load config from PLCURV_* environment variables (a .env file is honoured)"""
        load_dotenv()
        data: Dict[str, Any] = {}
        for name in cls.model_fields:
            value = os.getenv(ENV_PREFIX + name.upper())
            if value is not None and value != '':
                data[name] = value
        return cls(**data)

    @classmethod
    def load(cls, config_path: Optional[Path] = None) -> 'RunConfig':
        """Explicit file, else plcurv.json in the working directory, else the environment"""
        if config_path is not None:
            return cls.from_file(config_path)
        default = Path.cwd() / CONFIG_FILENAME
        if default.exists():
            return cls.from_file(default)
        return cls.from_env()

    def merged(self, **overrides) -> 'RunConfig':
        """Copy with the non-None overrides applied and validated"""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**data)

    def solver_options(self, init=None) -> SolverOptions:
        return SolverOptions(
            grad_tol=self.tol,
            max_iter=self.max_iter,
            gauge=self.gauge,
            init=None if init is None else [float(x) for x in init],
            trust_damping=self.trust_damping,
            divergence_bound=self.divergence_bound,
        )
