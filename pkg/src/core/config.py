"""
Free Gibbs Transport - Configuration

One dataclass per subcommand. Values come from a JSON file (``FGT_CONFIG``
when no path is given), then environment fallbacks, then CLI overrides.
"""

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

from .errors import ConfigError

CONFIG_ENV = "FGT_CONFIG"
SEED_ENV = "FGT_SEED"
THREADS_ENV = "FGT_THREADS"


@dataclass
class RuntimeConfig:
    """Settings shared by every run."""

    threads: int = 0  # 0 = FGT_THREADS or 1
    output_dir: str = "runs/latest"
    log_level: str = "INFO"


@dataclass
class IdentityConfig:
    """check-identities settings."""

    n: int = 2
    degree: int = 4
    trials: int = 100
    seed: int = 0
    names: List[str] = field(default_factory=list)  # empty = all
    numeric_every: int = 1


@dataclass
class CertifyConfig:
    """certify-convexity settings."""

    potential: Any = None  # PotentialSpec, its dict form, or a JSON path
    # Numeric Hessian check at sampled tuples (generic potentials)
    points: int = 20
    N: int = 4
    radius: float = 1.0
    seed: int = 0


@dataclass
class ChainConfig:
    """Langevin / MALA sampler settings."""

    # Target
    potential: Any = None
    n: int = 1
    N: int = 32

    # Chain
    step: float = 0.05  # h, in time units
    burnin: int = 500
    thin: int = 10
    count: int = 100  # samples kept, split across chains
    chains: int = 1
    mala: bool = True
    seed: int = 0
    init_scale: float = 0.0  # 0 starts every chain at the zero tuple

    # Divergence detector
    blowup_radius: float = 1e3

    threads: int = 0


@dataclass
class SdeConfig:
    """sde subcommand: Euler–Maruyama paths of the free SDE."""

    family: Any = None  # {"V": ..., "W": ...}, a PotentialFamily, or a JSON path
    alpha: float = 0.0
    n: int = 1
    N: int = 16
    T: float = 1.0
    dt: float = 1e-3
    paths: int = 1
    store_every: int = 1
    noise: bool = True
    seed: int = 0
    x0: Any = "zero"  # "zero", "random", or an HMT1 path (first sample)
    x0_scale: float = 1.0
    blowup_radius: float = 1e3
    # Coupled contraction run
    coupled: bool = False
    y0_scale: float = 1.0
    threads: int = 0


@dataclass
class SemigroupConfig:
    """semigroup subcommand: Monte Carlo φ_t(P)(X₀)."""

    family: Any = None
    alpha: float = 0.0
    observable: Any = "x2"  # preset name or codec dict
    n: int = 1
    N: int = 16
    t_grid: List[float] = field(default_factory=lambda: [0.5, 1.0, 2.0])
    paths: int = 1000
    dt: float = 1e-2
    seed: int = 0
    x0: Any = "random"
    x0_scale: float = 1.0
    antithetic: bool = False
    # Itô martingale residual at the t_grid times
    martingale: bool = False
    threads: int = 0


@dataclass
class TransportConfig:
    """transport subcommand: α-flow of an ensemble along 𝒟g_α."""

    family: Any = None
    N: int = 16
    count: int = 20

    # Semigroup horizon and integrator
    T: float = 20.0
    dt: float = 0.05
    paths: int = 8

    # α-flow
    dalpha: float = 0.05
    alpha_max: float = 1.0

    gradient: str = "adjoint"  # "adjoint" | "fd"
    fd_step: float = 1e-5
    antithetic: bool = True
    tail_tol: float = 1e-3
    confinement: float = 50.0  # abort when any ‖Xᵢ‖ exceeds this
    seed: int = 0

    # Source ensemble (sampled when no HMT1 path is given)
    ensemble: Optional[str] = None
    chain: Dict[str, Any] = field(default_factory=dict)
    threads: int = 0


@dataclass
class OnevarConfig:
    """onevar subcommand: equilibrium measures and the classical 1-d pipeline."""

    V: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.5])  # ascending coefficients
    W: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0, 0.25])
    grid_lo: float = -6.0
    grid_hi: float = 6.0
    points: int = 2048
    alpha_steps: int = 50
    s_horizon: float = 30.0
    ds: float = 0.02
    # Optional HMT1 ensemble (n = 1) for the spectral KS statistic
    ensemble: Optional[str] = None


@dataclass
class ReportConfig:
    """report subcommand."""

    runs: List[str] = field(default_factory=list)
    output: str = "report"


CONFIG_KINDS = {
    "runtime": RuntimeConfig,
    "identities": IdentityConfig,
    "certify": CertifyConfig,
    "sample": ChainConfig,
    "sde": SdeConfig,
    "semigroup": SemigroupConfig,
    "transport": TransportConfig,
    "onevar": OnevarConfig,
    "report": ReportConfig,
}


def config_to_dict(config) -> dict:
    """Serializable form; potential objects are replaced by their dict form."""
    out = {}
    for f in fields(config):
        value = getattr(config, f.name)
        out[f.name] = value.to_dict() if hasattr(value, "to_dict") else value
    return out


def _read_json(path: Path) -> dict:
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, path=str(path), line=e.lineno, column=e.colno) from e
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", path=str(path)) from e
    if not isinstance(data, dict):
        raise ConfigError("top-level JSON value must be an object", path=str(path))
    return data


def _check_type(name: str, value, default, path: Optional[str]):
    """Reject obviously wrong JSON types; ints are accepted where floats are expected."""
    if default is None or value is None or isinstance(default, (dict, list)) and not value:
        return value
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, (int, float)):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if ok and isinstance(default, int) and not isinstance(default, bool):
            ok = float(value).is_integer()
            value = int(value) if ok else value
    elif isinstance(default, list):
        ok = isinstance(value, list)
    elif isinstance(default, dict):
        ok = isinstance(value, dict)
    else:
        ok = True
    if not ok:
        raise ConfigError(f"{name}: expected {type(default).__name__}, got {value!r}", path=path)
    return value


def load_config(
    kind: str,
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
):
    """Load configuration from file or environment.

    Args:
        kind: Key of CONFIG_KINDS ("sample", "transport", ...)
        config_path: JSON file; FGT_CONFIG is used when None
        overrides: CLI values applied last; None entries are skipped

    Returns:
        The populated config dataclass
    """
    if kind not in CONFIG_KINDS:
        raise ConfigError(f"unknown config kind {kind!r}")
    cls = CONFIG_KINDS[kind]
    defaults = cls()

    if config_path is None:
        config_path = os.environ.get(CONFIG_ENV)

    data: Dict[str, Any] = {}
    if config_path:
        data = _read_json(Path(config_path))
        # Files may hold several sections keyed by kind
        if kind in data and isinstance(data[kind], dict):
            data = data[kind]

    known = {f.name for f in fields(cls)}
    unknown = sorted(k for k in data if k not in known and k not in CONFIG_KINDS)
    if unknown:
        raise ConfigError(f"unknown keys for {kind}: {unknown}", path=config_path)

    values = {}
    for f in fields(cls):
        default = getattr(defaults, f.name)
        value = data.get(f.name, default)
        values[f.name] = _check_type(f.name, value, default, config_path)

    # Fall back to environment variables
    if "seed" in values and "seed" not in data and os.environ.get(SEED_ENV):
        values["seed"] = int(os.environ[SEED_ENV])
    if "threads" in values and not values["threads"] and os.environ.get(THREADS_ENV):
        values["threads"] = int(os.environ[THREADS_ENV])

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in known:
            raise ConfigError(f"unknown override {key!r} for {kind}")
        values[key] = value

    return cls(**values)


def dump_config(config, path: str) -> None:
    """Write the resolved config next to run outputs (atomic)."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = target.with_suffix(".tmp")
    tmp.write_text(json.dumps(config_to_dict(config), indent=2, sort_keys=True, default=str))
    os.replace(tmp, target)


__all__ = [
    "CONFIG_KINDS",
    "CertifyConfig",
    "ChainConfig",
    "IdentityConfig",
    "OnevarConfig",
    "ReportConfig",
    "RuntimeConfig",
    "SdeConfig",
    "SemigroupConfig",
    "TransportConfig",
    "config_to_dict",
    "dump_config",
    "load_config",
]
