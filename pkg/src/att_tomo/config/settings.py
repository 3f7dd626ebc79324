"""
Library defaults, the flat key-value experiment file and named presets.

    # comment
    n_rho = 40
    attenuation = gaussian
    a_amplitude = 0.5+0.2j
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable

from ..discretization import Discretization
from ..fields import BoundaryGrid, PolarGrid
from ..geometry import RayQuadrature

logger = logging.getLogger("att_tomo")

PHANTOM_KINDS = ("gaussian_bump", "poly_zk", "zernike", "tensor_mix", "gauge_mix", "kernel", "doppler", "zero")
ATTENUATION_KINDS = ("none", "constant", "gaussian")


@dataclass(frozen=True)
class Settings:
    n_rho: int = 40
    n_beta: int = 64
    K: int = 16
    n_theta: int = 64
    N_beta: int = 256
    N_alpha: int = 256
    P: int = 64
    N: int = 64
    h_t: float = 2.0 / 512
    gl_order: int = 4
    radial_stencil: int = 0
    interior_radius: float = 0.9

    def discretization(self) -> Discretization:
        return Discretization(
            grid=PolarGrid(self.n_rho, self.n_beta, self.radial_stencil),
            bgrid=BoundaryGrid(self.N_beta, self.N_alpha),
            K=self.K,
            n_theta=self.n_theta,
            quad=RayQuadrature(self.h_t, self.gl_order),
            P=self.P,
            N=self.N,
            interior_radius=self.interior_radius,
        )

    def refined(self, factor: int = 2) -> "Settings":
        return replace(self, n_rho=self.n_rho * factor, n_beta=self.n_beta * factor, K=self.K * factor,
                       n_theta=self.n_theta * factor, N_beta=self.N_beta * factor,
                       N_alpha=self.N_alpha * factor, h_t=self.h_t / factor)


@dataclass(frozen=True)
class ExperimentConfig:
    settings: Settings = field(default_factory=Settings)
    name: str = "experiment"
    phantom: str = "gauge_mix"
    m: int = 2
    seed: int = 7
    center: complex = 0.3 + 0j
    sigma: float = 0.2
    k: int = 2
    attenuation: str = "gaussian"
    a_amplitude: complex = 0.5 + 0.2j
    a_offset: complex = 0.15 + 0j
    a_center: complex = 0j
    a_sigma: float = 0.5
    tol: float = 0.05
    gs_mode: str = "formula"
    fast: bool = True
    output_dir: str = "out"

    def __post_init__(self):
        if self.phantom not in PHANTOM_KINDS:
            raise ValueError(f"Unknown phantom {self.phantom!r} (expected one of {PHANTOM_KINDS})")
        if self.attenuation not in ATTENUATION_KINDS:
            raise ValueError(f"Unknown attenuation {self.attenuation!r} (expected one of {ATTENUATION_KINDS})")
        if self.m < 0:
            raise ValueError(f"Order m must be non-negative, got {self.m}")

    def to_text(self) -> str:
        lines = [f"# {self.name}"]
        values = {**asdict(self.settings), **{k: v for k, v in asdict(self).items() if k != "settings"}}
        for key in CONFIG_KEYS:
            lines.append(f"{key} = {_format(values[key])}")
        return "\n".join(lines) + "\n"


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"Not a boolean: {raw!r}")


def _parse_complex(raw: str) -> complex:
    return complex(raw.strip().replace(" ", "").replace("i", "j"))


def _format(value: Any) -> str:
    if isinstance(value, complex):
        return f"{value.real:g}{value.imag:+g}j"
    return str(value)


# key -> (parser, description)
CONFIG_KEYS: dict[str, tuple[Callable[[str], Any], str]] = {
    "n_rho": (int, "radial Gauss-Radau nodes of the disc grid"),
    "n_beta": (int, "angular nodes of the disc grid"),
    "K": (int, "circular-harmonic cutoff of fiber fields"),
    "n_theta": (int, "fiber quadrature nodes"),
    "N_beta": (int, "boundary grid nodes in beta"),
    "N_alpha": (int, "boundary grid nodes in alpha (multiple of 4 dividing N_beta)"),
    "P": (int, "beta cutoff of boundary coefficient tables"),
    "N": (int, "alpha cutoff of boundary coefficient tables"),
    "h_t": (float, "maximal chord panel length"),
    "gl_order": (int, "Gauss-Legendre points per panel"),
    "radial_stencil": (int, "0 for spectral radial derivatives, else finite-difference stencil width"),
    "interior_radius": (float, "radius of the interior error mask"),
    "name": (str, "experiment label"),
    "phantom": (str, f"phantom kind, one of {', '.join(PHANTOM_KINDS)}"),
    "m": (int, "phantom order"),
    "seed": (int, "seed of random phantoms"),
    "center": (_parse_complex, "centre of bump phantoms"),
    "sigma": (float, "width of bump phantoms"),
    "k": (int, "power of monomial phantoms"),
    "attenuation": (str, f"attenuation kind, one of {', '.join(ATTENUATION_KINDS)}"),
    "a_amplitude": (_parse_complex, "amplitude of the attenuation bump (or the constant)"),
    "a_offset": (_parse_complex, "constant added to the attenuation bump"),
    "a_center": (_parse_complex, "centre of the attenuation bump"),
    "a_sigma": (float, "width of the attenuation bump"),
    "tol": (float, "interior relative L2 tolerance of the reconstruction verdicts"),
    "gs_mode": (str, "g_s assembly: formula or projection"),
    "fast": (_parse_bool, "use the separable kernel for the residual integrals"),
    "output_dir": (str, "directory receiving all artifacts"),
}

_SETTINGS_KEYS = {f.name for f in fields(Settings)}


def config_from_mapping(values: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    base = base or ExperimentConfig()
    settings_updates: dict[str, Any] = {}
    updates: dict[str, Any] = {}
    for key, raw in values.items():
        if key not in CONFIG_KEYS:
            raise ValueError(f"Unknown config key {key!r} (known keys: {', '.join(CONFIG_KEYS)})")
        parser = CONFIG_KEYS[key][0]
        try:
            value = parser(raw) if isinstance(raw, str) else raw
        except ValueError as e:
            raise ValueError(f"Bad value for {key}: {raw!r} ({e})") from e
        (settings_updates if key in _SETTINGS_KEYS else updates)[key] = value
    settings = replace(base.settings, **settings_updates)
    return replace(base, settings=settings, **updates)


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"Line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = raw
    return config_from_mapping(values, base)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    config = parse_config(path.read_text(encoding="utf-8"))
    logger.info("Loaded experiment config '%s' from %s", config.name, path)
    return config


SMOKE_SETTINGS = Settings(n_rho=16, n_beta=32, K=8, n_theta=32, N_beta=64, N_alpha=64, P=16, N=16, h_t=2.0 / 128)

PRESETS: dict[str, ExperimentConfig] = {
    "m2-complex-a": ExperimentConfig(name="m2-complex-a"),
    "fbp-bump": ExperimentConfig(name="fbp-bump", phantom="gaussian_bump", m=0, attenuation="none",
                                 center=0.2 + 0.1j, sigma=0.25, tol=1e-2),
    "doppler": ExperimentConfig(name="doppler", phantom="doppler", m=1, a_offset=0.5 + 0j,
                                a_amplitude=0.3 + 0.1j),
    "smoke": ExperimentConfig(settings=SMOKE_SETTINGS, name="smoke", m=1, tol=0.2),
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"Unknown preset {name!r} (expected one of {', '.join(PRESETS)})")
    return PRESETS[name]
