"""Config ingestion: one flat, unit-suffixed key per value.

The canonical format is a flat YAML mapping whose keys look like
``geometry.a_mm: 55.0``.  Exactly the keys below are accepted; unknown keys
are rejected so typos cannot silently fall back to defaults.  The
``geometry``, ``friction``, ``loads`` and ``random`` sections are required,
while ``mc``, ``design`` and ``output`` fall back to shipped defaults when
omitted.  Domain invariants are enforced while the dataclasses are built,
at parse time.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from . import maxent, mechmodel, optimizer
from .errors import MeanOutOfSupport, ParseError, ValidationError


@dataclass(frozen=True)
class Loads:
    Fg_kN: float
    Fb_kN: float

    def __post_init__(self):
        for name in ("Fg_kN", "Fb_kN"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValidationError(f"load {name} must be >= 0", v)


@dataclass(frozen=True)
class RandomModel:
    alpha_lo_deg: float = 0.0
    alpha_hi_deg: float = 18.0
    alpha_mean_deg: float = 6.0
    fs_lo_kN: float = 0.0
    fs_hi_kN: float = 56.0
    fs_mean_kN: float = 42.0

    def __post_init__(self):
        if not self.alpha_lo_deg < self.alpha_hi_deg:
            raise ValidationError("alpha support requires lo < hi",
                                  (self.alpha_lo_deg, self.alpha_hi_deg))
        if not self.fs_lo_kN < self.fs_hi_kN:
            raise ValidationError("Fs support requires lo < hi",
                                  (self.fs_lo_kN, self.fs_hi_kN))
        if not (0.0 <= self.alpha_lo_deg and self.alpha_hi_deg < 90.0):
            raise ValidationError("alpha support must lie in [0, 90) deg",
                                  (self.alpha_lo_deg, self.alpha_hi_deg))
        if self.fs_lo_kN < 0.0:
            raise ValidationError("Fs support must be non-negative", self.fs_lo_kN)
        if not self.alpha_lo_deg < self.alpha_mean_deg < self.alpha_hi_deg:
            raise MeanOutOfSupport(self.alpha_lo_deg, self.alpha_hi_deg, self.alpha_mean_deg)
        if not self.fs_lo_kN < self.fs_mean_kN < self.fs_hi_kN:
            raise MeanOutOfSupport(self.fs_lo_kN, self.fs_hi_kN, self.fs_mean_kN)


@dataclass(frozen=True)
class McSettings:
    nu: int = 4096
    seed: int = 0

    def __post_init__(self):
        if not (isinstance(self.nu, int) and self.nu >= 1):
            raise ValidationError("mc.nu must be an integer >= 1", self.nu)
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ValidationError("mc.seed must be a 64-bit unsigned integer", self.seed)


@dataclass(frozen=True)
class DesignSettings:
    box: optimizer.DesignBox
    weights: optimizer.RobustWeights
    constraint: optimizer.ConstraintSpec


@dataclass(frozen=True)
class OutputSettings:
    dir: str = "out"
    grid_nx: int = 101
    grid_ny: int = 51

    def __post_init__(self):
        if not (isinstance(self.grid_nx, int) and isinstance(self.grid_ny, int)
                and self.grid_nx >= 2 and self.grid_ny >= 2):
            raise ValidationError("output grid must be at least 2x2",
                                  (self.grid_nx, self.grid_ny))


@dataclass(frozen=True)
class Config:
    geometry: mechmodel.BrakeGeometry
    friction: mechmodel.FrictionSet
    loads: Loads
    random: RandomModel
    mc: McSettings
    design: DesignSettings
    output: OutputSettings


# key -> (expected type, required section)
_FLOAT, _INT, _STR = "float", "int", "str"

_KEYS = {
    "geometry.a_mm": _FLOAT, "geometry.b_mm": _FLOAT, "geometry.c_mm": _FLOAT,
    "geometry.d_mm": _FLOAT, "geometry.e_mm": _FLOAT, "geometry.f_mm": _FLOAT,
    "geometry.l_mm": _FLOAT, "geometry.m_mm": _FLOAT, "geometry.n_mm": _FLOAT,
    "geometry.R_mm": _FLOAT,
    "friction.mu1": _FLOAT, "friction.mu2": _FLOAT, "friction.mu4": _FLOAT,
    "loads.Fg_kN": _FLOAT, "loads.Fb_kN": _FLOAT,
    "random.alpha_lo_deg": _FLOAT, "random.alpha_hi_deg": _FLOAT,
    "random.alpha_mean_deg": _FLOAT,
    "random.fs_lo_kN": _FLOAT, "random.fs_hi_kN": _FLOAT, "random.fs_mean_kN": _FLOAT,
    "mc.nu": _INT, "mc.seed": _INT,
    "design.a_min_mm": _FLOAT, "design.a_max_mm": _FLOAT,
    "design.c_min_mm": _FLOAT, "design.c_max_mm": _FLOAT,
    "design.beta1": _FLOAT, "design.beta2": _FLOAT,
    "design.beta3": _FLOAT, "design.beta4": _FLOAT,
    "design.y_star_kN": _FLOAT, "design.p_r": _FLOAT,
    "output.dir": _STR, "output.grid_nx": _INT, "output.grid_ny": _INT,
}

_REQUIRED_SECTIONS = ("geometry", "friction", "loads", "random")


def _key_line(text: str, key: str):
    pattern = re.compile(r"^\s*" + re.escape(key) + r"\s*:")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return lineno
    return None


def _coerce(key: str, value, text: str):
    kind = _KEYS[key]
    line = _key_line(text, key)
    if kind == _STR:
        if not isinstance(value, str):
            raise ParseError(f"expected a string, got {value!r}", line=line, key=key)
        return value
    if kind == _FLOAT and isinstance(value, str):
        # YAML 1.1 reads dot-less exponents ('1e-5') as strings; forgive that
        try:
            return float(value)
        except ValueError:
            raise ParseError(f"expected a number, got {value!r}", line=line, key=key) from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {value!r}", line=line, key=key)
    if kind == _INT:
        if isinstance(value, float):
            raise ParseError(f"expected an integer, got {value!r}", line=line, key=key)
        return int(value)
    return float(value)


def parse_config_text(text: str, source: str = "<string>") -> Config:
    """Parse and fully validate a flat-key config document."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        line = getattr(getattr(exc, "problem_mark", None), "line", None)
        raise ParseError(f"invalid YAML in {source}: {exc}",
                         line=None if line is None else line + 1) from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ParseError(f"{source} must be a flat mapping of 'section.key: value'")

    values = {}
    for key, value in raw.items():
        if key not in _KEYS:
            raise ParseError(f"unknown config key in {source}",
                             line=_key_line(text, str(key)), key=str(key))
        values[key] = _coerce(key, value, text)

    missing = [k for k in _KEYS
               if k not in values and k.split(".")[0] in _REQUIRED_SECTIONS]
    if missing:
        raise ParseError(f"missing required keys in {source}: {', '.join(missing)}")

    def get(key, default=None):
        return values.get(key, default)

    geometry = mechmodel.BrakeGeometry(
        a=values["geometry.a_mm"], b=values["geometry.b_mm"], c=values["geometry.c_mm"],
        d=values["geometry.d_mm"], e=values["geometry.e_mm"], f=values["geometry.f_mm"],
        l=values["geometry.l_mm"], m=values["geometry.m_mm"], n=values["geometry.n_mm"],
        R=values["geometry.R_mm"])
    friction = mechmodel.FrictionSet(
        mu1=values["friction.mu1"], mu2=values["friction.mu2"], mu4=values["friction.mu4"])
    loads = Loads(Fg_kN=values["loads.Fg_kN"], Fb_kN=values["loads.Fb_kN"])
    random = RandomModel(
        alpha_lo_deg=values["random.alpha_lo_deg"],
        alpha_hi_deg=values["random.alpha_hi_deg"],
        alpha_mean_deg=values["random.alpha_mean_deg"],
        fs_lo_kN=values["random.fs_lo_kN"],
        fs_hi_kN=values["random.fs_hi_kN"],
        fs_mean_kN=values["random.fs_mean_kN"])
    mc = McSettings(nu=get("mc.nu", 4096), seed=get("mc.seed", 0))
    design = DesignSettings(
        box=optimizer.DesignBox(
            a_min=get("design.a_min_mm", 50.0), a_max=get("design.a_max_mm", 60.0),
            c_min=get("design.c_min_mm", 50.0), c_max=get("design.c_max_mm", 55.0)),
        weights=optimizer.RobustWeights(
            beta1=get("design.beta1", 0.2), beta2=get("design.beta2", 0.2),
            beta3=get("design.beta3", 0.2), beta4=get("design.beta4", 0.4)),
        constraint=optimizer.ConstraintSpec(
            y_star=get("design.y_star_kN", 0.5), p_r=get("design.p_r", 0.05)))
    output = OutputSettings(
        dir=get("output.dir", "out"),
        grid_nx=get("output.grid_nx", 101), grid_ny=get("output.grid_ny", 51))
    return Config(geometry=geometry, friction=friction, loads=loads, random=random,
                  mc=mc, design=design, output=output)


def load_config(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


_PLAIN_STR = re.compile(r"^[A-Za-z0-9_./-]+$")


def _emit(value) -> str:
    if isinstance(value, bool):
        raise ValidationError("boolean config values are not supported", value)
    if isinstance(value, float):
        text = repr(value)
        if "e" in text and "." not in text:
            # YAML floats need a dot; '1e-05' would read back as a string
            text = text.replace("e", ".0e")
        return text
    if isinstance(value, int):
        return str(value)
    if _PLAIN_STR.match(value):
        return value
    return json.dumps(value)


def config_to_text(cfg: Config) -> str:
    """Serialize to the canonical flat-key document (round-trips exactly)."""
    g, fr, ld, rm = cfg.geometry, cfg.friction, cfg.loads, cfg.random
    box, w, cs = cfg.design.box, cfg.design.weights, cfg.design.constraint
    ordered = {
        "geometry.a_mm": g.a, "geometry.b_mm": g.b, "geometry.c_mm": g.c,
        "geometry.d_mm": g.d, "geometry.e_mm": g.e, "geometry.f_mm": g.f,
        "geometry.l_mm": g.l, "geometry.m_mm": g.m, "geometry.n_mm": g.n,
        "geometry.R_mm": g.R,
        "friction.mu1": fr.mu1, "friction.mu2": fr.mu2, "friction.mu4": fr.mu4,
        "loads.Fg_kN": ld.Fg_kN, "loads.Fb_kN": ld.Fb_kN,
        "random.alpha_lo_deg": rm.alpha_lo_deg, "random.alpha_hi_deg": rm.alpha_hi_deg,
        "random.alpha_mean_deg": rm.alpha_mean_deg,
        "random.fs_lo_kN": rm.fs_lo_kN, "random.fs_hi_kN": rm.fs_hi_kN,
        "random.fs_mean_kN": rm.fs_mean_kN,
        "mc.nu": cfg.mc.nu, "mc.seed": cfg.mc.seed,
        "design.a_min_mm": box.a_min, "design.a_max_mm": box.a_max,
        "design.c_min_mm": box.c_min, "design.c_max_mm": box.c_max,
        "design.beta1": w.beta1, "design.beta2": w.beta2,
        "design.beta3": w.beta3, "design.beta4": w.beta4,
        "design.y_star_kN": cs.y_star, "design.p_r": cs.p_r,
        "output.dir": cfg.output.dir,
        "output.grid_nx": cfg.output.grid_nx, "output.grid_ny": cfg.output.grid_ny,
    }
    return "".join(f"{k}: {_emit(v)}\n" for k, v in ordered.items())


def config_sha256(cfg: Config) -> str:
    """Hash of the model-determining keys (geometry through design).

    Output routing (``output.*``) is excluded on purpose: the same model
    written to two directories must produce byte-identical artifacts.
    """
    lines = [ln for ln in config_to_text(cfg).splitlines(keepends=True)
             if not ln.startswith("output.")]
    return hashlib.sha256("".join(lines).encode("utf-8")).hexdigest()


def default_config_path() -> Path:
    return Path(str(resources.files("brakeopt").joinpath("data/default.yaml")))


def default_config() -> Config:
    return load_config(default_config_path())


def input_model_from(cfg: Config) -> maxent.InputModel:
    rm = cfg.random
    return maxent.build_input_model(
        alpha_lo=rm.alpha_lo_deg, alpha_hi=rm.alpha_hi_deg, alpha_mean=rm.alpha_mean_deg,
        fs_lo=rm.fs_lo_kN, fs_hi=rm.fs_hi_kN, fs_mean=rm.fs_mean_kN)


def setup_from(cfg: Config) -> optimizer.ModelSetup:
    return optimizer.ModelSetup(
        geom=cfg.geometry, fric=cfg.friction,
        Fg=cfg.loads.Fg_kN, Fb=cfg.loads.Fb_kN,
        alpha_nominal_deg=cfg.random.alpha_mean_deg,
        fs_nominal_kn=cfg.random.fs_mean_kN)


def nominal_load(cfg: Config) -> mechmodel.LoadCase:
    return mechmodel.LoadCase.from_degrees(
        Fg=cfg.loads.Fg_kN, Fb=cfg.loads.Fb_kN,
        Fs=cfg.random.fs_mean_kN, alpha_deg=cfg.random.alpha_mean_deg)
