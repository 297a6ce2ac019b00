"""Experiment configuration: INI-style key=value files with sections.

Modal life-span parameters ``m`` in the population sections are calendar
ages (as usually tabulated); ``scheme.retirement_age`` (default 65) is
subtracted when models are built, since model time runs in years since
retirement. Setting ``retirement_age = 0`` keeps the values as-is.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Tuple, Union

from .control import SchemeScenario
from .mortality import (ConfigError, GompertzMakehamParams, Model,
                        SinglePopModel, TwoPopModel)
from .pricing import MarketParams

MODEL_KINDS = ("ou-single", "cir-single", "ou-sub", "cir-sub")
EXPERIMENT_KINDS = ("base", "compare", "sweep")
SWEEP_VARS = ("theta1", "phi")

_REQUIRED = (
    ("model", "kind"),
    ("population1", "nu"), ("population1", "delta"), ("population1", "m"),
    ("population1", "b"), ("population1", "sigma"),
    ("market", "r"), ("market", "theta_s"), ("market", "sigma_s"),
    ("market", "theta_1"),
    ("scheme", "phi"),
)
_REQUIRED_POP2 = ("nu", "delta", "m", "b21", "b22", "sigma21", "sigma22")

_DEFAULTS = {
    ("market", "maturity"): 20.0,
    ("scheme", "pi"): 1.0,
    ("scheme", "y0"): 100.0,
    ("scheme", "retirement_age"): 65.0,
    ("scheme", "horizon"): 35.0,
    ("scheme", "dt"): 0.1,
    ("scheme", "n_paths"): 100,
    ("scheme", "seed"): 42,
    ("scheme", "t_max"): 120.0,
}


@dataclass(frozen=True)
class PopulationConfig:
    """Gompertz-Makeham inputs as configured (m quoted as an age)."""

    nu: float
    delta: float
    m: float


@dataclass(frozen=True)
class ExperimentConfig:
    model_kind: str
    pop1: PopulationConfig
    b1: float
    sigma1: float
    pop2: Optional[PopulationConfig]
    b21: Optional[float]
    b22: Optional[float]
    sigma21: Optional[float]
    sigma22: Optional[float]
    market: MarketParams
    scenario: SchemeScenario
    retirement_age: float
    experiment: str = "base"
    out_dir: str = "out"
    sweep_var: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()

    @property
    def is_two_pop(self) -> bool:
        return self.model_kind.endswith("-sub")


def default_config_path() -> Path:
    """Path of the shipped base-parameterisation config."""
    return Path(__file__).parent / "data" / "table1.cfg"


def _getfloat(cp, section, key):
    try:
        return cp.getfloat(section, key)
    except ValueError as exc:
        raise ConfigError(f"invalid value for [{section}] {key}: {exc}") from exc


def _getint(cp, section, key):
    try:
        return cp.getint(section, key)
    except ValueError as exc:
        raise ConfigError(f"invalid value for [{section}] {key}: {exc}") from exc


def loads_config(text: str) -> ExperimentConfig:
    """Parse configuration text (see ``load_config``)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unparseable config: {exc}") from exc

    missing = [f"[{sec}] {key}" for sec, key in _REQUIRED
               if not cp.has_option(sec, key)]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    kind = cp.get("model", "kind").strip().lower()
    if kind not in MODEL_KINDS:
        raise ConfigError(f"[model] kind must be one of {MODEL_KINDS}, got {kind!r}")

    if kind.endswith("-sub"):
        missing2 = [f"[population2] {k}" for k in _REQUIRED_POP2
                    if not cp.has_option("population2", k)]
        if missing2:
            raise ConfigError("missing required keys: " + ", ".join(missing2))

    def val(section, key, cast=_getfloat):
        if cp.has_option(section, key):
            return cast(cp, section, key)
        return _DEFAULTS[(section, key)]

    pop1 = PopulationConfig(nu=_getfloat(cp, "population1", "nu"),
                            delta=_getfloat(cp, "population1", "delta"),
                            m=_getfloat(cp, "population1", "m"))
    b1 = _getfloat(cp, "population1", "b")
    sigma1 = _getfloat(cp, "population1", "sigma")

    pop2 = b21 = b22 = sigma21 = sigma22 = None
    if cp.has_section("population2") or kind.endswith("-sub"):
        pop2 = PopulationConfig(nu=_getfloat(cp, "population2", "nu"),
                                delta=_getfloat(cp, "population2", "delta"),
                                m=_getfloat(cp, "population2", "m"))
        b21 = _getfloat(cp, "population2", "b21")
        b22 = _getfloat(cp, "population2", "b22")
        sigma21 = _getfloat(cp, "population2", "sigma21")
        sigma22 = _getfloat(cp, "population2", "sigma22")

    market = MarketParams(r=_getfloat(cp, "market", "r"),
                          theta_s=_getfloat(cp, "market", "theta_s"),
                          sigma_s=_getfloat(cp, "market", "sigma_s"),
                          theta_1=_getfloat(cp, "market", "theta_1"),
                          maturity=val("market", "maturity"))

    scenario = SchemeScenario(phi=_getfloat(cp, "scheme", "phi"),
                              pi=val("scheme", "pi"),
                              y0=val("scheme", "y0"),
                              horizon=val("scheme", "horizon"),
                              dt=val("scheme", "dt"),
                              n_paths=val("scheme", "n_paths", _getint),
                              seed=val("scheme", "seed", _getint),
                              t_max=val("scheme", "t_max"))

    experiment = "base"
    out_dir = "out"
    sweep_var = None
    sweep_values: Tuple[float, ...] = ()
    if cp.has_section("experiment"):
        experiment = cp.get("experiment", "kind", fallback="base").strip().lower()
        out_dir = cp.get("experiment", "out_dir", fallback="out").strip()
        if cp.has_option("experiment", "sweep_var"):
            sweep_var = cp.get("experiment", "sweep_var").strip().lower()
        if cp.has_option("experiment", "sweep_values"):
            raw = cp.get("experiment", "sweep_values")
            try:
                sweep_values = tuple(float(x) for x in raw.split(",") if x.strip())
            except ValueError as exc:
                raise ConfigError(f"invalid [experiment] sweep_values: {exc}") from exc
    if experiment not in EXPERIMENT_KINDS:
        raise ConfigError(f"[experiment] kind must be one of {EXPERIMENT_KINDS}, "
                          f"got {experiment!r}")
    if sweep_var is not None and sweep_var not in SWEEP_VARS:
        raise ConfigError(f"[experiment] sweep_var must be one of {SWEEP_VARS}, "
                          f"got {sweep_var!r}")
    if experiment == "sweep" and not sweep_values:
        raise ConfigError("[experiment] sweep_values must be non-empty for a sweep")

    cfg = ExperimentConfig(model_kind=kind, pop1=pop1, b1=b1, sigma1=sigma1,
                           pop2=pop2, b21=b21, b22=b22, sigma21=sigma21,
                           sigma22=sigma22, market=market, scenario=scenario,
                           retirement_age=val("scheme", "retirement_age"),
                           experiment=experiment, out_dir=out_dir,
                           sweep_var=sweep_var, sweep_values=sweep_values)
    build_model(cfg)  # surfaces singular parameter combinations immediately
    return cfg


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Load and validate an experiment configuration file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return loads_config(path.read_text())


def build_model(cfg: ExperimentConfig) -> Model:
    """Model with modal ages shifted to years since retirement."""
    shift = cfg.retirement_age
    gm1 = GompertzMakehamParams(cfg.pop1.nu, cfg.pop1.delta, cfg.pop1.m - shift)
    kind = "ou" if cfg.model_kind.startswith("ou") else "cir"
    if not cfg.is_two_pop:
        return SinglePopModel(kind=kind, gm=gm1, b=cfg.b1, sigma=cfg.sigma1)
    gm2 = GompertzMakehamParams(cfg.pop2.nu, cfg.pop2.delta, cfg.pop2.m - shift)
    return TwoPopModel(kind=kind, gm1=gm1, gm2=gm2, b1=cfg.b1, b21=cfg.b21,
                       b22=cfg.b22, sigma1=cfg.sigma1, sigma21=cfg.sigma21,
                       sigma22=cfg.sigma22)


def dumps_config(cfg: ExperimentConfig) -> str:
    """Serialise a configuration; ``loads_config`` of the result is equal."""
    cp = configparser.ConfigParser()
    cp["model"] = {"kind": cfg.model_kind}
    cp["population1"] = {"nu": repr(cfg.pop1.nu), "delta": repr(cfg.pop1.delta),
                         "m": repr(cfg.pop1.m), "b": repr(cfg.b1),
                         "sigma": repr(cfg.sigma1)}
    if cfg.pop2 is not None:
        cp["population2"] = {"nu": repr(cfg.pop2.nu), "delta": repr(cfg.pop2.delta),
                             "m": repr(cfg.pop2.m), "b21": repr(cfg.b21),
                             "b22": repr(cfg.b22), "sigma21": repr(cfg.sigma21),
                             "sigma22": repr(cfg.sigma22)}
    mk = cfg.market
    cp["market"] = {"r": repr(mk.r), "theta_s": repr(mk.theta_s),
                    "sigma_s": repr(mk.sigma_s), "theta_1": repr(mk.theta_1),
                    "maturity": repr(mk.maturity)}
    sc = cfg.scenario
    cp["scheme"] = {"phi": repr(sc.phi), "pi": repr(sc.pi), "y0": repr(sc.y0),
                    "retirement_age": repr(cfg.retirement_age),
                    "horizon": repr(sc.horizon), "dt": repr(sc.dt),
                    "n_paths": repr(sc.n_paths), "seed": repr(sc.seed),
                    "t_max": repr(sc.t_max)}
    exp = {"kind": cfg.experiment, "out_dir": cfg.out_dir}
    if cfg.sweep_var is not None:
        exp["sweep_var"] = cfg.sweep_var
    if cfg.sweep_values:
        exp["sweep_values"] = ", ".join(repr(v) for v in cfg.sweep_values)
    cp["experiment"] = exp
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def with_overrides(cfg: ExperimentConfig, out_dir: Optional[str] = None,
                   seed: Optional[int] = None, n_paths: Optional[int] = None,
                   experiment: Optional[str] = None,
                   sweep_var: Optional[str] = None,
                   sweep_values: Optional[Tuple[float, ...]] = None) -> ExperimentConfig:
    """Command-line overrides applied on top of a loaded configuration."""
    scenario = cfg.scenario
    if seed is not None or n_paths is not None:
        scenario = replace(scenario,
                           seed=scenario.seed if seed is None else seed,
                           n_paths=scenario.n_paths if n_paths is None else n_paths)
    return replace(cfg,
                   scenario=scenario,
                   out_dir=cfg.out_dir if out_dir is None else out_dir,
                   experiment=cfg.experiment if experiment is None else experiment,
                   sweep_var=cfg.sweep_var if sweep_var is None else sweep_var,
                   sweep_values=cfg.sweep_values if sweep_values is None else sweep_values)
