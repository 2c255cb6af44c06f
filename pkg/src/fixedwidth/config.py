"""Experiment configuration and its flat ``key = value`` file format.

Grammar, one entry per line::

    # comment (also allowed after a value)
    key = value

Recognised keys:

==================  ==========================================================
sampler             exp_indep | mixture_gibbs | mixture_rw_uniform |
                    mixture_rw_normal | normal_iid | constant | generic_rw
sampler.<name>      sampler parameter, e.g. ``sampler.p = 0.25``,
                    ``sampler.scales = 3, 30``, ``sampler.target = std_normal``
parameters          comma list of ``id:mean`` or ``id:q<level>``, each with an
                    optional ``@<component>`` suffix (default 0)
rule                comma list of absolute | relmag | relsd (or T1, T2, T3)
epsilon             one value, or one value per parameter
epsilon_scale       comma list of multipliers applied to ``epsilon``
                    (default 1); each (rule, scale) pair is one setting
delta               per-interval delta (default 0.10)
overall_confidence  joint level; enables Bonferroni, overrides ``delta``
bonferroni_k        number of simultaneous intervals (default: #parameters)
n_star              minimum simulation effort (default 1000)
check_increment     iterations between checks (default 500)
max_iterations      cap on chain length (default 10000000)
replications        number of independent replications (default 100)
seed                base seed, unsigned 64-bit (default 0)
workers             worker processes for replications (default 1)
tau                 batch-size exponent (default 0.5)
batch_mode          floor_pow | power_of_two (default floor_pow)
output              report path (default: stdout)
format              table | csv | json (default table)
==================  ==========================================================
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .core import ConfigError, FixedWidthError, ParameterSpec, check_unique_ids
from .mcse import BatchSchedule
from .samplers import SAMPLERS, make_sampler
from .stopping import StoppingRule, bonferroni_delta, parse_rule_kind

__all__ = ["ExperimentConfig", "parse_config", "load_config", "parse_parameters"]

FORMATS = ("table", "csv", "json")

_KEYS = {
    "sampler", "parameters", "rule", "epsilon", "epsilon_scale", "delta",
    "overall_confidence", "bonferroni_k", "n_star", "check_increment", "max_iterations",
    "replications", "seed", "workers", "tau", "batch_mode", "output", "format",
}

_PARAM_RE = re.compile(r"^(?P<id>[A-Za-z0-9_.\-]+)\s*:\s*(?P<kind>mean|q(?P<q>[0-9.eE+\-]+))"
                       r"\s*(?:@\s*(?P<comp>\d+))?$")


@dataclass
class ExperimentConfig:
    sampler: str
    specs: list[ParameterSpec]
    rules: list[str]
    epsilon: float | tuple[float, ...]
    sampler_params: dict = field(default_factory=dict)
    epsilon_scales: tuple[float, ...] = (1.0,)
    delta: float = 0.10
    overall_confidence: float | None = None
    bonferroni_k: int | None = None
    n_star: int = 1000
    check_increment: int = 500
    max_iterations: int = 10_000_000
    replications: int = 100
    seed: int = 0
    workers: int = 1
    tau: float = 0.5
    batch_mode: str = "floor_pow"
    output: str | None = None
    format: str = "table"

    def __post_init__(self):
        if not self.specs:
            raise ConfigError("at least one parameter is required")
        check_unique_ids(self.specs)
        self.rules = [parse_rule_kind(r) for r in self.rules]
        if not self.rules:
            raise ConfigError("at least one rule is required")
        if isinstance(self.epsilon, (list, tuple)):
            self.epsilon = tuple(float(e) for e in self.epsilon)
            if len(self.epsilon) == 1:
                self.epsilon = self.epsilon[0]
            elif len(self.epsilon) != len(self.specs):
                raise ConfigError(f"epsilon has {len(self.epsilon)} entries but there are "
                                  f"{len(self.specs)} parameters")
        if self.sampler not in SAMPLERS:
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        try:
            make_sampler(self.sampler, self.sampler_params)
            self.schedule
            self.settings()
        except FixedWidthError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def bonferroni(self) -> bool:
        return self.overall_confidence is not None

    @property
    def interval_delta(self) -> float:
        if self.overall_confidence is None:
            return self.delta
        return bonferroni_delta(self.overall_confidence, self.bonferroni_k or len(self.specs))

    @property
    def schedule(self) -> BatchSchedule:
        return BatchSchedule(self.tau, self.batch_mode)

    def settings(self) -> list[StoppingRule]:
        """One stopping rule per (rule kind, epsilon scale) pair."""
        out = []
        for kind in self.rules:
            for scale in self.epsilon_scales:
                if isinstance(self.epsilon, tuple):
                    eps = tuple(scale * e for e in self.epsilon)
                else:
                    eps = scale * self.epsilon
                out.append(StoppingRule(kind, eps, self.interval_delta, self.n_star,
                                        self.check_increment, self.max_iterations))
        return out


def parse_parameters(text: str) -> list[ParameterSpec]:
    specs = []
    for item in (t.strip() for t in text.split(",")):
        if not item:
            continue
        m = _PARAM_RE.match(item)
        if m is None:
            raise ConfigError(f"cannot parse parameter {item!r}; expected id:mean or id:q<level>[@component]")
        comp = int(m.group("comp") or 0)
        try:
            if m.group("q") is None:
                specs.append(ParameterSpec.mean(m.group("id"), comp))
            else:
                specs.append(ParameterSpec.quantile(m.group("id"), float(m.group("q")), comp))
        except (ValueError, FixedWidthError) as exc:
            raise ConfigError(f"bad parameter {item!r}: {exc}") from None
    return specs


def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(v) for v in re.split(r"[,\s]+", text.strip()) if v]
    except ValueError:
        raise ConfigError(f"{key} must be a list of numbers, got {text!r}") from None


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {text!r}") from None
    if value != int(value):
        raise ConfigError(f"{key} must be an integer, got {text!r}")
    return int(value)


def parse_config(text: str) -> ExperimentConfig:
    raw: dict[str, str] = {}
    sampler_params: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("sampler."):
            sampler_params[key[len("sampler."):]] = value
            continue
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    for required in ("sampler", "parameters", "rule", "epsilon"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")

    kw: dict = {
        "sampler": raw["sampler"],
        "specs": parse_parameters(raw["parameters"]),
        "rules": [r for r in (s.strip() for s in raw["rule"].split(",")) if r],
        "sampler_params": sampler_params,
    }
    eps = _floats(raw["epsilon"], "epsilon")
    kw["epsilon"] = eps[0] if len(eps) == 1 else tuple(eps)
    if "epsilon_scale" in raw:
        kw["epsilon_scales"] = tuple(_floats(raw["epsilon_scale"], "epsilon_scale"))
    for key in ("delta", "overall_confidence", "tau"):
        if key in raw:
            kw[key] = _floats(raw[key], key)[0]
    for key in ("bonferroni_k", "n_star", "check_increment", "max_iterations",
                "replications", "seed", "workers"):
        if key in raw:
            kw[key] = _int(raw[key], key)
    for key in ("batch_mode", "output", "format"):
        if key in raw:
            kw[key] = raw[key]
    try:
        return ExperimentConfig(**kw)
    except FixedWidthError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)
