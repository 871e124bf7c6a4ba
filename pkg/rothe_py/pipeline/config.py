"""Run configuration: section dataclasses and the TOML reader/printer.

A config file has the sections ``[domain]``, ``[coefficients]``, ``[j]``,
``[time]``, ``[source]``, ``[initial]``, ``[solver]``, ``[experiment]`` and
``[output]``; every key is optional and takes the dataclass default.
:func:`parse_config` reports every problem it finds at once, each with the
line it refers to.
"""
from __future__ import annotations

import math
import pathlib
import re
import sys
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple, Union

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from ..convex import JSPECS, JSpec, SolverSettings, make_jspec
from ..errors import ConfigError, ConfigIssue
from ..fem import FieldSpec, InitialSpec
from ..mesh import InterfaceMode, band_cell_count, max_band_cells

EXPERIMENT_KINDS = ("wentzell", "signorini", "msweep", "thinlayer", "estimates", "poincare")
GEOMETRIES = ("strip", "inclusion")
PROBLEMS = ("wentzell", "signorini")


@dataclass
class DomainConfig:
    geometry: str = "inclusion"
    n: int = 8
    nx1: int = 2
    nx2: int = 2
    ny: int = 2

    def __post_init__(self) -> None:
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"'geometry' must be one of {list(GEOMETRIES)}.")
        if self.n < 4 or self.n % 4 != 0:
            raise ValueError("'n' must be a positive multiple of 4.")
        for name in ("nx1", "nx2", "ny"):
            if getattr(self, name) < 1:
                raise ValueError(f"'{name}' must be at least 1.")


@dataclass
class CoefficientConfig:
    sigma1: float = 1.0
    sigma2: float = 1.0
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self) -> None:
        for name in ("sigma1", "sigma2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"'{name}' must be positive (0 < sigma_min <= sigma <= sigma_max).")
        if not self.alpha > 0:
            raise ValueError("'alpha' must be positive.")
        if self.beta < 0:
            raise ValueError("'beta' must be non-negative.")


@dataclass
class FunctionalConfig:
    kind: str = "zero"
    lam: Optional[float] = None
    c: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in JSPECS:
            raise ValueError(f"'kind' must be one of {sorted(JSPECS)}.")

    def build(self) -> JSpec:
        params = {name: getattr(self, name) for name in ("lam", "c", "a", "b") if getattr(self, name) is not None}
        return make_jspec(self.kind, **params)


@dataclass
class TimeConfig:
    T: float = 1.0
    m: int = 10

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError("'T' must be positive.")
        if self.m < 1:
            raise ValueError("'m' must be at least 1.")


@dataclass
class SourceConfig:
    f_kind: str = "zero"
    f_amplitude: float = 0.0
    g_kind: str = "zero"
    g_amplitude: float = 0.0

    def __post_init__(self) -> None:
        for name in ("f_kind", "g_kind"):
            if getattr(self, name) not in FieldSpec.PROFILES:
                raise ValueError(f"'{name}' must be one of {sorted(FieldSpec.PROFILES)}.")

    @property
    def f(self) -> FieldSpec:
        return FieldSpec(self.f_kind, self.f_amplitude)

    @property
    def g(self) -> FieldSpec:
        return FieldSpec(self.g_kind, self.g_amplitude)


@dataclass
class InitialConfig:
    S_kind: str = "zero"
    S_amplitude: float = 0.0

    def __post_init__(self) -> None:
        if self.S_kind not in InitialSpec.KINDS:
            raise ValueError(f"'S_kind' must be one of {list(InitialSpec.KINDS)}.")

    @property
    def S(self) -> InitialSpec:
        return InitialSpec(self.S_kind, self.S_amplitude)


@dataclass
class SolverConfig:
    tol: float = 1e-10
    max_sweeps: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("'tol' must be positive.")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValueError("'max_sweeps' must be at least 1.")

    def settings(self) -> SolverSettings:
        return SolverSettings(tol=self.tol, max_sweeps=self.max_sweeps)


@dataclass
class ExperimentConfig:
    kind: str = "wentzell"
    problem: Optional[str] = None
    m_list: Tuple[int, ...] = (8, 16, 32)
    m_reference: Optional[int] = None
    eps_list: Tuple[float, ...] = (0.125, 0.0625, 0.03125)
    n_list: Tuple[int, ...] = (8, 16, 32)
    gamma: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"'kind' must be one of {list(EXPERIMENT_KINDS)}.")
        if self.problem is not None and self.problem not in PROBLEMS:
            raise ValueError(f"'problem' must be one of {list(PROBLEMS)}.")
        self.m_list = tuple(self.m_list)
        self.eps_list = tuple(self.eps_list)
        self.n_list = tuple(self.n_list)
        if not self.m_list or any(m < 1 for m in self.m_list):
            raise ValueError("'m_list' must hold positive step counts.")
        if self.m_reference is not None and self.m_reference < 1:
            raise ValueError("'m_reference' must be at least 1.")
        if not self.eps_list or any(not e > 0 for e in self.eps_list):
            raise ValueError("'eps_list' must hold positive thicknesses.")
        if any(b >= a for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ValueError("'eps_list' must be strictly decreasing.")
        if not self.n_list or any(n < 4 or n % 4 != 0 for n in self.n_list):
            raise ValueError("'n_list' must hold positive multiples of 4.")
        if not self.gamma > 0:
            raise ValueError("'gamma' must be positive.")
        if self.seed < 0:
            raise ValueError("'seed' must be non-negative.")

    @property
    def resolved_problem(self) -> str:
        """``wentzell`` or ``signorini``: the transmission problem the experiment runs."""

        if self.kind in PROBLEMS:
            return self.kind
        if self.kind == "thinlayer":
            return "wentzell"
        if self.kind == "poincare":
            return "signorini"
        return self.problem or "wentzell"

    @property
    def reference_steps(self) -> int:
        return self.m_reference if self.m_reference is not None else 8 * max(self.m_list)


@dataclass
class OutputConfig:
    dir: str = "out"

    def __post_init__(self) -> None:
        if not self.dir:
            raise ValueError("'dir' must be a non-empty path.")


@dataclass
class RunConfig:
    """A complete experiment description."""

    domain: DomainConfig = field(default_factory=DomainConfig)
    coefficients: CoefficientConfig = field(default_factory=CoefficientConfig)
    j: FunctionalConfig = field(default_factory=FunctionalConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    source: SourceConfig = field(default_factory=SourceConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self) -> None:
        for spec in fields(self):
            expected = SECTIONS[spec.name]
            if not isinstance(getattr(self, spec.name), expected):
                raise TypeError(f"'{spec.name}' must be a {expected.__name__} instance.")

    @property
    def mode(self) -> InterfaceMode:
        if self.experiment.resolved_problem == "signorini":
            return InterfaceMode.BILATERAL
        return InterfaceMode.CONTINUOUS

    @property
    def minimal_signorini_steps(self) -> int:
        c = self.coefficients
        return max(1, math.ceil(min(c.sigma1, c.sigma2) * self.time.T / c.alpha - 1e-12))

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        """Nested mapping of every set value, in section order."""

        payload: Dict[str, Dict[str, Any]] = {}
        for spec in fields(self):
            section = getattr(self, spec.name)
            values: Dict[str, Any] = {}
            for item in fields(section):
                value = getattr(section, item.name)
                if value is None:
                    continue
                values[_KEY_ALIASES.get(item.name, item.name)] = list(value) if isinstance(value, tuple) else value
            payload[spec.name] = values
        return payload


SECTIONS: Dict[str, type] = {
    "domain": DomainConfig,
    "coefficients": CoefficientConfig,
    "j": FunctionalConfig,
    "time": TimeConfig,
    "source": SourceConfig,
    "initial": InitialConfig,
    "solver": SolverConfig,
    "experiment": ExperimentConfig,
    "output": OutputConfig,
}

# ``lambda`` is a Python keyword; the file spells it out.
_KEY_ALIASES = {"lam": "lambda"}
_FIELD_NAMES = {alias: name for name, alias in _KEY_ALIASES.items()}

Checker = Callable[[Any], Any]


def _integer(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeError("expected an integer")
    return value


def _real(value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TypeError("expected a number")
    return float(value)


def _text(value: Any) -> str:
    if not isinstance(value, str):
        raise TypeError("expected a string")
    return value


def _list_of(item: Checker) -> Checker:
    def check(value: Any) -> tuple:
        if not isinstance(value, list):
            raise TypeError("expected a list")
        return tuple(item(entry) for entry in value)

    return check


_SCHEMA: Dict[str, Dict[str, Checker]] = {
    "domain": {"geometry": _text, "n": _integer, "nx1": _integer, "nx2": _integer, "ny": _integer},
    "coefficients": {"sigma1": _real, "sigma2": _real, "alpha": _real, "beta": _real},
    "j": {"kind": _text, "lambda": _real, "c": _real, "a": _real, "b": _real},
    "time": {"T": _real, "m": _integer},
    "source": {"f_kind": _text, "f_amplitude": _real, "g_kind": _text, "g_amplitude": _real},
    "initial": {"S_kind": _text, "S_amplitude": _real},
    "solver": {"tol": _real, "max_sweeps": _integer},
    "experiment": {
        "kind": _text,
        "problem": _text,
        "m_list": _list_of(_integer),
        "m_reference": _integer,
        "eps_list": _list_of(_real),
        "n_list": _list_of(_integer),
        "gamma": _real,
        "seed": _integer,
    },
    "output": {"dir": _text},
}

_SECTION_LINE = re.compile(r"^\s*\[\s*([A-Za-z_][\w-]*)\s*\]")
_KEY_LINE = re.compile(r"^\s*([A-Za-z_][\w-]*)\s*=")


def _line_index(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    """``(section, key) -> line``; ``(section, None)`` is the header line."""

    index: Dict[Tuple[str, Optional[str]], int] = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_LINE.match(line)
        if header:
            section = header.group(1)
            index.setdefault((section, None), number)
            continue
        key = _KEY_LINE.match(line)
        if key:
            index.setdefault((section, key.group(1)), number)
    return index


def _syntax_line(exc: Exception) -> Optional[int]:
    match = re.search(r"line (\d+)", str(exc))
    return int(match.group(1)) if match else None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a run configuration.

    Raises :class:`ConfigError` listing every unknown key, type mismatch and
    constraint violation, including a Signorini step count below the
    coercivity threshold.
    """

    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([ConfigIssue(_syntax_line(exc) or 0, "", "", f"syntax error: {exc}")]) from exc

    lines = _line_index(text)
    issues: List[ConfigIssue] = []

    def report(section: str, key: Optional[str], message: str) -> None:
        line = lines.get((section, key)) if key is not None else None
        if line is None:
            line = lines.get((section, None), 0)
        issues.append(ConfigIssue(line, section, key or "", message))

    sections: Dict[str, Any] = {}
    for name, body in document.items():
        if name not in SECTIONS or not isinstance(body, Mapping):
            line = lines.get((name, None)) or lines.get(("", name), 0)
            issues.append(ConfigIssue(line, name, "", f"unknown section {name!r}"))
            continue
        values: Dict[str, Any] = {}
        for key, raw in body.items():
            checker = _SCHEMA[name].get(key)
            if checker is None:
                report(name, key, f"unknown key {key!r}")
                continue
            try:
                values[_FIELD_NAMES.get(key, key)] = checker(raw)
            except TypeError as exc:
                report(name, key, f"type mismatch: {exc}, got {raw!r}")
        try:
            sections[name] = SECTIONS[name](**values)
        except (TypeError, ValueError) as exc:
            report(name, _offending_key(str(exc), values), f"constraint violation: {exc}")

    if not issues:
        config = RunConfig(**sections)
        _cross_check(config, report)
        if not issues:
            return config
    raise ConfigError(issues)


def _offending_key(message: str, values: Mapping[str, Any]) -> Optional[str]:
    for name in values:
        if f"'{name}'" in message:
            return _KEY_ALIASES.get(name, name)
    return None


def _cross_check(config: RunConfig, report: Callable[[str, Optional[str], str], None]) -> None:
    experiment = config.experiment
    problem = experiment.resolved_problem
    if experiment.problem is not None and experiment.kind in ("thinlayer", "poincare", *PROBLEMS):
        if experiment.problem != problem:
            report("experiment", "problem", f"experiment {experiment.kind!r} always runs the {problem} problem")
    if problem == "signorini" and config.coefficients.beta != 0.0:
        report("coefficients", "beta", "beta applies only to the Wentzell problem")
    if experiment.kind in ("thinlayer", "poincare") and config.domain.geometry != "inclusion":
        report("domain", "geometry", f"experiment {experiment.kind!r} needs the inclusion geometry")
    if experiment.kind == "thinlayer":
        if config.coefficients.beta != 0.0:
            report("coefficients", "beta", "the thin-layer limit needs beta = 0")
        if config.j.kind == "interval":
            report("j", "kind", "the interval indicator lacks the growth bound the thin-layer problem needs")
        if config.domain.geometry == "inclusion":
            n, widest = config.domain.n, max_band_cells(config.domain.n)
            misfits = [e for e in experiment.eps_list if not 1 <= band_cell_count(n, e, experiment.gamma) <= widest]
            if misfits:
                report(
                    "experiment",
                    "eps_list",
                    f"thicknesses {misfits} do not give between 1 and {widest} band cells per side at n={n}",
                )
    try:
        config.j.build()
    except (TypeError, ValueError) as exc:
        report("j", "kind", f"constraint violation: {exc}")

    if problem == "signorini" and experiment.kind != "poincare":
        minimal = config.minimal_signorini_steps
        if config.time.m < minimal:
            report(
                "time",
                "m",
                f"m={config.time.m} violates m >= sigma_min*T/alpha_min; the minimal admissible m is {minimal}",
            )
        if experiment.kind in ("msweep", "estimates"):
            counts = list(experiment.m_list)
            if experiment.kind == "msweep":
                counts.append(experiment.reference_steps)
            low = [m for m in counts if m < minimal]
            if low:
                report("experiment", "m_list", f"step counts {low} are below the minimal admissible m {minimal}")


def format_config(config: RunConfig) -> str:
    """Print ``config`` so that ``parse_config(format_config(c)) == c``."""

    return tomli_w.dumps(config.to_dict())


def load_config(path: Union[str, pathlib.Path]) -> RunConfig:
    return parse_config(pathlib.Path(path).read_text(encoding="utf-8"))


__all__ = [
    "EXPERIMENT_KINDS",
    "CoefficientConfig",
    "DomainConfig",
    "ExperimentConfig",
    "FunctionalConfig",
    "InitialConfig",
    "OutputConfig",
    "RunConfig",
    "SolverConfig",
    "SourceConfig",
    "TimeConfig",
    "format_config",
    "load_config",
    "parse_config",
]
