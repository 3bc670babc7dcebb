"""Flat ``section.key = value`` configuration files and shipped presets.

Numbers may be written as small arithmetic expressions over ``pi`` and
``sqrt`` (``2pi*1e-5``, ``pi/2``, ``10*sqrt(1/(2*1e5))``). Lines starting with
``#`` are comments. ``emit`` writes every field explicitly, so
``parse(emit(c)) == c``.
"""
from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field

from .errors import InvalidArgument, WvaError
from .model import SetupParams
from .noise import NoiseModel, RunConfig


class ConfigError(WvaError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_JUXTAPOSED_PI = re.compile(r"(?<=[0-9.)])\s*(?=pi\b)")


def evaluate(text: str):
    """Evaluate a numeric expression; allows ``pi``, ``sqrt`` and complex literals."""
    src = _JUXTAPOSED_PI.sub("*", text.strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError:
        raise ValueError(f"not a number: {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
                and not isinstance(node.value, bool):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id == "sqrt" and len(node.args) == 1 and not node.keywords:
            return math.sqrt(ev(node.args[0]))
        raise ValueError(f"unsupported expression: {text!r}")

    return ev(tree)


def _real(text):
    v = evaluate(text)
    if isinstance(v, complex):
        if v.imag != 0:
            raise ValueError(f"expected a real number, got {text!r}")
        v = v.real
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"not finite: {text!r}")
    return v


def _complex(text):
    return complex(evaluate(text))


def _int(text):
    v = _real(text)
    if v != int(v):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(v)


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true/false, got {text!r}")


def _str(text):
    return text.strip()


@dataclass(frozen=True)
class SweepSpec:
    axis: str = "delta"
    scale: str = "log"
    start: float = 1e-4
    stop: float = 0.1
    points: int = 101
    series: tuple = ("enhancement",)
    monte_carlo: bool = False

    def grid(self):
        import numpy as np

        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class OutputSpec:
    path: str = ""
    format: str = "csv"


@dataclass(frozen=True)
class Config:
    setup: SetupParams
    noise: NoiseModel
    run: RunConfig
    sweep: SweepSpec = field(default_factory=SweepSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    oracle_draws: int = 100


AXES = ("alpha2", "delta", "gamma")
FORMATS = ("csv", "json")

# key -> (converter, default); None default means required
_SCHEMA = {
    "setup.phi0": (_real, None),
    "setup.alpha": (_complex, None),
    "setup.delta": (_real, None),
    "setup.compensate_back_phase": (_bool, False),
    "setup.theta": (_real, math.pi / 2),
    "noise.eta_bar": (_real, 0.0),
    "noise.eta_ratio": (_real, None),
    "noise.tau_c": (_real, 1.0),
    "noise.shot_var": (_real, None),
    "run.gamma": (_real, 1000.0),
    "run.total_time": (_real, 1.0),
    "run.post_prob": (_real, 1.0),
    "run.seed": (_int, 0),
    "run.realizations": (_int, 1000),
    "sweep.axis": (_str, "delta"),
    "sweep.scale": (_str, "log"),
    "sweep.start": (_real, 1e-4),
    "sweep.stop": (_real, 0.1),
    "sweep.points": (_int, 101),
    "sweep.series": (_str, "enhancement"),
    "sweep.monte_carlo": (_bool, False),
    "output.path": (_str, ""),
    "output.format": (_str, "csv"),
    "oracle.draws": (_int, 100),
}
# accepted only as input sugar
_ALIASES = {"setup.alpha2": "setup.alpha"}


def read_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(None, f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA and key not in _ALIASES:
            raise ConfigError(key, f"unknown key (line {lineno})")
        pairs[key] = value
    return pairs


def split_series(text: str) -> tuple:
    return tuple(s.strip() for s in text.split(";") if s.strip())


def build(pairs: dict) -> Config:
    vals = {}
    for key, (conv, default) in _SCHEMA.items():
        raw = pairs.get(key)
        if raw is None and key == "setup.alpha" and "setup.alpha2" in pairs:
            raw = pairs["setup.alpha2"]
            try:
                a2 = _real(raw)
                if a2 < 0:
                    raise ValueError("must be non-negative")
                vals[key] = complex(math.sqrt(a2))
            except ValueError as exc:
                raise ConfigError("setup.alpha2", str(exc)) from None
            continue
        if raw is None:
            if default is None and key in ("setup.phi0", "setup.alpha", "setup.delta"):
                name = "setup.alpha (or setup.alpha2)" if key == "setup.alpha" else key
                raise ConfigError(name, "missing required key")
            vals[key] = default
            continue
        try:
            vals[key] = conv(raw)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ConfigError(key, str(exc)) from None

    def section(prefix, ctor, mapping):
        try:
            return ctor(**{name: vals[k] for name, k in mapping.items()})
        except InvalidArgument as exc:
            culprit = next((k for k in mapping.values() if k.split(".")[1] in str(exc)), prefix)
            raise ConfigError(culprit, str(exc)) from None

    setup = section("setup", SetupParams, {
        "phi0": "setup.phi0", "alpha": "setup.alpha", "delta": "setup.delta",
        "compensate_back_phase": "setup.compensate_back_phase", "theta": "setup.theta",
    })

    if vals["noise.shot_var"] is None:
        if setup.alpha2 == 0:
            raise ConfigError("noise.shot_var", "required when setup.alpha is 0")
        vals["noise.shot_var"] = 1.0 / (2.0 * setup.alpha2)
    if vals["noise.eta_ratio"] is not None:
        if "noise.eta_bar" in pairs:
            raise ConfigError("noise.eta_ratio", "give either noise.eta_bar or noise.eta_ratio")
        vals["noise.eta_bar"] = vals["noise.eta_ratio"] * math.sqrt(vals["noise.shot_var"])
    noise = section("noise", NoiseModel, {
        "eta_bar": "noise.eta_bar", "tau_c": "noise.tau_c", "shot_var": "noise.shot_var",
    })
    run = section("run", RunConfig, {
        "gamma": "run.gamma", "total_time": "run.total_time", "post_prob": "run.post_prob",
        "seed": "run.seed", "realizations": "run.realizations",
    })

    if vals["sweep.axis"] not in AXES:
        raise ConfigError("sweep.axis", f"must be one of {', '.join(AXES)}")
    if vals["sweep.scale"] not in ("linear", "log"):
        raise ConfigError("sweep.scale", "must be linear or log")
    if vals["sweep.points"] < 2:
        raise ConfigError("sweep.points", "a sweep needs at least 2 points")
    if vals["sweep.scale"] == "log" and not (vals["sweep.start"] > 0 and vals["sweep.stop"] > 0):
        raise ConfigError("sweep.start", "log grids need positive endpoints")
    if vals["sweep.start"] == vals["sweep.stop"]:
        raise ConfigError("sweep.stop", "grid endpoints coincide")
    series = split_series(vals["sweep.series"])
    if not series:
        raise ConfigError("sweep.series", "no series given")
    sweep = SweepSpec(vals["sweep.axis"], vals["sweep.scale"], vals["sweep.start"],
                      vals["sweep.stop"], vals["sweep.points"], series, vals["sweep.monte_carlo"])

    if vals["output.format"] not in FORMATS:
        raise ConfigError("output.format", "must be csv or json")
    output = OutputSpec(vals["output.path"], vals["output.format"])
    if vals["oracle.draws"] < 0:
        raise ConfigError("oracle.draws", "must be non-negative")
    return Config(setup, noise, run, sweep, output, vals["oracle.draws"])


def parse(text: str, overrides: dict | None = None) -> Config:
    pairs = read_pairs(text)
    for key, value in (overrides or {}).items():
        if key not in _SCHEMA and key not in _ALIASES:
            raise ConfigError(key, "unknown key")
        pairs[key] = value
        # an explicit override of one spelling replaces the other
        if key == "setup.alpha2":
            pairs.pop("setup.alpha", None)
        elif key == "setup.alpha":
            pairs.pop("setup.alpha2", None)
        elif key == "noise.eta_bar":
            pairs.pop("noise.eta_ratio", None)
        elif key == "noise.eta_ratio":
            pairs.pop("noise.eta_bar", None)
    return build(pairs)


def emit(cfg: Config) -> str:
    s, n, r, w, o = cfg.setup, cfg.noise, cfg.run, cfg.sweep, cfg.output
    lines = [
        f"setup.phi0 = {s.phi0!r}",
        f"setup.alpha = {s.alpha!r}",
        f"setup.delta = {s.delta!r}",
        f"setup.compensate_back_phase = {str(s.compensate_back_phase).lower()}",
        f"setup.theta = {s.theta!r}",
        f"noise.eta_bar = {n.eta_bar!r}",
        f"noise.tau_c = {n.tau_c!r}",
        f"noise.shot_var = {n.shot_var!r}",
        f"run.gamma = {r.gamma!r}",
        f"run.total_time = {r.total_time!r}",
        f"run.post_prob = {r.post_prob!r}",
        f"run.seed = {r.seed}",
        f"run.realizations = {r.realizations}",
        f"sweep.axis = {w.axis}",
        f"sweep.scale = {w.scale}",
        f"sweep.start = {w.start!r}",
        f"sweep.stop = {w.stop!r}",
        f"sweep.points = {w.points}",
        f"sweep.series = {'; '.join(w.series)}",
        f"sweep.monte_carlo = {str(w.monte_carlo).lower()}",
        f"output.path = {o.path}",
        f"output.format = {o.format}",
        f"oracle.draws = {cfg.oracle_draws}",
    ]
    return "\n".join(lines) + "\n"


PRESETS = {
    # enhancement vs |alpha|^2 phi0 over (0, 6 pi]; solid = uncompensated, dashed = compensated
    "fig2": """\
setup.phi0 = 2pi*1e-5
setup.alpha2 = 1e5
setup.delta = 0.01
sweep.axis = alpha2
sweep.scale = linear
sweep.start = 50
sweep.stop = 3e5
sweep.points = 6000
sweep.series = enhancement(compensate_back_phase=false); enhancement(compensate_back_phase=true)
""",
    # enhancement vs delta at |alpha|^2 = 1e5 (epsilon = 0) and 1e2 (epsilon != 0)
    "fig2-inset": """\
setup.phi0 = 2pi*1e-5
setup.alpha2 = 1e5
setup.delta = 0.1
sweep.axis = delta
sweep.scale = log
sweep.start = 1e-4
sweep.stop = 0.1
sweep.points = 301
sweep.series = enhancement; enhancement(alpha2=1e2); weak_prediction
""",
    # SNR vs photon rate; T/tau_c = 1e3, eta_bar ten times the shot-noise amplitude
    "fig3": """\
setup.phi0 = 2pi*1e-5
setup.alpha2 = 1e5
setup.delta = 0.1
noise.eta_ratio = 10
noise.tau_c = 1e-3
run.total_time = 1
run.gamma = 1e3
sweep.axis = gamma
sweep.scale = log
sweep.start = 0.1
sweep.stop = 1e11
sweep.points = 241
sweep.series = non_post_selected; post_selected(delta=0.1); post_selected(delta=0.01); quantum_limited
""",
    # 1e-7 rad per photon, a cross-phase measured in optical fibre
    "nat-photon-2009": """\
setup.phi0 = 1e-7
setup.alpha2 = 1e5
setup.delta = 0.01
sweep.axis = delta
sweep.scale = log
sweep.start = 1e-6
sweep.stop = 0.1
sweep.points = 201
sweep.series = enhancement; weak_prediction
""",
}


def preset(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(None, f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
