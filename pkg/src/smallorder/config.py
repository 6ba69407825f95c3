"""INI experiment configs: parsing with full error collection, and printing.

Schema (every section flat, unknown sections or keys are errors)::

    [run]       command = assemble | eigen | solve | sweep
                output_dir = <path>          (default: out)
                seed = <int>                 (default: 0)
    [domain]    a, b, n
    [problem]   kind, s, p, mu, k, A, r, eps (what is required depends on command/kind)
    [schedule]  regime = case2 | sublinear | logistic
                s_list = comma separated, strictly decreasing

``kind`` is ``fractional``/``logarithmic`` for assemble and eigen, and one of
``power``, ``lambda``, ``theta``, ``logistic``, ``log`` for solve.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields

from .asymptotics import CASE2, LOGISTIC, REGIMES, SUBLINEAR, Schedule
from .core import SmallOrderError

COMMANDS = ("assemble", "eigen", "solve", "sweep")
OPERATOR_KINDS = ("fractional", "logarithmic")
SOLVE_KINDS = ("power", "lambda", "theta", "logistic", "log")
PARAM_KEYS = ("s", "p", "mu", "k", "A", "r", "eps")

SCHEMA = {
    "run": ("command", "output_dir", "seed"),
    "domain": ("a", "b", "n"),
    "problem": ("kind",) + PARAM_KEYS,
    "schedule": ("regime", "s_list"),
}

# parameters each (command, kind) needs
REQUIRED = {
    ("assemble", "fractional"): ("s",),
    ("eigen", "fractional"): ("s",),
    ("solve", "power"): ("s", "p"),
    ("solve", "lambda"): ("s", "p"),
    ("solve", "theta"): ("s", "eps", "A", "r"),
    ("solve", "logistic"): ("s", "k", "p"),
    ("solve", "log"): ("mu",),
    ("sweep", CASE2): ("mu",),
    ("sweep", SUBLINEAR): ("p",),
    ("sweep", LOGISTIC): ("k", "p"),
}

RULES = {
    "s": (lambda v: 0 < v < 1, "s in (0,1)"),
    "mu": (lambda v: v > 0, "mu>0"),
    "k": (lambda v: v > 1, "k>1"),
    "A": (lambda v: v > 0, "A>0"),
    "r": (lambda v: v > 2, "r>2"),
    "eps": (lambda v: v > 0, "eps>0"),
    "p": (lambda v: v > 1, "p>1"),
}


class ConfigError(SmallOrderError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class ProblemSpec:
    kind: str | None = None
    s: float | None = None
    p: float | None = None
    mu: float | None = None
    k: float | None = None
    A: float | None = None
    r: float | None = None
    eps: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    domain: tuple
    problem: ProblemSpec
    schedule: Schedule | None = None
    output_dir: str = "out"
    seed: int = 0


def _num(raw, name, errors, cast=float):
    try:
        v = cast(raw)
    except ValueError:
        errors.append(f"{name}: cannot parse {raw!r} as {cast.__name__}")
        return None
    if cast is float and not math.isfinite(v):
        errors.append(f"{name}: must be finite, got {raw!r}")
        return None
    return v


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ConfigError` listing every problem."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case sensitive (A vs a)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax error: {exc}"]) from None
    errors: list[str] = []
    for sec in cp.sections():
        if sec not in SCHEMA:
            errors.append(f"unknown section [{sec}]")
            continue
        for key in cp[sec]:
            if key not in SCHEMA[sec]:
                errors.append(f"unknown key {key!r} in [{sec}]")

    def get(sec, key):
        return cp.get(sec, key, fallback=None) if cp.has_section(sec) else None

    command = get("run", "command")
    if command is None:
        errors.append("missing [run] command")
    elif command not in COMMANDS:
        errors.append(f"command must be one of {COMMANDS}, got {command!r}")
    output_dir = get("run", "output_dir") or "out"
    seed_raw = get("run", "seed")
    seed = 0 if seed_raw is None else _num(seed_raw, "seed", errors, int)

    dom = []
    for key, cast in (("a", float), ("b", float), ("n", int)):
        raw = get("domain", key)
        if raw is None:
            errors.append(f"missing [domain] {key}")
            dom.append(None)
        else:
            dom.append(_num(raw, key, errors, cast))
    a, b, n = dom
    if a is not None and b is not None and not b > a:
        errors.append(f"b>a violated: a={a}, b={b}")
    if n is not None and n < 3:
        errors.append(f"n>=3 violated: n={n}")

    params, given = {}, set()
    for key in PARAM_KEYS:
        raw = get("problem", key)
        if raw is not None:
            given.add(key)
            v = _num(raw, key, errors)
            if v is not None:
                ok, label = RULES[key]
                if not ok(v):
                    errors.append(f"{label} violated: {key}={raw}")
                params[key] = v
    kind = get("problem", "kind")

    schedule = None
    if command == "sweep":
        regime = get("schedule", "regime")
        raw_s = get("schedule", "s_list")
        if regime is None or raw_s is None:
            errors.append("sweep needs [schedule] regime and s_list")
        elif regime not in REGIMES:
            errors.append(f"regime must be one of {REGIMES}, got {regime!r}")
        else:
            s_list = [_num(x.strip(), "s_list", errors) for x in raw_s.split(",") if x.strip()]
            if kind is not None and kind != regime:
                errors.append(f"[problem] kind={kind!r} conflicts with regime={regime!r}")
            kind = regime
            if None not in s_list:
                try:
                    schedule = Schedule(regime, tuple(s_list), mu=params.get("mu"),
                                        p=params.get("p"), k=params.get("k"))
                except SmallOrderError as exc:
                    errors.extend(str(exc).split("; "))
    elif cp.has_section("schedule"):
        errors.append(f"[schedule] is only valid for the sweep command, not {command!r}")

    if command in ("assemble", "eigen"):
        if kind not in OPERATOR_KINDS:
            errors.append(f"kind must be one of {OPERATOR_KINDS} for {command}, got {kind!r}")
    elif command == "solve":
        if kind not in SOLVE_KINDS:
            errors.append(f"kind must be one of {SOLVE_KINDS} for solve, got {kind!r}")
        elif kind in ("power", "lambda") and "p" in params and not params["p"] < 2:
            errors.append(f"p<2 violated: p={params['p']} (sublinear problem)")
    for key in REQUIRED.get((command, kind), ()):
        if key not in given:
            errors.append(f"missing [problem] {key} for {command}/{kind}")

    if errors:
        raise ConfigError(list(dict.fromkeys(errors)))
    return ExperimentConfig(command, (a, b, n), ProblemSpec(kind=kind, **params),
                            schedule, output_dir, seed)


def format_config(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config` (``parse(format(c)) == c``)."""
    a, b, n = cfg.domain
    lines = ["[run]", f"command = {cfg.command}", f"output_dir = {cfg.output_dir}",
             f"seed = {cfg.seed}", "", "[domain]", f"a = {a!r}", f"b = {b!r}", f"n = {n}",
             "", "[problem]"]
    for f in fields(ProblemSpec):
        v = getattr(cfg.problem, f.name)
        if v is None or (f.name == "kind" and cfg.command == "sweep"):
            continue
        lines.append(f"{f.name} = {v if f.name == 'kind' else repr(v)}")
    if cfg.schedule is not None:
        lines += ["", "[schedule]", f"regime = {cfg.schedule.regime}",
                  "s_list = " + ", ".join(repr(s) for s in cfg.schedule.s_list)]
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
