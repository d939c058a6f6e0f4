"""Experiment configuration: a single JSON document, parsed into dataclasses.

Every parse error names the offending key as a path such as
``equalizers[2].lr`` so a broken config can be fixed without guessing.
"""
import json
from dataclasses import asdict, dataclass, field, fields

from ..channel import ChannelSpec
from ..dsp import FiberParams
from ..equalizers import EQUALIZER_KINDS, TrainSchedule

SWEEP_AXES = ("snr_db", "symbol_rate")


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class EqualizerConfig:
    """One equalizer of an experiment.

    ``lr`` is the generator (or supervised model) learning rate, or the LMS
    step size; ``lr_d`` is the discriminator rate and only used by GAN kinds.
    ``options`` go to the model constructor.
    """

    kind: str
    lr: float = 1e-3
    lr_d: float = None
    options: dict = field(default_factory=dict)

    @property
    def is_gan(self):
        return self.kind.startswith("gan_")


@dataclass
class RunsConfig:
    seeds: list = None  # explicit seeds; default base_seed + range(n_runs)
    base_seed: int = 0
    n_runs: int = 5

    def resolved_seeds(self):
        if self.seeds is not None:
            return [int(s) for s in self.seeds]
        return [self.base_seed + i for i in range(self.n_runs)]


@dataclass
class SweepConfig:
    axis: str = "snr_db"
    values: list = field(default_factory=list)


@dataclass
class EvaluationConfig:
    n_symbols: int = 10_000
    n_estimates: int = 100
    ma_length: int = 10
    max_shift: int = 20
    ser_threshold: float = 0.07
    histogram_bins: int = 60
    histogram_at: list = field(default_factory=lambda: [1.0])  # fractions of n_ti


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    channel: dict = field(default_factory=dict)
    equalizers: list = field(default_factory=list)
    schedule: dict = field(default_factory=dict)
    runs: RunsConfig = field(default_factory=RunsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    desk_scale: int = 1

    def channel_spec(self, sweep_value=None):
        kw = dict(self.channel)
        if "fiber" in kw:
            kw["fiber"] = FiberParams(**kw["fiber"])
        if sweep_value is not None:
            kw[self.sweep.axis] = sweep_value
        return ChannelSpec(**kw)

    def train_schedule(self, eq=None):
        kw = dict(self.schedule)
        if eq is not None:
            kw["lr_g"] = eq.lr
            if eq.lr_d is not None:
                kw["lr_d"] = eq.lr_d
        return TrainSchedule(**kw)

    def sweep_points(self):
        return list(self.sweep.values) or [None]

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _expect(value, types, path):
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise ConfigError(path, f"expected {_type_name(types)}, got a boolean")
    if not isinstance(value, types):
        raise ConfigError(path, f"expected {_type_name(types)}, got {type(value).__name__}")
    return value


def _type_name(types):
    types = types if isinstance(types, tuple) else (types,)
    return " or ".join(t.__name__ for t in types)


def _build(cls, data, path):
    _expect(data, dict, path)
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ConfigError(where, f"unknown key (allowed: {', '.join(sorted(names))})")
    return names


_NUM = (int, float)


def _parse_channel(data, path):
    names = _build(ChannelSpec, data, path)
    out = {}
    for k, v in data.items():
        p = f"{path}.{k}"
        if k == "fiber":
            _build(FiberParams, v, p)
            out[k] = {fk: float(_expect(fv, _NUM, f"{p}.{fk}")) for fk, fv in v.items()}
        elif k in ("alphabet", "linear_response", "nonlinearity"):
            out[k] = _expect(v, str, p)
        elif k in ("n_os", "span", "n_fft"):
            out[k] = _expect(v, int, p)
        elif k == "max_taps":
            out[k] = None if v is None else _expect(v, int, p)
        else:
            out[k] = float(_expect(v, _NUM, p))
    assert set(out) <= names
    try:
        kw = dict(out)
        if "fiber" in kw:
            kw["fiber"] = FiberParams(**kw["fiber"])
        ChannelSpec(**kw)
    except ValueError as e:
        raise ConfigError(path, str(e)) from None
    return out


def _parse_schedule(data, path):
    _build(TrainSchedule, data, path)
    out = {}
    for k, v in data.items():
        p = f"{path}.{k}"
        if k in ("lr_milestones",):
            out[k] = None if v is None else [int(_expect(m, int, f"{p}[{i}]")) for i, m in enumerate(_expect(v, list, p))]
        elif k in ("blur_end", "disc_hidden", "disc_stride"):
            out[k] = None if v is None else _expect(v, int, p)
        elif k in ("n_ti", "symbols_per_ti", "n_d", "hwa_window", "disc_window"):
            out[k] = _expect(v, int, p)
        else:
            out[k] = float(_expect(v, _NUM, p))
    try:
        TrainSchedule(**out)
    except ValueError as e:
        raise ConfigError(path, str(e)) from None
    return out


def _parse_equalizer(data, path):
    _build(EqualizerConfig, data, path)
    if "kind" not in data:
        raise ConfigError(f"{path}.kind", "missing")
    kind = _expect(data["kind"], str, f"{path}.kind")
    if kind not in EQUALIZER_KINDS:
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r} (expected one of {', '.join(EQUALIZER_KINDS)})")
    eq = EqualizerConfig(kind)
    if "lr" in data:
        eq.lr = float(_expect(data["lr"], _NUM, f"{path}.lr"))
        if eq.lr < 0:
            raise ConfigError(f"{path}.lr", "must be >= 0")
    if data.get("lr_d") is not None:
        eq.lr_d = float(_expect(data["lr_d"], _NUM, f"{path}.lr_d"))
    if "options" in data:
        eq.options = dict(_expect(data["options"], dict, f"{path}.options"))
    return eq


def parse_config(data):
    """Build an :class:`ExperimentConfig` from plain JSON data, validating every key."""
    _build(ExperimentConfig, data, "")
    cfg = ExperimentConfig()
    if "name" in data:
        cfg.name = _expect(data["name"], str, "name")
    if "channel" in data:
        cfg.channel = _parse_channel(data["channel"], "channel")
    if "schedule" in data:
        cfg.schedule = _parse_schedule(data["schedule"], "schedule")
    eqs = _expect(data.get("equalizers", []), list, "equalizers")
    cfg.equalizers = [_parse_equalizer(e, f"equalizers[{i}]") for i, e in enumerate(eqs)]
    kinds = [e.kind for e in cfg.equalizers]
    for i, k in enumerate(kinds):
        if k in kinds[:i]:
            raise ConfigError(f"equalizers[{i}].kind", f"duplicate kind {k!r}")
    if "runs" in data:
        _build(RunsConfig, data["runs"], "runs")
        r = data["runs"]
        cfg.runs = RunsConfig(
            seeds=None if r.get("seeds") is None else [
                _expect(s, int, f"runs.seeds[{i}]") for i, s in enumerate(_expect(r["seeds"], list, "runs.seeds"))
            ],
            base_seed=_expect(r.get("base_seed", 0), int, "runs.base_seed"),
            n_runs=_expect(r.get("n_runs", 5), int, "runs.n_runs"),
        )
        if not cfg.runs.resolved_seeds():
            raise ConfigError("runs", "no seeds to run")
    if "sweep" in data:
        _build(SweepConfig, data["sweep"], "sweep")
        s = data["sweep"]
        axis = _expect(s.get("axis", "snr_db"), str, "sweep.axis")
        if axis not in SWEEP_AXES:
            raise ConfigError("sweep.axis", f"expected one of {', '.join(SWEEP_AXES)}")
        vals = _expect(s.get("values", []), list, "sweep.values")
        cfg.sweep = SweepConfig(axis, [float(_expect(v, _NUM, f"sweep.values[{i}]")) for i, v in enumerate(vals)])
    if "evaluation" in data:
        _build(EvaluationConfig, data["evaluation"], "evaluation")
        ev = EvaluationConfig()
        for k, v in data["evaluation"].items():
            p = f"evaluation.{k}"
            if k == "histogram_at":
                ev.histogram_at = [float(_expect(x, _NUM, f"{p}[{i}]")) for i, x in enumerate(_expect(v, list, p))]
                if any(not 0 < x <= 1 for x in ev.histogram_at):
                    raise ConfigError(p, "fractions must lie in (0, 1]")
            elif k in ("ser_threshold",):
                setattr(ev, k, float(_expect(v, _NUM, p)))
            else:
                setattr(ev, k, _expect(v, int, p))
        if ev.n_estimates < ev.ma_length:
            raise ConfigError("evaluation.n_estimates", f"must be at least ma_length={ev.ma_length}")
        cfg.evaluation = ev
    if "desk_scale" in data:
        cfg.desk_scale = _expect(data["desk_scale"], int, "desk_scale")
        if cfg.desk_scale < 1:
            raise ConfigError("desk_scale", "must be >= 1")
    return cfg


def load_config(path):
    """Read a config file; a run manifest is accepted too (its ``config`` entry is used)."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError("", f"{path} is not valid JSON: {e}") from None
    if isinstance(data, dict) and "config" in data and "manifest_version" in data:
        data = data["config"]
    return parse_config(data)


def apply_desk_scale(cfg, factor):
    """Shrink training length and evaluation sizes by ``factor`` (explicit TI indices too)."""
    if factor < 1:
        raise ValueError("desk scale must be >= 1")
    if factor == 1:
        return cfg
    out = parse_config(cfg.to_dict())
    sch = dict(out.schedule)
    n_ti = sch.get("n_ti", TrainSchedule.n_ti)
    sch["n_ti"] = max(n_ti // factor, out.evaluation.n_estimates)
    for k in ("blur_end",):
        if sch.get(k) is not None:
            sch[k] = sch[k] // factor
    if sch.get("lr_milestones"):
        sch["lr_milestones"] = [m * sch["n_ti"] // n_ti for m in sch["lr_milestones"]]
    out.schedule = sch
    out.evaluation.n_symbols = max(out.evaluation.n_symbols // factor, 1000)
    out.desk_scale = cfg.desk_scale * factor
    return out
