"""
Run configuration: a JSON key tree validated against SCHEMA, then turned into
the frozen option objects each pipeline stage consumes.
"""
import json
import logging
import os
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional

from django.conf import settings

from gridflow.exceptions import ConfigError
from network.case_io import Network
from surrogate.resnet import NetSpec
from surrogate.training import TrainConfig

from .engine import BetaUnit, GaussianGroup, OutageUnit, ScenarioSpec, WeibullUnit

logger = logging.getLogger(__name__)

NUMBER = (int, float)


@dataclass(frozen=True)
class ListOf:
    item: Any


_GAUSSIAN_GROUP = {
    "name": str,
    "quantity": str,
    "buses": (str, list),
    "std_ratio": NUMBER,
    "correlation": NUMBER,
    "pq_correlation": NUMBER,
}

SCHEMA = {
    "case": str,
    "seed": int,
    "threads": int,
    "output_dir": str,
    "bprime": str,
    "scenario": {
        "sampler": str,
        "samples": int,
        "halton_skip": int,
        "gaussian_groups": ListOf(_GAUSSIAN_GROUP),
        "weibull_units": ListOf({"bus": int, "k": NUMBER, "lam": NUMBER, "scale": NUMBER}),
        "beta_units": ListOf({"bus": int, "alpha": NUMBER, "beta": NUMBER, "capacity": NUMBER}),
        "outage_units": ListOf({"bus": int, "probability": NUMBER}),
    },
    "dataset": {
        "splits": ListOf(int),
        "tolerance": NUMBER,
        "max_iter": int,
        "max_diverged_fraction": NUMBER,
    },
    "network": {
        "hidden": ListOf(int),
        "shortcut": bool,
        "trunk_output_init": str,
    },
    "training": {
        "batch_size": int,
        "learning_rate": NUMBER,
        "beta1": NUMBER,
        "beta2": NUMBER,
        "epsilon": NUMBER,
        "max_epochs": int,
        "patience": int,
        "min_delta": NUMBER,
    },
    "ridge": {
        "lambda_per_sample": NUMBER,
        "standardize": bool,
    },
    "ppf": {
        "samples": int,
        "sampler": str,
        "kde": ListOf(str),
        "kde_points": int,
        "variance_counts": ListOf(int),
        "mape_epsilon": NUMBER,
    },
    "risk": {
        "vm_lower": NUMBER,
        "vm_upper": NUMBER,
        "vm_lower_percentile": NUMBER,
        "branch_rate": bool,
        "threshold": NUMBER,
    },
}

REQUIRED_KEYS = ("case", "scenario")
_REQUIRED_NESTED = {
    "gaussian_groups": ("name", "quantity", "buses", "std_ratio"),
    "weibull_units": ("bus", "k", "lam", "scale"),
    "beta_units": ("bus", "alpha", "beta", "capacity"),
    "outage_units": ("bus", "probability"),
}


def _type_name(kind) -> str:
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


def _check_value(value, kind, path: str) -> dict:
    if isinstance(kind, dict):
        if not isinstance(value, dict):
            return {"valid": False, "error": f"'{path}' must be an object", "code": "INVALID_TYPE"}
        return _check_tree(value, kind, path)
    if isinstance(kind, ListOf):
        if not isinstance(value, list):
            return {"valid": False, "error": f"'{path}' must be a list", "code": "INVALID_TYPE"}
        for i, item in enumerate(value):
            result = _check_value(item, kind.item, f"{path}[{i}]")
            if not result["valid"]:
                return result
            required = _REQUIRED_NESTED.get(path.rsplit(".", 1)[-1], ())
            missing = [key for key in required if isinstance(item, dict) and item.get(key) is None]
            if missing:
                return {"valid": False, "error": f"'{path}[{i}]' is missing '{missing[0]}'", "code": "MISSING_KEY"}
        return {"valid": True}
    # bool is an int subclass; accept it only where bool is asked for
    if isinstance(value, bool) and kind is not bool:
        return {"valid": False, "error": f"'{path}' must be {_type_name(kind)}", "code": "INVALID_TYPE"}
    if not isinstance(value, kind):
        return {"valid": False, "error": f"'{path}' must be {_type_name(kind)}", "code": "INVALID_TYPE"}
    return {"valid": True}


def _check_tree(tree: dict, schema: dict, prefix: str = "") -> dict:
    for key, value in tree.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in schema:
            return {"valid": False, "error": f"Unknown key '{path}'", "code": "UNKNOWN_KEY"}
        if value is None:
            continue
        result = _check_value(value, schema[key], path)
        if not result["valid"]:
            return result
    return {"valid": True}


def _drop_nulls(value):
    """Remove null entries at every depth."""
    if isinstance(value, dict):
        return {k: _drop_nulls(v) for k, v in value.items() if v is not None}
    if isinstance(value, list):
        return [_drop_nulls(v) for v in value]
    return value


def validate_config(tree) -> dict:
    if not isinstance(tree, dict):
        return {"valid": False, "error": "Config must be a JSON object", "code": "INVALID_TYPE"}
    for key in REQUIRED_KEYS:
        if tree.get(key) is None:
            return {"valid": False, "error": f"Missing key '{key}'", "code": "MISSING_KEY"}
    return _check_tree(tree, SCHEMA)


@dataclass(frozen=True)
class DatasetOptions:
    splits: tuple[int, int, int]
    tolerance: float
    max_iter: int
    max_diverged_fraction: float


@dataclass(frozen=True)
class RidgeOptions:
    lambda_per_sample: float = 1e-3
    standardize: bool = True

    def penalty(self, n_samples: int) -> float:
        return self.lambda_per_sample * n_samples


@dataclass(frozen=True)
class PpfOptions:
    samples: int
    sampler: Optional[str]
    kde: tuple[str, ...]
    kde_points: int
    variance_counts: tuple[int, ...]
    mape_epsilon: float


@dataclass(frozen=True)
class RiskOptions:
    vm_lower: Optional[float] = None
    vm_upper: Optional[float] = None
    vm_lower_percentile: Optional[float] = None
    branch_rate: bool = False
    threshold: float = 0.01


@dataclass(frozen=True)
class RunConfig:
    case: str
    seed: int
    threads: int
    output_dir: str
    bprime: str
    scenario: ScenarioSpec
    dataset: DatasetOptions
    hidden: tuple[int, ...]
    shortcut: bool
    trunk_output_init: str
    training: TrainConfig
    ridge: RidgeOptions
    ppf: PpfOptions
    risk: RiskOptions


def _buses(raw):
    return raw if isinstance(raw, str) else tuple(int(b) for b in raw)


class RunConfigManager:
    """
    Loads and validates a run config file. ``overrides`` (case, seed, threads,
    output_dir) take precedence over the file.
    """

    def __init__(self, config_file: str = None, overrides: Optional[Dict[str, Any]] = None):
        self.config_file = self.resolve_config_path(config_file or "ieee30.gauss.json")
        self._config = self._load_config()
        result = validate_config(self._config)
        if not result["valid"]:
            error_msg = f"Invalid config {self.config_file}: {result['error']}"
            logger.error(error_msg)
            raise ConfigError(error_msg, code=result["code"])
        self._config = _drop_nulls(self._config)
        for key, value in (overrides or {}).items():
            if value is not None:
                self._config[key] = value
        self.run = self._build()

    @staticmethod
    def resolve_config_path(config_file: str) -> str:
        if os.path.isfile(config_file) or os.path.isabs(config_file):
            return config_file
        bundled = os.path.join(settings.GRIDFLOW['CONFIG_DIR'], config_file)
        return bundled if os.path.isfile(bundled) else config_file

    def _load_config(self) -> Dict[str, Any]:
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                return json.load(f)
        except FileNotFoundError as e:
            error_msg = f"Config file not found: {self.config_file}"
            logger.error(error_msg)
            raise FileNotFoundError(error_msg) from e
        except json.JSONDecodeError as e:
            error_msg = f"Invalid JSON in config file {self.config_file}: {e}"
            logger.error(error_msg)
            raise ConfigError(error_msg, code="INVALID_JSON") from e

    def _section(self, name: str) -> Dict[str, Any]:
        return self._config.get(name) or {}

    def _build(self) -> RunConfig:
        defaults = settings.GRIDFLOW
        seed = int(self._config.get('seed') or 0)
        stem = os.path.basename(self.config_file).removesuffix('.json')
        dataset = self._section('dataset')
        network = self._section('network')
        ppf = self._section('ppf')
        scenario = self.get_scenario_spec(seed)
        splits = tuple(dataset.get('splits') or (scenario.samples, 0, 0))
        if len(splits) != 3:
            raise ConfigError(f"dataset.splits needs three sizes, got {list(splits)}", code="INVALID_VALUE")
        return RunConfig(
            case=self._config['case'],
            seed=seed,
            threads=int(self._config.get('threads') or defaults['THREADS']),
            output_dir=self._config.get('output_dir') or os.path.join('runs', stem),
            bprime=self._config.get('bprime') or 'series',
            scenario=scenario,
            dataset=DatasetOptions(
                splits=splits,
                tolerance=float(dataset.get('tolerance', defaults['NR_TOLERANCE'])),
                max_iter=int(dataset.get('max_iter', defaults['NR_MAX_ITER'])),
                max_diverged_fraction=float(dataset.get('max_diverged_fraction', defaults['MAX_DIVERGED_FRACTION'])),
            ),
            hidden=tuple(network.get('hidden') or (100, 100)),
            shortcut=bool(network.get('shortcut', True)),
            trunk_output_init=network.get('trunk_output_init') or 'he',
            training=TrainConfig(seed=seed, **self._section('training')),
            ridge=RidgeOptions(**self._section('ridge')),
            ppf=PpfOptions(
                samples=int(ppf.get('samples') or scenario.samples),
                sampler=ppf.get('sampler'),
                kde=tuple(ppf.get('kde') or ()),
                kde_points=int(ppf.get('kde_points') or defaults['KDE_POINTS']),
                variance_counts=tuple(ppf.get('variance_counts') or ()),
                mape_epsilon=float(ppf.get('mape_epsilon', defaults['MAPE_EPSILON'])),
            ),
            risk=RiskOptions(**{
                'threshold': defaults['VARIANCE_COEFFICIENT_THRESHOLD'],
                **self._section('risk'),
            }),
        )

    def get_scenario_spec(self, seed: Optional[int] = None) -> ScenarioSpec:
        raw = self._section('scenario')
        return ScenarioSpec(
            gaussian_groups=tuple(
                GaussianGroup(**{**g, 'buses': _buses(g['buses'])}) for g in raw.get('gaussian_groups') or ()
            ),
            weibull_units=tuple(WeibullUnit(**u) for u in raw.get('weibull_units') or ()),
            beta_units=tuple(BetaUnit(**u) for u in raw.get('beta_units') or ()),
            outage_units=tuple(OutageUnit(**u) for u in raw.get('outage_units') or ()),
            sampler=raw.get('sampler') or 'mc',
            seed=int(self._config.get('seed') or 0) if seed is None else seed,
            samples=int(raw.get('samples') or 1000),
            halton_skip=int(raw.get('halton_skip', settings.GRIDFLOW['HALTON_SKIP'])),
        )

    def get_ppf_scenario(self, samples: Optional[int] = None) -> ScenarioSpec:
        """The scenario re-drawn on its own stream for PPF runs, so it never replays the training rows."""
        opts = self.run.ppf
        return replace(
            self.run.scenario,
            samples=samples or opts.samples,
            sampler=opts.sampler or self.run.scenario.sampler,
            purpose="ppf",
        )

    def get_net_spec(self, net: Network) -> NetSpec:
        return NetSpec.for_network(
            net,
            self.run.hidden,
            shortcut=self.run.shortcut,
            trunk_output_init=self.run.trunk_output_init,
        )

    def get_train_config(self, epochs: Optional[int] = None, learning_rate: Optional[float] = None) -> TrainConfig:
        changes = {}
        if epochs is not None:
            changes['max_epochs'] = epochs
        if learning_rate is not None:
            changes['learning_rate'] = learning_rate
        return replace(self.run.training, **changes)

    def get_kde_quantities(self) -> List[str]:
        return list(self.run.ppf.kde)

    def resolve_case_path(self, case: Optional[str] = None) -> str:
        case = case or self.run.case
        candidates = [case]
        if not os.path.isabs(case):
            candidates.append(os.path.join(settings.GRIDFLOW['CASE_DIR'], case))
            candidates.append(os.path.join(os.path.dirname(os.path.abspath(self.config_file)), case))
        for path in candidates:
            if os.path.isfile(path):
                return path
        error_msg = f"Case file not found: {case}"
        logger.error(error_msg)
        raise FileNotFoundError(error_msg)
