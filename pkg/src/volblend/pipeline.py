"""End-to-end pipeline: ingest, fit the bank, select, blend, augment, evaluate.

Configuration lives in a single YAML file (grammar documented in the README);
every artifact the run emits is deterministic given the file contents and the
master seed, so re-running a config byte-identically reproduces the reports.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .arch import ModelSpec, default_order_grid, forecast_path, select_order
from .augmentation import AugmentConfig, augment, tune_augment
from .blending import MlpBlender, linear_blend, ols_fit, uniform_blend
from .evaluation import DmRow, EvalReport, EvalRow, dm_test, mae, realized_vol_proxy, rmse
from .exceptions import ConfigError, DataError, PipelineStageError
from .feature_bank import (
    FeatureMatrix,
    build_feature_bank,
    correlation_matrix,
    default_bank,
    random_feature_subset,
    select_features,
)
from .market_data import SplitSpec, describe, load_prices, log_returns
from .svr_garch import SvrGarchConfig, svr_garch_forecast

_SCHEMA_VERSION = 1

_INNOVATION_ALIASES = {
    "normal": "normal", "n": "normal",
    "student_t": "student_t", "t": "student_t",
    "skew_t": "skew_t", "st": "skew_t",
    "ged": "ged", "g": "ged",
}

_FAMILY_ALIASES = {"arch": "ARCH", "garch": "GARCH", "egarch": "EGARCH", "gjr": "GJR"}

# blend method -> report row prefix, in table order
_METHOD_PREFIXES = (("uniform", "Uniform"), ("ols", "BARCH"), ("mlp", "BARCH-NN"))

STAGES = ("all", "bank", "blend")


@dataclass
class MlpSettings:
    hidden_layers: tuple[int, ...] = (100, 50, 50)
    learning_rate: float = 1e-3
    batch_size: int = 200
    l2_alpha: float = 1e-4
    max_epochs: int = 500
    patience: int = 50

    def to_dict(self) -> dict:
        return {
            "hidden_layers": list(self.hidden_layers),
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "l2_alpha": self.l2_alpha,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
        }


@dataclass
class PipelineConfig:
    data_path: Path
    out_dir: Path
    val_len: int = 252
    test_len: int = 252
    train_len: int | None = None  # None: everything before validation
    bank_specs: list[ModelSpec] = field(default_factory=default_bank)
    bank_n_jobs: int = 1
    threshold: float = 0.9
    random_k: tuple[int, ...] = (5, 15, 35, 55, 75)
    blend_methods: tuple[str, ...] = ("ols", "mlp")
    floor_negative: bool = True
    mlp: MlpSettings = field(default_factory=MlpSettings)
    augment_cfg: AugmentConfig = field(default_factory=AugmentConfig)
    augment_tune: bool = False
    augment_window_grid: tuple[int, ...] = (5, 15, 30)
    augment_sigma_grid: tuple[float, ...] = (0.05, 0.1, 0.2)
    svr_enabled: bool = True
    svr_cfg: SvrGarchConfig = field(default_factory=SvrGarchConfig)
    singles_enabled: bool = True
    singles_families: tuple[str, ...] = ("ARCH", "GARCH", "EGARCH", "GJR")
    singles_innovations: tuple[str, ...] = ("normal", "student_t", "skew_t", "ged")
    singles_arch_orders: tuple[int, ...] = tuple(range(1, 16))
    singles_pq_orders: tuple[tuple[int, int], ...] = tuple(
        (p, q) for p in (1, 2, 3) for q in (1, 2, 3)
    )
    benchmark: str = "SVR-GARCH"
    cache_enabled: bool = True
    write_features: bool = True
    seed: int = 0

    def blend_labels(self) -> list[str]:
        return [str(k) for k in self.random_k] + ["CO"]

    def expected_model_names(self) -> list[str]:
        """Report rows in emission order; CO variants may drop at runtime."""
        names = ["Eavesdrop"]
        labels = self.blend_labels()
        for augmented in ("", "a"):
            for method, prefix in _METHOD_PREFIXES:
                if method in self.blend_methods:
                    names += [f"{augmented}{prefix}({lab})" for lab in labels]
        if self.svr_enabled:
            names += ["SVR-GARCH", "aSVR-GARCH"]
        if self.singles_enabled:
            for family in self.singles_families:
                for innovation in self.singles_innovations:
                    names.append(f"single:{family}-{innovation}")
        return names

    def to_dict(self) -> dict:
        return {
            "data_path": str(self.data_path),
            "out_dir": str(self.out_dir),
            "val_len": self.val_len,
            "test_len": self.test_len,
            "train_len": self.train_len,
            "bank": [
                {"family": s.family, "p": s.p, "q": s.q, "innovation": s.innovation}
                for s in self.bank_specs
            ],
            "bank_n_jobs": self.bank_n_jobs,
            "threshold": self.threshold,
            "random_k": list(self.random_k),
            "blend_methods": list(self.blend_methods),
            "floor_negative": self.floor_negative,
            "mlp": self.mlp.to_dict(),
            "augment": {
                "window": self.augment_cfg.window,
                "sigma": self.augment_cfg.sigma,
                "scale_mode": self.augment_cfg.scale_mode,
                "tune": self.augment_tune,
                "window_grid": list(self.augment_window_grid),
                "sigma_grid": list(self.augment_sigma_grid),
            },
            "svr": {
                "enabled": self.svr_enabled,
                "c_grid": list(self.svr_cfg.c_grid),
                "eps_grid": list(self.svr_cfg.eps_grid),
                "gamma_grid": list(self.svr_cfg.gamma_grid),
            },
            "singles": {
                "enabled": self.singles_enabled,
                "families": list(self.singles_families),
                "innovations": list(self.singles_innovations),
                "arch_orders": list(self.singles_arch_orders),
                "pq_orders": [list(pq) for pq in self.singles_pq_orders],
            },
            "benchmark": self.benchmark,
            "cache": self.cache_enabled,
            "write_features": self.write_features,
            "seed": self.seed,
        }


def derived_seed(master: int, *parts) -> int:
    """Deterministic child seed from the master seed and a label path."""
    payload = json.dumps([master, *[str(p) for p in parts]]).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:4], "big")


# ---------------------------------------------------------------------------
# Config parsing and validation
# ---------------------------------------------------------------------------


def _get(section: dict, key: str, default):
    value = section.get(key, default)
    return default if value is None else value


def _parse_bank(raw: dict, problems: list[str]) -> list[ModelSpec]:
    section = raw.get("bank") or {}
    preset = _get(section, "preset", "default90")
    specs_raw = section.get("specs")
    if specs_raw:
        specs: list[ModelSpec] = []
        for i, item in enumerate(specs_raw):
            try:
                family = _FAMILY_ALIASES[str(item.get("family", "")).lower()]
                innovation = _INNOVATION_ALIASES[str(item.get("innovation", "normal")).lower()]
                q = item.get("q")
                specs.append(
                    ModelSpec(family, int(item.get("p", 1)), None if q is None else int(q), innovation)
                )
            except Exception as exc:
                problems.append(f"bank.specs[{i}]: {exc}")
        return specs
    if preset == "default90":
        return default_bank()
    problems.append(f"bank.preset: unknown preset {preset!r}")
    return []


def parse_config(raw: dict, base_dir: Path) -> tuple[PipelineConfig | None, list[str]]:
    """Build a PipelineConfig from a YAML dict, collecting problems by field name."""
    problems: list[str] = []
    if not isinstance(raw, dict):
        return None, ["config: top level must be a mapping"]

    data = raw.get("data") or {}
    data_path = data.get("path")
    if not data_path:
        problems.append("data.path: missing")
        resolved_data = Path("missing.csv")
    else:
        resolved_data = (base_dir / data_path).resolve()
        if not resolved_data.exists():
            problems.append(f"data.path: file not found: {resolved_data}")

    split = raw.get("split") or {}
    val_len = _get(split, "val", 252)
    test_len = _get(split, "test", 252)
    train_raw = split.get("train", "auto")
    train_len = None if train_raw in (None, "auto") else train_raw
    for name, value in (("split.val", val_len), ("split.test", test_len)):
        if not isinstance(value, int) or value <= 0:
            problems.append(f"{name}: must be a positive integer, got {value!r}")
    if train_len is not None and (not isinstance(train_len, int) or train_len <= 0):
        problems.append(f"split.train: must be a positive integer or 'auto', got {train_raw!r}")

    bank_specs = _parse_bank(raw, problems)
    if not bank_specs:
        problems.append("bank: resolved to an empty bank")
    bank_n_jobs = _get(raw.get("bank") or {}, "n_jobs", 1)
    if not isinstance(bank_n_jobs, int) or bank_n_jobs == 0:
        problems.append(f"bank.n_jobs: must be a nonzero integer, got {bank_n_jobs!r}")

    selection = raw.get("selection") or {}
    threshold = _get(selection, "threshold", 0.9)
    if not isinstance(threshold, (int, float)) or not 0.0 < threshold <= 1.0:
        problems.append(f"selection.threshold: must be in (0, 1], got {threshold!r}")
    random_k = tuple(_get(selection, "random_k", [5, 15, 35, 55, 75]))
    for k in random_k:
        if not isinstance(k, int) or k < 1:
            problems.append(f"selection.random_k: entries must be positive integers, got {k!r}")
        elif bank_specs and k > len(bank_specs):
            problems.append(f"selection.random_k: K={k} exceeds bank size {len(bank_specs)}")

    blend = raw.get("blend") or {}
    methods = tuple(_get(blend, "methods", ["ols", "mlp"]))
    if not methods or any(m not in ("uniform", "ols", "mlp") for m in methods):
        problems.append(
            "blend.methods: must be a non-empty subset of "
            f"['uniform', 'ols', 'mlp'], got {list(methods)!r}"
        )
    floor_negative = bool(_get(blend, "floor_negative", True))
    mlp_raw = blend.get("mlp") or {}
    mlp = MlpSettings(
        hidden_layers=tuple(_get(mlp_raw, "hidden_layers", [100, 50, 50])),
        learning_rate=float(_get(mlp_raw, "learning_rate", 1e-3)),
        batch_size=int(_get(mlp_raw, "batch_size", 200)),
        l2_alpha=float(_get(mlp_raw, "l2_alpha", 1e-4)),
        max_epochs=int(_get(mlp_raw, "max_epochs", 500)),
        patience=int(_get(mlp_raw, "patience", 50)),
    )
    for name, value in (
        ("blend.mlp.learning_rate", mlp.learning_rate),
        ("blend.mlp.batch_size", mlp.batch_size),
        ("blend.mlp.patience", mlp.patience),
    ):
        if value <= 0:
            problems.append(f"{name}: must be positive, got {value!r}")
    if mlp.max_epochs < 0 or mlp.l2_alpha < 0:
        problems.append("blend.mlp: max_epochs and l2_alpha must be nonnegative")
    if any(u < 1 for u in mlp.hidden_layers):
        problems.append("blend.mlp.hidden_layers: layer widths must be >= 1")

    augment_raw = raw.get("augment") or {}
    window = _get(augment_raw, "window", 15)
    sigma = _get(augment_raw, "sigma", 0.1)
    scale_mode = _get(augment_raw, "scale_mode", "proxy_std")
    augment_ok = True
    if not isinstance(window, int) or window < 1:
        problems.append(f"augment.window: must be an integer >= 1, got {window!r}")
        augment_ok = False
    if not isinstance(sigma, (int, float)) or sigma < 0:
        problems.append(f"augment.sigma: must be >= 0, got {sigma!r}")
        augment_ok = False
    if scale_mode not in ("raw", "proxy_std"):
        problems.append(f"augment.scale_mode: must be 'raw' or 'proxy_std', got {scale_mode!r}")
        augment_ok = False
    augment_cfg = (
        AugmentConfig(window=window, sigma=float(sigma), scale_mode=scale_mode)
        if augment_ok
        else AugmentConfig()
    )
    augment_tune = bool(_get(augment_raw, "tune", False))
    window_grid = tuple(_get(augment_raw, "window_grid", [5, 15, 30]))
    sigma_grid = tuple(_get(augment_raw, "sigma_grid", [0.05, 0.1, 0.2]))
    if augment_tune:
        if not window_grid or any((not isinstance(w, int)) or w < 1 for w in window_grid):
            problems.append("augment.window_grid: must be non-empty positive integers")
        if not sigma_grid or any(s < 0 for s in sigma_grid):
            problems.append("augment.sigma_grid: must be non-empty nonnegative numbers")

    svr_raw = raw.get("svr") or {}
    svr_enabled = bool(_get(svr_raw, "enabled", True))
    svr_cfg = SvrGarchConfig()
    try:
        svr_cfg = SvrGarchConfig(
            c_grid=tuple(_get(svr_raw, "c_grid", [0.1, 1.0, 10.0, 100.0])),
            eps_grid=tuple(_get(svr_raw, "eps_grid", [1e-5, 1e-4, 1e-3])),
            gamma_grid=tuple(_get(svr_raw, "gamma_grid", [0.1, 1.0, 10.0])),
            tol=float(_get(svr_raw, "tol", 1e-6)),
            max_iter=int(_get(svr_raw, "max_iter", 1_000_000)),
        )
    except Exception as exc:
        problems.append(f"svr: {exc}")

    singles_raw = raw.get("singles") or {}
    singles_enabled = bool(_get(singles_raw, "enabled", True))
    families = []
    for fam in _get(singles_raw, "families", ["arch", "garch", "egarch", "gjr"]):
        key = str(fam).lower()
        if key not in _FAMILY_ALIASES:
            problems.append(f"singles.families: unknown family {fam!r}")
        else:
            families.append(_FAMILY_ALIASES[key])
    innovations = []
    for inv in _get(singles_raw, "innovations", ["normal", "student_t", "skew_t", "ged"]):
        key = str(inv).lower()
        if key not in _INNOVATION_ALIASES:
            problems.append(f"singles.innovations: unknown innovation {inv!r}")
        else:
            innovations.append(_INNOVATION_ALIASES[key])
    arch_orders = tuple(_get(singles_raw, "arch_orders", list(range(1, 16))))
    if any((not isinstance(p, int)) or p < 1 for p in arch_orders):
        problems.append("singles.arch_orders: must be integers >= 1")
    pq_raw = _get(singles_raw, "pq_orders", [[p, q] for p in (1, 2, 3) for q in (1, 2, 3)])
    pq_orders: list[tuple[int, int]] = []
    for item in pq_raw:
        try:
            p, q = int(item[0]), int(item[1])
            if p < 1 or q < 1:
                raise ValueError
            pq_orders.append((p, q))
        except (TypeError, ValueError, IndexError):
            problems.append(f"singles.pq_orders: bad entry {item!r}")

    evaluation = raw.get("evaluation") or {}
    benchmark = str(_get(evaluation, "benchmark", "SVR-GARCH"))

    output = raw.get("output") or {}
    out_dir = (base_dir / str(_get(output, "dir", "out"))).resolve()
    cache_enabled = bool(_get(output, "cache", True))
    write_features = bool(_get(output, "write_features", True))

    seed = _get(raw, "seed", 0)
    if not isinstance(seed, int):
        problems.append(f"seed: must be an integer, got {seed!r}")
        seed = 0

    config = PipelineConfig(
        data_path=resolved_data,
        out_dir=out_dir,
        val_len=val_len if isinstance(val_len, int) else 252,
        test_len=test_len if isinstance(test_len, int) else 252,
        train_len=train_len if isinstance(train_len, int) else None,
        bank_specs=bank_specs,
        bank_n_jobs=bank_n_jobs if isinstance(bank_n_jobs, int) and bank_n_jobs else 1,
        threshold=float(threshold) if isinstance(threshold, (int, float)) else 0.9,
        random_k=random_k,
        blend_methods=methods,
        floor_negative=floor_negative,
        mlp=mlp,
        augment_cfg=augment_cfg,
        augment_tune=augment_tune,
        augment_window_grid=window_grid,
        augment_sigma_grid=sigma_grid,
        svr_enabled=svr_enabled,
        svr_cfg=svr_cfg,
        singles_enabled=singles_enabled,
        singles_families=tuple(families),
        singles_innovations=tuple(innovations),
        singles_arch_orders=arch_orders,
        singles_pq_orders=tuple(pq_orders),
        benchmark=benchmark,
        cache_enabled=cache_enabled,
        write_features=write_features,
        seed=seed,
    )

    fixed_names = {n for n in config.expected_model_names() if not n.startswith("single:")}
    # Best-BIC single-model names depend on the data; accept any family prefix.
    single_ok = singles_enabled and benchmark.startswith(("ARCH-", "GARCH-", "EGARCH-", "GJR-"))
    if benchmark not in fixed_names and not single_ok:
        problems.append(
            f"evaluation.benchmark: {benchmark!r} is not produced by this configuration"
        )

    # Data-dependent sanity checks, only when the file is readable.
    if resolved_data.exists() and not problems:
        try:
            n_prices = sum(1 for _ in resolved_data.open()) - 1
        except OSError:
            n_prices = 0
        n_returns = n_prices - 1
        resolved_train = (
            config.train_len
            if config.train_len is not None
            else n_returns - config.val_len - config.test_len
        )
        if resolved_train < 30:
            problems.append(
                f"split: data leaves {resolved_train} training observations; need at least 30"
            )
        else:
            max_window = max((config.augment_cfg.window, *(window_grid if augment_tune else ())))
            if resolved_train < max_window + 6:
                problems.append(
                    f"augment.window: window {max_window} needs at least {max_window + 6} training rows"
                )
            for k in config.random_k:
                if resolved_train - 4 <= k + 1:
                    problems.append(
                        f"selection.random_k: K={k} needs more than {k + 5} training rows"
                    )
    return config, problems


def load_raw_config(path) -> tuple[dict, Path]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"unparseable config file {path}: {exc}") from exc
    if raw is None:
        raw = {}
    return raw, path.parent.resolve()


def validate_config(config) -> list[str]:
    """List of problems; empty iff the pipeline can run this configuration."""
    if isinstance(config, PipelineConfig):
        return []
    if isinstance(config, dict):
        _, problems = parse_config(config, Path.cwd())
        return problems
    raw, base_dir = load_raw_config(config)
    _, problems = parse_config(raw, base_dir)
    return problems


def load_config(path) -> PipelineConfig:
    raw, base_dir = load_raw_config(path)
    config, problems = parse_config(raw, base_dir)
    if problems:
        raise ConfigError("invalid config: " + "; ".join(problems))
    return config


# ---------------------------------------------------------------------------
# Artifacts
# ---------------------------------------------------------------------------


class _ArtifactWriter:
    """Tracks written files so a failed run can remove partial artifacts."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.paths: list[Path] = []

    def _target(self, relpath: str) -> Path:
        target = self.out_dir / relpath
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def write_text(self, relpath: str, text: str) -> Path:
        target = self._target(relpath)
        target.write_text(text)
        self.paths.append(target)
        return target

    def write_json(self, relpath: str, payload) -> Path:
        return self.write_text(relpath, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def cleanup(self) -> None:
        for path in self.paths:
            try:
                path.unlink()
            except OSError:
                pass


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineStageError:
        raise
    except Exception as exc:
        raise PipelineStageError(name, exc) from exc


# ---------------------------------------------------------------------------
# Bank cache
# ---------------------------------------------------------------------------


def _cache_key(config: PipelineConfig, split_spec: SplitSpec) -> str:
    digest = hashlib.sha256()
    digest.update(config.data_path.read_bytes())
    meta = {
        "schema": _SCHEMA_VERSION,
        "split": [split_spec.train_len, split_spec.val_len, split_spec.test_len],
        "bank": [
            [s.family, s.p, s.q, s.innovation] for s in config.bank_specs
        ],
    }
    digest.update(json.dumps(meta, sort_keys=True).encode())
    return digest.hexdigest()[:16]


def _cache_dir(config: PipelineConfig, key: str) -> Path:
    return config.out_dir / "cache" / key


def _save_bank_cache(path: Path, matrix: FeatureMatrix, manifest: list[dict]) -> None:
    path.mkdir(parents=True, exist_ok=True)
    np.savez(
        path / "features.npz",
        values=matrix.values,
        labels=np.array(matrix.column_labels),
        dates=np.array([d.isoformat() for d in matrix.dates]),
    )
    (path / "models.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_bank_cache(path: Path) -> tuple[FeatureMatrix, list[dict]]:
    data = np.load(path / "features.npz")
    dates = tuple(dt.date.fromisoformat(s) for s in data["dates"])
    matrix = FeatureMatrix(data["values"], tuple(data["labels"]), dates)
    manifest = json.loads((path / "models.json").read_text())
    return matrix, manifest


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def _floor(values: np.ndarray, enabled: bool) -> np.ndarray:
    return np.maximum(values, 0.0) if enabled else values


def run_pipeline(config, stage: str = "all") -> EvalReport | None:
    """Run the configured pipeline and write artifacts; returns the report.

    stage 'bank' stops after caching the fitted feature bank; stage 'blend'
    reuses the cached bank (computing it first if the cache is missing).
    """
    if not isinstance(config, PipelineConfig):
        config = load_config(config)
    if stage not in STAGES:
        raise ConfigError(f"unknown stage {stage!r}, expected one of {STAGES}")

    with _stage("ingest"):
        prices = load_prices(config.data_path)
        series = log_returns(prices)
        total = len(series)
        train_len = (
            config.train_len
            if config.train_len is not None
            else total - config.val_len - config.test_len
        )
        if train_len <= 0:
            raise DataError(
                f"no training data: {total} returns minus {config.val_len}+{config.test_len}"
            )
        split_spec = SplitSpec(train_len, config.val_len, config.test_len)
        if split_spec.total != total:
            raise DataError(
                f"explicit split {split_spec.total} does not match {total} returns"
            )
        stats = describe(series)
        proxy = realized_vol_proxy(series.returns)

    insample = split_spec.insample_len
    test_rows = slice(insample, total)
    val_rows = slice(train_len, insample)
    train_rows = slice(4, train_len)  # proxy warm-up excluded
    y_test = proxy[test_rows]

    with _stage("feature_bank"):
        key = _cache_key(config, split_spec)
        cache_path = _cache_dir(config, key)
        cached = (cache_path / "features.npz").exists()
        if stage == "bank" or not (config.cache_enabled and cached):
            if stage == "blend" and not cached:
                warnings.warn("no cached bank found; computing it now")
            matrix, models = build_feature_bank(
                series, split_spec, config.bank_specs, n_jobs=config.bank_n_jobs
            )
            bank_manifest = [m.to_dict() for m in models]
            if config.cache_enabled or stage == "bank":
                _save_bank_cache(cache_path, matrix, bank_manifest)
        else:
            matrix, bank_manifest = _load_bank_cache(cache_path)
    if stage == "bank":
        return None

    writer = _ArtifactWriter(config.out_dir)
    try:
        with _stage("feature_selection"):
            corr = correlation_matrix(matrix, n_rows=train_len)
            co_indices = select_features(corr, config.threshold)
            subsets: list[tuple[str, np.ndarray]] = []
            for k in config.random_k:
                seed_k = derived_seed(config.seed, "subset", k)
                subsets.append((str(k), random_feature_subset(matrix.n_features, k, seed_k)))
            if co_indices.size:
                subsets.append(("CO", co_indices))
            else:
                warnings.warn(
                    f"correlation selection at threshold {config.threshold} kept no features; "
                    "CO variants skipped"
                )

        val_preds: dict[str, np.ndarray] = {}
        test_preds: dict[str, np.ndarray] = {}
        blend_records: dict[str, dict] = {}

        with _stage("blending"):
            y_train = proxy[train_rows]
            y_val = proxy[val_rows]
            for label, indices in subsets:
                sub = matrix.subset(indices)
                sub_labels = sub.column_labels[:-1]
                if "uniform" in config.blend_methods:
                    name = f"Uniform({label})"
                    val_preds[name] = uniform_blend(sub.values[val_rows])
                    test_preds[name] = uniform_blend(sub.values[test_rows])
                    blend_records[name] = {"features": list(sub_labels)}
                if "ols" in config.blend_methods:
                    name = f"BARCH({label})"
                    weights = ols_fit(sub.values[train_rows], y_train)
                    val_preds[name] = linear_blend(sub.values[val_rows], weights)
                    test_preds[name] = linear_blend(sub.values[test_rows], weights)
                    blend_records[name] = {
                        "features": list(sub_labels),
                        "weights": weights.to_dict(),
                    }
                if "mlp" in config.blend_methods:
                    name = f"BARCH-NN({label})"
                    model = MlpBlender(
                        hidden_layers=config.mlp.hidden_layers,
                        learning_rate=config.mlp.learning_rate,
                        batch_size=config.mlp.batch_size,
                        l2_alpha=config.mlp.l2_alpha,
                        max_epochs=config.mlp.max_epochs,
                        patience=config.mlp.patience,
                        random_state=derived_seed(config.seed, "mlp", label),
                    )
                    model.fit(sub.values[train_rows], y_train, sub.values[val_rows], y_val)
                    val_preds[name] = model.predict(sub.values[val_rows])
                    test_preds[name] = model.predict(sub.values[test_rows])
                    blend_records[name] = {
                        "features": list(sub_labels),
                        "config": config.mlp.to_dict(),
                        "seed": derived_seed(config.seed, "mlp", label),
                        "best_epoch": model.best_epoch_,
                        "coefs": [w.tolist() for w in model.coefs_],
                        "intercepts": [b.tolist() for b in model.intercepts_],
                    }

        if config.svr_enabled:
            with _stage("svr_baseline"):
                svr_result = svr_garch_forecast(series, split_spec, config.svr_cfg)
                val_preds["SVR-GARCH"] = svr_result.forecasts[val_rows]
                test_preds["SVR-GARCH"] = svr_result.forecasts[test_rows]
                blend_records["SVR-GARCH"] = {
                    "mean_hyper": list(svr_result.mean_hyper),
                    "var_hyper": list(svr_result.var_hyper),
                }

        with _stage("augmentation"):
            for name in list(test_preds):
                aug_name = f"a{name}"
                if config.augment_tune:
                    aug_cfg = tune_augment(
                        val_preds[name],
                        proxy[val_rows],
                        proxy,
                        train_len,
                        insample,
                        config.augment_window_grid,
                        config.augment_sigma_grid,
                        config.augment_cfg.scale_mode,
                    )
                else:
                    aug_cfg = config.augment_cfg
                test_preds[aug_name] = augment(
                    test_preds[name], proxy, aug_cfg, insample, insample
                )
                blend_records[aug_name] = {
                    "base": name,
                    "window": aug_cfg.window,
                    "sigma": aug_cfg.sigma,
                    "scale_mode": aug_cfg.scale_mode,
                }

        with _stage("eavesdrop"):
            test_preds["Eavesdrop"] = proxy[insample - 1 : total - 1].copy()

        singles_manifest: list[dict] = []
        if config.singles_enabled:
            with _stage("singles"):
                train_returns = series.returns[:train_len]
                for family in config.singles_families:
                    grid = (
                        config.singles_arch_orders
                        if family == "ARCH"
                        else config.singles_pq_orders
                    )
                    if not grid:
                        grid = default_order_grid(family)
                    for innovation in config.singles_innovations:
                        fitted = select_order(family, innovation, grid, train_returns)
                        test_preds[fitted.name] = forecast_path(
                            fitted, series.returns, insample
                        )
                        singles_manifest.append(fitted.to_dict())

        with _stage("scoring"):
            ordered_names = ["Eavesdrop"]
            labels_present = [label for label, _ in subsets]
            for augmented in ("", "a"):
                for method, prefix in _METHOD_PREFIXES:
                    if method in config.blend_methods:
                        ordered_names += [
                            f"{augmented}{prefix}({lab})" for lab in labels_present
                        ]
            if config.svr_enabled:
                ordered_names += ["SVR-GARCH", "aSVR-GARCH"]
            ordered_names += [entry["name"] for entry in singles_manifest]

            rows = []
            final_preds: dict[str, np.ndarray] = {}
            for name in ordered_names:
                preds = _floor(test_preds[name], config.floor_negative)
                final_preds[name] = preds
                rows.append(EvalRow(name=name, rmse=rmse(y_test, preds), mae=mae(y_test, preds)))

            if config.benchmark not in final_preds:
                raise DataError(f"benchmark {config.benchmark!r} produced no forecasts")
            bench = final_preds[config.benchmark]
            dm_rows = []
            for name in ordered_names:
                if name == config.benchmark:
                    continue
                result = dm_test(y_test, bench, final_preds[name])
                dm_rows.append(DmRow(name=name, dm_stat=result.stat, p_value=result.p_value))
            report = EvalReport(rows=tuple(rows), dm_rows=tuple(dm_rows), benchmark=config.benchmark)

        with _stage("artifacts"):
            writer.write_json("data_stats.json", stats.to_dict())
            writer.write_text("eval_report.csv", report.eval_csv_text())
            writer.write_json("eval_report.json", report.to_dict())
            writer.write_text("dm_report.csv", report.dm_csv_text())
            writer.write_json(
                "dm_report.json",
                {"benchmark": report.benchmark, "models": report.to_dict()["dm"]},
            )
            writer.write_text("correlation_matrix.csv", corr.to_csv_text())
            if config.write_features:
                writer.write_text("feature_matrix.csv", matrix.to_csv_text())
            writer.write_json(
                "selected_features.json",
                {
                    "threshold": config.threshold,
                    "indices": [int(i) for i in co_indices],
                    "labels": [matrix.column_labels[i] for i in co_indices],
                },
            )
            writer.write_json(
                "fitted_models.json", {"bank": bank_manifest, "singles": singles_manifest}
            )
            writer.write_json("blend_models.json", blend_records)
            writer.write_json(
                "run_manifest.json",
                {"config": config.to_dict(), "cache_key": key, "models": ordered_names},
            )
            test_dates = series.dates[test_rows]
            for name in ordered_names:
                lines = ["date,predicted_h,realized_proxy"]
                for date, pred, actual in zip(test_dates, final_preds[name], y_test):
                    lines.append(f"{date.isoformat()},{float(pred)!r},{float(actual)!r}")
                writer.write_text(f"forecasts/{name}.csv", "\n".join(lines) + "\n")
    except Exception:
        writer.cleanup()
        raise
    return report
