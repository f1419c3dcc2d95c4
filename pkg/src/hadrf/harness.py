"""Monte Carlo campaigns: empirical excursion geometry vs. predicted expectations."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from .cubical import CubicalSet, GridSpec, excursion_complex, intrinsic_volumes, polygonized_mu1
from .errors import NumericalError
from .fields import (
    CovarianceModel,
    FieldSpec,
    TransformSpec,
    apply_transform,
    second_spectral_moment,
    simulate,
    transform_mean,
)
from .gkf import DomainSummary, expected_hadwiger, expected_intrinsic_volume
from .hadwiger import SweepSettings, lower_integral, upper_integral

CSV_COLUMNS = ("quantity", "i", "s", "estimator", "empirical_mean", "stderr", "prediction", "z", "N", "seed", "flag")


class ConfigError(ValueError):
    """Invalid experiment configuration (usage error)."""


@dataclass(frozen=True)
class ExperimentConfig:
    field: FieldSpec
    transform: TransformSpec = TransformSpec.identity()
    thresholds: Tuple[float, ...] = ()
    indices: Tuple[int, ...] = (0,)
    samples: int = 2
    integrals: Tuple[str, ...] = ("lower",)
    sweep: SweepSettings = SweepSettings()
    estimators: Tuple[str, ...] = ("exact",)
    output: Optional[str] = None

    def __post_init__(self):
        if self.samples < 2:
            raise ConfigError("need N >= 2 for stderr")
        if not self.thresholds and not self.integrals:
            raise ConfigError("thresholds are empty and no integrals were requested")
        n = self.field.grid.ndim
        bad = [i for i in self.indices if not 0 <= i <= n]
        if bad:
            raise ConfigError(f"indices {bad} out of range 0..{n}")
        try:
            self.transform.check_arity(self.field.components)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def domain(self) -> DomainSummary:
        return DomainSummary.box(self.field.grid.side_lengths, second_spectral_moment(self.field.cov))

    def with_seed(self, seed: int) -> "ExperimentConfig":
        f = self.field
        new_field = FieldSpec(f.grid, f.cov, f.components, seed, f.torus)
        return ExperimentConfig(
            new_field, self.transform, self.thresholds, self.indices, self.samples,
            self.integrals, self.sweep, self.estimators, self.output,
        )


def _schema() -> dict:
    return json.loads(resources.files("hadrf").joinpath("schema/config.schema.json").read_text())


def config_from_dict(obj: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(obj, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    fobj = obj["field"]
    try:
        grid = GridSpec(tuple(fobj["dims"]), fobj["spacing"])
        spec = FieldSpec(
            grid,
            CovarianceModel(fobj["length_scale"], fobj.get("covariance", "squared_exponential")),
            fobj.get("components", 1),
            fobj.get("seed", 0),
            tuple(fobj["torus"]) if "torus" in fobj else None,
        )
        transform = TransformSpec.from_json(obj.get("transform", {"kind": "identity"}))
        sw = obj.get("sweep", {})
        sweep = SweepSettings(sw.get("level_step"), tuple(sw["bounds"]) if sw.get("bounds") else None)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"config error: {exc}") from None
    return ExperimentConfig(
        field=spec,
        transform=transform,
        thresholds=tuple(float(s) for s in obj.get("thresholds", [])),
        indices=tuple(obj.get("indices", range(grid.ndim + 1))),
        samples=obj["samples"],
        integrals=tuple(obj.get("integrals", ["lower"])),
        sweep=sweep,
        estimators=tuple(obj.get("estimators", ["exact"])),
        output=obj.get("output"),
    )


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    return config_from_dict(obj)


def resolve_seed(cfg: ExperimentConfig, flag_seed: Optional[int] = None) -> ExperimentConfig:
    """Seed precedence: explicit flag, then HADRF_SEED, then the config."""
    if flag_seed is not None:
        return cfg.with_seed(flag_seed)
    env = os.environ.get("HADRF_SEED")
    if env:
        try:
            return cfg.with_seed(int(env))
        except ValueError:
            raise ConfigError(f"HADRF_SEED must be an unsigned integer, got {env!r}") from None
    return cfg


# quantities


@dataclass(frozen=True)
class Quantity:
    name: str
    i: Optional[int]
    s: Optional[float]
    estimator: str


def quantities(cfg: ExperimentConfig) -> List[Quantity]:
    """Row layout of a campaign, in report order."""
    n = cfg.field.grid.ndim
    out = [Quantity("mean", None, None, "vertex")]
    for s in cfg.thresholds:
        for i in cfg.indices:
            if "exact" in cfg.estimators:
                out.append(Quantity("mu", i, s, "exact"))
            if "polygonized" in cfg.estimators and i == 1 and n == 2:
                out.append(Quantity("mu", i, s, "polygonized"))
            if "vertex" in cfg.estimators and i == n:
                out.append(Quantity("mu", i, s, "vertex"))
    for kind in cfg.integrals:
        for i in cfg.indices:
            out.append(Quantity(f"hadwiger_{kind}", i, None, "exact"))
            if "vertex" in cfg.estimators and i == n:
                out.append(Quantity(f"hadwiger_{kind}", i, None, "vertex"))
    return out


def _vertex_weights(grid: GridSpec) -> np.ndarray:
    # trapezoid weights: the Lebesgue measure carried by each vertex
    w = np.ones(grid.dims)
    for axis, d in enumerate(grid.dims):
        shape = [1] * grid.ndim
        shape[axis] = d
        wa = np.ones(d)
        wa[0] = wa[-1] = 0.5
        w = w * wa.reshape(shape)
    return w * grid.spacing**grid.ndim


def sample_values(cfg: ExperimentConfig, sample_index: int) -> np.ndarray:
    """All campaign quantities for one realization, in ``quantities`` order."""
    try:
        g = apply_transform(cfg.transform, simulate(cfg.field, sample_index))
    except NumericalError as exc:
        raise NumericalError(f"sample {sample_index}: {exc}") from exc
    grid = g.grid
    vw = _vertex_weights(grid)
    values = [float(g.values.mean())]
    for s in cfg.thresholds:
        above = g.values >= s
        ex = excursion_complex(g.values, grid, s, "closed")
        ivs = intrinsic_volumes(ex)
        for i in cfg.indices:
            if "exact" in cfg.estimators:
                values.append(float(ivs[i]))
            if "polygonized" in cfg.estimators and i == 1 and grid.ndim == 2:
                # contour of the vertex mask, one pixel per vertex; the face mask of
                # ``ex`` is eroded by about h/2 and shortens the contour
                values.append(polygonized_mu1(CubicalSet.from_pixel_mask(above, grid.spacing)))
            if "vertex" in cfg.estimators and i == grid.ndim:
                values.append(float(vw[above].sum()))
    for kind in cfg.integrals:
        integral = lower_integral if kind == "lower" else upper_integral
        for i in cfg.indices:
            try:
                values.append(integral(g, i, cfg.sweep))
            except NumericalError as exc:
                raise NumericalError(f"sample {sample_index}, index {i}: {exc}") from exc
            if "vertex" in cfg.estimators and i == grid.ndim:
                values.append(float((vw * g.values).sum()))
    return np.array(values)


def predictions(cfg: ExperimentConfig) -> List[float]:
    """Expected value of every campaign quantity, in Euclidean units."""
    d = cfg.domain
    F, k = cfg.transform, cfg.field.components
    out = []
    for q in quantities(cfg):
        if q.name == "mean":
            out.append(transform_mean(F, k))
            continue
        unit = d.lambda2 ** (q.i / 2.0)
        if q.name == "mu":
            out.append(float(expected_intrinsic_volume(q.i, d, F, k, q.s)) / unit)
        else:
            kind = q.name.split("_", 1)[1]
            out.append(expected_hadwiger(q.i, d, F, k, kind) / unit)
    return out


@dataclass(frozen=True)
class ReportRow:
    quantity: str
    i: Optional[int]
    s: Optional[float]
    estimator: str
    empirical_mean: float
    stderr: float
    prediction: float
    z: float
    N: int
    seed: int
    flag: str = ""

    def as_csv(self) -> List[str]:
        def num(v):
            return "" if v is None else repr(float(v)) if isinstance(v, float) else str(v)

        return [
            self.quantity, num(self.i), num(self.s), self.estimator,
            num(self.empirical_mean), num(self.stderr), num(self.prediction), num(self.z),
            str(self.N), str(self.seed), self.flag,
        ]


def aggregate(samples: np.ndarray, preds: Sequence[float], qs: Sequence[Quantity], seed: int) -> List[ReportRow]:
    """Mean, standard error and z-score per column of a (N, Q) sample matrix."""
    n = samples.shape[0]
    if n < 2:
        raise ConfigError("need N >= 2 for stderr")
    means = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / math.sqrt(n)
    rows = []
    for q, m, se, p in zip(qs, means, stderr, preds):
        flag = ""
        if se > 0:
            z = (m - p) / se
        else:
            flag = "zero_stderr"
            z = 0.0 if m == p else math.copysign(math.inf, m - p)
        rows.append(ReportRow(q.name, q.i, q.s, q.estimator, float(m), float(se), float(p), float(z), n, int(seed), flag))
    return rows


def _worker(args):
    cfg, idx = args
    return sample_values(cfg, idx)


def run_validation(cfg: ExperimentConfig, jobs: Optional[int] = None) -> List[ReportRow]:
    """Simulate N samples and compare each quantity's mean with its prediction.

    Samples are reduced in ascending index order, so the report does not
    depend on ``jobs``.
    """
    jobs = jobs or os.cpu_count() or 1
    qs = quantities(cfg)
    preds = predictions(cfg)
    if jobs == 1:
        results = [sample_values(cfg, idx) for idx in range(cfg.samples)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunk = max(1, cfg.samples // (4 * jobs))
            results = list(pool.map(_worker, [(cfg, idx) for idx in range(cfg.samples)], chunksize=chunk))
    return aggregate(np.vstack(results), preds, qs, cfg.field.seed)


def write_report(rows: Sequence[ReportRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv())


def read_report(path) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
