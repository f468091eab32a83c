"""Command-line front end: ``wishart-outage <command> [options]``.

Commands
--------
``cdf``        CDF of ``lambda_max`` for one or more ``(Upsilon, Psi)`` ensembles.
``outage``     exact outage curves of a Rician channel for one or more ``K``.
``largek``     exact outage next to the large-K approximation, per ``K`` and alignment.
``mc``         Monte-Carlo quantiles of ``lambda_max`` for the ensembles.
``quadcheck``  series against quadrature for the matrix integral ``Q_k``.
``prop1``      KS distance of the normalised ``lambda_max`` to ``N(0, 1)`` per ``K``.
``validate``   the oracle suite; exits 1 if any check breaches its tolerance.

Configs are YAML documents with the sections ``channel``, ``ensemble``,
``grid``, ``series``, ``mc`` and optionally ``panels``; complex entries are
written ``{re: .., im: ..}``. A run producing one table writes it to
``--out``; a run producing several treats ``--out`` as a directory.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import cmatrix2 as cm
from . import presets
from .errors import ParseError, ValidationError, WishartOutageError
from .maxeig_cdf import SeriesConfig, cdf_max_eig_curve, cdf_max_eig_direct, params_from_gaussian
from .mimo_outage import (
    ChannelSpec,
    aligned_channel,
    outage_sweep,
    series_terms_estimate,
    SERIES_AUTO_KMAX,
)
from .oracles import McConfig, prop1_experiment, quad_Qk, QuadConfig, sample_max_eig

COMMANDS = ("cdf", "outage", "largek", "mc", "quadcheck", "prop1", "validate")
CSV_VERSION = 1
CURVE_COLUMNS = ("x", "value", "large_k_value", "terms_used", "last_term_mag", "converged")

Matrix = tuple  # ((a, b), (c, d)) of complex


# ---------------------------------------------------------------------------
# configuration model


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValidationError("grid: start and stop must be finite")
        if not self.start < self.stop:
            raise ValidationError("grid: start must be < stop")
        if self.points < 2:
            raise ValidationError("grid: points must be >= 2")
        if self.spacing not in ("linear", "log"):
            raise ValidationError("grid: spacing must be 'linear' or 'log'")
        if self.spacing == "log" and self.start <= 0.0:
            raise ValidationError("grid: log spacing needs start > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ChannelConfig:
    h_bar: Matrix
    t_corr: Matrix
    k: tuple = (1.0,)
    normalization: str = "strict"
    alignment: tuple = ("given",)
    include_large_k: bool = False

    def spec(self, k_factor: float) -> ChannelSpec:
        return ChannelSpec(np.array(self.h_bar), cm.Herm2.from_array(np.array(self.t_corr)),
                           k_factor, self.normalization)


@dataclass(frozen=True)
class EnsembleConfig:
    name: str
    upsilon: Matrix
    psi: Matrix


@dataclass(frozen=True)
class Panel:
    name: str
    grid: GridSpec
    channel: ChannelConfig | None


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None
    output: str | None
    grid: GridSpec
    series: SeriesConfig = field(default_factory=SeriesConfig)
    mc: McConfig = field(default_factory=McConfig)
    k_db: float | None = None
    channel: ChannelConfig | None = None
    ensembles: tuple = ()
    panels: tuple = ()
    quadcheck_k: tuple = presets.QUADCHECK_K
    quadcheck_x: tuple = presets.QUADCHECK_X
    prop1_k: tuple = presets.PROP1_K
    quantiles: int = 99


# ---------------------------------------------------------------------------
# parsing


def _ctx(path: str, msg: str) -> str:
    return f"{path}: {msg}" if path else msg


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(_ctx(path, f"expected a number, got {value!r}"))
    return float(value)


def _complex(value, path: str) -> complex:
    if isinstance(value, dict):
        extra = set(value) - {"re", "im"}
        if extra:
            raise ParseError(_ctx(path, f"unknown keys {sorted(extra)} in complex entry"))
        return complex(_number(value.get("re", 0.0), path + ".re"),
                       _number(value.get("im", 0.0), path + ".im"))
    return complex(_number(value, path))


def _matrix(value, path: str) -> Matrix:
    if not (isinstance(value, list) and len(value) == 2
            and all(isinstance(r, list) and len(r) == 2 for r in value)):
        raise ParseError(_ctx(path, "expected a 2x2 matrix as two rows of two entries"))
    return tuple(tuple(_complex(value[i][j], f"{path}[{i}][{j}]") for j in range(2))
                 for i in range(2))


def _matrix_doc(m: Matrix) -> list:
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m]


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _check_keys(node: dict, allowed: set, path: str):
    if not isinstance(node, dict):
        raise ParseError(_ctx(path, "expected a mapping"))
    extra = set(node) - allowed
    if extra:
        raise ParseError(_ctx(path, f"unknown keys {sorted(extra)}"))


def _parse_grid(node, path: str) -> GridSpec:
    _check_keys(node, {"start", "stop", "points", "spacing"}, path)
    for key in ("start", "stop", "points"):
        if key not in node:
            raise ValidationError(_ctx(path, f"missing field '{key}'"))
    points = node["points"]
    if isinstance(points, bool) or not isinstance(points, int):
        raise ParseError(_ctx(path + ".points", "expected an integer"))
    return GridSpec(_number(node["start"], path + ".start"), _number(node["stop"], path + ".stop"),
                    points, str(node.get("spacing", "linear")))


def _parse_k(node: dict, path: str) -> tuple | None:
    if "k" in node and "k_db" in node:
        raise ValidationError(_ctx(path, "give either 'k' or 'k_db', not both"))
    if "k_db" in node:
        return tuple(presets.db_to_linear(_number(v, path + ".k_db"))
                     for v in _as_list(node["k_db"]))
    if "k" in node:
        return tuple(_number(v, path + ".k") for v in _as_list(node["k"]))
    return None


def _parse_channel(node, path: str, base: ChannelConfig | None = None) -> ChannelConfig:
    keys = {"h_bar", "t_corr", "k", "k_db", "normalization_mode", "alignment", "include_large_k"}
    _check_keys(node, keys, path)
    fields = {} if base is None else asdict(base)
    if base is None:
        for key in ("h_bar", "t_corr"):
            if key not in node:
                raise ValidationError(_ctx(path, f"missing field '{key}'"))
    if "h_bar" in node:
        fields["h_bar"] = _matrix(node["h_bar"], path + ".h_bar")
    if "t_corr" in node:
        fields["t_corr"] = _matrix(node["t_corr"], path + ".t_corr")
    k = _parse_k(node, path)
    if k is not None:
        fields["k"] = k
    if "normalization_mode" in node:
        fields["normalization"] = str(node["normalization_mode"])
    if "alignment" in node:
        fields["alignment"] = tuple(str(a) for a in _as_list(node["alignment"]))
    if "include_large_k" in node:
        fields["include_large_k"] = bool(node["include_large_k"])
    fields = {key: (tuple(tuple(r) for r in v) if key in ("h_bar", "t_corr") else v)
              for key, v in fields.items()}
    cfg = ChannelConfig(**fields)
    if cfg.normalization not in ("strict", "lenient"):
        raise ValidationError(_ctx(path + ".normalization_mode", "must be 'strict' or 'lenient'"))
    if not cfg.k or any(not math.isfinite(v) or v < 0.0 for v in cfg.k):
        raise ValidationError(_ctx(path + ".k", "Rician factors must be finite and >= 0"))
    bad = [a for a in cfg.alignment if a not in ("given", "leading", "least")]
    if bad:
        raise ValidationError(_ctx(path + ".alignment", f"unknown alignment {bad}"))
    try:
        for kv in cfg.k:
            cfg.spec(kv)
    except WishartOutageError as exc:
        raise ValidationError(_ctx(path, str(exc))) from exc
    return cfg


def _parse_ensembles(node, path: str) -> tuple:
    items = node if isinstance(node, list) else [node]
    out = []
    for i, item in enumerate(items):
        p = f"{path}[{i}]" if isinstance(node, list) else path
        _check_keys(item, {"name", "upsilon", "psi"}, p)
        for key in ("upsilon", "psi"):
            if key not in item:
                raise ValidationError(_ctx(p, f"missing field '{key}'"))
        ens = EnsembleConfig(str(item.get("name", f"ensemble{i}")), _matrix(item["upsilon"], p + ".upsilon"),
                             _matrix(item["psi"], p + ".psi"))
        try:
            params_from_gaussian(np.array(ens.upsilon), cm.Herm2.from_array(np.array(ens.psi)))
        except WishartOutageError as exc:
            raise ValidationError(_ctx(p, str(exc))) from exc
        out.append(ens)
    names = [e.name for e in out]
    if len(set(names)) != len(names):
        raise ValidationError(_ctx(path, "ensemble names must be unique"))
    return tuple(out)


def _parse_series(node, path: str) -> SeriesConfig:
    _check_keys(node, {"k_max", "rel_tol", "auto_extend"}, path)
    kw = {}
    if "k_max" in node:
        kw["k_max"] = int(_number(node["k_max"], path + ".k_max"))
    if "rel_tol" in node:
        kw["rel_tol"] = _number(node["rel_tol"], path + ".rel_tol")
    if "auto_extend" in node:
        kw["auto_extend"] = bool(node["auto_extend"])
    try:
        return SeriesConfig(**kw)
    except WishartOutageError as exc:
        raise ValidationError(_ctx(path, str(exc))) from exc


def _parse_mc(node, path: str) -> McConfig:
    _check_keys(node, {"n_samples", "seed", "n_workers", "quantiles"}, path)
    kw = {}
    for key in ("n_samples", "seed", "n_workers"):
        if key in node:
            v = node[key]
            if isinstance(v, float) and v.is_integer():
                v = int(v)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ParseError(_ctx(f"{path}.{key}", "expected an integer"))
            kw[key] = v
    try:
        return McConfig(**kw)
    except WishartOutageError as exc:
        raise ValidationError(_ctx(path, str(exc))) from exc


def _load_yaml(text: str, source: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"{source}: malformed YAML{where}: {getattr(exc, 'problem', exc)}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be a mapping")
    return doc


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def paper_defaults(command: str) -> dict:
    """Config tree reproducing the reference figure for ``command``."""
    h_bar = _matrix_doc(tuple(map(tuple, presets.reference_h_bar())))
    t_corr = _matrix_doc(tuple(map(tuple, presets.PSI_REF.to_array())))
    ensembles = [{"name": name, "upsilon": _matrix_doc(tuple(map(tuple, u))),
                  "psi": _matrix_doc(tuple(map(tuple, p.to_array())))}
                 for name, (u, p) in presets.figure1_ensembles().items()]
    doc = {
        "channel": {"h_bar": h_bar, "t_corr": t_corr, "k": list(presets.FIG2_K),
                    "normalization_mode": "strict"},
        "ensemble": ensembles,
        "grid": dict(presets.FIG1_GRID),
        "mc": {"seed": presets.DEFAULT_SEED},
    }
    if command == "outage":
        doc["grid"] = dict(presets.FIG2_GRID)
    elif command == "largek":
        doc["panels"] = [
            {"name": "fig3a", "grid": dict(presets.FIG3A_GRID),
             "channel": {"k_db": list(presets.FIG3A_K_DB), "alignment": ["given"],
                         "include_large_k": True}},
            {"name": "fig3b", "grid": dict(presets.FIG3B_GRID),
             "channel": {"k_db": [presets.FIG3B_K_DB], "alignment": ["leading", "least", "given"],
                         "include_large_k": True}},
        ]
    elif command == "prop1":
        doc["channel"]["k"] = list(presets.PROP1_K)
        doc["mc"]["n_samples"] = 100_000
    return doc


def parse_config(document: str | dict | None, command: str, *, source: str = "<config>",
                 paper: bool = False, overrides: dict | None = None,
                 input_path: str | None = None, output: str | None = None) -> RunConfig:
    """Validate a YAML document (or an already-loaded tree) into a :class:`RunConfig`.

    Raises
    ------
    ParseError
        For malformed YAML or wrongly typed fields; the message names the field.
    ValidationError
        For well-formed documents that violate an invariant.
    """
    if command not in COMMANDS:
        raise ValidationError(f"unknown command {command!r}")
    if isinstance(document, str):
        doc = _load_yaml(document, source)
    else:
        doc = copy.deepcopy(document or {})
    if "command" in doc and doc["command"] != command:
        raise ValidationError(f"config says command {doc['command']!r} but {command!r} was requested")
    doc.pop("command", None)
    if paper:
        doc = _merge(paper_defaults(command), doc)
    doc = _merge(doc, overrides or {})
    _check_keys(doc, {"channel", "ensemble", "grid", "series", "mc", "panels", "quadcheck",
                      "prop1", "k_db"}, "")

    k_db = doc.pop("k_db", None)
    if k_db is not None:
        k_db = _number(k_db, "k_db")
        if "channel" in doc:
            doc["channel"].pop("k", None)
            doc["channel"]["k_db"] = k_db

    channel = _parse_channel(doc["channel"], "channel") if "channel" in doc else None
    ensembles = _parse_ensembles(doc["ensemble"], "ensemble") if "ensemble" in doc else ()
    grid = _parse_grid(doc["grid"], "grid") if "grid" in doc else GridSpec(**presets.FIG1_GRID)
    series = _parse_series(doc.get("series", {}), "series")
    mc = _parse_mc(doc.get("mc", {}), "mc")
    quantiles = 99
    if "quantiles" in doc.get("mc", {}):
        quantiles = int(_number(doc["mc"]["quantiles"], "mc.quantiles"))
        if quantiles < 1:
            raise ValidationError("mc.quantiles must be >= 1")

    panels = []
    for i, node in enumerate(doc.get("panels", []) or []):
        p = f"panels[{i}]"
        _check_keys(node, {"name", "grid", "channel"}, p)
        if "name" not in node:
            raise ValidationError(_ctx(p, "missing field 'name'"))
        pg = _parse_grid(node["grid"], p + ".grid") if "grid" in node else grid
        pc = channel
        if "channel" in node:
            if channel is None:
                raise ValidationError(_ctx(p, "panel channel overrides need a top-level channel"))
            pc = _parse_channel(node["channel"], p + ".channel", base=channel)
        panels.append(Panel(str(node["name"]), pg, pc))

    qc = doc.get("quadcheck", {})
    _check_keys(qc, {"k", "x"}, "quadcheck")
    qk = tuple(int(_number(v, "quadcheck.k")) for v in _as_list(qc.get("k", presets.QUADCHECK_K)))
    qx = tuple(_number(v, "quadcheck.x") for v in _as_list(qc.get("x", presets.QUADCHECK_X)))
    pk = doc.get("prop1", {})
    _check_keys(pk, {"k"}, "prop1")
    prop1_k = tuple(_number(v, "prop1.k") for v in _as_list(pk["k"])) if "k" in pk else (
        channel.k if channel is not None and command == "prop1" else presets.PROP1_K)

    cfg = RunConfig(command, input_path, output, grid, series, mc, k_db, channel, ensembles,
                    tuple(panels), qk, qx, prop1_k, quantiles)
    _require_sections(cfg)
    return cfg


def _require_sections(cfg: RunConfig):
    needs_channel = cfg.command in ("outage", "largek", "prop1")
    if needs_channel and cfg.channel is None:
        raise ValidationError(f"command {cfg.command!r} needs a 'channel' section (t_corr, h_bar)")
    if cfg.command in ("cdf", "mc") and not cfg.ensembles:
        raise ValidationError(f"command {cfg.command!r} needs an 'ensemble' section (upsilon, psi)")
    if cfg.command == "largek":
        for panel in cfg.panels or (Panel(cfg.command, cfg.grid, cfg.channel),):
            if any(k <= 0.0 for k in panel.channel.k):
                raise ValidationError("largek needs every Rician factor > 0")


def config_to_document(cfg: RunConfig) -> dict:
    """Inverse of :func:`parse_config` on the fields it reads."""
    def channel_doc(ch: ChannelConfig) -> dict:
        return {"h_bar": _matrix_doc(ch.h_bar), "t_corr": _matrix_doc(ch.t_corr), "k": list(ch.k),
                "normalization_mode": ch.normalization, "alignment": list(ch.alignment),
                "include_large_k": ch.include_large_k}

    doc = {
        "grid": asdict(cfg.grid),
        "series": {"k_max": cfg.series.k_max, "rel_tol": cfg.series.rel_tol,
                   "auto_extend": cfg.series.auto_extend},
        "mc": {"n_samples": cfg.mc.n_samples, "seed": cfg.mc.seed, "n_workers": cfg.mc.n_workers,
               "quantiles": cfg.quantiles},
        "quadcheck": {"k": list(cfg.quadcheck_k), "x": list(cfg.quadcheck_x)},
        "prop1": {"k": list(cfg.prop1_k)},
    }
    if cfg.channel is not None:
        doc["channel"] = channel_doc(cfg.channel)
    if cfg.k_db is not None:
        doc["k_db"] = cfg.k_db
    if cfg.ensembles:
        doc["ensemble"] = [{"name": e.name, "upsilon": _matrix_doc(e.upsilon), "psi": _matrix_doc(e.psi)}
                           for e in cfg.ensembles]
    if cfg.panels:
        doc["panels"] = [{"name": p.name, "grid": asdict(p.grid), "channel": channel_doc(p.channel)}
                         if p.channel is not None else {"name": p.name, "grid": asdict(p.grid)}
                         for p in cfg.panels]
    return doc


def serialize_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(config_to_document(cfg), sort_keys=True)


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


@dataclass
class Table:
    label: str
    kind: str
    columns: tuple
    rows: list

    def render(self) -> str:
        lines = [f"# wishart-outage {self.kind} v{CSV_VERSION}: {self.label}", ",".join(self.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def atomic_write(path: Path, text: str):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_tables(tables: list[Table], out: str | None):
    if out is None:
        for t in tables:
            sys.stdout.write(t.render())
        return
    if len(tables) == 1:
        atomic_write(Path(out), tables[0].render())
        return
    for t in tables:
        atomic_write(Path(out) / f"{t.label}.csv", t.render())


# ---------------------------------------------------------------------------
# commands


def _k_label(k: float) -> str:
    db = 10.0 * math.log10(k) if k > 0 else None
    if db is not None and abs(db - round(db)) < 1e-9 and k >= 10:
        return f"k{int(round(db))}dB"
    return "k" + format(k, "g").replace(".", "p")


def _panels(cfg: RunConfig) -> tuple:
    return cfg.panels or (Panel(cfg.command, cfg.grid, cfg.channel),)


def _curve_rows(points, with_large_k: bool):
    return [(p.x, p.value, p.large_k_value if with_large_k else None, p.terms_used,
             p.last_term_mag, p.converged) for p in points]


def run_cdf(cfg: RunConfig) -> list[Table]:
    tables = []
    for panel in _panels(cfg):
        xs = panel.grid.values()
        for ens in cfg.ensembles:
            params = params_from_gaussian(np.array(ens.upsilon), cm.Herm2.from_array(np.array(ens.psi)))
            if series_terms_estimate(params) <= SERIES_AUTO_KMAX:
                res = cdf_max_eig_curve(params, xs, cfg.series)
                rows = [(x, r.value, None, r.terms_used, r.last_term_mag, r.converged)
                        for x, r in zip(xs, res)]
            else:
                rows = [(x, cdf_max_eig_direct(params, float(x)), None, 0, 0.0, True) for x in xs]
            label = ens.name if len(_panels(cfg)) == 1 else f"{panel.name}_{ens.name}"
            tables.append(Table(label, "curve", CURVE_COLUMNS, rows))
    return tables


def _channel_tables(cfg: RunConfig, force_large_k: bool) -> list[Table]:
    tables = []
    panels = _panels(cfg)
    for panel in panels:
        ch_cfg = panel.channel
        for k in ch_cfg.k:
            for alignment in ch_cfg.alignment:
                ch = aligned_channel(ch_cfg.spec(k), alignment)
                with_lk = (force_large_k or ch_cfg.include_large_k) and k > 0
                pts = outage_sweep(ch, panel.grid.values(), cfg.series, include_large_k=with_lk)
                parts = [panel.name] if len(panels) > 1 else []
                parts.append(_k_label(k))
                if len(ch_cfg.alignment) > 1 or alignment != "given":
                    parts.append(alignment)
                tables.append(Table("_".join(parts), "curve", CURVE_COLUMNS,
                                    _curve_rows(pts, with_lk)))
    return tables


def run_outage(cfg: RunConfig) -> list[Table]:
    return _channel_tables(cfg, force_large_k=False)


def run_largek(cfg: RunConfig) -> list[Table]:
    return _channel_tables(cfg, force_large_k=True)


def run_mc(cfg: RunConfig) -> list[Table]:
    q = np.arange(1, cfg.quantiles + 1) / (cfg.quantiles + 1)
    tables = []
    for ens in cfg.ensembles:
        ecdf = sample_max_eig(np.array(ens.upsilon), cm.Herm2.from_array(np.array(ens.psi)), cfg.mc)
        rows = list(zip(q, ecdf.quantile(q)))
        tables.append(Table(ens.name, "mc", ("q", "quantile"), rows))
    return tables


def _quadcheck_sets(cfg: RunConfig) -> dict:
    sets = {"reference": params_from_gaussian(presets.UPSILON_REF, presets.PSI_REF)}
    from .maxeig_cdf import WishartParams

    sets["symmetric"] = WishartParams(0.5, 2.0, 1.0, 1.0, 0.5, 0.5)
    return sets


def quadcheck_rows(cfg: RunConfig) -> list:
    from .maxeig_cdf import series_Qk

    rows = []
    for name, params in _quadcheck_sets(cfg).items():
        for k in cfg.quadcheck_k:
            for x in cfg.quadcheck_x:
                s = series_Qk(k, x, params)
                q = quad_Qk(k, x, params, QuadConfig(rel_tol=1e-8))
                rows.append((name, k, x, s, q, abs(s - q) / q))
    return rows


def run_quadcheck(cfg: RunConfig) -> list[Table]:
    return [Table("quadcheck", "quadcheck", ("set", "k", "x", "series", "quadrature", "rel_residual"),
                  [tuple(r) for r in quadcheck_rows(cfg)])]


def run_prop1(cfg: RunConfig) -> list[Table]:
    ch = cfg.channel.spec(cfg.prop1_k[0])
    rows = prop1_experiment(ch, cfg.prop1_k, cfg.mc)
    return [Table("prop1", "prop1", ("K", "ks_distance"), rows)]


def run_validate(cfg: RunConfig) -> tuple[list[dict], bool]:
    from .validation import run_suite

    checks = run_suite(cfg.mc, cfg.series)
    return checks, all(c["passed"] for c in checks)


RUNNERS = {
    "cdf": run_cdf,
    "outage": run_outage,
    "largek": run_largek,
    "mc": run_mc,
    "quadcheck": run_quadcheck,
    "prop1": run_prop1,
}


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; returns the process exit status."""
    if cfg.command == "validate":
        checks, ok = run_validate(cfg)
        width = max(len(c["name"]) for c in checks)
        for c in checks:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"{status}  {c['name']:<{width}}  value={c['value']:.6g}  tol={c['tolerance']:.3g}")
        summary = {"version": CSV_VERSION, "passed": ok, "checks": checks}
        if cfg.output:
            atomic_write(Path(cfg.output), json.dumps(summary, indent=2, sort_keys=True) + "\n")
        return 0 if ok else 1
    write_tables(RUNNERS[cfg.command](cfg), cfg.output)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wishart-outage",
                                 description="Largest-eigenvalue CDF and MIMO-MRC outage tools.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="YAML config file")
    ap.add_argument("--out", help="output file, or directory when several tables are produced")
    ap.add_argument("--seed", type=int, help="Monte-Carlo seed (overrides mc.seed)")
    ap.add_argument("--k-db", type=float, help="Rician factor in dB (overrides channel.k)")
    ap.add_argument("--kmax", type=int, help="series k_max (overrides series.k_max)")
    ap.add_argument("--tol", type=float, help="series rel_tol (overrides series.rel_tol)")
    ap.add_argument("--paper-defaults", action="store_true",
                    help="start from the reference matrices and figure grids")
    return ap


def _error_line(exc: BaseException) -> str:
    return "error: " + json.dumps({"type": type(exc).__name__, "message": str(exc)})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides: dict = {}
    if args.seed is not None:
        overrides.setdefault("mc", {})["seed"] = args.seed
    if args.kmax is not None:
        overrides.setdefault("series", {})["k_max"] = args.kmax
    if args.tol is not None:
        overrides.setdefault("series", {})["rel_tol"] = args.tol
    if args.k_db is not None:
        overrides["k_db"] = args.k_db
    try:
        text = None
        if args.config:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise ParseError(f"{args.config}: {exc.strerror}") from exc
        if text is None and not args.paper_defaults:
            raise ValidationError("give --config, --paper-defaults, or both")
        cfg = parse_config(text, args.command, source=args.config or "<defaults>",
                           paper=args.paper_defaults,
                           overrides=overrides, input_path=args.config, output=args.out)
        return run(cfg)
    except (ParseError, ValidationError) as exc:
        print(_error_line(exc), file=sys.stderr)
        return 2
    except (WishartOutageError, ValueError, ArithmeticError, OSError) as exc:
        print(_error_line(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
