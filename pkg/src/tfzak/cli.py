"""Command line entry point: transforms, norms, verification runs and plot data.

Every subcommand reads an optional JSON configuration document; flags
override document keys. Output goes to ``--out``, else ``$TFZAK_OUT``, else
the document's ``out`` key, else ``./tfzak-out``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import math
import os
import re
import shutil
import sys
import tempfile
import time
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import CHECKS, CheckResult, SignalFamily, set_threads
from .fields import Axis, SampledField, Window, field_to_csv, sample, write_field
from .geometry import OrderedBasis
from .norms import NormSpec, evaluate
from .transforms import finite_zak, fourier_coefficients, quasi_periodicity_defect, stft, zak

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
TRANSFORM_KINDS = ("zak", "stft", "finite-zak", "coefficients")
EXPERIMENT_KINDS = TRANSFORM_KINDS + ("norm",) + tuple(CHECKS) + ("all",)
DEFAULT_OUT = "tfzak-out"


class ConfigError(ValueError):
    """Malformed configuration or arguments (exit code 2)."""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    """One run described by a single JSON document.

    ``exponents`` maps a norm-spec field (``exponents``, ``local`` or
    ``second``) to a list of values to sweep. ``weights`` holds named weight
    documents that a norm spec may reference by name. ``options`` carries
    transform parameters (``L``, ``M``, ``width``, ``modulation``, ``box``,
    ``step``, ``xi_per_cell``, ``x_cells``, ``xi_cells``, ``cutoff``).
    """

    kind: str
    basis: list | None = None
    exponents: dict = field(default_factory=dict)
    weights: dict = field(default_factory=dict)
    family: dict | None = None
    resolution: list = field(default_factory=lambda: [1 / 16, 1 / 32])
    out: str | None = None
    seed: int = 0
    quick: bool = False
    signal: str | None = None
    norm: dict | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"key 'kind': unknown experiment kind {self.kind!r}; expected one of {', '.join(EXPERIMENT_KINDS)}")
        if len(self.resolution) != 2 or not all(float(s) > 0 for s in self.resolution):
            raise ConfigError("key 'resolution': expected two positive steps [coarse, fine]")
        self.resolution = [float(s) for s in self.resolution]
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"key 'seed': expected an integer, got {self.seed!r}")
        for name in ("exponents", "weights", "options"):
            if not isinstance(getattr(self, name), dict):
                raise ConfigError(f"key {name!r}: expected an object")
        bad = set(self.exponents) - {"exponents", "local", "second"}
        if bad:
            raise ConfigError(f"key 'exponents': unknown sweep targets {sorted(bad)}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, doc: dict, text: str | None = None) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        allowed = {f.name for f in dc_fields(cls)}
        for key in doc:
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r}{_line_of(text, key)}")
        if "kind" not in doc:
            raise ConfigError("missing required key 'kind'")
        try:
            return cls(**doc)
        except ConfigError as exc:
            key = re.match(r"key '(\w+)'", str(exc))
            raise ConfigError(f"{exc}{_line_of(text, key.group(1)) if key else ''}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str, source: str = "<config>") -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        try:
            return cls.from_dict(doc, text)
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")).hexdigest()


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    return f" (line {text.count(chr(10), 0, m.start()) + 1})" if m else ""


@dataclass
class RunManifest:
    """Provenance of one run: config hash, version, timestamps, verdicts, artifacts."""

    command: str
    config_hash: str
    version: str
    started: str
    finished: str
    verdicts: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}

    @classmethod
    def from_dict(cls, doc: dict) -> "RunManifest":
        unknown = set(doc) - {f.name for f in dc_fields(cls)}
        if unknown:
            raise ConfigError(f"unknown manifest keys {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "RunManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from None
        return cls.from_dict(doc)


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%S%z")


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, sort_keys=True, default=_json_default)
    return "" if v is None else str(v)


def rows_to_csv(rows: list[dict]) -> str:
    """Long-format CSV with the union of row keys in first-seen order; floats in repr form."""
    cols: list[str] = []
    for row in rows:
        cols.extend(k for k in row if k not in cols)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in cols])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (set, tuple)):
        return list(o)
    return str(o)


def _clean(o):
    """Non-finite floats become strings so the JSON stays standard."""
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)):
        o = float(o)
        return o if math.isfinite(o) else repr(o)
    if isinstance(o, np.integer):
        return int(o)
    return o


def dumps(doc) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2, default=_json_default) + "\n"


def commit_files(outdir: Path, files: dict) -> list[str]:
    """Write all files at once: stage in a temporary directory, then move into place.

    Values are ``str``, ``bytes`` or callables taking the staging path.
    """
    outdir.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".stage-", dir=outdir))
    try:
        for name, payload in files.items():
            target = stage / name
            if callable(payload):
                payload(target)
            elif isinstance(payload, bytes):
                target.write_bytes(payload)
            else:
                target.write_text(payload, encoding="utf-8")
        for name in files:
            os.replace(stage / name, outdir / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return sorted(files)


def _outdir(args, cfg: ExperimentConfig) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    if os.environ.get("TFZAK_OUT"):
        return Path(os.environ["TFZAK_OUT"])
    return Path(cfg.out or DEFAULT_OUT)


def load_config(args, kind: str) -> ExperimentConfig:
    """Configuration document (if any) with command-line flags applied on top."""
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        cfg = ExperimentConfig.from_json(text, str(path))
    else:
        cfg = ExperimentConfig(kind)
    doc = cfg.to_dict()
    if kind and (not getattr(args, "config", None) or getattr(args, "kind_given", True)):
        doc["kind"] = kind
    for key in ("seed", "signal"):
        val = getattr(args, key, None)
        if val is not None:
            doc[key] = val
    if getattr(args, "quick", False):
        doc["quick"] = True
    opts = dict(doc["options"])
    for key in ("L", "M", "width", "modulation", "step", "xi_per_cell", "cutoff"):
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    if getattr(args, "box", None) is not None:
        opts["box"] = list(args.box)
    doc["options"] = opts
    if getattr(args, "spec", None):
        try:
            doc["norm"] = json.loads(args.spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--spec: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return ExperimentConfig.from_dict(doc)


# ---------------------------------------------------------------------------
# built-in signals


def _opt(cfg: ExperimentConfig, key: str, default):
    return cfg.options.get(key, default)


def finite_signal(name: str, L: int, seed: int) -> np.ndarray:
    """Length-``L`` test vectors for the finite Zak transform."""
    if name == "delta":
        f = np.zeros(L, dtype=complex)
        f[0] = 1.0
        return f
    if name == "ones":
        return np.ones(L, dtype=complex)
    if name == "random":
        rng = np.random.default_rng(seed)
        return rng.normal(size=L) + 1j * rng.normal(size=L)
    if name == "gaussian":
        n = np.arange(L) - L // 2
        return np.exp(-math.pi * n**2 / L).astype(complex)
    raise ConfigError(f"unknown finite signal {name!r}; expected delta, ones, random or gaussian")


def line_signal(name: str, cfg: ExperimentConfig, d: int = 1):
    """Continuous test functions on ``R^d`` by name."""
    width = float(_opt(cfg, "width", 1.0))
    mod = float(_opt(cfg, "modulation", 0.0))
    if name == "gaussian":
        return Window(width, (0.0,) * d, (mod,) * d)
    if name == "indicator":
        def ind(*x):
            out = np.ones(np.broadcast(*x).shape)
            for c in x:
                out = out * ((c >= 0) & (c < 1))
            return out
        return ind
    if name == "hermite":
        order = int(_opt(cfg, "order", 1))
        c = np.zeros(order + 1)
        c[-1] = 1.0
        return lambda x: np.polynomial.hermite.hermval(np.asarray(x) / width, c) * np.exp(-np.asarray(x) ** 2 / (2 * width**2))
    raise ConfigError(f"unknown signal {name!r}; expected gaussian, indicator or hermite")


# ---------------------------------------------------------------------------
# transform


def run_transform(cfg: ExperimentConfig) -> tuple[SampledField, str, dict]:
    """Compute the requested transform; returns the field, its CSV text and provenance."""
    kind = cfg.kind
    sig = cfg.signal or ("delta" if kind == "finite-zak" else "gaussian")
    if kind == "finite-zak":
        L = int(_opt(cfg, "L", 16))
        M = int(_opt(cfg, "M", 4))
        if L < 1 or M < 1 or L % M:
            raise ConfigError(f"option 'M': {M} must divide the signal length L={L}")
        N = L // M
        Z = finite_zak(finite_signal(sig, L, cfg.seed), M, N)
        fld = SampledField((Axis(0, 1, M, "torus"), Axis(0, 1, N, "torus")), Z, None,
                           {"transform": "finite-zak", "L": L, "M": M, "N": N, "signal": sig})
        return fld, field_to_csv(fld, names=("n", "k")), fld.meta
    if kind == "coefficients":
        cutoff = int(_opt(cfg, "cutoff", 8))
        period = float(_opt(cfg, "period", 2 * math.pi))
        n = int(_opt(cfg, "samples", 128))
        freqs = _opt(cfg, "frequencies", [0, 1, 3])
        coefs = _opt(cfg, "coefficients", [1.0] * len(freqs))
        if len(freqs) != len(coefs):
            raise ConfigError("options 'frequencies' and 'coefficients' differ in length")
        w = 2 * math.pi / period
        expr = lambda x: sum(complex(c) * np.exp(1j * m * w * x) for m, c in zip(freqs, coefs))
        E = OrderedBasis([[period]])
        f = sample(expr, (0.0, period), period / n, kind="torus")
        c = fourier_coefficients(f, E, cutoff)
        fld = SampledField((Axis(-cutoff, 1, 2 * cutoff + 1),), c.table, None,
                           {"transform": "coefficients", "period": period, "cutoff": cutoff, "signal": "trig"})
        return fld, field_to_csv(fld, names=("m",)), fld.meta
    lo, hi = _opt(cfg, "box", [-16.0, 16.0] if kind == "zak" else [-12.0, 12.0])
    step = float(_opt(cfg, "step", 1 / 32 if kind == "zak" else 1 / 8))
    f = sample(line_signal(sig, cfg), (float(lo), float(hi)), step)
    if kind == "zak":
        a = float(cfg.basis[0][0]) if cfg.basis else 1.0
        E = OrderedBasis([[a]])
        Z = zak(f, E, int(_opt(cfg, "xi_per_cell", 64)), int(_opt(cfg, "x_cells", 2)), int(_opt(cfg, "xi_cells", 2)))
        defect = quasi_periodicity_defect(Z)
        meta = dict(Z.field.meta, transform="zak", signal=sig, basis=E.to_dict(), truncation=Z.truncation,
                    quasi_periodicity_defect=defect)
        fld = SampledField(Z.field.axes, Z.values, Z.field.basis, meta)
        return fld, field_to_csv(fld, names=("u", "v")), meta
    if kind == "stft":
        phi = Window(float(_opt(cfg, "window", 1.0)))
        xr = _opt(cfg, "x_range", [-5.0, 5.0])
        V = stft(f, phi, x_range=tuple(xr))
        meta = dict(V.meta, transform="stft", signal=sig, window=phi.to_dict())
        V = SampledField(V.axes, V.values, V.basis, meta)
        return V, field_to_csv(V, names=("x", "xi")), meta
    raise ConfigError(f"kind {kind!r} is not a transform; expected one of {', '.join(TRANSFORM_KINDS)}")


def cmd_transform(args) -> int:
    cfg = load_config(args, args.kind)
    try:
        fld, text, meta = run_transform(cfg)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{cfg.kind}: {exc}") from None
    out = _outdir(args, cfg)
    stem = f"transform-{cfg.kind}"
    started = _now()
    files = {
        f"{stem}.tfzk": lambda p: write_field(p, fld, kind=cfg.kind),
        f"{stem}.csv": text,
        f"{stem}.json": dumps({"config": cfg.to_dict(), "meta": meta}),
    }
    man = RunManifest("transform", cfg.digest(), __version__, started, _now(), {}, sorted(files), cfg.to_dict())
    files["manifest.json"] = dumps(man.to_dict())
    commit_files(out, files)
    print(f"wrote {out / (stem + '.tfzk')} and {out / (stem + '.csv')}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# norm


def _norm_specs(cfg: ExperimentConfig) -> list[NormSpec]:
    if cfg.norm is None:
        raise ConfigError("no norm spec given: use --spec or the 'norm' key")
    base = dict(cfg.norm)
    if isinstance(base.get("weight"), str):
        name = base["weight"]
        if name not in cfg.weights:
            raise ConfigError(f"norm weight {name!r} is not defined under 'weights'")
        base["weight"] = cfg.weights[name]
    if cfg.basis is not None and "basis" not in base:
        base["basis"] = OrderedBasis(np.asarray(cfg.basis, dtype=float)).to_dict()
    keys = sorted(cfg.exponents)
    grids = [cfg.exponents[k] for k in keys]
    specs = []
    for combo in itertools.product(*grids) if keys else [()]:
        doc = dict(base, **dict(zip(keys, combo)))
        try:
            specs.append(NormSpec.from_dict(doc))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"norm spec: {_explain(exc)}") from None
    return specs


def _explain(exc: Exception) -> str:
    msg = str(exc).strip("'\"")
    if "arity" in msg:
        msg += " (a mixed norm takes one exponent per axis, or a single exponent shared by all axes)"
    return msg


def _spec_dim(spec: NormSpec) -> int:
    if spec.basis is not None:
        return spec.basis.dim
    if spec.family in ("mixed-lebesgue", "wiener") and spec.transform is None:
        for vec in (spec.exponents, spec.local):
            if vec is not None and len(vec) > 1:
                return len(vec)
    return 1


def _norm_signals(cfg: ExperimentConfig, d: int):
    """(id, function) pairs: a named built-in signal or a signal family."""
    if cfg.family is not None:
        if d != 1:
            raise ConfigError("signal families are one-dimensional")
        try:
            fam = SignalFamily.from_dict(cfg.family)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"key 'family': {exc}") from None
        return [(s.id, s) for s in fam.signals()]
    name = cfg.signal or "gaussian"
    return [(name, line_signal(name, cfg, d))]


def run_norm(cfg: ExperimentConfig) -> list[dict]:
    specs = _norm_specs(cfg)
    rows = []
    for spec in specs:
        d = _spec_dim(spec)
        lo, hi = _opt(cfg, "box", [-12.0, 12.0] if d == 1 else [-2.0, 3.0])
        for sid, func in _norm_signals(cfg, d):
            for res, step in zip(("coarse", "fine"), cfg.resolution):
                f = sample(func, ((float(lo),) * d, (float(hi),) * d) if d > 1 else (float(lo), float(hi)), step)
                try:
                    val = evaluate(spec, f)
                except ValueError as exc:
                    raise ConfigError(f"norm {spec.label()!r}: {_explain(exc)}") from None
                meta = val.meta
                rows.append({
                    "signal": sid, "spec": spec.label(), "resolution": res, "step": step,
                    "value": float(val.value),
                    "inf-handled": meta.get("inf-handled", ""),
                    "spec_json": json.dumps(spec.to_dict(), sort_keys=True),
                })
    return rows


def cmd_norm(args) -> int:
    cfg = load_config(args, "norm")
    rows = run_norm(cfg)
    out = _outdir(args, cfg)
    started = _now()
    files = {"norms.csv": rows_to_csv(rows)}
    man = RunManifest("norm", cfg.digest(), __version__, started, _now(), {}, sorted(files), cfg.to_dict())
    files["manifest.json"] = dumps(man.to_dict())
    commit_files(out, files)
    for row in rows:
        flag = f"  inf-handled: {row['inf-handled']}" if row["inf-handled"] else ""
        print(f"{row['signal']}  {row['spec']}  {row['resolution']}  {row['value']!r}{flag}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def run_checks(names, seed: int = 0, quick: bool = False, plant_defect: float | None = None) -> list[CheckResult]:
    results = []
    for name in names:
        try:
            res = CHECKS[name](seed=seed, quick=quick, plant_defect=plant_defect)
        except Exception as exc:  # a crashing check is a failed check
            res = CheckResult(name, False, {}, [], [f"raised {type(exc).__name__}: {exc}"], {})
        res.name = name
        results.append(res)
    return results


def cmd_verify(args) -> int:
    kind = args.kind or "all"
    args.kind_given = args.kind is not None
    if kind != "all" and kind not in CHECKS:
        raise ConfigError(f"unknown check {kind!r}; expected one of all, {', '.join(CHECKS)}")
    cfg = load_config(args, kind)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        set_threads(args.threads)
    if cfg.kind != "all" and cfg.kind not in CHECKS:
        raise ConfigError(f"key 'kind': {cfg.kind!r} is not a verification check")
    names = list(CHECKS) if cfg.kind == "all" else [cfg.kind]
    started = _now()
    results = run_checks(names, cfg.seed, cfg.quick, args.plant_defect)
    files = {}
    for res in results:
        files[f"{res.name}.csv"] = rows_to_csv(res.rows)
        files[f"{res.name}.json"] = dumps(res.summary())
    verdicts = {res.name: res.verdict for res in results}
    files["summary.json"] = dumps({"seed": cfg.seed, "quick": cfg.quick, "plant_defect": args.plant_defect,
                                   "verdicts": verdicts})
    out = _outdir(args, cfg)
    man = RunManifest("verify", cfg.digest(), __version__, started, _now(), verdicts, sorted(files), cfg.to_dict())
    files["manifest.json"] = dumps(man.to_dict())
    commit_files(out, files)
    for res in results:
        print(f"{res.verdict}  {res.name}")
        for msg in res.failures:
            print(f"    {msg}")
    failed = [res.name for res in results if not res.passed]
    if failed:
        print(f"failing checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# report


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.=-]+", "_", text).strip("_")


def _read_rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def run_report(run_dirs) -> dict[str, str]:
    """Tidy long-format plot data from verification runs.

    One ``curve-<check>-<pair>.csv`` per compared norm pair (ratio against
    signal parameter at both resolutions), ``envelope-<check>.csv`` for decay
    envelopes and ``verdicts.csv`` for all checks.
    """
    if not run_dirs:
        raise ConfigError("no run directories given")
    curves: dict[str, list] = {}
    envelopes: dict[str, list] = {}
    verdicts = []
    for run in sorted(Path(r) for r in run_dirs):
        path = run / "manifest.json" if run.is_dir() else run
        if not path.is_file():
            raise ConfigError(f"missing manifest: {path}")
        man = RunManifest.load(path)
        base = path.parent
        for check, verdict in sorted(man.verdicts.items()):
            verdicts.append({"run": base.name, "check": check, "verdict": verdict})
            name = f"{check}.csv"
            if name not in man.artifacts or not (base / name).is_file():
                continue
            for row in _read_rows(base / name):
                if row.get("ratio") not in (None, "") and row.get("report"):
                    key = f"curve-{_slug(check)}-{_slug(row['report'])}.csv"
                    curves.setdefault(key, []).append({
                        "run": base.name, "check": check, "pair": row["report"], "parameter": row.get("signal", ""),
                        "resolution": row.get("resolution", ""), "norm_a": row.get("norm_a", ""),
                        "norm_b": row.get("norm_b", ""), "ratio": row["ratio"],
                    })
                elif row.get("kind") == "envelope":
                    envelopes.setdefault(f"envelope-{_slug(check)}.csv", []).append({
                        "run": base.name, "check": check, "s": row["s"], "sigma": row["sigma"],
                        "rho": row["rho"], "log_abs": row["log_abs"],
                    })
    if not verdicts:
        raise ConfigError("the manifests record no checks")
    files = {"verdicts.csv": rows_to_csv(verdicts)}
    for group in (curves, envelopes):
        for name in sorted(group):
            files[name] = rows_to_csv(group[name])
    return files


def cmd_report(args) -> int:
    files = run_report(args.runs)
    out = Path(args.out) if args.out else Path(os.environ.get("TFZAK_OUT") or DEFAULT_OUT) / "report"
    commit_files(out, files)
    for name in sorted(files):
        print(out / name)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tfzak", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tfzak {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON configuration document")
        sp.add_argument("--out", help="output directory (overrides TFZAK_OUT and the config)")
        sp.add_argument("--seed", type=int)

    t = sub.add_parser("transform", help="compute a transform and write container + CSV")
    common(t)
    t.add_argument("--kind", choices=TRANSFORM_KINDS)
    t.add_argument("--signal")
    t.add_argument("--L", type=int, help="finite signal length")
    t.add_argument("--M", type=int, help="finite Zak rows (must divide L)")
    t.add_argument("--width", type=float, help="Gaussian signal width")
    t.add_argument("--modulation", type=float)
    t.add_argument("--step", type=float, help="sampling step")
    t.add_argument("--box", type=float, nargs=2, metavar=("LO", "HI"))
    t.add_argument("--xi-per-cell", dest="xi_per_cell", type=int)
    t.add_argument("--cutoff", type=int, help="coefficient cutoff")
    t.set_defaults(func=cmd_transform)

    n = sub.add_parser("norm", help="evaluate a norm spec on test signals")
    common(n)
    n.add_argument("--spec", help="norm spec as a JSON object")
    n.add_argument("--signal")
    n.add_argument("--width", type=float)
    n.add_argument("--box", type=float, nargs=2, metavar=("LO", "HI"))
    n.set_defaults(func=cmd_norm)

    v = sub.add_parser("verify", help="run verification checks")
    common(v)
    v.add_argument("kind", nargs="?", help=f"one of all, {', '.join(CHECKS)}")
    v.add_argument("--quick", action="store_true", help="reduced grids and sample counts")
    v.add_argument("--plant-defect", dest="plant_defect", type=float, help="corrupt inputs to exercise failure paths")
    v.add_argument("--threads", type=int, help="worker pool cap")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="tidy plot data from run manifests")
    r.add_argument("runs", nargs="*", help="run directories or manifest files")
    r.add_argument("--out", help="report directory")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "transform":
        args.kind_given = args.kind is not None
        if args.kind is None and not args.config:
            parser.error("transform needs --kind or a --config naming one")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"tfzak {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
